#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vamp/errors.hpp"

namespace vamp {

using Bytes = std::vector<std::uint8_t>;

inline Bytes to_bytes(std::string_view s) {
  return Bytes(s.begin(), s.end());
}

inline std::string to_string(std::span<const std::uint8_t> b) {
  return std::string(b.begin(), b.end());
}

// ---------------------------------------------------------------------------
// Lowercase hex
// ---------------------------------------------------------------------------

inline std::string hex_encode(std::span<const std::uint8_t> data) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (std::uint8_t b : data) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0x0f]);
  }
  return out;
}

inline int hex_nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return -1;  // uppercase is rejected: digest text form is lowercase
}

inline Bytes hex_decode(std::string_view s) {
  if (s.size() % 2 != 0) raise(Errc::malformed_input, "odd-length hex string");
  Bytes out(s.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = hex_nibble(s[2 * i]);
    int lo = hex_nibble(s[2 * i + 1]);
    if (hi < 0 || lo < 0) raise(Errc::malformed_input, "invalid hex digit");
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

// Strict UTF-8 validity: no overlong forms, no surrogates, max U+10FFFF.
inline bool utf8_valid(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    std::size_t len;
    std::uint32_t cp;
    if (c < 0x80) { i += 1; continue; }
    else if ((c & 0xe0) == 0xc0) { len = 2; cp = c & 0x1f; }
    else if ((c & 0xf0) == 0xe0) { len = 3; cp = c & 0x0f; }
    else if ((c & 0xf8) == 0xf0) { len = 4; cp = c & 0x07; }
    else return false;
    if (i + len > s.size()) return false;
    for (std::size_t j = 1; j < len; ++j) {
      unsigned char cc = static_cast<unsigned char>(s[i + j]);
      if ((cc & 0xc0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3f);
    }
    if (len == 2 && cp < 0x80) return false;
    if (len == 3 && cp < 0x800) return false;
    if (len == 4 && cp < 0x10000) return false;
    if (cp > 0x10ffff || (cp >= 0xd800 && cp <= 0xdfff)) return false;
    i += len;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Base64 (RFC 4648, with padding; strict decoder)
// ---------------------------------------------------------------------------

inline std::string base64_encode(std::span<const std::uint8_t> data) {
  static constexpr char tab[] =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((data.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= data.size(); i += 3) {
    std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
    out.push_back(tab[(v >> 18) & 0x3f]);
    out.push_back(tab[(v >> 12) & 0x3f]);
    out.push_back(tab[(v >> 6) & 0x3f]);
    out.push_back(tab[v & 0x3f]);
  }
  if (i + 1 == data.size()) {
    std::uint32_t v = data[i] << 16;
    out.push_back(tab[(v >> 18) & 0x3f]);
    out.push_back(tab[(v >> 12) & 0x3f]);
    out.append("==");
  } else if (i + 2 == data.size()) {
    std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8);
    out.push_back(tab[(v >> 18) & 0x3f]);
    out.push_back(tab[(v >> 12) & 0x3f]);
    out.push_back(tab[(v >> 6) & 0x3f]);
    out.push_back('=');
  }
  return out;
}

inline Bytes base64_decode(std::string_view s) {
  auto val = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  if (s.size() % 4 != 0) raise(Errc::malformed_input, "base64 length not a multiple of 4");
  Bytes out;
  out.reserve(s.size() / 4 * 3);
  for (std::size_t i = 0; i < s.size(); i += 4) {
    int pad = 0;
    std::uint32_t v = 0;
    for (std::size_t j = 0; j < 4; ++j) {
      char c = s[i + j];
      if (c == '=') {
        // padding is only valid in the last group, trailing positions
        if (i + 4 != s.size() || j < 2) raise(Errc::malformed_input, "misplaced base64 padding");
        ++pad;
        v <<= 6;
      } else {
        if (pad > 0) raise(Errc::malformed_input, "data after base64 padding");
        int d = val(c);
        if (d < 0) raise(Errc::malformed_input, "invalid base64 character");
        v = (v << 6) | static_cast<std::uint32_t>(d);
      }
    }
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>(v >> 8));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(v));
    // reject non-zero bits hidden under the padding
    if (pad == 1 && (v & 0xff) != 0) raise(Errc::malformed_input, "non-canonical base64 tail");
    if (pad == 2 && (v & 0xffff) != 0) raise(Errc::malformed_input, "non-canonical base64 tail");
  }
  return out;
}

}  // namespace vamp
