#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>

#include "vamp/canonical.hpp"
#include "vamp/encoding.hpp"
#include "vamp/errors.hpp"

// Field extraction helpers for the schema layer. Every reader rejects unknown
// keys: tolerating them would silently drop data on a parse/serialize round
// trip, and canonical byte stability is the whole point.

namespace vamp::schema {

inline const canonical::Map& require_map(const canonical::Value& v, std::string_view ctx) {
  if (!v.is_map()) raise(Errc::schema_violation, std::string(ctx) + ": expected an object");
  return v.as_map();
}

inline const canonical::Value* find(const canonical::Map& m, std::string_view key) {
  auto it = m.find(std::string(key));
  return it == m.end() ? nullptr : &it->second;
}

inline const canonical::Value& require(const canonical::Map& m, std::string_view key,
                                       std::string_view ctx) {
  const canonical::Value* v = find(m, key);
  if (!v) raise(Errc::schema_violation, std::string(ctx) + ": missing field " + std::string(key));
  return *v;
}

inline const std::string& require_string(const canonical::Map& m, std::string_view key,
                                         std::string_view ctx) {
  const canonical::Value& v = require(m, key, ctx);
  if (!v.is_string())
    raise(Errc::schema_violation, std::string(ctx) + ": field " + std::string(key) + " must be a string");
  return v.as_string();
}

inline std::uint64_t require_uint(const canonical::Map& m, std::string_view key,
                                  std::string_view ctx) {
  const canonical::Value& v = require(m, key, ctx);
  if (!v.is_int())
    raise(Errc::schema_violation, std::string(ctx) + ": field " + std::string(key) + " must be an integer");
  return v.as_uint();
}

inline bool require_bool(const canonical::Map& m, std::string_view key, std::string_view ctx) {
  const canonical::Value& v = require(m, key, ctx);
  if (!v.is_bool())
    raise(Errc::schema_violation, std::string(ctx) + ": field " + std::string(key) + " must be a boolean");
  return v.as_bool();
}

inline const canonical::Array& require_array(const canonical::Map& m, std::string_view key,
                                             std::string_view ctx) {
  const canonical::Value& v = require(m, key, ctx);
  if (!v.is_array())
    raise(Errc::schema_violation, std::string(ctx) + ": field " + std::string(key) + " must be an array");
  return v.as_array();
}

// Byte fields ride as Base64 text in JSON and native byte strings in CBOR.
inline Bytes bytes_from_value(const canonical::Value& v, Format f, std::string_view ctx) {
  if (f == Format::json) {
    if (!v.is_string())
      raise(Errc::schema_violation, std::string(ctx) + ": expected a Base64 string");
    try {
      return base64_decode(v.as_string());
    } catch (const Error&) {
      raise(Errc::schema_violation, std::string(ctx) + ": invalid Base64");
    }
  }
  if (!v.is_bytes())
    raise(Errc::schema_violation, std::string(ctx) + ": expected a byte string");
  return v.as_bytes();
}

inline Bytes require_bytes(const canonical::Map& m, std::string_view key, Format f,
                           std::string_view ctx) {
  return bytes_from_value(require(m, key, ctx), f, ctx);
}

inline canonical::Value bytes_to_value(std::span<const std::uint8_t> b, Format f) {
  if (f == Format::json) return canonical::Value(base64_encode(b));
  return canonical::Value(Bytes(b.begin(), b.end()));
}

inline void reject_unknown_keys(const canonical::Map& m,
                                std::initializer_list<std::string_view> allowed,
                                std::string_view ctx) {
  for (const auto& [k, v] : m) {
    bool known = false;
    for (std::string_view a : allowed)
      if (k == a) { known = true; break; }
    if (!known)
      raise(Errc::schema_violation, std::string(ctx) + ": unknown field " + k);
  }
}

}  // namespace vamp::schema
