#pragma once

#include <cstdint>
#include <cstdio>
#include <ctime>
#include <string>
#include <string_view>

#include "vamp/errors.hpp"

namespace vamp {

// RFC 3339 UTC timestamps at seconds precision with a literal "Z" suffix,
// e.g. "2024-05-17T12:00:00Z". This is the only timestamp shape accepted
// anywhere in the manifest, certificate, and ledger formats.

inline bool is_rfc3339_utc(std::string_view s) {
  if (s.size() != 20) return false;
  static constexpr char pattern[] = "dddd-dd-ddTdd:dd:ddZ";
  for (std::size_t i = 0; i < 20; ++i) {
    char p = pattern[i];
    char c = s[i];
    if (p == 'd') {
      if (c < '0' || c > '9') return false;
    } else if (c != p) {
      return false;
    }
  }
  return true;
}

// Parses to seconds since the Unix epoch. Rejects impossible calendar dates.
inline std::int64_t parse_rfc3339_utc(std::string_view s) {
  if (!is_rfc3339_utc(s)) raise(Errc::malformed_input, "bad RFC 3339 UTC timestamp: " + std::string(s));
  auto num = [&](std::size_t pos, std::size_t len) {
    int v = 0;
    for (std::size_t i = 0; i < len; ++i) v = v * 10 + (s[pos + i] - '0');
    return v;
  };
  std::tm tm{};
  tm.tm_year = num(0, 4) - 1900;
  tm.tm_mon = num(5, 2) - 1;
  tm.tm_mday = num(8, 2);
  tm.tm_hour = num(11, 2);
  tm.tm_min = num(14, 2);
  tm.tm_sec = num(17, 2);
  std::tm check = tm;
  std::time_t t = timegm(&tm);
  if (t == static_cast<std::time_t>(-1)
      || tm.tm_mday != check.tm_mday || tm.tm_mon != check.tm_mon
      || tm.tm_hour != check.tm_hour || tm.tm_min != check.tm_min
      || tm.tm_sec != check.tm_sec) {
    raise(Errc::malformed_input, "impossible calendar date: " + std::string(s));
  }
  return static_cast<std::int64_t>(t);
}

inline std::string format_rfc3339_utc(std::int64_t epoch_seconds) {
  std::time_t t = static_cast<std::time_t>(epoch_seconds);
  std::tm tm{};
  gmtime_r(&t, &tm);
  int year = tm.tm_year + 1900;
  if (year < 0 || year > 9999)
    raise(Errc::malformed_input, "timestamp outside the four-digit-year range");
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ",
                year, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
  return buf;
}

inline std::string now_rfc3339_utc() {
  return format_rfc3339_utc(static_cast<std::int64_t>(std::time(nullptr)));
}

}  // namespace vamp
