#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <span>
#include <streambuf>
#include <string>

#include "vamp/encoding.hpp"
#include "vamp/errors.hpp"

namespace vamp {

// Read-only istream over a caller-owned byte span. Forward reads only, which
// is all the binding and container code needs.
class SpanStream : private std::streambuf, public std::istream {
 public:
  explicit SpanStream(std::span<const std::uint8_t> s) : std::istream(this) {
    auto* p = const_cast<char*>(reinterpret_cast<const char*>(s.data()));
    setg(p, p, p + s.size());
  }
};

inline Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::io, "cannot open " + path.string());
  Bytes out;
  char buf[65536];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    out.insert(out.end(), buf, buf + in.gcount());
  }
  if (in.bad()) raise(Errc::io, "read failed: " + path.string());
  return out;
}

inline void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(Errc::io, "cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size()));
  out.flush();
  if (!out) raise(Errc::io, "write failed: " + path.string());
}

inline void write_file(const std::filesystem::path& path, std::string_view text) {
  write_file(path, std::span<const std::uint8_t>(
                       reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace vamp
