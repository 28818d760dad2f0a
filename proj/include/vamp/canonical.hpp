#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vamp/encoding.hpp"
#include "vamp/errors.hpp"

#include "json.hpp"

namespace vamp {

enum class Format { json, cbor };

inline std::string_view format_name(Format f) {
  return f == Format::json ? "JSON" : "CBOR";
}

inline Format format_from_name(std::string_view s) {
  if (s == "JSON") return Format::json;
  if (s == "CBOR") return Format::cbor;
  raise(Errc::unsupported_format, "unknown serialization format: " + std::string(s));
}

}  // namespace vamp

namespace vamp::canonical {

// A small value model for everything this library serializes: manifests,
// certificates, envelopes, receipts. One logical value has exactly one byte
// representation per format, which is what makes hashing and signing stable.
//
//   JSON: UTF-8, object keys sorted bytewise (== code-point order for UTF-8),
//         no insignificant whitespace, shortest-form integers, minimal string
//         escaping, byte strings carried as Base64 text by the schema layer.
//   CBOR: RFC 8949 deterministic core — definite lengths, minimal integer
//         heads, map keys sorted bytewise on their encoded form.
//
// Null and Float only ever appear while *reading* foreign input; the writers
// refuse them, so no canonical byte stream can contain either.

class Value;
using Array = std::vector<Value>;
using Map = std::map<std::string, Value>;

class Value {
 public:
  using Storage = std::variant<std::nullptr_t, bool, std::int64_t, std::uint64_t,
                               double, std::string, Bytes, Array, Map>;

  Value() : v_(nullptr) {}
  Value(std::nullptr_t) : v_(nullptr) {}
  Value(bool b) : v_(b) {}
  // Non-negative integers normalize to the unsigned alternative so that equal
  // numbers always compare equal and serialize identically.
  Value(int i) : Value(static_cast<std::int64_t>(i)) {}
  Value(std::int64_t i) {
    if (i >= 0) v_ = static_cast<std::uint64_t>(i); else v_ = i;
  }
  Value(std::uint64_t u) : v_(u) {}
  Value(double d) : v_(d) {}
  Value(const char* s) : v_(std::string(s)) {}
  Value(std::string s) : v_(std::move(s)) {}
  Value(Bytes b) : v_(std::move(b)) {}
  Value(Array a) : v_(std::move(a)) {}
  Value(Map m) : v_(std::move(m)) {}

  bool is_null() const { return std::holds_alternative<std::nullptr_t>(v_); }
  bool is_bool() const { return std::holds_alternative<bool>(v_); }
  bool is_int() const {
    return std::holds_alternative<std::int64_t>(v_) || std::holds_alternative<std::uint64_t>(v_);
  }
  bool is_float() const { return std::holds_alternative<double>(v_); }
  bool is_string() const { return std::holds_alternative<std::string>(v_); }
  bool is_bytes() const { return std::holds_alternative<Bytes>(v_); }
  bool is_array() const { return std::holds_alternative<Array>(v_); }
  bool is_map() const { return std::holds_alternative<Map>(v_); }

  bool as_bool() const { return std::get<bool>(v_); }
  std::uint64_t as_uint() const {
    if (auto* u = std::get_if<std::uint64_t>(&v_)) return *u;
    auto i = std::get<std::int64_t>(v_);
    if (i < 0) raise(Errc::schema_violation, "negative integer where unsigned expected");
    return static_cast<std::uint64_t>(i);
  }
  std::int64_t as_int() const {
    if (auto* i = std::get_if<std::int64_t>(&v_)) return *i;
    auto u = std::get<std::uint64_t>(v_);
    if (u > static_cast<std::uint64_t>(INT64_MAX))
      raise(Errc::schema_violation, "integer out of signed range");
    return static_cast<std::int64_t>(u);
  }
  const std::string& as_string() const { return std::get<std::string>(v_); }
  const Bytes& as_bytes() const { return std::get<Bytes>(v_); }
  const Array& as_array() const { return std::get<Array>(v_); }
  const Map& as_map() const { return std::get<Map>(v_); }
  Array& as_array() { return std::get<Array>(v_); }
  Map& as_map() { return std::get<Map>(v_); }

  const Storage& storage() const { return v_; }

  friend bool operator==(const Value& a, const Value& b) = default;

 private:
  Storage v_;
};

// ---------------------------------------------------------------------------
// Canonical JSON writer
// ---------------------------------------------------------------------------

namespace detail {

inline void json_escape_into(std::string& out, const std::string& s) {
  static constexpr char hexd[] = "0123456789abcdef";
  out.push_back('"');
  for (unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\b': out += "\\b"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\f': out += "\\f"; break;
      case '\r': out += "\\r"; break;
      default:
        if (c < 0x20) {
          out += "\\u00";
          out.push_back(hexd[c >> 4]);
          out.push_back(hexd[c & 0x0f]);
        } else {
          out.push_back(static_cast<char>(c));
        }
    }
  }
  out.push_back('"');
}

inline void json_write_into(std::string& out, const Value& v) {
  if (v.is_bool()) {
    out += v.as_bool() ? "true" : "false";
  } else if (auto* i = std::get_if<std::int64_t>(&v.storage())) {
    out += std::to_string(*i);
  } else if (auto* u = std::get_if<std::uint64_t>(&v.storage())) {
    out += std::to_string(*u);
  } else if (v.is_string()) {
    json_escape_into(out, v.as_string());
  } else if (v.is_bytes()) {
    raise(Errc::unsupported_format, "raw bytes reached the JSON writer");
  } else if (v.is_array()) {
    out.push_back('[');
    bool first = true;
    for (const auto& e : v.as_array()) {
      if (!first) out.push_back(',');
      first = false;
      json_write_into(out, e);
    }
    out.push_back(']');
  } else if (v.is_map()) {
    out.push_back('{');
    bool first = true;
    for (const auto& [k, e] : v.as_map()) {  // std::map iterates bytewise-sorted
      if (!first) out.push_back(',');
      first = false;
      json_escape_into(out, k);
      out.push_back(':');
      json_write_into(out, e);
    }
    out.push_back('}');
  } else {
    raise(Errc::unsupported_format, "null or float reached the JSON writer");
  }
}

}  // namespace detail

inline Bytes to_canonical_json(const Value& v) {
  std::string out;
  detail::json_write_into(out, v);
  return to_bytes(out);
}

// ---------------------------------------------------------------------------
// JSON reader. nlohmann parses; we lift its DOM into a Value. Strictness
// (key order, duplicates, whitespace, escapes) is judged by the caller via
// re-serialization, which catches every deviation at once.
// ---------------------------------------------------------------------------

struct ReadResult {
  Value value;
  bool saw_float = false;  // lexemes like 1e2 or 2.5 appeared in the input
};

namespace detail {

inline Value from_nlohmann(const nlohmann::json& j, bool& saw_float) {
  using nlohmann::json;
  switch (j.type()) {
    case json::value_t::null: return Value(nullptr);
    case json::value_t::boolean: return Value(j.get<bool>());
    case json::value_t::number_integer: return Value(j.get<std::int64_t>());
    case json::value_t::number_unsigned: return Value(j.get<std::uint64_t>());
    case json::value_t::number_float: saw_float = true; return Value(j.get<double>());
    case json::value_t::string: return Value(j.get<std::string>());
    case json::value_t::array: {
      Array a;
      a.reserve(j.size());
      for (const auto& e : j) a.push_back(from_nlohmann(e, saw_float));
      return Value(std::move(a));
    }
    case json::value_t::object: {
      Map m;
      for (auto it = j.begin(); it != j.end(); ++it)
        m.emplace(it.key(), from_nlohmann(it.value(), saw_float));
      return Value(std::move(m));
    }
    default:
      raise(Errc::malformed_input, "unsupported JSON value type");
  }
}

}  // namespace detail

inline ReadResult from_json(std::span<const std::uint8_t> bytes) {
  nlohmann::json j = nlohmann::json::parse(bytes.begin(), bytes.end(), nullptr,
                                           /*allow_exceptions=*/false);
  if (j.is_discarded()) raise(Errc::malformed_input, "invalid JSON");
  ReadResult r;
  r.value = detail::from_nlohmann(j, r.saw_float);
  return r;
}

// ---------------------------------------------------------------------------
// Deterministic CBOR encoder / decoder
// ---------------------------------------------------------------------------

namespace detail {

inline void cbor_head_into(Bytes& out, std::uint8_t major, std::uint64_t n) {
  std::uint8_t m = static_cast<std::uint8_t>(major << 5);
  if (n < 24) {
    out.push_back(static_cast<std::uint8_t>(m | n));
  } else if (n <= 0xff) {
    out.push_back(m | 24);
    out.push_back(static_cast<std::uint8_t>(n));
  } else if (n <= 0xffff) {
    out.push_back(m | 25);
    out.push_back(static_cast<std::uint8_t>(n >> 8));
    out.push_back(static_cast<std::uint8_t>(n));
  } else if (n <= 0xffffffffULL) {
    out.push_back(m | 26);
    for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(n >> s));
  } else {
    out.push_back(m | 27);
    for (int s = 56; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(n >> s));
  }
}

inline void cbor_write_into(Bytes& out, const Value& v) {
  if (v.is_bool()) {
    out.push_back(v.as_bool() ? 0xf5 : 0xf4);
  } else if (auto* u = std::get_if<std::uint64_t>(&v.storage())) {
    cbor_head_into(out, 0, *u);
  } else if (auto* i = std::get_if<std::int64_t>(&v.storage())) {
    if (*i >= 0)
      cbor_head_into(out, 0, static_cast<std::uint64_t>(*i));
    else
      cbor_head_into(out, 1, static_cast<std::uint64_t>(-(*i + 1)));
  } else if (v.is_string()) {
    const auto& s = v.as_string();
    cbor_head_into(out, 3, s.size());
    out.insert(out.end(), s.begin(), s.end());
  } else if (v.is_bytes()) {
    const auto& b = v.as_bytes();
    cbor_head_into(out, 2, b.size());
    out.insert(out.end(), b.begin(), b.end());
  } else if (v.is_array()) {
    cbor_head_into(out, 4, v.as_array().size());
    for (const auto& e : v.as_array()) cbor_write_into(out, e);
  } else if (v.is_map()) {
    // sort pairs by the encoded form of the key
    std::vector<std::pair<Bytes, const Value*>> pairs;
    pairs.reserve(v.as_map().size());
    for (const auto& [k, e] : v.as_map()) {
      Bytes kb;
      cbor_head_into(kb, 3, k.size());
      kb.insert(kb.end(), k.begin(), k.end());
      pairs.emplace_back(std::move(kb), &e);
    }
    std::sort(pairs.begin(), pairs.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    cbor_head_into(out, 5, pairs.size());
    for (const auto& [kb, e] : pairs) {
      out.insert(out.end(), kb.begin(), kb.end());
      cbor_write_into(out, *e);
    }
  } else {
    raise(Errc::unsupported_format, "null or float reached the CBOR writer");
  }
}

class CborReader {
 public:
  explicit CborReader(std::span<const std::uint8_t> data) : data_(data) {}

  Value read() {
    Value v = read_value(0);
    if (pos_ != data_.size()) raise(Errc::malformed_input, "trailing bytes after CBOR value");
    return v;
  }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;

  std::uint8_t byte() {
    if (pos_ >= data_.size()) raise(Errc::malformed_input, "truncated CBOR");
    return data_[pos_++];
  }

  std::uint64_t read_length(std::uint8_t info) {
    if (info < 24) return info;
    if (info == 31) raise(Errc::malformed_input, "indefinite-length CBOR is not supported");
    int n;
    switch (info) {
      case 24: n = 1; break;
      case 25: n = 2; break;
      case 26: n = 4; break;
      case 27: n = 8; break;
      default: raise(Errc::malformed_input, "reserved CBOR length info");
    }
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v = (v << 8) | byte();
    return v;
  }

  Value read_value(int depth) {
    if (depth > 64) raise(Errc::malformed_input, "CBOR nesting too deep");
    std::uint8_t ib = byte();
    std::uint8_t major = ib >> 5;
    std::uint8_t info = ib & 0x1f;
    switch (major) {
      case 0: return Value(read_length(info));
      case 1: {
        std::uint64_t n = read_length(info);
        if (n > static_cast<std::uint64_t>(INT64_MAX))
          raise(Errc::malformed_input, "negative integer out of range");
        return Value(static_cast<std::int64_t>(-1 - static_cast<std::int64_t>(n)));
      }
      case 2: {
        std::uint64_t n = read_length(info);
        if (n > data_.size() - pos_) raise(Errc::malformed_input, "truncated CBOR byte string");
        Bytes b(data_.begin() + pos_, data_.begin() + pos_ + n);
        pos_ += n;
        return Value(std::move(b));
      }
      case 3: {
        std::uint64_t n = read_length(info);
        if (n > data_.size() - pos_) raise(Errc::malformed_input, "truncated CBOR text string");
        std::string s(data_.begin() + pos_, data_.begin() + pos_ + n);
        pos_ += n;
        if (!utf8_valid(s)) raise(Errc::malformed_input, "CBOR text string is not valid UTF-8");
        return Value(std::move(s));
      }
      case 4: {
        std::uint64_t n = read_length(info);
        Array a;
        a.reserve(std::min<std::uint64_t>(n, 4096));
        for (std::uint64_t i = 0; i < n; ++i) a.push_back(read_value(depth + 1));
        return Value(std::move(a));
      }
      case 5: {
        std::uint64_t n = read_length(info);
        Map m;
        for (std::uint64_t i = 0; i < n; ++i) {
          Value k = read_value(depth + 1);
          if (!k.is_string()) raise(Errc::malformed_input, "non-text CBOR map key");
          Value v = read_value(depth + 1);
          m.emplace(k.as_string(), std::move(v));  // duplicates collapse; re-encode check flags them
        }
        return Value(std::move(m));
      }
      case 7: {
        if (info == 20) return Value(false);
        if (info == 21) return Value(true);
        if (info == 22) return Value(nullptr);
        raise(Errc::malformed_input, "unsupported CBOR simple/float value");
      }
      default:
        raise(Errc::malformed_input, "unsupported CBOR major type (tag or float)");
    }
  }
};

}  // namespace detail

inline Bytes to_canonical_cbor(const Value& v) {
  Bytes out;
  detail::cbor_write_into(out, v);
  return out;
}

inline Value from_cbor(std::span<const std::uint8_t> bytes) {
  return detail::CborReader(bytes).read();
}

}  // namespace vamp::canonical
