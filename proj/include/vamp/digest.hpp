#pragma once

#include <cstdint>
#include <istream>
#include <memory>
#include <span>
#include <string>
#include <string_view>

#include <openssl/evp.h>

#include "vamp/encoding.hpp"
#include "vamp/errors.hpp"

namespace vamp {

enum class HashAlgorithm { sha2_256, sha2_512 };

inline std::string_view hash_algorithm_name(HashAlgorithm a) {
  return a == HashAlgorithm::sha2_256 ? "sha2-256" : "sha2-512";
}

inline HashAlgorithm hash_algorithm_from_name(std::string_view s) {
  if (s == "sha2-256") return HashAlgorithm::sha2_256;
  if (s == "sha2-512") return HashAlgorithm::sha2_512;
  raise(Errc::schema_violation, "unknown hash algorithm: " + std::string(s));
}

inline std::size_t hash_algorithm_size(HashAlgorithm a) {
  return a == HashAlgorithm::sha2_256 ? 32 : 64;
}

struct Digest {
  HashAlgorithm algorithm = HashAlgorithm::sha2_256;
  Bytes value;

  // "alg:hex" with lowercase hex, e.g. "sha2-256:e3b0c4…"
  std::string text() const {
    return std::string(hash_algorithm_name(algorithm)) + ":" + hex_encode(value);
  }

  static Digest from_text(std::string_view s) {
    auto colon = s.find(':');
    if (colon == std::string_view::npos)
      raise(Errc::malformed_input, "digest text form must be alg:hex");
    Digest d;
    d.algorithm = hash_algorithm_from_name(s.substr(0, colon));
    d.value = hex_decode(s.substr(colon + 1));
    if (d.value.size() != hash_algorithm_size(d.algorithm))
      raise(Errc::malformed_input, "digest length does not match its algorithm");
    return d;
  }

  // CBOR stores digests as raw bytes; the SHA-2 family output lengths are
  // distinct, so the length recovers the algorithm.
  static Digest from_raw(Bytes raw) {
    Digest d;
    if (raw.size() == 32) d.algorithm = HashAlgorithm::sha2_256;
    else if (raw.size() == 64) d.algorithm = HashAlgorithm::sha2_512;
    else raise(Errc::malformed_input, "raw digest must be 32 or 64 bytes");
    d.value = std::move(raw);
    return d;
  }

  friend bool operator==(const Digest&, const Digest&) = default;
};

// Incremental SHA-2 over an arbitrary sequence of byte spans. The result is a
// function of the concatenated bytes only, never of the chunking.
class Hasher {
 public:
  explicit Hasher(HashAlgorithm alg) : alg_(alg), ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
    if (!ctx_) raise(Errc::io, "EVP_MD_CTX_new failed");
    const EVP_MD* md = alg == HashAlgorithm::sha2_256 ? EVP_sha256() : EVP_sha512();
    if (EVP_DigestInit_ex(ctx_.get(), md, nullptr) != 1)
      raise(Errc::io, "EVP_DigestInit_ex failed");
  }

  void update(std::span<const std::uint8_t> data) {
    if (EVP_DigestUpdate(ctx_.get(), data.data(), data.size()) != 1)
      raise(Errc::io, "EVP_DigestUpdate failed");
  }

  void update(std::string_view s) {
    update(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
  }

  void update_byte(std::uint8_t b) { update(std::span<const std::uint8_t>(&b, 1)); }

  Digest finish() {
    Digest d;
    d.algorithm = alg_;
    d.value.resize(EVP_MD_CTX_size(ctx_.get()));
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_.get(), d.value.data(), &len) != 1)
      raise(Errc::io, "EVP_DigestFinal_ex failed");
    d.value.resize(len);
    return d;
  }

 private:
  HashAlgorithm alg_;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

inline Digest hash_bytes(HashAlgorithm alg, std::span<const std::uint8_t> data) {
  Hasher h(alg);
  h.update(data);
  return h.finish();
}

inline Digest hash_bytes(HashAlgorithm alg, std::string_view s) {
  Hasher h(alg);
  h.update(s);
  return h.finish();
}

inline Digest hash_stream(HashAlgorithm alg, std::istream& in) {
  Hasher h(alg);
  char buf[64 * 1024];
  while (in.good()) {
    in.read(buf, sizeof(buf));
    std::streamsize n = in.gcount();
    if (n > 0)
      h.update(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(buf),
                                             static_cast<std::size_t>(n)));
  }
  if (in.bad()) raise(Errc::io, "stream read failed while hashing");
  return h.finish();
}

}  // namespace vamp
