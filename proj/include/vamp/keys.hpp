#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>

#include <openssl/core_names.h>
#include <openssl/err.h>
#include <openssl/evp.h>
#include <openssl/param_build.h>
#include <openssl/x509.h>

#include "vamp/canonical.hpp"
#include "vamp/io.hpp"
#include "vamp/schema.hpp"

namespace vamp {

// Two signature schemes: Ed25519 (the default, 32-byte public keys) and ECDSA
// over P-256 with SHA-256 (65-byte uncompressed public points). The two public
// key lengths never collide, so verifiers dispatch on length alone and
// certificates do not need to carry an algorithm field.
enum class SignatureAlgorithm { ed25519, ecdsa_p256 };

inline std::string_view signature_algorithm_name(SignatureAlgorithm a) {
  return a == SignatureAlgorithm::ed25519 ? "ed25519" : "ecdsa-p256";
}

inline SignatureAlgorithm signature_algorithm_from_name(std::string_view s) {
  if (s == "ed25519") return SignatureAlgorithm::ed25519;
  if (s == "ecdsa-p256") return SignatureAlgorithm::ecdsa_p256;
  raise(Errc::schema_violation, "unknown signature algorithm: " + std::string(s));
}

namespace detail {

using PKeyPtr = std::shared_ptr<EVP_PKEY>;

inline PKeyPtr wrap_pkey(EVP_PKEY* raw, const char* what) {
  if (!raw) {
    ERR_clear_error();
    raise(Errc::io, std::string(what) + " failed");
  }
  return PKeyPtr(raw, &EVP_PKEY_free);
}

// Builds an EVP_PKEY from a raw public key, dispatching on length. Returns
// nullptr (rather than raising) for anything unusable so signature checks can
// simply report false.
inline PKeyPtr public_key_from_bytes(std::span<const std::uint8_t> pub) {
  if (pub.size() == 32) {
    EVP_PKEY* k = EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, pub.data(), pub.size());
    if (!k) ERR_clear_error();
    return PKeyPtr(k, &EVP_PKEY_free);
  }
  if (pub.size() == 65 && pub[0] == 0x04) {
    PKeyPtr out(nullptr, &EVP_PKEY_free);
    OSSL_PARAM_BLD* bld = OSSL_PARAM_BLD_new();
    if (!bld) return out;
    OSSL_PARAM* params = nullptr;
    if (OSSL_PARAM_BLD_push_utf8_string(bld, OSSL_PKEY_PARAM_GROUP_NAME, "prime256v1", 0) == 1 &&
        OSSL_PARAM_BLD_push_octet_string(bld, OSSL_PKEY_PARAM_PUB_KEY, pub.data(), pub.size()) == 1)
      params = OSSL_PARAM_BLD_to_param(bld);
    if (params) {
      EVP_PKEY_CTX* ctx = EVP_PKEY_CTX_new_from_name(nullptr, "EC", nullptr);
      if (ctx) {
        EVP_PKEY* k = nullptr;
        if (EVP_PKEY_fromdata_init(ctx) == 1 &&
            EVP_PKEY_fromdata(ctx, &k, EVP_PKEY_PUBLIC_KEY, params) == 1)
          out = PKeyPtr(k, &EVP_PKEY_free);
        EVP_PKEY_CTX_free(ctx);
      }
      OSSL_PARAM_free(params);
    }
    OSSL_PARAM_BLD_free(bld);
    ERR_clear_error();
    return out;
  }
  return PKeyPtr(nullptr, &EVP_PKEY_free);
}

inline Bytes public_key_bytes(EVP_PKEY* key, SignatureAlgorithm alg) {
  Bytes out;
  if (alg == SignatureAlgorithm::ed25519) {
    std::size_t len = 32;
    out.resize(len);
    if (EVP_PKEY_get_raw_public_key(key, out.data(), &len) != 1 || len != 32)
      raise(Errc::io, "raw public key extraction failed");
    return out;
  }
  std::uint8_t buf[128];
  std::size_t len = 0;
  if (EVP_PKEY_get_octet_string_param(key, OSSL_PKEY_PARAM_ENCODED_PUBLIC_KEY, buf, sizeof(buf),
                                      &len) != 1 ||
      len != 65)
    raise(Errc::io, "uncompressed point extraction failed");
  out.assign(buf, buf + len);
  return out;
}

}  // namespace detail

// An in-memory signing key. Immutable once constructed; safe to share across
// threads. The JSON form is {"algorithm","privateKey","publicKey"} with the
// private part base64 encoded: the Ed25519 32-byte seed, or the DER-encoded
// EC private key for P-256.
class PrivateKey {
 public:
  static PrivateKey generate(SignatureAlgorithm alg) {
    if (alg == SignatureAlgorithm::ed25519)
      return PrivateKey(alg, detail::wrap_pkey(
          EVP_PKEY_Q_keygen(nullptr, nullptr, "ED25519"), "ed25519 keygen"));
    return PrivateKey(alg, detail::wrap_pkey(
        EVP_PKEY_Q_keygen(nullptr, nullptr, "EC", "P-256"), "p256 keygen"));
  }

  SignatureAlgorithm algorithm() const { return alg_; }

  Bytes public_key() const { return detail::public_key_bytes(key_.get(), alg_); }

  Bytes sign(std::span<const std::uint8_t> message) const {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                                &EVP_MD_CTX_free);
    if (!ctx) raise(Errc::io, "EVP_MD_CTX_new failed");
    const EVP_MD* md = alg_ == SignatureAlgorithm::ed25519 ? nullptr : EVP_sha256();
    if (EVP_DigestSignInit(ctx.get(), nullptr, md, nullptr, key_.get()) != 1)
      raise(Errc::io, "EVP_DigestSignInit failed");
    std::size_t len = 0;
    if (EVP_DigestSign(ctx.get(), nullptr, &len, message.data(), message.size()) != 1)
      raise(Errc::io, "EVP_DigestSign sizing failed");
    Bytes sig(len);
    if (EVP_DigestSign(ctx.get(), sig.data(), &len, message.data(), message.size()) != 1)
      raise(Errc::io, "EVP_DigestSign failed");
    sig.resize(len);
    return sig;
  }

  Bytes serialize() const {
    canonical::Map m;
    m.emplace("algorithm", std::string(signature_algorithm_name(alg_)));
    m.emplace("privateKey", base64_encode(private_bytes()));
    m.emplace("publicKey", base64_encode(public_key()));
    return canonical::to_canonical_json(canonical::Value(std::move(m)));
  }

  static PrivateKey parse(std::span<const std::uint8_t> jsonBytes) {
    canonical::Value v = canonical::from_json(jsonBytes).value;
    const auto& m = schema::require_map(v, "key file");
    schema::reject_unknown_keys(m, {"algorithm", "privateKey", "publicKey"}, "key file");
    auto alg = signature_algorithm_from_name(schema::require_string(m, "algorithm", "key file"));
    Bytes priv = schema::require_bytes(m, "privateKey", Format::json, "key file");
    Bytes pub = schema::require_bytes(m, "publicKey", Format::json, "key file");

    detail::PKeyPtr key(nullptr, &EVP_PKEY_free);
    if (alg == SignatureAlgorithm::ed25519) {
      if (priv.size() != 32)
        raise(Errc::schema_violation, "ed25519 private key must be a 32-byte seed");
      key = detail::wrap_pkey(
          EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, priv.data(), priv.size()),
          "ed25519 key import");
    } else {
      const unsigned char* p = priv.data();
      EVP_PKEY* k = d2i_PrivateKey(EVP_PKEY_EC, nullptr, &p, static_cast<long>(priv.size()));
      if (!k) {
        ERR_clear_error();
        raise(Errc::schema_violation, "invalid ecdsa-p256 private key encoding");
      }
      key = detail::PKeyPtr(k, &EVP_PKEY_free);
    }
    PrivateKey out(alg, std::move(key));
    if (out.public_key() != pub)
      raise(Errc::schema_violation, "public key does not match the private key");
    return out;
  }

  void save(const std::filesystem::path& path) const {
    write_file(path, serialize());
    std::filesystem::permissions(
        path, std::filesystem::perms::owner_read | std::filesystem::perms::owner_write,
        std::filesystem::perm_options::replace);
  }

  static PrivateKey load(const std::filesystem::path& path) { return parse(read_file(path)); }

 private:
  PrivateKey(SignatureAlgorithm alg, detail::PKeyPtr key) : alg_(alg), key_(std::move(key)) {}

  Bytes private_bytes() const {
    if (alg_ == SignatureAlgorithm::ed25519) {
      Bytes seed(32);
      std::size_t len = 32;
      if (EVP_PKEY_get_raw_private_key(key_.get(), seed.data(), &len) != 1 || len != 32)
        raise(Errc::io, "raw private key extraction failed");
      return seed;
    }
    unsigned char* der = nullptr;
    int len = i2d_PrivateKey(key_.get(), &der);
    if (len <= 0) raise(Errc::io, "private key DER encoding failed");
    Bytes out(der, der + len);
    OPENSSL_free(der);
    return out;
  }

  SignatureAlgorithm alg_;
  detail::PKeyPtr key_;
};

// Signature check under a bare public key. The key's scheme is inferred from
// its length (32 = Ed25519, 65 = uncompressed P-256 point); anything else, or
// any parse or verify failure, is reported as false rather than raised, since
// a bad signature is an expected outcome for a verifier.
inline bool verify_signature(std::span<const std::uint8_t> publicKey,
                             std::span<const std::uint8_t> message,
                             std::span<const std::uint8_t> signature) {
  detail::PKeyPtr key = detail::public_key_from_bytes(publicKey);
  if (!key) return false;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx) return false;
  const EVP_MD* md = publicKey.size() == 32 ? nullptr : EVP_sha256();
  if (EVP_DigestVerifyInit(ctx.get(), nullptr, md, nullptr, key.get()) != 1) {
    ERR_clear_error();
    return false;
  }
  int rc = EVP_DigestVerify(ctx.get(), signature.data(), signature.size(), message.data(),
                            message.size());
  if (rc != 1) ERR_clear_error();
  return rc == 1;
}

}  // namespace vamp
