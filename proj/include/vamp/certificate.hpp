#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "vamp/keys.hpp"
#include "vamp/timeutil.hpp"

namespace vamp {

// A deliberately small stand-in for an X.509 certificate: subject identity,
// its public key, a validity window, and the issuer's signature over the
// certificate's canonical unsigned JSON bytes. The signing form is always
// JSON, even when a certificate travels inside a CBOR envelope, so a
// certificate has exactly one signed identity.
struct Certificate {
  std::string subject;
  std::string issuer;
  Bytes publicKey;
  std::string notBefore;
  std::string notAfter;
  Bytes signature;
  bool selfSigned = false;

  friend bool operator==(const Certificate&, const Certificate&) = default;
};

inline canonical::Value certificate_to_value(const Certificate& c, Format f,
                                             bool includeSignature = true) {
  canonical::Map m;
  m.emplace("issuer", c.issuer);
  m.emplace("notAfter", c.notAfter);
  m.emplace("notBefore", c.notBefore);
  m.emplace("publicKey", schema::bytes_to_value(c.publicKey, f));
  m.emplace("selfSigned", c.selfSigned);
  if (includeSignature) m.emplace("signature", schema::bytes_to_value(c.signature, f));
  m.emplace("subject", c.subject);
  return canonical::Value(std::move(m));
}

// The bytes a certificate signature covers: the canonical JSON encoding of
// every field except the signature itself.
inline Bytes certificate_signing_bytes(const Certificate& c) {
  return canonical::to_canonical_json(certificate_to_value(c, Format::json, false));
}

inline Certificate certificate_from_value(const canonical::Value& v, Format f) {
  const auto& m = schema::require_map(v, "certificate");
  schema::reject_unknown_keys(
      m, {"issuer", "notAfter", "notBefore", "publicKey", "selfSigned", "signature", "subject"},
      "certificate");
  Certificate c;
  c.subject = schema::require_string(m, "subject", "certificate");
  c.issuer = schema::require_string(m, "issuer", "certificate");
  c.publicKey = schema::require_bytes(m, "publicKey", f, "certificate");
  c.notBefore = schema::require_string(m, "notBefore", "certificate");
  c.notAfter = schema::require_string(m, "notAfter", "certificate");
  c.signature = schema::require_bytes(m, "signature", f, "certificate");
  c.selfSigned = schema::require_bool(m, "selfSigned", "certificate");
  if (c.subject.empty()) raise(Errc::schema_violation, "certificate subject is empty");
  std::int64_t nb, na;
  try {
    nb = parse_rfc3339_utc(c.notBefore);
    na = parse_rfc3339_utc(c.notAfter);
  } catch (const Error&) {
    raise(Errc::schema_violation, "certificate validity bounds are not RFC 3339 UTC");
  }
  if (nb >= na) raise(Errc::schema_violation, "certificate notBefore must precede notAfter");
  return c;
}

inline Bytes serialize_certificate(const Certificate& c, Format f = Format::json) {
  auto v = certificate_to_value(c, f);
  return f == Format::json ? canonical::to_canonical_json(v) : canonical::to_canonical_cbor(v);
}

inline Certificate parse_certificate(std::span<const std::uint8_t> bytes,
                                     Format f = Format::json) {
  canonical::Value v =
      f == Format::json ? canonical::from_json(bytes).value : canonical::from_cbor(bytes);
  Certificate c = certificate_from_value(v, f);
  Bytes again = serialize_certificate(c, f);
  if (again.size() != bytes.size() || !std::equal(again.begin(), again.end(), bytes.begin()))
    raise(Errc::non_canonical, "certificate bytes are not in canonical form");
  return c;
}

inline Certificate issue_self_signed(const std::string& subject, const PrivateKey& key,
                                     const std::string& notBefore, const std::string& notAfter) {
  if (parse_rfc3339_utc(notBefore) >= parse_rfc3339_utc(notAfter))
    raise(Errc::schema_violation, "certificate notBefore must precede notAfter");
  Certificate c;
  c.subject = subject;
  c.issuer = subject;
  c.publicKey = key.public_key();
  c.notBefore = notBefore;
  c.notAfter = notAfter;
  c.selfSigned = true;
  c.signature = key.sign(certificate_signing_bytes(c));
  return c;
}

inline Certificate issue_certificate(const std::string& subject, Bytes subjectPublicKey,
                                     const std::string& notBefore, const std::string& notAfter,
                                     const PrivateKey& issuerKey, const Certificate& issuerCert,
                                     std::int64_t issuedAt) {
  if (parse_rfc3339_utc(notBefore) >= parse_rfc3339_utc(notAfter))
    raise(Errc::schema_violation, "certificate notBefore must precede notAfter");
  if (issuedAt < parse_rfc3339_utc(issuerCert.notBefore) ||
      issuedAt > parse_rfc3339_utc(issuerCert.notAfter))
    raise(Errc::expired_issuer, "issuer certificate is not valid at issuance time");
  if (issuerKey.public_key() != issuerCert.publicKey)
    raise(Errc::invalid_issuer_key, "issuer key does not match issuer certificate");
  Certificate c;
  c.subject = subject;
  c.issuer = issuerCert.subject;
  c.publicKey = std::move(subjectPublicKey);
  c.notBefore = notBefore;
  c.notAfter = notAfter;
  c.selfSigned = false;
  c.signature = issuerKey.sign(certificate_signing_bytes(c));
  // Degenerate but possible: an issuer certifying its own key under its own
  // name produces a self-signed certificate and must be marked as one.
  if (c.issuer == c.subject &&
      verify_signature(c.publicKey, certificate_signing_bytes(c), c.signature)) {
    c.selfSigned = true;
    c.signature = issuerKey.sign(certificate_signing_bytes(c));
  }
  return c;
}

// The verifier's trust anchors. Membership is bitwise: a root matches only if
// its canonical signed JSON bytes are exactly present, so two certificates for
// the same subject with different keys or windows never alias each other.
class TrustStore {
 public:
  void add(const Certificate& root) { roots_.insert(serialize_certificate(root, Format::json)); }

  bool contains(const Certificate& c) const {
    return roots_.count(serialize_certificate(c, Format::json)) != 0;
  }

  std::size_t size() const { return roots_.size(); }

  // Loads every regular file in the directory as a canonical JSON certificate.
  static TrustStore from_directory(const std::filesystem::path& dir) {
    TrustStore t;
    if (!std::filesystem::exists(dir)) return t;
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir))
      if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& p : files) t.add(parse_certificate(read_file(p), Format::json));
    return t;
  }

 private:
  std::set<Bytes> roots_;
};

// Walks the chain leaf first: every certificate must be inside its validity
// window at atTime, each one signed by its successor (the root by itself),
// and the root bitwise present in the trust store. Returns the leaf subject.
inline std::string verify_chain(const std::vector<Certificate>& chain, const TrustStore& trust,
                                std::int64_t atTime) {
  if (chain.empty()) raise(Errc::schema_violation, "certificate chain is empty");
  if (chain.size() > 3)
    raise(Errc::chain_too_long, "certificate chain exceeds the depth limit of 3");
  for (const Certificate& c : chain) {
    std::int64_t nb, na;
    try {
      nb = parse_rfc3339_utc(c.notBefore);
      na = parse_rfc3339_utc(c.notAfter);
    } catch (const Error&) {
      raise(Errc::schema_violation, "certificate validity bounds are not RFC 3339 UTC");
    }
    if (atTime < nb || atTime > na)
      raise(Errc::expired, "certificate for " + c.subject + " is outside its validity window");
  }
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const Certificate& signer = i + 1 < chain.size() ? chain[i + 1] : chain[i];
    if (!verify_signature(signer.publicKey, certificate_signing_bytes(chain[i]),
                          chain[i].signature))
      raise(Errc::bad_signature,
            "certificate for " + chain[i].subject + " fails verification under its issuer key");
  }
  if (!trust.contains(chain.back()))
    raise(Errc::untrusted_root, "chain root " + chain.back().subject + " is not a trust anchor");
  return chain.front().subject;
}

}  // namespace vamp
