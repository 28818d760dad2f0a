#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vamp/certificate.hpp"
#include "vamp/manifest.hpp"
#include "vamp/receipt.hpp"

namespace vamp {

// A manifest ready for distribution: the canonical payload bytes, a signature
// over SHA-256 of those bytes, and the certificate chain (leaf first) that
// ties the signature to an identity. Signing the payload digest rather than
// the payload keeps signing cheap for large manifests. The envelope itself is
// serialized in the same format as its payload. An optional transparency-log
// receipt can ride along; the signature does not cover it, so a receipt can
// be attached after publication without re-signing.
struct SignedManifest {
  Format serialization = Format::json;
  Bytes payload;
  SignatureAlgorithm signatureAlgorithm = SignatureAlgorithm::ed25519;
  Bytes signature;
  std::vector<Certificate> certChain;
  std::optional<Receipt> ledgerReceipt;

  friend bool operator==(const SignedManifest&, const SignedManifest&) = default;
};

inline canonical::Value envelope_to_value(const SignedManifest& e) {
  Format f = e.serialization;
  canonical::Array chain;
  chain.reserve(e.certChain.size());
  for (const Certificate& c : e.certChain) chain.push_back(certificate_to_value(c, f));
  canonical::Map m;
  m.emplace("certChain", std::move(chain));
  if (e.ledgerReceipt) m.emplace("ledgerReceipt", receipt_to_value(*e.ledgerReceipt, f));
  m.emplace("payload", schema::bytes_to_value(e.payload, f));
  m.emplace("serialization", std::string(format_name(f)));
  m.emplace("signature", schema::bytes_to_value(e.signature, f));
  m.emplace("signatureAlgorithm", std::string(signature_algorithm_name(e.signatureAlgorithm)));
  return canonical::Value(std::move(m));
}

inline SignedManifest envelope_from_value(const canonical::Value& v, Format f) {
  const auto& m = schema::require_map(v, "envelope");
  schema::reject_unknown_keys(
      m,
      {"certChain", "ledgerReceipt", "payload", "serialization", "signature",
       "signatureAlgorithm"},
      "envelope");
  SignedManifest e;
  e.serialization = format_from_name(schema::require_string(m, "serialization", "envelope"));
  if (e.serialization != f)
    raise(Errc::schema_violation, "envelope serialization field disagrees with its encoding");
  e.payload = schema::require_bytes(m, "payload", f, "envelope");
  e.signatureAlgorithm = signature_algorithm_from_name(
      schema::require_string(m, "signatureAlgorithm", "envelope"));
  e.signature = schema::require_bytes(m, "signature", f, "envelope");
  for (const auto& c : schema::require_array(m, "certChain", "envelope"))
    e.certChain.push_back(certificate_from_value(c, f));
  if (e.certChain.empty()) raise(Errc::schema_violation, "envelope certificate chain is empty");
  if (const auto* r = schema::find(m, "ledgerReceipt"); r && !r->is_null())
    e.ledgerReceipt = receipt_from_value(*r, f);
  return e;
}

inline Bytes serialize_envelope(const SignedManifest& e) {
  auto v = envelope_to_value(e);
  return e.serialization == Format::json ? canonical::to_canonical_json(v)
                                         : canonical::to_canonical_cbor(v);
}

// Strict parse: the bytes must already be in canonical form for the given
// format, so every envelope has exactly one wire representation.
inline SignedManifest parse_envelope(std::span<const std::uint8_t> bytes, Format f) {
  canonical::Value v =
      f == Format::json ? canonical::from_json(bytes).value : canonical::from_cbor(bytes);
  SignedManifest e = envelope_from_value(v, f);
  Bytes again = serialize_envelope(e);
  if (again.size() != bytes.size() || !std::equal(again.begin(), again.end(), bytes.begin()))
    raise(Errc::non_canonical, "envelope bytes are not in canonical form");
  return e;
}

inline SignedManifest sign_manifest(const Manifest& m, Format f, const PrivateKey& key,
                                    std::vector<Certificate> certChain) {
  if (certChain.empty())
    raise(Errc::key_mismatch, "signing requires a certificate chain with a leaf");
  if (certChain.front().publicKey != key.public_key())
    raise(Errc::key_mismatch, "chain leaf certificate does not match the signing key");
  SignedManifest e;
  e.serialization = f;
  e.payload = canonical_serialize(m, f);
  e.signatureAlgorithm = key.algorithm();
  e.signature = key.sign(hash_bytes(HashAlgorithm::sha2_256, e.payload).value);
  e.certChain = std::move(certChain);
  return e;
}

// Parses envelope bytes of either format, telling them apart by the first
// byte: canonical JSON objects always open with '{'.
inline SignedManifest parse_envelope_sniffed(std::span<const std::uint8_t> bytes) {
  return parse_envelope(bytes, !bytes.empty() && bytes[0] == '{' ? Format::json : Format::cbor);
}

struct VerifiedManifest {
  Manifest manifest;
  std::string signer;
};

// Full check of an envelope: certificate chain against the trust store, then
// the signature over SHA-256 of the payload under the chain's leaf key, then
// a strict parse of the payload itself. Anything wrong with the payload bytes
// surfaces as MalformedPayload so callers can distinguish transport damage
// from trust failures.
inline VerifiedManifest verify_signed_manifest(const SignedManifest& e, const TrustStore& trust,
                                               std::int64_t atTime) {
  std::string signer = verify_chain(e.certChain, trust, atTime);
  if (!verify_signature(e.certChain.front().publicKey,
                        hash_bytes(HashAlgorithm::sha2_256, e.payload).value, e.signature))
    raise(Errc::bad_signature, "envelope signature does not verify under the chain leaf key");
  try {
    return VerifiedManifest{parse_manifest(e.payload, e.serialization).manifest,
                            std::move(signer)};
  } catch (const Error& err) {
    raise(Errc::malformed_payload, std::string("envelope payload rejected: ") + err.what());
  }
}

}  // namespace vamp
