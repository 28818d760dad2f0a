#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vamp {

enum class Errc {
  // generic
  io,
  // manifest / serialization
  invalid_manifest,
  malformed_input,
  schema_violation,
  non_canonical,
  unsupported_format,
  // crypto / trust
  key_mismatch,
  bad_signature,
  untrusted_root,
  expired,
  chain_too_long,
  expired_issuer,
  invalid_issuer_key,
  malformed_payload,
  // binding
  range_out_of_bounds,
  malformed_proof,
  // container
  binding_mismatch,
  oversize_manifest,
  corrupt_header,
  invalid_locator,
  manifest_not_found,
  divergent_copies,
  // provenance
  cycle_detected,
  duplicate_id,
  unknown_id,
  // ledger
  log_sealed,
  out_of_range,
};

inline std::string_view errc_name(Errc c) {
  switch (c) {
    case Errc::io: return "IO";
    case Errc::invalid_manifest: return "InvalidManifest";
    case Errc::malformed_input: return "MalformedInput";
    case Errc::schema_violation: return "SchemaViolation";
    case Errc::non_canonical: return "NonCanonical";
    case Errc::unsupported_format: return "UnsupportedFormat";
    case Errc::key_mismatch: return "KeyMismatch";
    case Errc::bad_signature: return "BadSignature";
    case Errc::untrusted_root: return "UntrustedRoot";
    case Errc::expired: return "Expired";
    case Errc::chain_too_long: return "ChainTooLong";
    case Errc::expired_issuer: return "ExpiredIssuer";
    case Errc::invalid_issuer_key: return "InvalidIssuerKey";
    case Errc::malformed_payload: return "MalformedPayload";
    case Errc::range_out_of_bounds: return "RangeOutOfBounds";
    case Errc::malformed_proof: return "MalformedProof";
    case Errc::binding_mismatch: return "BindingMismatch";
    case Errc::oversize_manifest: return "OversizeManifest";
    case Errc::corrupt_header: return "CorruptHeader";
    case Errc::invalid_locator: return "InvalidLocator";
    case Errc::manifest_not_found: return "ManifestNotFound";
    case Errc::divergent_copies: return "DivergentCopies";
    case Errc::cycle_detected: return "CycleDetected";
    case Errc::duplicate_id: return "DuplicateId";
    case Errc::unknown_id: return "UnknownId";
    case Errc::log_sealed: return "LogSealed";
    case Errc::out_of_range: return "OutOfRange";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace vamp
