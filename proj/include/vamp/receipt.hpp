#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vamp/keys.hpp"
#include "vamp/merkle.hpp"

namespace vamp {

// A log head the operator vouches for: tree size, root hash, and a timestamp,
// signed under the log key. The signature covers the canonical JSON of those
// three fields regardless of the format the head later travels in.
struct SignedTreeHead {
  std::uint64_t treeSize = 0;
  Digest rootHash;
  std::string timestamp;
  Bytes signature;

  friend bool operator==(const SignedTreeHead&, const SignedTreeHead&) = default;
};

inline Bytes tree_head_signing_bytes(std::uint64_t treeSize, const Digest& rootHash,
                                     const std::string& timestamp) {
  canonical::Map m;
  m.emplace("rootHash", rootHash.text());
  m.emplace("timestamp", timestamp);
  m.emplace("treeSize", treeSize);
  return canonical::to_canonical_json(canonical::Value(std::move(m)));
}

// Proof of inclusion that needs no access to the log: the entry's position and
// leaf hash, the sibling hashes up to the root, and the signed head the path
// resolves against. Anyone holding the log public key can check it offline.
struct Receipt {
  std::uint64_t sequence = 0;
  Digest leafHash;
  std::vector<Digest> auditPath;
  SignedTreeHead signedTreeHead;

  friend bool operator==(const Receipt&, const Receipt&) = default;
};

namespace detail {

inline canonical::Value digest_text_or_raw(const Digest& d, Format f) {
  if (f == Format::json) return canonical::Value(d.text());
  return canonical::Value(d.value);
}

inline Digest digest_from_text_or_raw(const canonical::Value& v, Format f, std::string_view ctx) {
  if (f == Format::json) {
    if (!v.is_string()) raise(Errc::schema_violation, std::string(ctx) + ": expected digest text");
    try {
      return Digest::from_text(v.as_string());
    } catch (const Error&) {
      raise(Errc::schema_violation, std::string(ctx) + ": malformed digest");
    }
  }
  if (!v.is_bytes()) raise(Errc::schema_violation, std::string(ctx) + ": expected digest bytes");
  try {
    return Digest::from_raw(v.as_bytes());
  } catch (const Error&) {
    raise(Errc::schema_violation, std::string(ctx) + ": malformed digest");
  }
}

}  // namespace detail

inline canonical::Value tree_head_to_value(const SignedTreeHead& h, Format f) {
  canonical::Map m;
  m.emplace("rootHash", detail::digest_text_or_raw(h.rootHash, f));
  m.emplace("signature", schema::bytes_to_value(h.signature, f));
  m.emplace("timestamp", h.timestamp);
  m.emplace("treeSize", h.treeSize);
  return canonical::Value(std::move(m));
}

inline SignedTreeHead tree_head_from_value(const canonical::Value& v, Format f) {
  const auto& m = schema::require_map(v, "tree head");
  schema::reject_unknown_keys(m, {"rootHash", "signature", "timestamp", "treeSize"}, "tree head");
  SignedTreeHead h;
  h.treeSize = schema::require_uint(m, "treeSize", "tree head");
  h.rootHash = detail::digest_from_text_or_raw(schema::require(m, "rootHash", "tree head"), f,
                                               "tree head rootHash");
  h.timestamp = schema::require_string(m, "timestamp", "tree head");
  h.signature = schema::require_bytes(m, "signature", f, "tree head");
  return h;
}

inline canonical::Value receipt_to_value(const Receipt& r, Format f) {
  canonical::Array path;
  path.reserve(r.auditPath.size());
  for (const Digest& d : r.auditPath) path.push_back(detail::digest_text_or_raw(d, f));
  canonical::Map m;
  m.emplace("auditPath", std::move(path));
  m.emplace("leafHash", detail::digest_text_or_raw(r.leafHash, f));
  m.emplace("sequence", r.sequence);
  m.emplace("signedTreeHead", tree_head_to_value(r.signedTreeHead, f));
  return canonical::Value(std::move(m));
}

inline Receipt receipt_from_value(const canonical::Value& v, Format f) {
  const auto& m = schema::require_map(v, "receipt");
  schema::reject_unknown_keys(m, {"auditPath", "leafHash", "sequence", "signedTreeHead"},
                              "receipt");
  Receipt r;
  r.sequence = schema::require_uint(m, "sequence", "receipt");
  r.leafHash = detail::digest_from_text_or_raw(schema::require(m, "leafHash", "receipt"), f,
                                               "receipt leafHash");
  for (const auto& e : schema::require_array(m, "auditPath", "receipt"))
    r.auditPath.push_back(detail::digest_from_text_or_raw(e, f, "receipt auditPath"));
  r.signedTreeHead = tree_head_from_value(schema::require(m, "signedTreeHead", "receipt"), f);
  return r;
}

inline Bytes serialize_receipt(const Receipt& r, Format f) {
  auto v = receipt_to_value(r, f);
  return f == Format::json ? canonical::to_canonical_json(v) : canonical::to_canonical_cbor(v);
}

inline Receipt parse_receipt(std::span<const std::uint8_t> bytes, Format f) {
  canonical::Value v =
      f == Format::json ? canonical::from_json(bytes).value : canonical::from_cbor(bytes);
  return receipt_from_value(v, f);
}

// Offline receipt check: the tree-head signature must verify under the log
// public key and the audit path must reproduce the signed root hash. Never
// touches the log; returns false rather than raising, since rejection is an
// expected outcome.
inline bool verify_receipt(const Receipt& r, std::span<const std::uint8_t> logPublicKey) {
  const SignedTreeHead& h = r.signedTreeHead;
  if (!verify_signature(logPublicKey,
                        tree_head_signing_bytes(h.treeSize, h.rootHash, h.timestamp),
                        h.signature))
    return false;
  if (r.leafHash.algorithm != h.rootHash.algorithm) return false;
  std::vector<Bytes> path;
  path.reserve(r.auditPath.size());
  for (const Digest& d : r.auditPath) {
    if (d.algorithm != h.rootHash.algorithm) return false;
    path.push_back(d.value);
  }
  return merkle::verify_inclusion(h.rootHash.algorithm, r.leafHash.value, r.sequence, h.treeSize,
                                  path, h.rootHash.value);
}

}  // namespace vamp
