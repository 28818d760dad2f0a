#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "vamp/receipt.hpp"
#include "vamp/timeutil.hpp"

namespace vamp {

// An append-only transparency log. Entries are opaque bytes (the registry
// stores either a manifest digest's text form or full envelope bytes); the
// tree hashes them as leaf = H(0x00 || entry), node = H(0x01 || L || R), with
// incomplete right subtrees promoted. Appends are persisted to an append-only
// record file plus a signed-head checkpoint, so a restarted log resumes where
// it stopped and a tampered store is noticed at open time.
//
// Single writer by contract: callers serialize appends (the registry wraps
// the log in its write lock). Reads of an unchanging log are safe to share.
class MerkleLog {
 public:
  using Clock = std::function<std::string()>;

  // Opens or creates a log under dir, recovering any persisted entries.
  MerkleLog(std::filesystem::path dir, PrivateKey logKey,
            HashAlgorithm alg = HashAlgorithm::sha2_256, Clock clock = &now_rfc3339_utc)
      : dir_(std::move(dir)), key_(std::move(logKey)), alg_(alg), clock_(std::move(clock)) {
    std::filesystem::create_directories(dir_);
    recover();
  }

  std::uint64_t size() const { return leaves_.size(); }
  HashAlgorithm algorithm() const { return alg_; }
  Bytes public_key() const { return key_.public_key(); }

  bool sealed() const { return sealed_; }
  void seal() { sealed_ = true; }

  const Bytes& entry(std::uint64_t sequence) const {
    if (sequence >= entries_.size())
      raise(Errc::out_of_range, "ledger has no entry " + std::to_string(sequence));
    return entries_[sequence];
  }

  // Appends one entry and returns a receipt against the new tree head.
  Receipt append(std::span<const std::uint8_t> entryBytes) {
    if (sealed_) raise(Errc::log_sealed, "ledger is sealed against further appends");
    persist_entry(entryBytes);
    entries_.emplace_back(entryBytes.begin(), entryBytes.end());
    leaves_.push_back(merkle::leaf_hash(alg_, entryBytes));
    write_head_checkpoint();
    return prove_inclusion(size() - 1, size());
  }

  // The signed head for the current tree.
  SignedTreeHead head() const { return sign_head(size()); }

  // A receipt for an existing entry against the head at atTreeSize, which
  // may be older than the current size.
  Receipt prove_inclusion(std::uint64_t sequence, std::uint64_t atTreeSize) const {
    if (atTreeSize > size() || sequence >= atTreeSize)
      raise(Errc::out_of_range, "inclusion proof bounds exceed the ledger");
    Receipt r;
    r.sequence = sequence;
    r.leafHash = Digest{alg_, leaves_[sequence]};
    auto view = std::span<const Bytes>(leaves_.data(), atTreeSize);
    for (Bytes& b : merkle::inclusion_path(alg_, view, sequence, atTreeSize))
      r.auditPath.push_back(Digest{alg_, std::move(b)});
    r.signedTreeHead = sign_head(atTreeSize);
    return r;
  }

  std::vector<Digest> prove_consistency(std::uint64_t olderSize,
                                        std::uint64_t newerSize) const {
    if (olderSize == 0 || olderSize > newerSize || newerSize > size())
      raise(Errc::out_of_range, "consistency proof bounds exceed the ledger");
    auto view = std::span<const Bytes>(leaves_.data(), newerSize);
    std::vector<Digest> out;
    for (Bytes& b : merkle::consistency_proof(alg_, view, olderSize, newerSize))
      out.push_back(Digest{alg_, std::move(b)});
    return out;
  }

  SignedTreeHead head_at(std::uint64_t treeSize) const {
    if (treeSize > size()) raise(Errc::out_of_range, "no such tree size yet");
    return sign_head(treeSize);
  }

 private:
  std::filesystem::path record_path() const { return dir_ / "ledger.log"; }
  std::filesystem::path head_path() const { return dir_ / "head.json"; }

  SignedTreeHead sign_head(std::uint64_t treeSize) const {
    SignedTreeHead h;
    h.treeSize = treeSize;
    auto view = std::span<const Bytes>(leaves_.data(), treeSize);
    h.rootHash = Digest{alg_, merkle::root_from_leaves(alg_, view)};
    h.timestamp = clock_();
    h.signature = key_.sign(tree_head_signing_bytes(h.treeSize, h.rootHash, h.timestamp));
    return h;
  }

  void persist_entry(std::span<const std::uint8_t> bytes) {
    std::ofstream out(record_path(), std::ios::binary | std::ios::app);
    if (!out) raise(Errc::io, "cannot open ledger record file for append");
    std::uint8_t len[4] = {static_cast<std::uint8_t>(bytes.size() >> 24),
                           static_cast<std::uint8_t>(bytes.size() >> 16),
                           static_cast<std::uint8_t>(bytes.size() >> 8),
                           static_cast<std::uint8_t>(bytes.size())};
    out.write(reinterpret_cast<const char*>(len), 4);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) raise(Errc::io, "ledger record append failed");
  }

  void write_head_checkpoint() {
    Bytes head = canonical::to_canonical_json(tree_head_to_value(sign_head(size()), Format::json));
    auto tmp = head_path();
    tmp += ".tmp";
    write_file(tmp, head);
    std::filesystem::rename(tmp, head_path());
  }

  void recover() {
    if (std::filesystem::exists(record_path())) {
      Bytes all = read_file(record_path());
      std::size_t pos = 0;
      while (pos < all.size()) {
        if (pos + 4 > all.size())
          raise(Errc::io, "ledger record file ends inside a length prefix");
        std::uint64_t len = (std::uint64_t(all[pos]) << 24) | (std::uint64_t(all[pos + 1]) << 16) |
                            (std::uint64_t(all[pos + 2]) << 8) | std::uint64_t(all[pos + 3]);
        pos += 4;
        if (pos + len > all.size())
          raise(Errc::io, "ledger record file ends inside an entry");
        entries_.emplace_back(all.begin() + pos, all.begin() + pos + len);
        leaves_.push_back(merkle::leaf_hash(
            alg_, std::span<const std::uint8_t>(all.data() + pos, len)));
        pos += len;
      }
    }
    if (std::filesystem::exists(head_path())) {
      SignedTreeHead stored =
          tree_head_from_value(canonical::from_json(read_file(head_path())).value, Format::json);
      if (stored.treeSize > size())
        raise(Errc::io, "ledger head checkpoint claims more entries than the record file holds");
      auto view = std::span<const Bytes>(leaves_.data(), stored.treeSize);
      if (stored.rootHash.value != merkle::root_from_leaves(stored.rootHash.algorithm, view))
        raise(Errc::io, "ledger head checkpoint does not match the recorded entries");
    }
  }

  std::filesystem::path dir_;
  PrivateKey key_;
  HashAlgorithm alg_;
  Clock clock_;
  std::vector<Bytes> entries_;
  std::vector<Bytes> leaves_;
  bool sealed_ = false;
};

// Offline consistency check between two signed heads. When a log public key
// is supplied both head signatures must verify; the structural check then
// accepts iff the newer tree extends the older one.
inline bool verify_log_consistency(const SignedTreeHead& older, const SignedTreeHead& newer,
                                   const std::vector<Digest>& proof,
                                   std::span<const std::uint8_t> logPublicKey = {}) {
  if (!logPublicKey.empty()) {
    if (!verify_signature(logPublicKey,
                          tree_head_signing_bytes(older.treeSize, older.rootHash,
                                                  older.timestamp),
                          older.signature))
      return false;
    if (!verify_signature(logPublicKey,
                          tree_head_signing_bytes(newer.treeSize, newer.rootHash,
                                                  newer.timestamp),
                          newer.signature))
      return false;
  }
  if (older.rootHash.algorithm != newer.rootHash.algorithm) return false;
  std::vector<Bytes> path;
  path.reserve(proof.size());
  for (const Digest& d : proof) {
    if (d.algorithm != newer.rootHash.algorithm) return false;
    path.push_back(d.value);
  }
  return merkle::verify_consistency(newer.rootHash.algorithm, older.treeSize, newer.treeSize,
                                    older.rootHash.value, newer.rootHash.value, path);
}

}  // namespace vamp
