#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vamp/digest.hpp"
#include "vamp/errors.hpp"

namespace vamp::merkle {

// History-tree hashing with domain separation:
//   leaf     = H(0x00 || bytes)
//   interior = H(0x01 || left || right)
// A level with an odd node count promotes its last node unchanged, which
// yields the same roots as the split-at-largest-power-of-two recursion used
// by the proof algorithms below. The root over zero leaves is H of the empty
// string, and the root over one leaf is that leaf hash itself.

inline Bytes leaf_hash(HashAlgorithm alg, std::span<const std::uint8_t> bytes) {
  Hasher h(alg);
  h.update_byte(0x00);
  h.update(bytes);
  return h.finish().value;
}

inline Bytes node_hash(HashAlgorithm alg, std::span<const std::uint8_t> left,
                       std::span<const std::uint8_t> right) {
  Hasher h(alg);
  h.update_byte(0x01);
  h.update(left);
  h.update(right);
  return h.finish().value;
}

inline Bytes empty_root(HashAlgorithm alg) {
  return hash_bytes(alg, std::span<const std::uint8_t>{}).value;
}

namespace detail {

inline std::uint64_t largest_power_of_two_below(std::uint64_t n) {
  // largest k = 2^x with k < n, for n >= 2
  std::uint64_t k = 1;
  while (k * 2 < n) k *= 2;
  return k;
}

inline Bytes subtree_root(HashAlgorithm alg, std::span<const Bytes> leaves,
                          std::uint64_t lo, std::uint64_t hi) {
  if (hi - lo == 1) return leaves[lo];
  std::uint64_t k = largest_power_of_two_below(hi - lo);
  Bytes left = subtree_root(alg, leaves, lo, lo + k);
  Bytes right = subtree_root(alg, leaves, lo + k, hi);
  return node_hash(alg, left, right);
}

}  // namespace detail

inline Bytes root_from_leaves(HashAlgorithm alg, std::span<const Bytes> leaves) {
  if (leaves.empty()) return empty_root(alg);
  return detail::subtree_root(alg, leaves, 0, leaves.size());
}

// ---------------------------------------------------------------------------
// Inclusion (audit) paths: sibling hashes ordered from the leaf toward the
// root, over the first `size` leaves.
// ---------------------------------------------------------------------------

namespace detail {

inline void inclusion_path_into(HashAlgorithm alg, std::span<const Bytes> leaves,
                                std::uint64_t index, std::uint64_t lo, std::uint64_t hi,
                                std::vector<Bytes>& out) {
  if (hi - lo == 1) return;
  std::uint64_t k = largest_power_of_two_below(hi - lo);
  if (index < lo + k) {
    inclusion_path_into(alg, leaves, index, lo, lo + k, out);
    out.push_back(subtree_root(alg, leaves, lo + k, hi));
  } else {
    inclusion_path_into(alg, leaves, index, lo + k, hi, out);
    out.push_back(subtree_root(alg, leaves, lo, lo + k));
  }
}

}  // namespace detail

inline std::vector<Bytes> inclusion_path(HashAlgorithm alg, std::span<const Bytes> leaves,
                                         std::uint64_t index, std::uint64_t size) {
  if (size > leaves.size() || index >= size)
    raise(Errc::out_of_range, "inclusion path request outside the tree");
  std::vector<Bytes> out;
  detail::inclusion_path_into(alg, leaves, index, 0, size, out);
  return out;
}

// Bit-walk verifier, deliberately a different code shape from the recursive
// path generator above.
inline bool verify_inclusion(HashAlgorithm alg, const Bytes& leaf, std::uint64_t index,
                             std::uint64_t size, std::span<const Bytes> path,
                             const Bytes& root) {
  if (index >= size) return false;
  std::uint64_t fn = index;
  std::uint64_t sn = size - 1;
  Bytes r = leaf;
  for (const Bytes& p : path) {
    if (sn == 0) return false;
    if ((fn & 1) || fn == sn) {
      r = node_hash(alg, p, r);
      while (!(fn & 1) && fn != 0) {
        fn >>= 1;
        sn >>= 1;
      }
    } else {
      r = node_hash(alg, r, p);
    }
    fn >>= 1;
    sn >>= 1;
  }
  return sn == 0 && r == root;
}

// ---------------------------------------------------------------------------
// Consistency proofs between two sizes of the same append-only tree.
// ---------------------------------------------------------------------------

namespace detail {

inline void consistency_subproof_into(HashAlgorithm alg, std::span<const Bytes> leaves,
                                      std::uint64_t m, std::uint64_t lo, std::uint64_t hi,
                                      bool whole_known, std::vector<Bytes>& out) {
  std::uint64_t n = hi - lo;
  if (m == n) {
    if (!whole_known) out.push_back(subtree_root(alg, leaves, lo, hi));
    return;
  }
  std::uint64_t k = largest_power_of_two_below(n);
  if (m <= k) {
    consistency_subproof_into(alg, leaves, m, lo, lo + k, whole_known, out);
    out.push_back(subtree_root(alg, leaves, lo + k, hi));
  } else {
    consistency_subproof_into(alg, leaves, m - k, lo + k, hi, false, out);
    out.push_back(subtree_root(alg, leaves, lo, lo + k));
  }
}

}  // namespace detail

inline std::vector<Bytes> consistency_proof(HashAlgorithm alg, std::span<const Bytes> leaves,
                                            std::uint64_t older_size, std::uint64_t newer_size) {
  if (older_size == 0 || older_size > newer_size || newer_size > leaves.size())
    raise(Errc::out_of_range, "consistency proof sizes out of range");
  if (older_size == newer_size) return {};
  std::vector<Bytes> out;
  detail::consistency_subproof_into(alg, leaves, older_size, 0, newer_size, true, out);
  return out;
}

inline bool verify_consistency(HashAlgorithm alg, std::uint64_t older_size,
                               std::uint64_t newer_size, const Bytes& older_root,
                               const Bytes& newer_root, std::span<const Bytes> proof) {
  if (older_size > newer_size) return false;
  if (older_size == newer_size) return proof.empty() && older_root == newer_root;
  if (older_size == 0) return false;  // an empty tree is consistent with anything; callers start at 1

  std::size_t next = 0;
  Bytes fr, sr;
  std::uint64_t fn = older_size - 1;
  std::uint64_t sn = newer_size - 1;
  while (fn & 1) {
    fn >>= 1;
    sn >>= 1;
  }
  if (fn == 0) {
    // older size is a power of two: its root is the first implicit node
    fr = older_root;
    sr = older_root;
  } else {
    if (proof.empty()) return false;
    fr = proof[next];
    sr = proof[next];
    ++next;
  }
  for (; next < proof.size(); ++next) {
    if (sn == 0) return false;
    if ((fn & 1) || fn == sn) {
      fr = node_hash(alg, proof[next], fr);
      sr = node_hash(alg, proof[next], sr);
      while (!(fn & 1) && fn != 0) {
        fn >>= 1;
        sn >>= 1;
      }
    } else {
      sr = node_hash(alg, sr, proof[next]);
    }
    fn >>= 1;
    sn >>= 1;
  }
  return sn == 0 && fr == older_root && sr == newer_root;
}

// ---------------------------------------------------------------------------
// Contiguous-range proofs: the sibling subtree hashes that, combined with the
// leaf hashes of [first, last), reproduce the root. Proof digests appear in
// left-to-right traversal order; the verifier consumes them in that order.
// ---------------------------------------------------------------------------

namespace detail {

inline void range_proof_into(HashAlgorithm alg, std::span<const Bytes> leaves,
                             std::uint64_t first, std::uint64_t last,
                             std::uint64_t lo, std::uint64_t hi, std::vector<Bytes>& out) {
  if (first <= lo && hi <= last) return;  // fully inside: verifier recomputes
  if (last <= lo || hi <= first) {        // fully outside: one proof digest
    out.push_back(subtree_root(alg, leaves, lo, hi));
    return;
  }
  std::uint64_t k = largest_power_of_two_below(hi - lo);
  range_proof_into(alg, leaves, first, last, lo, lo + k, out);
  range_proof_into(alg, leaves, first, last, lo + k, hi, out);
}

struct RangeCursor {
  std::span<const Bytes> range_leaves;  // leaf hashes for [first, last)
  std::span<const Bytes> proof;
  std::uint64_t first;
  std::uint64_t last;
  std::size_t next_leaf = 0;
  std::size_t next_proof = 0;
};

inline Bytes range_root(HashAlgorithm alg, RangeCursor& cur, std::uint64_t lo, std::uint64_t hi) {
  if (cur.first <= lo && hi <= cur.last) {
    if (hi - lo == 1) {
      return cur.range_leaves[cur.next_leaf++];
    }
  } else if (cur.last <= lo || hi <= cur.first) {
    if (cur.next_proof >= cur.proof.size())
      raise(Errc::malformed_proof, "range proof is missing digests");
    return cur.proof[cur.next_proof++];
  }
  std::uint64_t k = largest_power_of_two_below(hi - lo);
  Bytes left = range_root(alg, cur, lo, lo + k);
  Bytes right = range_root(alg, cur, lo + k, hi);
  return node_hash(alg, left, right);
}

}  // namespace detail

inline std::vector<Bytes> range_proof(HashAlgorithm alg, std::span<const Bytes> leaves,
                                      std::uint64_t first, std::uint64_t last) {
  if (first >= last || last > leaves.size())
    raise(Errc::range_out_of_bounds, "record range outside the tree");
  std::vector<Bytes> out;
  detail::range_proof_into(alg, leaves, first, last, 0, leaves.size(), out);
  return out;
}

inline bool verify_range(HashAlgorithm alg, std::uint64_t leaf_count,
                         std::uint64_t first, std::uint64_t last,
                         std::span<const Bytes> range_leaves,
                         std::span<const Bytes> proof, const Bytes& root) {
  if (first >= last || last > leaf_count)
    raise(Errc::range_out_of_bounds, "record range outside the tree");
  if (range_leaves.size() != last - first)
    raise(Errc::malformed_proof, "leaf count does not match the range");
  detail::RangeCursor cur{range_leaves, proof, first, last};
  Bytes computed = detail::range_root(alg, cur, 0, leaf_count);
  if (cur.next_proof != proof.size())
    raise(Errc::malformed_proof, "range proof has extra digests");
  return computed == root;
}

}  // namespace vamp::merkle
