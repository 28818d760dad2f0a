#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "vamp/canonical.hpp"
#include "vamp/digest.hpp"
#include "vamp/errors.hpp"
#include "vamp/io.hpp"
#include "vamp/merkle.hpp"
#include "vamp/schema.hpp"

namespace vamp {

// Content bindings tie manifest claims to payload bytes. Four kinds:
//   static       one digest over the whole payload
//   fixed-chunk  consecutive equal-size chunks, digest per chunk
//   box          explicit contiguous [offset, length) ranges, digest per box;
//                used for minibatch bindings where ranges follow record runs
//   record-merkle a Merkle root over delimiter-terminated records, so any
//                contiguous record range verifies with a logarithmic proof

enum class BindingKind { static_digest, fixed_chunk, box, record_merkle };

inline std::string_view binding_kind_name(BindingKind k) {
  switch (k) {
    case BindingKind::static_digest: return "static";
    case BindingKind::fixed_chunk: return "fixed-chunk";
    case BindingKind::box: return "box";
    case BindingKind::record_merkle: return "record-merkle";
  }
  raise(Errc::schema_violation, "invalid binding kind");
}

inline BindingKind binding_kind_from_name(std::string_view s) {
  if (s == "static") return BindingKind::static_digest;
  if (s == "fixed-chunk") return BindingKind::fixed_chunk;
  if (s == "box") return BindingKind::box;
  if (s == "record-merkle") return BindingKind::record_merkle;
  raise(Errc::schema_violation, "unknown binding kind: " + std::string(s));
}

inline constexpr std::uint64_t kDefaultChunkSize = 1024 * 1024;

struct StaticBody {
  Digest digest;
  friend bool operator==(const StaticBody&, const StaticBody&) = default;
};

struct FixedChunkBody {
  std::uint64_t chunkSize = 0;
  std::uint64_t totalLength = 0;
  std::vector<Digest> digests;
  friend bool operator==(const FixedChunkBody&, const FixedChunkBody&) = default;
};

struct ChunkBox {
  std::uint64_t offset = 0;
  std::uint64_t length = 0;
  Digest digest;
  friend bool operator==(const ChunkBox&, const ChunkBox&) = default;
};

struct BoxBody {
  std::vector<ChunkBox> boxes;
  friend bool operator==(const BoxBody&, const BoxBody&) = default;
};

struct RecordMerkleBody {
  Bytes recordDelimiter;
  std::uint64_t leafCount = 0;
  Digest root;
  friend bool operator==(const RecordMerkleBody&, const RecordMerkleBody&) = default;
};

struct BindingSet {
  std::string name;
  HashAlgorithm hashAlgorithm = HashAlgorithm::sha2_256;
  std::variant<StaticBody, FixedChunkBody, BoxBody, RecordMerkleBody> body;

  BindingKind kind() const {
    if (std::holds_alternative<StaticBody>(body)) return BindingKind::static_digest;
    if (std::holds_alternative<FixedChunkBody>(body)) return BindingKind::fixed_chunk;
    if (std::holds_alternative<BoxBody>(body)) return BindingKind::box;
    return BindingKind::record_merkle;
  }

  friend bool operator==(const BindingSet&, const BindingSet&) = default;
};

// ---------------------------------------------------------------------------
// Record splitting. A record is a maximal delimiter-terminated byte run, the
// delimiter included in the record's bytes; trailing bytes without a final
// delimiter form the last record. No normalization of any kind.
// ---------------------------------------------------------------------------

// Streams `in` in blocks and invokes sink(recordBytes, endedWithDelimiter)
// per record. Memory use is bounded by the block size plus one record.
template <typename Sink>
inline void for_each_record(std::istream& in, std::span<const std::uint8_t> delim, Sink&& sink) {
  if (delim.empty()) raise(Errc::malformed_input, "record delimiter must be non-empty");
  std::vector<std::uint8_t> pending;
  std::size_t start = 0;     // offset of the current record in pending
  std::size_t frontier = 0;  // no delimiter match starts before this offset
  char block[65536];
  for (;;) {
    in.read(block, sizeof block);
    if (in.bad()) raise(Errc::io, "stream read failed while splitting records");
    std::streamsize got = in.gcount();
    if (got > 0) {
      pending.insert(pending.end(), block, block + got);
      for (;;) {
        auto it = std::search(pending.begin() + static_cast<std::ptrdiff_t>(frontier),
                              pending.end(), delim.begin(), delim.end());
        if (it == pending.end()) break;
        std::size_t end = static_cast<std::size_t>(it - pending.begin()) + delim.size();
        sink(std::span<const std::uint8_t>(pending.data() + start, end - start), true);
        start = end;
        frontier = end;
      }
      std::size_t tail_backoff = delim.size() - 1;
      frontier = pending.size() > tail_backoff ? pending.size() - tail_backoff : 0;
      if (frontier < start) frontier = start;
      if (start > 0) {
        pending.erase(pending.begin(), pending.begin() + static_cast<std::ptrdiff_t>(start));
        frontier -= start;
        start = 0;
      }
    } else {
      if (in.eof()) break;
      raise(Errc::io, "stream read stalled while splitting records");
    }
  }
  if (!pending.empty())
    sink(std::span<const std::uint8_t>(pending.data(), pending.size()), false);
}

inline std::vector<Bytes> split_records(std::span<const std::uint8_t> payload,
                                        std::span<const std::uint8_t> delim) {
  SpanStream in(payload);
  std::vector<Bytes> out;
  for_each_record(in, delim, [&](std::span<const std::uint8_t> rec, bool) {
    out.emplace_back(rec.begin(), rec.end());
  });
  return out;
}

inline const Bytes& lf_delimiter() {
  static const Bytes lf{0x0a};
  return lf;
}

// ---------------------------------------------------------------------------
// Binding computation
// ---------------------------------------------------------------------------

inline BindingSet bind_static(std::istream& payload,
                              HashAlgorithm alg = HashAlgorithm::sha2_256) {
  return BindingSet{"static", alg, StaticBody{hash_stream(alg, payload)}};
}

inline BindingSet bind_fixed_chunks(std::istream& payload,
                                    std::uint64_t chunkSize = kDefaultChunkSize,
                                    HashAlgorithm alg = HashAlgorithm::sha2_256) {
  if (chunkSize == 0) raise(Errc::malformed_input, "chunk size must be positive");
  FixedChunkBody body;
  body.chunkSize = chunkSize;
  std::optional<Hasher> h;
  std::uint64_t in_chunk = 0;
  char buf[65536];
  for (;;) {
    std::uint64_t want = std::min<std::uint64_t>(sizeof buf, chunkSize - in_chunk);
    payload.read(buf, static_cast<std::streamsize>(want));
    if (payload.bad()) raise(Errc::io, "stream read failed while chunking");
    std::streamsize got = payload.gcount();
    if (got > 0) {
      if (!h) h.emplace(alg);
      h->update(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(buf),
                                              static_cast<std::size_t>(got)));
      in_chunk += static_cast<std::uint64_t>(got);
      body.totalLength += static_cast<std::uint64_t>(got);
      if (in_chunk == chunkSize) {
        body.digests.push_back(h->finish());
        h.reset();
        in_chunk = 0;
      }
    } else {
      if (payload.eof()) break;
      raise(Errc::io, "stream read stalled while chunking");
    }
  }
  if (in_chunk > 0) body.digests.push_back(h->finish());
  return BindingSet{"chunk:" + std::to_string(chunkSize), alg, std::move(body)};
}

inline BindingSet bind_minibatches(std::istream& payload, std::span<const std::uint8_t> delim,
                                   std::uint64_t batchSize,
                                   HashAlgorithm alg = HashAlgorithm::sha2_256) {
  if (batchSize == 0) raise(Errc::malformed_input, "batch size must be at least 1");
  BoxBody body;
  std::uint64_t box_offset = 0;
  std::uint64_t box_length = 0;
  std::uint64_t box_records = 0;
  std::optional<Hasher> h;
  auto flush = [&] {
    if (box_records == 0) return;
    body.boxes.push_back(ChunkBox{box_offset, box_length, h->finish()});
    h.reset();
    box_offset += box_length;
    box_length = 0;
    box_records = 0;
  };
  for_each_record(payload, delim, [&](std::span<const std::uint8_t> rec, bool) {
    if (!h) h.emplace(alg);
    h->update(rec);
    box_length += rec.size();
    if (++box_records == batchSize) flush();
  });
  flush();
  return BindingSet{"minibatch:" + std::to_string(batchSize), alg, std::move(body)};
}

inline BindingSet bind_record_merkle(std::istream& payload, std::span<const std::uint8_t> delim,
                                     HashAlgorithm alg = HashAlgorithm::sha2_256) {
  std::vector<Bytes> leaves;
  for_each_record(payload, delim, [&](std::span<const std::uint8_t> rec, bool) {
    leaves.push_back(merkle::leaf_hash(alg, rec));
  });
  RecordMerkleBody body;
  body.recordDelimiter.assign(delim.begin(), delim.end());
  body.leafCount = leaves.size();
  body.root = Digest{alg, merkle::root_from_leaves(alg, leaves)};
  return BindingSet{"record-merkle", alg, std::move(body)};
}

// ---------------------------------------------------------------------------
// Structure checks shared by manifest validation and verification
// ---------------------------------------------------------------------------

inline std::vector<std::string> validate_binding_structure(const BindingSet& b) {
  std::vector<std::string> issues;
  auto check_digest = [&](const Digest& d, const std::string& where) {
    if (d.algorithm != b.hashAlgorithm)
      issues.push_back(where + " uses a different algorithm than the binding set");
    if (d.value.size() != hash_algorithm_size(d.algorithm))
      issues.push_back(where + " has the wrong digest length");
  };
  if (const auto* s = std::get_if<StaticBody>(&b.body)) {
    check_digest(s->digest, "digest");
  } else if (const auto* c = std::get_if<FixedChunkBody>(&b.body)) {
    if (c->chunkSize == 0) {
      issues.push_back("chunkSize must be positive");
    } else {
      std::uint64_t expect = (c->totalLength + c->chunkSize - 1) / c->chunkSize;
      if (c->digests.size() != expect)
        issues.push_back("digest count does not cover totalLength");
    }
    for (std::size_t i = 0; i < c->digests.size(); ++i)
      check_digest(c->digests[i], "digests[" + std::to_string(i) + "]");
  } else if (const auto* x = std::get_if<BoxBody>(&b.body)) {
    std::uint64_t next = 0;
    for (std::size_t i = 0; i < x->boxes.size(); ++i) {
      const ChunkBox& box = x->boxes[i];
      std::string where = "boxes[" + std::to_string(i) + "]";
      if (box.length == 0) issues.push_back(where + " has zero length");
      if (box.offset != next)
        issues.push_back(where + " breaks contiguous coverage");
      next = box.offset + box.length;
      check_digest(box.digest, where);
    }
  } else if (const auto* r = std::get_if<RecordMerkleBody>(&b.body)) {
    if (r->recordDelimiter.empty()) issues.push_back("recordDelimiter must be non-empty");
    check_digest(r->root, "root");
  }
  return issues;
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

struct BindingIssue {
  std::uint64_t unit = 0;
  std::string reason;
  friend bool operator==(const BindingIssue&, const BindingIssue&) = default;
};

struct BindingReport {
  std::vector<BindingIssue> failedUnits;
  std::vector<std::string> structural;
  bool pass() const { return failedUnits.empty() && structural.empty(); }
};

namespace detail {

// Feeds up to n payload bytes into h; returns how many bytes actually flowed.
inline std::uint64_t hash_up_to(std::istream& in, Hasher& h, std::uint64_t n) {
  char buf[65536];
  std::uint64_t done = 0;
  while (done < n) {
    std::uint64_t want = std::min<std::uint64_t>(sizeof buf, n - done);
    in.read(buf, static_cast<std::streamsize>(want));
    if (in.bad()) raise(Errc::io, "stream read failed during verification");
    std::streamsize got = in.gcount();
    if (got <= 0) break;
    h.update(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(buf),
                                           static_cast<std::size_t>(got)));
    done += static_cast<std::uint64_t>(got);
  }
  return done;
}

inline bool stream_exhausted(std::istream& in) {
  return in.peek() == std::istream::traits_type::eof();
}

}  // namespace detail

inline BindingReport verify_binding(std::istream& payload, const BindingSet& binding) {
  BindingReport report;
  for (std::string& issue : validate_binding_structure(binding))
    report.structural.push_back("InvalidBinding: " + issue);
  if (!report.structural.empty()) return report;

  const HashAlgorithm alg = binding.hashAlgorithm;

  if (const auto* s = std::get_if<StaticBody>(&binding.body)) {
    if (hash_stream(alg, payload) != s->digest)
      report.failedUnits.push_back({0, "DigestMismatch"});
  } else if (const auto* c = std::get_if<FixedChunkBody>(&binding.body)) {
    std::uint64_t actual_length = 0;
    std::uint64_t index = 0;
    for (;;) {
      Hasher h(alg);
      std::uint64_t got = detail::hash_up_to(payload, h, c->chunkSize);
      if (got == 0) break;
      actual_length += got;
      if (index < c->digests.size() && h.finish() != c->digests[index])
        report.failedUnits.push_back({index, "DigestMismatch"});
      ++index;
    }
    if (actual_length != c->totalLength) report.structural.push_back("LengthMismatch");
  } else if (const auto* x = std::get_if<BoxBody>(&binding.body)) {
    bool truncated = false;
    for (std::size_t i = 0; i < x->boxes.size(); ++i) {
      Hasher h(alg);
      std::uint64_t got = detail::hash_up_to(payload, h, x->boxes[i].length);
      if (got < x->boxes[i].length) {
        truncated = true;
        break;
      }
      if (h.finish() != x->boxes[i].digest)
        report.failedUnits.push_back({i, "DigestMismatch"});
    }
    if (truncated || !detail::stream_exhausted(payload))
      report.structural.push_back("LengthMismatch");
  } else if (const auto* r = std::get_if<RecordMerkleBody>(&binding.body)) {
    std::vector<Bytes> leaves;
    for_each_record(payload, r->recordDelimiter, [&](std::span<const std::uint8_t> rec, bool) {
      leaves.push_back(merkle::leaf_hash(alg, rec));
    });
    if (leaves.size() != r->leafCount) {
      report.structural.push_back("LeafCountMismatch");
    } else if (merkle::root_from_leaves(alg, leaves) != r->root.value) {
      report.structural.push_back("RootMismatch");
    }
  }
  return report;
}

inline BindingReport verify_binding(std::span<const std::uint8_t> payload,
                                    const BindingSet& binding) {
  SpanStream in(payload);
  return verify_binding(in, binding);
}

// ---------------------------------------------------------------------------
// Record-range proofs against a record-merkle binding
// ---------------------------------------------------------------------------

inline std::vector<Bytes> prove_record_range(std::istream& payload,
                                             std::span<const std::uint8_t> delim,
                                             std::uint64_t first, std::uint64_t last,
                                             HashAlgorithm alg = HashAlgorithm::sha2_256) {
  std::vector<Bytes> leaves;
  for_each_record(payload, delim, [&](std::span<const std::uint8_t> rec, bool) {
    leaves.push_back(merkle::leaf_hash(alg, rec));
  });
  return merkle::range_proof(alg, leaves, first, last);
}

// recordBytes are the raw records (delimiters included) for [first, last);
// their leaf hashes plus the proof must reproduce the binding's root.
inline bool verify_minibatch_range(const BindingSet& binding, std::uint64_t first,
                                   std::uint64_t last, std::span<const Bytes> recordBytes,
                                   std::span<const Bytes> proof) {
  const auto* r = std::get_if<RecordMerkleBody>(&binding.body);
  if (!r) raise(Errc::schema_violation, "range verification needs a record-merkle binding");
  if (first >= last || last > r->leafCount)
    raise(Errc::range_out_of_bounds, "record range outside the tree");
  std::vector<Bytes> leaves;
  leaves.reserve(recordBytes.size());
  for (const Bytes& rec : recordBytes)
    leaves.push_back(merkle::leaf_hash(binding.hashAlgorithm, rec));
  return merkle::verify_range(binding.hashAlgorithm, r->leafCount, first, last, leaves, proof,
                              r->root.value);
}

// ---------------------------------------------------------------------------
// Serialization. Flat map per binding set; digests ride as "alg:hex" text in
// JSON and raw bytes in CBOR, recordDelimiter as Base64 text / raw bytes.
// ---------------------------------------------------------------------------

namespace detail {

inline canonical::Value digest_to_value(const Digest& d, Format f) {
  if (f == Format::json) return canonical::Value(d.text());
  return canonical::Value(d.value);
}

inline Digest digest_from_value(const canonical::Value& v, Format f, HashAlgorithm alg,
                                std::string_view ctx) {
  if (f == Format::json) {
    if (!v.is_string())
      raise(Errc::schema_violation, std::string(ctx) + ": expected a digest string");
    try {
      return Digest::from_text(v.as_string());
    } catch (const Error&) {
      raise(Errc::schema_violation, std::string(ctx) + ": malformed digest text");
    }
  }
  if (!v.is_bytes())
    raise(Errc::schema_violation, std::string(ctx) + ": expected a digest byte string");
  return Digest{alg, v.as_bytes()};
}

}  // namespace detail

inline canonical::Value binding_to_value(const BindingSet& b, Format f) {
  canonical::Map m;
  m.emplace("name", b.name);
  m.emplace("kind", std::string(binding_kind_name(b.kind())));
  m.emplace("hashAlgorithm", std::string(hash_algorithm_name(b.hashAlgorithm)));
  if (const auto* s = std::get_if<StaticBody>(&b.body)) {
    m.emplace("digest", detail::digest_to_value(s->digest, f));
  } else if (const auto* c = std::get_if<FixedChunkBody>(&b.body)) {
    m.emplace("chunkSize", c->chunkSize);
    m.emplace("totalLength", c->totalLength);
    canonical::Array ds;
    ds.reserve(c->digests.size());
    for (const Digest& d : c->digests) ds.push_back(detail::digest_to_value(d, f));
    m.emplace("digests", std::move(ds));
  } else if (const auto* x = std::get_if<BoxBody>(&b.body)) {
    canonical::Array boxes;
    boxes.reserve(x->boxes.size());
    for (const ChunkBox& box : x->boxes) {
      canonical::Map bm;
      bm.emplace("offset", box.offset);
      bm.emplace("length", box.length);
      bm.emplace("digest", detail::digest_to_value(box.digest, f));
      boxes.push_back(std::move(bm));
    }
    m.emplace("boxes", std::move(boxes));
  } else if (const auto* r = std::get_if<RecordMerkleBody>(&b.body)) {
    m.emplace("recordDelimiter", schema::bytes_to_value(r->recordDelimiter, f));
    m.emplace("leafCount", r->leafCount);
    m.emplace("root", detail::digest_to_value(r->root, f));
  }
  return canonical::Value(std::move(m));
}

inline BindingSet binding_from_value(const canonical::Value& v, Format f) {
  const canonical::Map& m = schema::require_map(v, "binding");
  BindingSet b;
  b.name = schema::require_string(m, "name", "binding");
  b.hashAlgorithm = hash_algorithm_from_name(schema::require_string(m, "hashAlgorithm", "binding"));
  BindingKind kind = binding_kind_from_name(schema::require_string(m, "kind", "binding"));
  switch (kind) {
    case BindingKind::static_digest: {
      schema::reject_unknown_keys(m, {"name", "kind", "hashAlgorithm", "digest"}, "binding");
      StaticBody body;
      body.digest = detail::digest_from_value(schema::require(m, "digest", "binding"), f,
                                              b.hashAlgorithm, "binding.digest");
      b.body = std::move(body);
      break;
    }
    case BindingKind::fixed_chunk: {
      schema::reject_unknown_keys(
          m, {"name", "kind", "hashAlgorithm", "chunkSize", "totalLength", "digests"}, "binding");
      FixedChunkBody body;
      body.chunkSize = schema::require_uint(m, "chunkSize", "binding");
      body.totalLength = schema::require_uint(m, "totalLength", "binding");
      for (const canonical::Value& d : schema::require_array(m, "digests", "binding"))
        body.digests.push_back(
            detail::digest_from_value(d, f, b.hashAlgorithm, "binding.digests"));
      b.body = std::move(body);
      break;
    }
    case BindingKind::box: {
      schema::reject_unknown_keys(m, {"name", "kind", "hashAlgorithm", "boxes"}, "binding");
      BoxBody body;
      for (const canonical::Value& bv : schema::require_array(m, "boxes", "binding")) {
        const canonical::Map& bm = schema::require_map(bv, "binding.boxes");
        schema::reject_unknown_keys(bm, {"offset", "length", "digest"}, "binding.boxes");
        ChunkBox box;
        box.offset = schema::require_uint(bm, "offset", "binding.boxes");
        box.length = schema::require_uint(bm, "length", "binding.boxes");
        box.digest = detail::digest_from_value(schema::require(bm, "digest", "binding.boxes"), f,
                                               b.hashAlgorithm, "binding.boxes.digest");
        body.boxes.push_back(std::move(box));
      }
      b.body = std::move(body);
      break;
    }
    case BindingKind::record_merkle: {
      schema::reject_unknown_keys(
          m, {"name", "kind", "hashAlgorithm", "recordDelimiter", "leafCount", "root"}, "binding");
      RecordMerkleBody body;
      body.recordDelimiter = schema::require_bytes(m, "recordDelimiter", f, "binding");
      body.leafCount = schema::require_uint(m, "leafCount", "binding");
      body.root = detail::digest_from_value(schema::require(m, "root", "binding"), f,
                                            b.hashAlgorithm, "binding.root");
      b.body = std::move(body);
      break;
    }
  }
  return b;
}

}  // namespace vamp
