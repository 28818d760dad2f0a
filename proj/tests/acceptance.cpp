// End to end acceptance checks. Each numbered criterion prints exactly one
// PASS or FAIL line and the process exits nonzero if any criterion fails.
//
// Criteria about observable tool behavior drive the command line binaries as
// child processes; criteria about cryptographic structure check the library
// against independent oracles (a flat level-by-level tree builder and plain
// byte walking) rather than against the code under test.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "vamp/binding.hpp"
#include "vamp/certificate.hpp"
#include "vamp/container.hpp"
#include "vamp/envelope.hpp"
#include "vamp/errors.hpp"
#include "vamp/io.hpp"
#include "vamp/keys.hpp"
#include "vamp/ledger.hpp"
#include "vamp/manifest.hpp"
#include "vamp/merkle.hpp"
#include "vamp/provenance.hpp"
#include "vamp/receipt.hpp"
#include "vamp/timeutil.hpp"

namespace {

using namespace vamp;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

const char* kCli = VAMP_CLI_BIN;
const char* kRegistry = VAMP_REGISTRY_BIN;
const char* kCorpus = VAMP_TEST_CORPUS_DIR;

struct TempDir {
  fs::path path;
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "vamp-accept-XXXXXX").string();
    path = fs::path(mkdtemp(tmpl.data()));
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  fs::path operator/(const std::string& s) const { return path / s; }
};

struct RunResult {
  int code = -1;
  std::string out;
};

// Runs a shell command in cwd with stderr folded into stdout.
RunResult run(const std::string& cmd, const fs::path& cwd) {
  std::string full = "cd " + cwd.string() + " && { " + cmd + " ; } 2>&1";
  FILE* p = popen(full.c_str(), "r");
  RunResult r;
  if (!p) return r;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  int st = pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

void write_text(const fs::path& p, const std::string& s) {
  fs::create_directories(p.parent_path().empty() ? fs::path(".") : p.parent_path());
  std::ofstream f(p, std::ios::binary);
  f.write(s.data(), static_cast<std::streamsize>(s.size()));
}

// Registry daemon as a child process; the listen line carries the real port.
struct Daemon {
  pid_t pid = -1;
  FILE* out = nullptr;
  std::string url;

  void stop() {
    if (pid > 0) {
      kill(pid, SIGTERM);
      waitpid(pid, nullptr, 0);
      pid = -1;
    }
    if (out) {
      fclose(out);
      out = nullptr;
    }
  }
  ~Daemon() { stop(); }
};

Daemon start_registry(const fs::path& dataDir, const fs::path& trustDir) {
  int fds[2];
  if (pipe(fds) != 0) raise(Errc::io, "pipe failed");
  pid_t pid = fork();
  if (pid == 0) {
    dup2(fds[1], 1);
    dup2(fds[1], 2);
    close(fds[0]);
    close(fds[1]);
    execl(kRegistry, kRegistry, "--addr", "127.0.0.1:0", "--data-dir", dataDir.c_str(),
          "--trust-dir", trustDir.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(fds[1]);
  Daemon d;
  d.pid = pid;
  d.out = fdopen(fds[0], "r");
  char line[512];
  while (fgets(line, sizeof line, d.out)) {
    std::string s(line);
    auto pos = s.find("listening on ");
    if (pos != std::string::npos) {
      d.url = s.substr(pos + 13);
      while (!d.url.empty() && (d.url.back() == '\n' || d.url.back() == '\r')) d.url.pop_back();
      break;
    }
  }
  if (d.url.empty()) raise(Errc::io, "registry did not come up");
  httplib::Client probe(d.url);
  probe.set_connection_timeout(1);
  for (int i = 0; i < 100; ++i) {
    if (auto res = probe.Get("/v1/log/head"); res && res->status == 200) return d;
    usleep(20000);
  }
  raise(Errc::io, "registry never answered /v1/log/head");
}

std::string extract_signed_id(const std::string& signOutput) {
  auto pos = signOutput.find(" as sha2-256:");
  if (pos == std::string::npos) return {};
  std::string id = signOutput.substr(pos + 4, 9 + 64);
  return id;
}

// Independent flat tree: hash leaves with a 0x00 prefix, then fold pairs
// level by level with a 0x01 prefix, promoting an odd node unchanged.
Bytes oracle_leaf(HashAlgorithm alg, std::span<const std::uint8_t> data) {
  Hasher h(alg);
  std::uint8_t zero = 0;
  h.update({&zero, 1});
  h.update(data);
  return h.finish().value;
}

Bytes oracle_node(HashAlgorithm alg, const Bytes& l, const Bytes& r) {
  Hasher h(alg);
  std::uint8_t one = 1;
  h.update({&one, 1});
  h.update(l);
  h.update(r);
  return h.finish().value;
}

Bytes oracle_root(HashAlgorithm alg, std::vector<Bytes> level) {
  if (level.empty()) return hash_bytes(alg, {}).value;
  while (level.size() > 1) {
    std::vector<Bytes> next;
    for (std::size_t i = 0; i + 1 < level.size(); i += 2)
      next.push_back(oracle_node(alg, level[i], level[i + 1]));
    if (level.size() % 2) next.push_back(level.back());
    level = std::move(next);
  }
  return level[0];
}

// Record and box layout computed by plain byte walking, independently of the
// binding code: records tile the payload and keep their delimiter.
std::vector<std::pair<std::size_t, std::size_t>> record_ranges(const std::string& s) {
  std::vector<std::pair<std::size_t, std::size_t>> recs;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\n') {
      recs.emplace_back(start, i + 1 - start);
      start = i + 1;
    }
  }
  if (start < s.size()) recs.emplace_back(start, s.size() - start);
  return recs;
}

std::vector<std::pair<std::size_t, std::size_t>> box_ranges(const std::string& s,
                                                            std::size_t batch) {
  auto recs = record_ranges(s);
  std::vector<std::pair<std::size_t, std::size_t>> boxes;
  for (std::size_t i = 0; i < recs.size(); i += batch) {
    std::size_t len = 0;
    for (std::size_t j = i; j < std::min(i + batch, recs.size()); ++j) len += recs[j].second;
    boxes.emplace_back(recs[i].first, len);
  }
  return boxes;
}

std::size_t covering_unit(const std::vector<std::pair<std::size_t, std::size_t>>& units,
                          std::size_t offset) {
  for (std::size_t i = 0; i < units.size(); ++i)
    if (offset >= units[i].first && offset < units[i].first + units[i].second) return i;
  return units.size();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// 1. Tamper evidence: 200 random single-byte mutations of a 1 MiB dataset,
//    each caught with the exact failing unit index for every binding kind.
// ---------------------------------------------------------------------------

Outcome criterion1() {
  auto t0 = Clock::now();
  TempDir td;
  std::mt19937_64 rng(0x1001);

  std::string data;
  data.reserve(1 << 20);
  std::uint64_t row = 0;
  while (data.size() < (1u << 20)) {
    char line[64];
    std::snprintf(line, sizeof line, "row-%08llu,%016llx\n",
                  static_cast<unsigned long long>(row++),
                  static_cast<unsigned long long>(rng()));
    data += line;
  }
  data.resize(1 << 20);
  write_text(td / "data.csv", data);

  std::string V = std::string(kCli) + " ";
  if (run(V + "keygen --subject Packer --self-signed", td.path).code != 0)
    return {false, "keygen failed"};
  fs::create_directory(td / "trust");
  fs::copy_file(td / "Packer.cert", td.path / "trust" / "Packer.cert");
  if (run(V + "create data.csv --bind static --bind chunk:4096 --bind minibatch:64", td.path)
          .code != 0)
    return {false, "create failed"};
  if (run(V + "sign --manifest data.csv.manifest --key Packer.key --cert Packer.cert", td.path)
          .code != 0)
    return {false, "sign failed"};

  std::string verifyCmd = V + "verify data.csv --trust-dir trust --output json";
  RunResult clean = run(verifyCmd, td.path);
  if (clean.code != 0) return {false, "untampered file failed verification (false positive)"};

  auto chunks = [&] {
    std::vector<std::pair<std::size_t, std::size_t>> v;
    for (std::size_t off = 0; off < data.size(); off += 4096)
      v.emplace_back(off, std::min<std::size_t>(4096, data.size() - off));
    return v;
  }();
  auto boxes = box_ranges(data, 64);

  const int kMutations = 200;
  for (int i = 0; i < kMutations; ++i) {
    std::size_t off = rng() % data.size();
    char replacement;
    do {
      replacement = static_cast<char>(rng() & 0xff);
    } while (replacement == data[off]);
    std::string mutated = data;
    mutated[off] = replacement;
    write_text(td / "data.csv", mutated);

    RunResult res = run(verifyCmd, td.path);
    if (res.code != 1)
      return {false, "mutation " + std::to_string(i) + " at offset " + std::to_string(off) +
                         " exited " + std::to_string(res.code) + ", wanted 1"};

    nlohmann::json j = nlohmann::json::parse(res.out, nullptr, false);
    if (j.is_discarded()) return {false, "verify emitted unparsable JSON"};
    std::map<std::string, std::vector<std::uint64_t>> failed;
    for (const auto& b : j["bindings"]) {
      std::vector<std::uint64_t> units;
      for (const auto& u : b["failedUnits"]) units.push_back(u["unit"].get<std::uint64_t>());
      failed[b["name"].get<std::string>()] = units;
    }
    std::size_t wantChunk = covering_unit(chunks, off);
    std::size_t wantBox = covering_unit(boxes, off);
    if (failed["static"] != std::vector<std::uint64_t>{0})
      return {false, "static set did not fail on mutation at offset " + std::to_string(off)};
    if (failed["chunk:4096"] != std::vector<std::uint64_t>{wantChunk})
      return {false, "chunk set failed at the wrong unit for offset " + std::to_string(off)};
    if (failed["minibatch:64"] != std::vector<std::uint64_t>{wantBox})
      return {false, "minibatch set failed at the wrong box for offset " + std::to_string(off)};
  }

  write_text(td / "data.csv", data);
  if (run(verifyCmd, td.path).code != 0)
    return {false, "restored file no longer verifies"};

  double secs = seconds_since(t0);
  if (secs >= 60.0) return {false, "took " + std::to_string(secs) + "s, limit 60s"};
  char msg[160];
  std::snprintf(msg, sizeof msg,
                "200/200 mutations caught with exact unit indices, clean file verifies (%.1fs)",
                secs);
  return {true, msg};
}

// ---------------------------------------------------------------------------
// 2. Software and model poisoning: a source -> package -> model chain fails
//    closure verification at exactly the mutated node.
// ---------------------------------------------------------------------------

Outcome criterion2() {
  auto t0 = Clock::now();
  PrivateKey key = PrivateKey::generate(SignatureAlgorithm::ed25519);
  Certificate cert =
      issue_self_signed("Builder", key, "2020-01-01T00:00:00Z", "2040-01-01T00:00:00Z");
  TrustStore trust;
  trust.add(cert);
  std::int64_t at = parse_rfc3339_utc("2030-01-01T00:00:00Z");

  std::map<std::string, Bytes> contents;
  auto publish = [&](const std::string& objectId, ObjectType type, const std::string& body,
                     std::vector<ManifestId> origins) {
    Manifest m;
    m.objectId = objectId;
    m.objectType = type;
    m.encodingInformation = "application/octet-stream";
    m.createdAt = "2029-06-01T00:00:00Z";
    m.originManifestIds = std::move(origins);
    std::istringstream in(body);
    m.bindings.push_back(bind_static(in));
    SignedManifest env = sign_manifest(m, Format::json, key, {cert});
    ManifestId id = compute_manifest_id(m);
    contents[id.value] = Bytes(body.begin(), body.end());
    return std::pair{id, env};
  };

  auto [srcId, srcEnv] = publish("src/train.py", ObjectType::code,
                                 "def train(data):\n    return fit(data)\n", {});
  auto [pkgId, pkgEnv] =
      publish("dist/trainer-1.0.whl", ObjectType::package,
              std::string("PK\x03\x04\x00\x00compiled trainer bytes\x00\x7f", 30), {srcId});
  auto [mdlId, mdlEnv] =
      publish("models/classifier.bin", ObjectType::model,
              std::string("\x89MDL\x00weights: 0.12 0.99 -3.4\x00\x01\x02", 33), {pkgId});

  ProvenanceGraph g;
  g.add_manifest(srcEnv, trust, at);
  g.add_manifest(pkgEnv, trust, at);
  g.add_manifest(mdlEnv, trust, at);

  auto resolver_for = [&](const std::map<std::string, Bytes>& store) {
    return [&store](const ManifestId& id) -> std::optional<Bytes> {
      auto it = store.find(id.value);
      if (it == store.end()) return std::nullopt;
      return it->second;
    };
  };

  ClosureReport cleanReport = g.verify_closure(mdlId, resolver_for(contents), trust, at);
  if (!cleanReport.pass) return {false, "untampered closure failed"};
  for (const NodeReport& n : cleanReport.nodes)
    if (n.status != NodeStatus::verified) return {false, "untampered node not verified"};

  for (const ManifestId& victim : {srcId, pkgId, mdlId}) {
    std::map<std::string, Bytes> poisoned = contents;
    poisoned[victim.value][0] ^= 0x01;
    ClosureReport r = g.verify_closure(mdlId, resolver_for(poisoned), trust, at);
    if (r.pass) return {false, "poisoned " + victim.value + " passed closure"};
    std::size_t failedCount = 0;
    for (const NodeReport& n : r.nodes) {
      if (n.status == NodeStatus::failed) {
        ++failedCount;
        if (n.id != victim)
          return {false, "closure blamed " + n.id.value + " instead of " + victim.value};
      } else if (n.status != NodeStatus::verified) {
        return {false, "unexpected status for " + n.id.value};
      }
    }
    if (failedCount != 1) return {false, "closure flagged more than the mutated node"};
  }

  double secs = seconds_since(t0);
  if (secs >= 10.0) return {false, "took " + std::to_string(secs) + "s, limit 10s"};
  char msg[160];
  std::snprintf(msg, sizeof msg,
                "source/package/model chain blames exactly the mutated node (%.1fs)", secs);
  return {true, msg};
}

// ---------------------------------------------------------------------------
// 3. Canonicalization: 1,000 randomized manifests round-trip byte-stably in
//    both serializations with format-independent ids.
// ---------------------------------------------------------------------------

std::string random_string(std::mt19937_64& rng, std::size_t maxLen) {
  static const std::vector<std::string> pool = {
      "a", "b", "z", "Q", "7", "_", "-", ".", "/", " ", "\"", "\\", "\n", "\t",
      "{", "}", ":", ",", "é", "日", "π", "\U0001F40D"};
  std::size_t len = 1 + rng() % maxLen;
  std::string s;
  for (std::size_t i = 0; i < len; ++i) s += pool[rng() % pool.size()];
  return s;
}

Digest random_digest(std::mt19937_64& rng, HashAlgorithm alg) {
  Digest d;
  d.algorithm = alg;
  d.value.resize(hash_algorithm_size(alg));
  for (auto& b : d.value) b = static_cast<std::uint8_t>(rng());
  return d;
}

ManifestId random_id(std::mt19937_64& rng) {
  static const char* hex = "0123456789abcdef";
  std::string s = "sha2-256:";
  for (int i = 0; i < 64; ++i) s += hex[rng() % 16];
  return ManifestId{s};
}

Manifest random_manifest(std::mt19937_64& rng) {
  Manifest m;
  m.objectId = random_string(rng, 40);
  m.objectType = static_cast<ObjectType>(rng() % 7);
  if (rng() % 2) m.masterCopyLocator = "https://mirror.example/" + std::to_string(rng() % 100000);
  m.encodingInformation = random_string(rng, 20);
  if (rng() % 2) m.copyright = random_string(rng, 30);
  m.createdAt = format_rfc3339_utc(static_cast<std::int64_t>(rng() % 4102444800ull));
  std::size_t norigins = rng() % 4;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < norigins; ++i) {
    ManifestId id = random_id(rng);
    if (seen.insert(id.value).second) m.originManifestIds.push_back(id);
  }
  if (rng() % 2) m.transformation = random_string(rng, 30);
  std::size_t nfax = rng() % 3;
  for (std::size_t i = 0; i < nfax; ++i) {
    FacsimileRef f;
    f.manifestId = random_id(rng);
    f.relation = static_cast<FacsimileRelation>(rng() % 6);
    if (rng() % 2) f.note = random_string(rng, 20);
    m.facsimiles.push_back(f);
  }

  std::size_t nsets = 1 + rng() % 3;
  for (std::size_t i = 0; i < nsets; ++i) {
    BindingSet s;
    HashAlgorithm alg = rng() % 2 ? HashAlgorithm::sha2_256 : HashAlgorithm::sha2_512;
    s.hashAlgorithm = alg;
    s.name = "set-" + std::to_string(i) + "-" + random_string(rng, 6);
    switch (rng() % 4) {
      case 0:
        s.body = StaticBody{random_digest(rng, alg)};
        break;
      case 1: {
        FixedChunkBody b;
        b.chunkSize = 1 + rng() % 9999;
        std::size_t count = rng() % 5;
        b.totalLength = count == 0 ? 0 : (count - 1) * b.chunkSize + 1 + rng() % b.chunkSize;
        for (std::size_t c = 0; c < count; ++c) b.digests.push_back(random_digest(rng, alg));
        s.body = std::move(b);
        break;
      }
      case 2: {
        BoxBody b;
        std::uint64_t next = 0;
        std::size_t count = rng() % 4;
        for (std::size_t c = 0; c < count; ++c) {
          ChunkBox box;
          box.offset = next;
          box.length = 1 + rng() % 5000;
          box.digest = random_digest(rng, alg);
          next += box.length;
          b.boxes.push_back(std::move(box));
        }
        s.body = std::move(b);
        break;
      }
      default: {
        RecordMerkleBody b;
        b.recordDelimiter.push_back(static_cast<std::uint8_t>(rng()));
        if (rng() % 2) b.recordDelimiter.push_back(static_cast<std::uint8_t>(rng()));
        b.leafCount = rng() % 100000;
        b.root = random_digest(rng, alg);
        s.body = std::move(b);
        break;
      }
    }
    m.bindings.push_back(std::move(s));
  }
  return m;
}

Outcome criterion3() {
  auto t0 = Clock::now();
  std::mt19937_64 rng(0x3003);
  const int kCount = 1000;
  for (int i = 0; i < kCount; ++i) {
    Manifest m = random_manifest(rng);

    Bytes j1 = canonical_serialize(m, Format::json);
    ParsedManifest pj = parse_manifest(j1, Format::json);
    if (!pj.canonical) return {false, "JSON form judged non-canonical at iteration " + std::to_string(i)};
    if (canonical_serialize(pj.manifest, Format::json) != j1)
      return {false, "JSON double serialization unstable at iteration " + std::to_string(i)};

    Bytes c1 = canonical_serialize(m, Format::cbor);
    ParsedManifest pc = parse_manifest(c1, Format::cbor);
    if (!pc.canonical) return {false, "CBOR form judged non-canonical at iteration " + std::to_string(i)};
    if (canonical_serialize(pc.manifest, Format::cbor) != c1)
      return {false, "CBOR double serialization unstable at iteration " + std::to_string(i)};

    ManifestId idDirect = compute_manifest_id(m);
    if (compute_manifest_id(pj.manifest) != idDirect || compute_manifest_id(pc.manifest) != idDirect)
      return {false, "manifest id depends on the serialization at iteration " + std::to_string(i)};
    if (canonical_serialize(pc.manifest, Format::json) != j1)
      return {false, "CBOR -> JSON conversion drifted at iteration " + std::to_string(i)};
  }
  char msg[120];
  std::snprintf(msg, sizeof msg, "1000/1000 manifests byte-stable in both formats (%.1fs)",
                seconds_since(t0));
  return {true, msg};
}

// ---------------------------------------------------------------------------
// 4. Multi-minibatch bindings over one payload plus record range proofs
//    checked against the flat-tree oracle.
// ---------------------------------------------------------------------------

Outcome criterion4() {
  auto t0 = Clock::now();
  std::mt19937_64 rng(0x4004);

  std::string payload;
  for (int i = 0; i < 1000; ++i) {
    char line[48];
    std::snprintf(line, sizeof line, "rec%04d:%012llx\n", i,
                  static_cast<unsigned long long>(rng() & 0xffffffffffffull));
    payload += line;
  }
  std::span<const std::uint8_t> bytes(reinterpret_cast<const std::uint8_t*>(payload.data()),
                                      payload.size());
  for (std::uint64_t B : {16u, 64u, 256u}) {
    std::istringstream in(payload);
    BindingSet s = bind_minibatches(in, lf_delimiter(), B);
    if (!verify_binding(bytes, s).pass())
      return {false, "minibatch:" + std::to_string(B) + " did not verify"};
  }

  std::string small;
  for (int i = 0; i < 32; ++i) {
    char line[40];
    std::snprintf(line, sizeof line, "record-%02d,%08llx\n", i,
                  static_cast<unsigned long long>(rng() & 0xffffffffull));
    small += line;
  }
  auto recs = record_ranges(small);
  if (recs.size() != 32) return {false, "fixture does not have 32 records"};

  HashAlgorithm alg = HashAlgorithm::sha2_256;
  std::vector<Bytes> leaves;
  for (auto [off, len] : recs)
    leaves.push_back(oracle_leaf(
        alg, {reinterpret_cast<const std::uint8_t*>(small.data()) + off, len}));
  Bytes rootO = oracle_root(alg, leaves);

  std::istringstream in(small);
  BindingSet rm = bind_record_merkle(in, lf_delimiter());
  const auto& body = std::get<RecordMerkleBody>(rm.body);
  if (body.root.value != rootO) return {false, "bound root disagrees with the flat-tree oracle"};
  if (body.leafCount != 32) return {false, "bound leaf count wrong"};

  int proofs = 0;
  for (std::uint64_t B = 1; B <= 8; ++B) {
    for (std::uint64_t first = 0; first < 32; first += B) {
      std::uint64_t last = std::min<std::uint64_t>(first + B, 32);
      std::vector<Bytes> proof = merkle::range_proof(alg, leaves, first, last);
      std::span<const Bytes> range(leaves.data() + first, last - first);
      if (!merkle::verify_range(alg, 32, first, last, range, proof, rootO))
        return {false, "range proof [" + std::to_string(first) + "," + std::to_string(last) +
                           ") at B=" + std::to_string(B) + " does not reach the oracle root"};
      std::vector<Bytes> corrupted(range.begin(), range.end());
      corrupted[0][0] ^= 0x01;
      if (merkle::verify_range(alg, 32, first, last, corrupted, proof, rootO))
        return {false, "corrupted range accepted at B=" + std::to_string(B)};
      ++proofs;
    }
  }

  char msg[160];
  std::snprintf(msg, sizeof msg,
                "B in {16,64,256} verify; %d range proofs match the flat-tree oracle (%.1fs)",
                proofs, seconds_since(t0));
  return {true, msg};
}

// ---------------------------------------------------------------------------
// 5. Ledger soundness: exhaustive inclusion/consistency against the oracle
//    for sizes up to 64, fork rejection, offline receipts.
// ---------------------------------------------------------------------------

Outcome criterion5() {
  auto t0 = Clock::now();
  TempDir td;
  HashAlgorithm alg = HashAlgorithm::sha2_256;
  PrivateKey logKey = PrivateKey::generate(SignatureAlgorithm::ed25519);
  MerkleLog log(td / "ledger", logKey);
  Bytes pub = log.public_key();

  std::vector<Bytes> entries, leaves;
  std::vector<Receipt> appendReceipts;
  for (int i = 0; i < 64; ++i) {
    std::string e = "ledger entry " + std::to_string(i);
    entries.emplace_back(e.begin(), e.end());
    leaves.push_back(oracle_leaf(alg, entries.back()));
    appendReceipts.push_back(log.append(entries.back()));
  }
  auto rootAt = [&](std::uint64_t s) {
    return oracle_root(alg, std::vector<Bytes>(leaves.begin(), leaves.begin() + s));
  };

  for (std::uint64_t s = 1; s <= 64; ++s) {
    Bytes want = rootAt(s);
    if (log.head_at(s).rootHash.value != want)
      return {false, "head root at size " + std::to_string(s) + " disagrees with the oracle"};
    for (std::uint64_t q = 0; q < s; ++q) {
      Receipt r = log.prove_inclusion(q, s);
      std::vector<Bytes> path;
      for (const Digest& d : r.auditPath) path.push_back(d.value);
      if (!merkle::verify_inclusion(alg, leaves[q], q, s, path, want))
        return {false, "inclusion proof " + std::to_string(q) + "/" + std::to_string(s) +
                           " fails against the oracle root"};
      if (!verify_receipt(r, pub))
        return {false, "receipt " + std::to_string(q) + "/" + std::to_string(s) +
                           " does not verify offline"};
    }
  }

  for (std::uint64_t older = 1; older <= 64; ++older) {
    for (std::uint64_t newer = older; newer <= 64; ++newer) {
      std::vector<Bytes> proof;
      for (const Digest& d : log.prove_consistency(older, newer)) proof.push_back(d.value);
      if (!merkle::verify_consistency(alg, older, newer, rootAt(older), rootAt(newer), proof))
        return {false, "consistency " + std::to_string(older) + "->" + std::to_string(newer) +
                           " fails against the oracle roots"};
    }
  }

  for (std::uint64_t k = 0; k < 64; ++k) {
    std::vector<Bytes> forked = leaves;
    Bytes tampered = entries[k];
    tampered[0] ^= 0x01;
    forked[k] = oracle_leaf(alg, tampered);
    Bytes forkedRoot = oracle_root(alg, forked);
    std::uint64_t older = k + 1;
    std::vector<Bytes> proof = merkle::consistency_proof(alg, forked, older, 64);
    if (merkle::verify_consistency(alg, older, 64, rootAt(older), forkedRoot, proof))
      return {false, "fork with entry " + std::to_string(k) + " replaced was accepted"};
  }

  for (const Receipt& r : appendReceipts)
    if (!verify_receipt(r, pub)) return {false, "append receipt failed offline verification"};
  Receipt bent = appendReceipts[10];
  bent.sequence = 11;
  if (verify_receipt(bent, pub)) return {false, "doctored receipt accepted"};

  double secs = seconds_since(t0);
  if (secs >= 30.0) return {false, "took " + std::to_string(secs) + "s, limit 30s"};
  char msg[180];
  std::snprintf(msg, sizeof msg,
                "2080 inclusion + 2080 consistency proofs match the oracle, 64 forks rejected, "
                "receipts verify offline (%.1fs)",
                secs);
  return {true, msg};
}

// ---------------------------------------------------------------------------
// 6. Pipeline end to end through the tools, with a registry restart in the
//    middle and a poisoned ancestor at the end.
// ---------------------------------------------------------------------------

Outcome criterion6() {
  auto t0 = Clock::now();
  TempDir td;
  std::string V = std::string(kCli) + " ";

  if (run(V + "keygen --subject Root --self-signed", td.path).code != 0)
    return {false, "root keygen failed"};
  if (run(V + "keygen --subject Trainer --issuer-key Root.key --issuer-cert Root.cert", td.path)
          .code != 0)
    return {false, "leaf keygen failed"};
  fs::create_directory(td / "trust");
  fs::copy_file(td / "Root.cert", td.path / "trust" / "Root.cert");

  std::string train, val;
  std::mt19937_64 rng(0x6006);
  for (int i = 0; i < 200; ++i)
    train += "t" + std::to_string(i) + "," + std::to_string(rng() % 1000) + "\n";
  for (int i = 0; i < 50; ++i)
    val += "v" + std::to_string(i) + "," + std::to_string(rng() % 1000) + "\n";
  write_text(td / "data" / "train.csv", train);
  write_text(td / "data" / "val.csv", val);
  write_text(td / "code" / "train.py", "import sgd\n\nsgd.fit('data/train.csv')\n");

  Daemon reg = start_registry(td / "regdata", td / "trust");

  auto stage = [&](const std::string& path, const std::string& type, const std::string& binds,
                   const std::string& origins) -> std::string {
    if (run(V + "create " + path + " --object-id " + path + " --type " + type + " " + binds +
                origins,
            td.path)
            .code != 0)
      return {};
    RunResult s = run(V + "sign --manifest " + path + ".manifest --key Trainer.key "
                          "--cert Trainer.cert --cert Root.cert",
                      td.path);
    if (s.code != 0) return {};
    if (run(V + "publish --envelope " + path + ".man --registry " + reg.url, td.path).code != 0)
      return {};
    return extract_signed_id(s.out);
  };

  std::string trainId = stage("data/train.csv", "dataset", "--bind static --bind minibatch:16", "");
  std::string valId = stage("data/val.csv", "dataset", "--bind static", "");
  std::string codeId = stage("code/train.py", "code", "--bind static", "");
  if (trainId.empty() || valId.empty() || codeId.empty())
    return {false, "staging an input manifest failed"};

  // Restart the registry mid-pipeline; everything published so far must
  // still be served afterwards.
  reg.stop();
  Daemon reg2 = start_registry(td / "regdata", td / "trust");

  write_text(td / "models" / "model.bin",
             std::string("\x7fMDL\x00trained weights \x01\x02\x03\n", 24));
  if (run(V + "create models/model.bin --object-id models/model.bin --type model "
              "--origin " + trainId + " --origin " + valId + " --origin " + codeId +
              " --transformation \"sgd training run\"",
          td.path)
          .code != 0)
    return {false, "model create failed"};
  RunResult ms = run(V + "sign --manifest models/model.bin.manifest --key Trainer.key "
                         "--cert Trainer.cert --cert Root.cert",
                     td.path);
  if (ms.code != 0) return {false, "model sign failed"};
  if (run(V + "publish --envelope models/model.bin.man --registry " + reg2.url, td.path).code != 0)
    return {false, "model publish failed after restart (records lost?)"};

  std::string closureCmd =
      V + "verify models/model.bin --closure --trust-dir trust --registry " + reg2.url;
  RunResult good = run(closureCmd, td.path);
  if (good.code != 0) return {false, "clean closure verification failed:\n" + good.out};

  std::string poisoned = train;
  poisoned[17] ^= 0x20;
  write_text(td / "data" / "train.csv", poisoned);
  RunResult bad = run(closureCmd, td.path);
  if (bad.code != 1)
    return {false, "poisoned closure exited " + std::to_string(bad.code) + ", wanted 1"};
  if (bad.out.find(trainId) == std::string::npos || bad.out.find("FAILED") == std::string::npos)
    return {false, "poisoned ancestor not named in the report"};

  reg2.stop();
  char msg[160];
  std::snprintf(msg, sizeof msg,
                "keygen/create/sign/publish/verify pipeline survives a registry restart and "
                "names the poisoned ancestor (%.1fs)",
                seconds_since(t0));
  return {true, msg};
}

// ---------------------------------------------------------------------------
// 7. Container bit-exactness against committed fixtures plus the sidecar
//    naming rule, end to end.
// ---------------------------------------------------------------------------

Outcome criterion7() {
  auto t0 = Clock::now();
  fs::path corpus(kCorpus);
  Bytes payload = read_file(corpus / "payload_3line.csv");
  Bytes envJson = read_file(corpus / "golden_envelope.json");
  Bytes envCbor = read_file(corpus / "golden_envelope.cbor");
  std::string goldenId(reinterpret_cast<const char*>(read_file(corpus / "golden_manifest.id").data()),
                       read_file(corpus / "golden_manifest.id").size());
  std::string locator = "https://registry.example/v1/manifests/" + goldenId;

  SignedManifest ej = parse_envelope(envJson, Format::json);
  SignedManifest ec = parse_envelope(envCbor, Format::cbor);

  if (embed_manifest(payload, ej, ContainerKind::text) !=
      read_file(corpus / "golden_container_text.vamp"))
    return {false, "text container bytes drifted from the committed fixture"};
  if (embed_manifest(payload, ec, ContainerKind::binary) !=
      read_file(corpus / "golden_container_binary.vamp"))
    return {false, "binary container bytes drifted from the committed fixture"};
  if (write_detached_stub(payload, locator, Format::json, ContainerKind::text) !=
      read_file(corpus / "golden_stub_text.vamp"))
    return {false, "text stub bytes drifted from the committed fixture"};
  if (write_detached_stub(payload, locator, Format::json, ContainerKind::binary) !=
      read_file(corpus / "golden_stub_binary.vamp"))
    return {false, "binary stub bytes drifted from the committed fixture"};

  for (const char* name : {"golden_container_text.vamp", "golden_container_binary.vamp"}) {
    Bytes file = read_file(corpus / name);
    ContainerHeader h = extract(file);
    auto got = payload_of(h, file);
    if (Bytes(got.begin(), got.end()) != payload)
      return {false, std::string(name) + " payload did not round-trip"};
    Manifest m = parse_manifest(h.envelope->payload, h.envelope->serialization).manifest;
    for (const BindingSet& b : m.bindings)
      if (!verify_binding(got, b).pass())
        return {false, std::string(name) + " bindings no longer match the payload"};
  }

  if (detached_manifest_path("data/training.csv") != fs::path("data/training.csv.man"))
    return {false, "sidecar naming rule broken"};

  TempDir td;
  std::string V = std::string(kCli) + " ";
  write_text(td / "data" / "training.csv", "1,2\n3,4\n5,6\n");
  if (run(V + "keygen --subject Archivist --self-signed", td.path).code != 0)
    return {false, "keygen failed"};
  fs::create_directory(td / "trust");
  fs::copy_file(td / "Archivist.cert", td.path / "trust" / "Archivist.cert");
  if (run(V + "create data/training.csv", td.path).code != 0) return {false, "create failed"};
  if (run(V + "sign --manifest data/training.csv.manifest --key Archivist.key "
              "--cert Archivist.cert",
          td.path)
          .code != 0)
    return {false, "sign failed"};
  if (!fs::exists(td.path / "data" / "training.csv.man"))
    return {false, "sign did not produce data/training.csv.man"};
  RunResult v = run(V + "verify data/training.csv --trust-dir trust", td.path);
  if (v.code != 0 || v.out.find("detached-local") == std::string::npos)
    return {false, "sidecar was not picked up by verification"};

  char msg[160];
  std::snprintf(msg, sizeof msg,
                "golden containers bit-exact, round-trips intact, sidecar naming verbatim (%.1fs)",
                seconds_since(t0));
  return {true, msg};
}

}  // namespace

int main() {
  struct Row {
    int number;
    const char* name;
    Outcome (*fn)();
  };
  const Row rows[] = {
      {1, "tamper evidence", &criterion1},
      {2, "software and model poisoning", &criterion2},
      {3, "canonicalization", &criterion3},
      {4, "minibatch and range proofs", &criterion4},
      {5, "ledger soundness", &criterion5},
      {6, "pipeline end to end", &criterion6},
      {7, "container bit-exactness", &criterion7},
  };

  int failures = 0;
  for (const Row& row : rows) {
    Outcome o;
    try {
      o = row.fn();
    } catch (const std::exception& e) {
      o = {false, std::string("unhandled error: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s  %d  %-30s %s\n", o.pass ? "PASS" : "FAIL", row.number, row.name,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failures;
}
