// Command line front end. Every cryptographic and verification decision lives
// in the library headers; this file parses flags, moves bytes between files
// and the registry, and renders reports.
//
// Exit codes are a stable contract for pipeline use:
//   0  success
//   1  verification failure (signatures, bindings, closure, missing manifest)
//   2  usage error
//   3  environment or IO problem (unreadable files, unreachable registry)

#include <CLI11.hpp>

#include <cstdlib>
#include <cstring>
#include <deque>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "vamp/binding.hpp"
#include "vamp/canonical.hpp"
#include "vamp/certificate.hpp"
#include "vamp/container.hpp"
#include "vamp/envelope.hpp"
#include "vamp/errors.hpp"
#include "vamp/io.hpp"
#include "vamp/keys.hpp"
#include "vamp/manifest.hpp"
#include "vamp/provenance.hpp"
#include "vamp/receipt.hpp"
#include "vamp/registry.hpp"
#include "vamp/timeutil.hpp"

namespace {

using namespace vamp;
namespace fs = std::filesystem;

constexpr int kOk = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;
constexpr int kEnv = 3;

// Raised for problems that are really command line mistakes discovered after
// CLI11 has finished parsing (a malformed --bind spec, say).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code_for(const Error& e) { return e.code() == Errc::io ? kEnv : kFail; }

std::string env_or(const char* name, const std::string& fallback = {}) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

// Flag beats environment beats nothing.
std::string pick(const std::string& flag, const char* envName) {
  return flag.empty() ? env_or(envName) : flag;
}

std::string normalize_registry_url(std::string url) {
  if (url.find("://") == std::string::npos) url = "http://" + url;
  return url;
}

TrustStore load_trust(const std::string& flagValue) {
  std::string dir = pick(flagValue, "VAMP_TRUST_DIR");
  if (dir.empty())
    raise(Errc::io, "no trust directory configured; pass --trust-dir or set VAMP_TRUST_DIR");
  if (!fs::is_directory(dir))
    raise(Errc::io, "trust directory " + dir + " does not exist");
  return TrustStore::from_directory(dir);
}

// Reads an object file and strips any container framing. Binding sets always
// cover the payload, never the header that carries the manifest.
struct LoadedObject {
  Bytes file;
  ContainerHeader header;
  std::span<const std::uint8_t> payload() const { return payload_of(header, file); }
};

LoadedObject load_object(const fs::path& p) {
  LoadedObject o;
  o.file = read_file(p);
  o.header = extract(o.file);
  return o;
}

std::uint64_t parse_positive(const std::string& text, const std::string& what) {
  std::uint64_t n = 0;
  try {
    std::size_t used = 0;
    n = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
  } catch (const std::exception&) {
    throw UsageError(what + " wants a positive integer, got '" + text + "'");
  }
  if (n == 0) throw UsageError(what + " must be at least 1");
  return n;
}

BindingSet make_binding(const std::string& spec, std::istream& in, HashAlgorithm alg) {
  if (spec == "static") return bind_static(in, alg);
  if (spec == "record-merkle") return bind_record_merkle(in, lf_delimiter(), alg);
  if (spec.rfind("chunk:", 0) == 0)
    return bind_fixed_chunks(in, parse_positive(spec.substr(6), "--bind chunk:N"), alg);
  if (spec.rfind("minibatch:", 0) == 0)
    return bind_minibatches(in, lf_delimiter(),
                            parse_positive(spec.substr(10), "--bind minibatch:N"), alg);
  throw UsageError("unknown binding spec '" + spec +
                   "'; expected static, chunk:N, minibatch:N or record-merkle");
}

ManifestId parse_id_arg(const std::string& text, const std::string& flag) {
  if (!ManifestId::well_formed(text))
    throw UsageError(flag + " wants a manifest id of the form sha2-256:<64 hex digits>");
  return ManifestId{text};
}

// MANIFEST_ID:RELATION[:NOTE]. The id itself contains one colon, so the
// relation starts after the second.
FacsimileRef parse_facsimile_arg(const std::string& text) {
  auto p1 = text.find(':');
  auto p2 = p1 == std::string::npos ? std::string::npos : text.find(':', p1 + 1);
  if (p2 == std::string::npos)
    throw UsageError("--facsimile wants MANIFEST_ID:RELATION[:NOTE]");
  FacsimileRef r;
  r.manifestId = parse_id_arg(text.substr(0, p2), "--facsimile");
  std::string rest = text.substr(p2 + 1);
  auto p3 = rest.find(':');
  std::string relation = rest.substr(0, p3);
  try {
    r.relation = facsimile_relation_from_name(relation);
  } catch (const Error&) {
    throw UsageError("unknown facsimile relation '" + relation +
                     "'; expected split-of, rebinding, subsample, oversample, "
                     "same-content or other");
  }
  if (p3 != std::string::npos) r.note = rest.substr(p3 + 1);
  return r;
}

void require_fresh(const fs::path& p, bool force) {
  if (!force && fs::exists(p))
    raise(Errc::io, p.string() + " already exists; pass --force to overwrite");
}

// sign and publish drop a copy of the envelope into the local provenance
// store when one is configured, so trace and closure checks can work offline.
void maybe_store(const SignedManifest& env, const std::string& storeDirFlag) {
  std::string dir = pick(storeDirFlag, "VAMP_STORE_DIR");
  if (dir.empty()) return;
  ProvenanceStore store((fs::path(dir)));
  ManifestId id = store.put(env);
  std::cout << "stored in " << (fs::path(dir) / (id.value + ".env")).string() << "\n";
}

void print_json(const canonical::Value& v) {
  Bytes b = canonical::to_canonical_json(v);
  std::cout.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
  std::cout << "\n";
}

// ---------------------------------------------------------------------------
// keygen
// ---------------------------------------------------------------------------

struct KeygenArgs {
  std::string subject;
  std::string algorithm = "ed25519";
  std::string notBefore, notAfter;
  std::string keyOut, certOut;
  std::string issuerKey, issuerCert;
  bool selfSigned = false;
  bool force = false;
};

int cmd_keygen(const KeygenArgs& a) {
  bool issuerGiven = !a.issuerKey.empty() || !a.issuerCert.empty();
  if (a.selfSigned == issuerGiven)
    throw UsageError("choose exactly one of --self-signed or --issuer-key with --issuer-cert");
  if (issuerGiven && (a.issuerKey.empty() || a.issuerCert.empty()))
    throw UsageError("--issuer-key and --issuer-cert go together");

  std::int64_t now = parse_rfc3339_utc(now_rfc3339_utc());
  std::string nb = a.notBefore.empty() ? format_rfc3339_utc(now) : a.notBefore;
  std::string na = a.notAfter.empty() ? format_rfc3339_utc(now + 10LL * 365 * 86400) : a.notAfter;

  PrivateKey key = PrivateKey::generate(signature_algorithm_from_name(a.algorithm));
  Certificate cert;
  if (a.selfSigned) {
    cert = issue_self_signed(a.subject, key, nb, na);
  } else {
    PrivateKey issuer = PrivateKey::load(a.issuerKey);
    Certificate issuerCert = parse_certificate(read_file(a.issuerCert), Format::json);
    cert = issue_certificate(a.subject, key.public_key(), nb, na, issuer, issuerCert, now);
  }

  fs::path keyPath = a.keyOut.empty() ? fs::path(a.subject + ".key") : fs::path(a.keyOut);
  fs::path certPath = a.certOut.empty() ? fs::path(a.subject + ".cert") : fs::path(a.certOut);
  require_fresh(keyPath, a.force);
  require_fresh(certPath, a.force);
  key.save(keyPath);
  write_file(certPath, serialize_certificate(cert, Format::json));

  std::cout << "key:         " << keyPath.string() << " (" << a.algorithm << ", owner-only)\n"
            << "certificate: " << certPath.string() << " (subject " << cert.subject << ", issuer "
            << cert.issuer << ", valid " << nb << " to " << na << ")\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// create
// ---------------------------------------------------------------------------

struct CreateArgs {
  std::string object;
  std::string objectId;
  std::string type = "dataset";
  std::string encoding = "application/octet-stream";
  std::string createdAt;
  std::string hash = "sha2-256";
  std::vector<std::string> binds;
  std::vector<std::string> origins;
  std::vector<std::string> facsimiles;
  std::string masterCopy, copyrightText, transformation;
  std::string out;
};

int cmd_create(const CreateArgs& a) {
  LoadedObject obj = load_object(a.object);
  auto payload = obj.payload();
  HashAlgorithm alg = hash_algorithm_from_name(a.hash);

  std::vector<std::string> specs = a.binds.empty() ? std::vector<std::string>{"static"} : a.binds;
  std::string data(payload.begin(), payload.end());
  std::vector<BindingSet> sets;
  std::set<std::string> names;
  for (const std::string& spec : specs) {
    std::istringstream in(data);
    BindingSet s = make_binding(spec, in, alg);
    if (!names.insert(s.name).second)
      throw UsageError("duplicate binding set '" + s.name + "'");
    sets.push_back(std::move(s));
  }

  Manifest m;
  m.objectId = a.objectId.empty() ? fs::path(a.object).generic_string() : a.objectId;
  m.objectType = object_type_from_name(a.type);
  m.encodingInformation = a.encoding;
  m.createdAt = a.createdAt.empty() ? now_rfc3339_utc() : a.createdAt;
  if (!a.masterCopy.empty()) m.masterCopyLocator = a.masterCopy;
  if (!a.copyrightText.empty()) m.copyright = a.copyrightText;
  if (!a.transformation.empty()) m.transformation = a.transformation;
  for (const std::string& o : a.origins)
    m.originManifestIds.push_back(parse_id_arg(o, "--origin"));
  for (const std::string& f : a.facsimiles) m.facsimiles.push_back(parse_facsimile_arg(f));
  m.bindings = std::move(sets);

  fs::path dest = a.out.empty() ? fs::path(a.object + ".manifest") : fs::path(a.out);
  write_file(dest, canonical_serialize(m, Format::json));

  std::cout << "manifest:    " << dest.string() << "\n"
            << "object id:   " << m.objectId << " (" << object_type_name(m.objectType) << ")\n"
            << "manifest id: " << compute_manifest_id(m).value << "\n"
            << "bindings:    ";
  for (std::size_t i = 0; i < m.bindings.size(); ++i)
    std::cout << (i ? ", " : "") << m.bindings[i].name;
  std::cout << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// sign
// ---------------------------------------------------------------------------

struct SignArgs {
  std::string manifest;
  std::string key;
  std::vector<std::string> certs;
  std::string format = "json";
  std::string out;
  std::string storeDir;
};

fs::path default_envelope_path(const fs::path& manifestPath) {
  std::string s = manifestPath.string();
  const std::string suffix = ".manifest";
  if (s.size() > suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0)
    s.resize(s.size() - suffix.size());
  return fs::path(s + ".man");
}

int cmd_sign(const SignArgs& a) {
  Bytes mbytes = read_file(a.manifest);
  Format mf = !mbytes.empty() && mbytes[0] == '{' ? Format::json : Format::cbor;
  Manifest m = parse_manifest(mbytes, mf).manifest;

  PrivateKey key = PrivateKey::load(a.key);
  std::vector<Certificate> chain;
  for (const std::string& c : a.certs)
    chain.push_back(parse_certificate(read_file(c), Format::json));

  SignedManifest env =
      sign_manifest(m, a.format == "cbor" ? Format::cbor : Format::json, key, chain);
  fs::path dest = a.out.empty() ? default_envelope_path(a.manifest) : fs::path(a.out);
  write_file(dest, serialize_envelope(env));

  std::cout << "signed " << m.objectId << " as " << compute_manifest_id(m).value << "\n"
            << "envelope: " << dest.string() << " (" << a.format << ", signer "
            << chain.front().subject << ")\n";
  maybe_store(env, a.storeDir);
  return kOk;
}

// ---------------------------------------------------------------------------
// embed / extract
// ---------------------------------------------------------------------------

struct EmbedArgs {
  std::string object;
  std::string envelope;
  std::string kind = "auto";
  std::string out;
};

int cmd_embed(const EmbedArgs& a) {
  LoadedObject obj = load_object(a.object);
  auto payload = obj.payload();
  SignedManifest env = parse_envelope_sniffed(read_file(a.envelope));

  ContainerKind kind;
  if (a.kind == "text")
    kind = ContainerKind::text;
  else if (a.kind == "binary")
    kind = ContainerKind::binary;
  else
    kind = std::memchr(payload.data(), 0, payload.size()) ? ContainerKind::binary
                                                          : ContainerKind::text;

  Bytes wire = embed_manifest(payload, env, kind);
  fs::path dest = a.out.empty() ? fs::path(a.object) : fs::path(a.out);
  write_file(dest, wire);
  std::cout << "embedded manifest into " << dest.string() << " ("
            << (kind == ContainerKind::text ? "text" : "binary") << " container, payload "
            << payload.size() << " bytes)\n";
  return kOk;
}

struct ExtractArgs {
  std::string object;
  std::string out;
};

int cmd_extract(const ExtractArgs& a) {
  LoadedObject obj = load_object(a.object);
  switch (obj.header.type) {
    case ContainerHeader::Type::embedded: {
      fs::path dest = a.out.empty() ? detached_manifest_path(a.object) : fs::path(a.out);
      write_file(dest, obj.header.envelopeBytes);
      std::cout << "wrote embedded manifest (" << format_name(obj.header.serialization) << ", "
                << obj.header.envelopeBytes.size() << " bytes) to " << dest.string() << "\n";
      return kOk;
    }
    case ContainerHeader::Type::detached:
      if (!a.out.empty())
        raise(Errc::manifest_not_found,
              "object holds only a locator stub (" + *obj.header.locator +
                  "), there is no embedded manifest to write");
      std::cout << "detached manifest stub; manifest lives at " << *obj.header.locator << "\n";
      return kOk;
    default:
      raise(Errc::manifest_not_found, "no manifest framing in " + a.object);
  }
}

// ---------------------------------------------------------------------------
// publish
// ---------------------------------------------------------------------------

struct PublishArgs {
  std::string envelope;
  std::string registry;
  std::string output = "human";
  std::string storeDir;
};

int cmd_publish(const PublishArgs& a) {
  std::string url = pick(a.registry, "VAMP_REGISTRY_ADDR");
  if (url.empty())
    throw UsageError("no registry address; pass --registry or set VAMP_REGISTRY_ADDR");

  RegistryClient client(normalize_registry_url(url));
  Bytes bytes = read_file(a.envelope);
  RegistryClient::PublishResult r = client.publish(bytes);

  fs::path rcpt = fs::path(a.envelope + ".rcpt");
  write_file(rcpt, serialize_receipt(r.receipt, Format::json));

  if (a.output == "json") {
    canonical::Map out;
    out.emplace("created", r.created);
    out.emplace("manifestId", r.id.value);
    out.emplace("publishedAt", r.publishedAt);
    out.emplace("receipt", receipt_to_value(r.receipt, Format::json));
    out.emplace("receiptPath", rcpt.string());
    print_json(canonical::Value(std::move(out)));
  } else {
    std::cout << "published " << r.id.value << "\n"
              << "  sequence " << r.receipt.sequence << " at " << r.publishedAt
              << (r.created ? "" : " (already present)") << "\n"
              << "  receipt: " << rcpt.string() << "\n";
  }
  maybe_store(parse_envelope_sniffed(bytes), a.storeDir);
  return kOk;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct VerifyArgs {
  std::string object;
  std::string manifest;
  std::string set;
  bool closure = false;
  bool permissive = false;
  std::string output = "human";
  std::string at;
  std::string registry, trustDir, storeDir;
  std::string contentDir = ".";
};

// Walks origin references breadth-first, pulling ancestor envelopes from the
// local store first and the registry second. Nodes that cannot be fetched are
// left out; closure checking reports them as unresolved.
void collect_ancestors(ProvenanceGraph& g, std::map<std::string, Manifest>& manifests,
                       const Manifest& target, const ManifestId& targetId,
                       ProvenanceStore* store, RegistryClient* registry) {
  std::deque<ManifestId> queue(target.originManifestIds.begin(), target.originManifestIds.end());
  std::set<std::string> seen{targetId.value};
  while (!queue.empty()) {
    ManifestId id = queue.front();
    queue.pop_front();
    if (!seen.insert(id.value).second) continue;

    std::optional<SignedManifest> env;
    if (store) env = store->get(id);
    if (!env && registry) {
      if (std::optional<RegistryRecord> rec = registry->fetch(id))
        env = parse_envelope_sniffed(rec->envelopeBytes);
    }
    if (!env) continue;

    try {
      Manifest m = parse_manifest(env->payload, env->serialization).manifest;
      if (compute_manifest_id(m) != id) continue;  // mislabeled copy, treat as missing
      g.insert_node(id, *env);
      manifests.emplace(id.value, m);
      for (const ManifestId& o : m.originManifestIds) queue.push_back(o);
    } catch (const Error&) {
      // unusable envelope; the node stays unresolved in the report
    }
  }
}

int cmd_verify(const VerifyArgs& a) {
  TrustStore trust = load_trust(a.trustDir);
  std::int64_t at = a.at.empty() ? parse_rfc3339_utc(now_rfc3339_utc()) : parse_rfc3339_utc(a.at);

  LoadedObject obj = load_object(a.object);
  auto payload = obj.payload();

  std::optional<RegistryClient> registry;
  std::string url = pick(a.registry, "VAMP_REGISTRY_ADDR");
  if (!url.empty()) registry.emplace(normalize_registry_url(url));

  SignedManifest env;
  std::string source;
  bool sidecarIgnored = false;
  if (!a.manifest.empty()) {
    env = parse_envelope_sniffed(read_file(a.manifest));
    source = "explicit";
  } else {
    ResolvedManifest r = resolve_manifest(a.object, registry ? &*registry : nullptr);
    env = std::move(r.envelope);
    source = resolved_source_name(r.source);
    sidecarIgnored = r.sidecarIgnored;
  }

  bool pass = true;
  canonical::Map report;
  report.emplace("object", a.object);
  report.emplace("source", source);

  std::string signer, signatureState = "ok";
  std::optional<Manifest> manifest;
  try {
    signer = verify_signed_manifest(env, trust, at).signer;
    manifest = parse_manifest(env.payload, env.serialization).manifest;
  } catch (const Error& e) {
    pass = false;
    signatureState = e.what();
  }
  report.emplace("signature", signatureState);
  report.emplace("signer", signer);

  canonical::Array bindingRows;
  canonical::Map closureMap;
  closureMap.emplace("checked", false);
  closureMap.emplace("nodes", canonical::Array{});
  closureMap.emplace("pass", true);
  closureMap.emplace("policy", std::string(a.permissive ? "permissive" : "strict"));
  ManifestId id;
  std::vector<std::string> humanLines;

  if (manifest) {
    id = compute_manifest_id(*manifest);
    report.emplace("manifestId", id.value);
    report.emplace("objectId", manifest->objectId);

    std::vector<const BindingSet*> sets;
    if (a.set.empty()) {
      for (const BindingSet& b : manifest->bindings) sets.push_back(&b);
    } else {
      for (const BindingSet& b : manifest->bindings)
        if (b.name == a.set) sets.push_back(&b);
      if (sets.empty()) {
        pass = false;
        humanLines.push_back("binding " + a.set + ": FAIL");
        humanLines.push_back("  no binding set named '" + a.set + "' in the manifest");
        canonical::Map row;
        row.emplace("failedUnits", canonical::Array{});
        row.emplace("name", a.set);
        row.emplace("pass", false);
        row.emplace("structural",
                    canonical::Array{canonical::Value("no binding set with this name")});
        bindingRows.push_back(canonical::Value(std::move(row)));
      }
    }

    for (const BindingSet* b : sets) {
      BindingReport br = verify_binding(payload, *b);
      if (!br.pass()) pass = false;
      humanLines.push_back("binding " + b->name + (br.pass() ? ": ok" : ": FAIL"));
      canonical::Array failed;
      for (const BindingIssue& issue : br.failedUnits) {
        humanLines.push_back("  unit " + std::to_string(issue.unit) + ": " + issue.reason);
        canonical::Map fm;
        fm.emplace("reason", issue.reason);
        fm.emplace("unit", issue.unit);
        failed.push_back(canonical::Value(std::move(fm)));
      }
      canonical::Array structural;
      for (const std::string& s : br.structural) {
        humanLines.push_back("  " + s);
        structural.push_back(canonical::Value(s));
      }
      canonical::Map row;
      row.emplace("failedUnits", std::move(failed));
      row.emplace("name", b->name);
      row.emplace("pass", br.pass());
      row.emplace("structural", std::move(structural));
      bindingRows.push_back(canonical::Value(std::move(row)));
    }

    if (a.closure) {
      std::optional<ProvenanceStore> store;
      std::string storeDir = pick(a.storeDir, "VAMP_STORE_DIR");
      if (!storeDir.empty()) store.emplace(storeDir);

      ProvenanceGraph g;
      std::map<std::string, Manifest> manifests;
      g.insert_node(id, env);
      manifests.emplace(id.value, *manifest);
      collect_ancestors(g, manifests, *manifest, id, store ? &*store : nullptr,
                        registry ? &*registry : nullptr);

      auto resolver = [&](const ManifestId& node) -> std::optional<Bytes> {
        if (node == id) return Bytes(payload.begin(), payload.end());
        auto it = manifests.find(node.value);
        if (it == manifests.end()) return std::nullopt;
        fs::path p = fs::path(a.contentDir) / it->second.objectId;
        if (!fs::is_regular_file(p)) return std::nullopt;
        try {
          LoadedObject ancestor = load_object(p);
          auto span = ancestor.payload();
          return Bytes(span.begin(), span.end());
        } catch (const Error&) {
          return std::nullopt;
        }
      };

      ClosureOptions opts;
      opts.policy = a.permissive ? ClosurePolicy::permissive : ClosurePolicy::strict;
      if (!a.set.empty()) opts.requiredSet = a.set;
      ClosureReport cr = g.verify_closure(id, resolver, trust, at, opts);
      if (!cr.pass) pass = false;

      humanLines.push_back(std::string("closure (") +
                           (a.permissive ? "permissive" : "strict") +
                           (cr.pass ? "): ok" : "): FAIL"));
      canonical::Array nodeRows;
      for (const NodeReport& n : cr.nodes) {
        std::string line = "  " + n.id.value + "  " + std::string(node_status_name(n.status));
        if (!n.detail.empty()) line += "  (" + n.detail + ")";
        humanLines.push_back(line);
        canonical::Map nm;
        nm.emplace("detail", n.detail);
        nm.emplace("id", n.id.value);
        nm.emplace("status", std::string(node_status_name(n.status)));
        nodeRows.push_back(canonical::Value(std::move(nm)));
      }
      closureMap["checked"] = true;
      closureMap["nodes"] = std::move(nodeRows);
      closureMap["pass"] = cr.pass;
    }
  } else {
    report.emplace("manifestId", std::string());
    report.emplace("objectId", std::string());
  }

  report.emplace("bindings", std::move(bindingRows));
  report.emplace("closure", std::move(closureMap));
  report.emplace("pass", pass);

  if (a.output == "json") {
    print_json(canonical::Value(std::move(report)));
  } else {
    std::cout << "object:    " << a.object << "\n";
    if (manifest) {
      std::cout << "manifest:  " << id.value << " (" << source << ")\n"
                << "object id: " << manifest->objectId << "\n";
    } else {
      std::cout << "manifest:  (" << source << ")\n";
    }
    std::cout << "signature: " << signatureState;
    if (!signer.empty()) std::cout << " (signer " << signer << ")";
    std::cout << "\n";
    if (sidecarIgnored)
      std::cout << "note:      embedded manifest used; a sidecar file was ignored\n";
    for (const std::string& line : humanLines) std::cout << line << "\n";
    std::cout << "result:    " << (pass ? "ok" : "FAIL") << "\n";
  }
  return pass ? kOk : kFail;
}

// ---------------------------------------------------------------------------
// trace
// ---------------------------------------------------------------------------

struct TraceArgs {
  std::string id;
  std::string direction = "ancestors";
  std::string format = "ids";
  std::string storeDir;
};

int cmd_trace(const TraceArgs& a) {
  std::string dir = pick(a.storeDir, "VAMP_STORE_DIR");
  if (dir.empty())
    raise(Errc::io, "no provenance store configured; pass --store-dir or set VAMP_STORE_DIR");
  if (!fs::is_directory(dir)) raise(Errc::io, "provenance store " + dir + " does not exist");

  ProvenanceStore store((fs::path(dir)));
  ProvenanceGraph g;
  for (const ManifestId& id : store.ids()) {
    try {
      if (std::optional<SignedManifest> env = store.get(id)) g.insert_node(id, *env);
    } catch (const Error&) {
      // unreadable entries do not block tracing the rest of the graph
    }
  }

  ManifestId id = parse_id_arg(a.id, "--id");
  TraceDirection dir2 = a.direction == "descendants" ? TraceDirection::descendants
                                                     : TraceDirection::ancestors;
  std::vector<ManifestId> order = g.trace(id, dir2);

  if (a.format == "ids") {
    for (const ManifestId& m : order) std::cout << m.value << "\n";
    return kOk;
  }
  Bytes rendered = g.export_graph(a.format == "dot" ? GraphFormat::dot : GraphFormat::json);
  std::cout.write(reinterpret_cast<const char*>(rendered.data()),
                  static_cast<std::streamsize>(rendered.size()));
  if (a.format == "json") std::cout << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"signed manifests, content bindings and provenance for ML artifacts"};
  app.require_subcommand(1);

  KeygenArgs kg;
  CLI::App* keygen = app.add_subcommand("keygen", "generate a signing key and certificate");
  keygen->add_option("--subject", kg.subject, "certificate subject name")->required();
  keygen->add_option("--algorithm", kg.algorithm, "signature algorithm")
      ->check(CLI::IsMember({"ed25519", "ecdsa-p256"}))
      ->capture_default_str();
  keygen->add_flag("--self-signed", kg.selfSigned, "issue a self-signed root certificate");
  keygen->add_option("--issuer-key", kg.issuerKey, "issuer private key file");
  keygen->add_option("--issuer-cert", kg.issuerCert, "issuer certificate file");
  keygen->add_option("--not-before", kg.notBefore, "validity start (RFC 3339 UTC, default now)");
  keygen->add_option("--not-after", kg.notAfter, "validity end (default ten years out)");
  keygen->add_option("--key-out", kg.keyOut, "key output path (default <subject>.key)");
  keygen->add_option("--cert-out", kg.certOut, "certificate output path (default <subject>.cert)");
  keygen->add_flag("--force", kg.force, "overwrite existing files");

  CreateArgs cr;
  CLI::App* create = app.add_subcommand("create", "build an unsigned manifest for an object file");
  create->add_option("object,--object", cr.object, "object file")->required();
  create->add_option("--object-id", cr.objectId, "object identifier (default the file path)");
  create->add_option("--type", cr.type, "object type")
      ->check(CLI::IsMember({"dataset", "code", "package", "container", "model", "media", "other"}))
      ->capture_default_str();
  create->add_option("--bind", cr.binds,
                     "binding set: static, chunk:N, minibatch:N or record-merkle (repeatable, "
                     "default static)");
  create->add_option("--origin", cr.origins, "origin manifest id (repeatable)");
  create->add_option("--facsimile", cr.facsimiles,
                     "facsimile reference MANIFEST_ID:RELATION[:NOTE] (repeatable)");
  create->add_option("--encoding", cr.encoding, "encoding information")->capture_default_str();
  create->add_option("--created-at", cr.createdAt, "creation time (RFC 3339 UTC, default now)");
  create->add_option("--master-copy", cr.masterCopy, "master copy locator URI");
  create->add_option("--copyright", cr.copyrightText, "copyright notice");
  create->add_option("--transformation", cr.transformation, "how the object was derived");
  create->add_option("--hash", cr.hash, "hash algorithm for bindings")
      ->check(CLI::IsMember({"sha2-256", "sha2-512"}))
      ->capture_default_str();
  create->add_option("--out", cr.out, "manifest output path (default <object>.manifest)");

  SignArgs sg;
  CLI::App* sign = app.add_subcommand("sign", "sign a manifest into an envelope");
  sign->add_option("--manifest", sg.manifest, "manifest file from create")->required();
  sign->add_option("--key", sg.key, "signer private key file")->required();
  sign->add_option("--cert", sg.certs, "certificate chain, leaf first (repeatable)")->required();
  sign->add_option("--format", sg.format, "envelope serialization")
      ->check(CLI::IsMember({"json", "cbor"}))
      ->capture_default_str();
  sign->add_option("--out", sg.out, "envelope output path (default <object>.man)");
  sign->add_option("--store-dir", sg.storeDir,
                   "also record the envelope in this provenance store (default $VAMP_STORE_DIR)");

  EmbedArgs em;
  CLI::App* embed = app.add_subcommand("embed", "embed a signed envelope into an object file");
  embed->add_option("object,--object", em.object, "object file")->required();
  embed->add_option("--envelope", em.envelope, "signed envelope file")->required();
  embed->add_option("--kind", em.kind, "container framing")
      ->check(CLI::IsMember({"auto", "text", "binary"}))
      ->capture_default_str();
  embed->add_option("--out", em.out, "output path (default: rewrite the object in place)");

  ExtractArgs ex;
  CLI::App* extractCmd = app.add_subcommand("extract", "pull an embedded envelope out of an object");
  extractCmd->add_option("object,--object", ex.object, "object file")->required();
  extractCmd->add_option("--out", ex.out, "envelope output path (default <object>.man)");

  PublishArgs pb;
  CLI::App* publish = app.add_subcommand("publish", "send an envelope to the registry");
  publish->add_option("--envelope", pb.envelope, "signed envelope file")->required();
  publish->add_option("--registry", pb.registry, "registry URL (default $VAMP_REGISTRY_ADDR)");
  publish->add_option("--output", pb.output, "report style")
      ->check(CLI::IsMember({"human", "json"}))
      ->capture_default_str();
  publish->add_option("--store-dir", pb.storeDir,
                      "also record the envelope in this provenance store (default $VAMP_STORE_DIR)");

  VerifyArgs vf;
  CLI::App* verify = app.add_subcommand("verify", "verify an object against its manifest");
  verify->add_option("object,--object", vf.object, "object file")->required();
  verify->add_option("--manifest", vf.manifest, "explicit envelope file (skips resolution)");
  verify->add_option("--set", vf.set, "check only the named binding set");
  verify->add_flag("--closure", vf.closure, "also verify the provenance closure");
  verify->add_flag("--permissive", vf.permissive,
                   "closure tolerates ancestors whose content is unavailable");
  verify->add_option("--output", vf.output, "report style")
      ->check(CLI::IsMember({"human", "json"}))
      ->capture_default_str();
  verify->add_option("--at", vf.at, "verification time (RFC 3339 UTC, default now)");
  verify->add_option("--registry", vf.registry, "registry URL (default $VAMP_REGISTRY_ADDR)");
  verify->add_option("--trust-dir", vf.trustDir, "trust anchor directory (default $VAMP_TRUST_DIR)");
  verify->add_option("--store-dir", vf.storeDir,
                     "local provenance store (default $VAMP_STORE_DIR)");
  verify->add_option("--content-dir", vf.contentDir,
                     "directory where ancestor object ids resolve to files")
      ->capture_default_str();

  TraceArgs tr;
  CLI::App* trace = app.add_subcommand("trace", "walk the provenance graph from a manifest id");
  trace->add_option("--id", tr.id, "manifest id to start from")->required();
  trace->add_option("--direction", tr.direction, "walk direction")
      ->check(CLI::IsMember({"ancestors", "descendants"}))
      ->capture_default_str();
  trace->add_option("--format", tr.format, "ids lists the walk; dot and json render the graph")
      ->check(CLI::IsMember({"ids", "dot", "json"}))
      ->capture_default_str();
  trace->add_option("--store-dir", tr.storeDir,
                    "local provenance store (default $VAMP_STORE_DIR)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (keygen->parsed()) return cmd_keygen(kg);
    if (create->parsed()) return cmd_create(cr);
    if (sign->parsed()) return cmd_sign(sg);
    if (embed->parsed()) return cmd_embed(em);
    if (extractCmd->parsed()) return cmd_extract(ex);
    if (publish->parsed()) return cmd_publish(pb);
    if (verify->parsed()) return cmd_verify(vf);
    if (trace->parsed()) return cmd_trace(tr);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kEnv;
  }
  return kUsage;
}
