#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <httplib.h>

#include "vamp/container.hpp"
#include "vamp/ledger.hpp"

namespace vamp {

// The manifest registry: durable envelope storage fronted by the append-only
// log, so every published manifest comes back with a receipt that verifies
// offline. One envelope file and one metadata file per manifest id, plus the
// ledger's own record file, are the entire persistent state.

struct RegistryRecord {
  ManifestId manifestId;
  Bytes envelopeBytes;
  std::string objectId;
  Receipt receipt;
  std::string publishedAt;
  friend bool operator==(const RegistryRecord&, const RegistryRecord&) = default;
};

inline canonical::Value record_to_value(const RegistryRecord& r, bool includeEnvelope) {
  canonical::Map m;
  if (includeEnvelope) m.emplace("envelope", base64_encode(r.envelopeBytes));
  m.emplace("manifestId", r.manifestId.value);
  m.emplace("objectId", r.objectId);
  m.emplace("publishedAt", r.publishedAt);
  m.emplace("receipt", receipt_to_value(r.receipt, Format::json));
  m.emplace("sequence", r.receipt.sequence);
  return canonical::Value(std::move(m));
}

class RegistryService {
 public:
  using Clock = std::function<std::string()>;

  RegistryService(std::filesystem::path dataDir, TrustStore trust, PrivateKey logKey,
                  Clock clock = &now_rfc3339_utc)
      : dir_(std::move(dataDir)),
        trust_(std::move(trust)),
        clock_(std::move(clock)),
        log_(dir_ / "ledger", std::move(logKey), HashAlgorithm::sha2_256, clock_) {
    std::filesystem::create_directories(records_dir());
    recover();
  }

  struct PublishOutcome {
    RegistryRecord record;
    bool created;
  };

  // Verifies, stores, and anchors one envelope. Re-publishing byte-identical
  // content returns the original record without a second ledger entry.
  PublishOutcome publish(std::span<const std::uint8_t> envelopeBytes) {
    SignedManifest env = parse_envelope_sniffed(envelopeBytes);
    Manifest m = verify_signed_manifest(env, trust_, parse_rfc3339_utc(clock_())).manifest;
    ManifestId id = compute_manifest_id(m);

    std::unique_lock lk(mu_);
    if (auto it = records_.find(id.value); it != records_.end()) {
      if (!std::equal(envelopeBytes.begin(), envelopeBytes.end(),
                      it->second.envelopeBytes.begin(), it->second.envelopeBytes.end()))
        raise(Errc::duplicate_id, "stored bytes for " + id.value + " differ from this upload");
      return {it->second, false};
    }

    RegistryRecord rec;
    rec.manifestId = id;
    rec.envelopeBytes.assign(envelopeBytes.begin(), envelopeBytes.end());
    rec.objectId = m.objectId;
    rec.receipt = log_.append(to_bytes(id.value));
    rec.publishedAt = clock_();
    persist(rec);
    index(rec, m);
    return {rec, true};
  }

  std::optional<RegistryRecord> fetch(const ManifestId& id) const {
    std::shared_lock lk(mu_);
    auto it = records_.find(id.value);
    if (it == records_.end()) return std::nullopt;
    return it->second;
  }

  std::vector<RegistryRecord> find_by_object(const std::string& objectId) const {
    std::shared_lock lk(mu_);
    std::vector<RegistryRecord> out;
    if (auto it = byObject_.find(objectId); it != byObject_.end())
      for (const std::string& id : it->second) out.push_back(records_.at(id));
    return out;
  }

  // The most recently published record whose whole-file binding names this
  // digest; how bare files with no embedded or sidecar manifest find theirs.
  std::optional<RegistryRecord> find_by_digest(const Digest& d) const {
    std::shared_lock lk(mu_);
    auto it = byDigest_.find(d.text());
    if (it == byDigest_.end() || it->second.empty()) return std::nullopt;
    return records_.at(it->second.back());
  }

  SignedTreeHead head() const {
    std::shared_lock lk(mu_);
    return log_.head();
  }

  Receipt proof(std::uint64_t sequence, std::uint64_t treeSize) const {
    std::shared_lock lk(mu_);
    return log_.prove_inclusion(sequence, treeSize);
  }

  std::vector<Digest> consistency(std::uint64_t older, std::uint64_t newer) const {
    std::shared_lock lk(mu_);
    return log_.prove_consistency(older, newer);
  }

  Bytes log_public_key() const { return log_.public_key(); }

  std::size_t size() const {
    std::shared_lock lk(mu_);
    return records_.size();
  }

  // Wires the HTTP surface onto a server instance.
  void attach(httplib::Server& srv) {
    srv.Post("/v1/manifests", [this](const httplib::Request& req, httplib::Response& res) {
      handle(res, [&] {
        Bytes envelope = base64_decode(body_field(req.body, "envelope"));
        PublishOutcome out = publish(envelope);
        res.status = out.created ? 201 : 200;
        reply(res, record_to_value(out.record, true));
      });
    });
    srv.Get(R"(/v1/manifests/(.+))", [this](const httplib::Request& req, httplib::Response& res) {
      handle(res, [&] {
        auto rec = fetch(ManifestId{req.matches[1]});
        if (!rec) raise(Errc::manifest_not_found, "no manifest " + std::string(req.matches[1]));
        reply(res, record_to_value(*rec, true));
      });
    });
    srv.Get(R"(/v1/objects/(.+)/manifests)",
            [this](const httplib::Request& req, httplib::Response& res) {
              handle(res, [&] {
                canonical::Array arr;
                for (const RegistryRecord& r : find_by_object(req.matches[1]))
                  arr.push_back(record_to_value(r, false));
                canonical::Map m;
                m.emplace("manifests", std::move(arr));
                reply(res, canonical::Value(std::move(m)));
              });
            });
    srv.Get(R"(/v1/digests/(.+))", [this](const httplib::Request& req, httplib::Response& res) {
      handle(res, [&] {
        auto rec = find_by_digest(Digest::from_text(std::string(req.matches[1])));
        if (!rec) raise(Errc::manifest_not_found,
                        "no manifest binds digest " + std::string(req.matches[1]));
        reply(res, record_to_value(*rec, true));
      });
    });
    srv.Get("/v1/log/head", [this](const httplib::Request&, httplib::Response& res) {
      handle(res, [&] { reply(res, tree_head_to_value(head(), Format::json)); });
    });
    srv.Get("/v1/log/proof", [this](const httplib::Request& req, httplib::Response& res) {
      handle(res, [&] {
        std::uint64_t seq = uint_param(req, "seq");
        std::uint64_t size = uint_param(req, "size");
        reply(res, receipt_to_value(proof(seq, size), Format::json));
      });
    });
    srv.Get("/v1/log/key", [this](const httplib::Request&, httplib::Response& res) {
      handle(res, [&] {
        canonical::Map m;
        m.emplace("publicKey", base64_encode(log_public_key()));
        reply(res, canonical::Value(std::move(m)));
      });
    });
  }

 private:
  std::filesystem::path records_dir() const { return dir_ / "records"; }
  std::filesystem::path env_path(const ManifestId& id) const {
    return records_dir() / (id.value + ".env");
  }
  std::filesystem::path meta_path(const ManifestId& id) const {
    return records_dir() / (id.value + ".json");
  }

  void persist(const RegistryRecord& rec) {
    write_file(env_path(rec.manifestId), rec.envelopeBytes);
    canonical::Map m;
    m.emplace("manifestId", rec.manifestId.value);
    m.emplace("objectId", rec.objectId);
    m.emplace("publishedAt", rec.publishedAt);
    m.emplace("receipt", receipt_to_value(rec.receipt, Format::json));
    write_file(meta_path(rec.manifestId),
               canonical::to_canonical_json(canonical::Value(std::move(m))));
  }

  void index(const RegistryRecord& rec, const Manifest& m) {
    byObject_[rec.objectId].push_back(rec.manifestId.value);
    for (const BindingSet& set : m.bindings)
      if (const auto* body = std::get_if<StaticBody>(&set.body))
        byDigest_[body->digest.text()].push_back(rec.manifestId.value);
    records_.emplace(rec.manifestId.value, rec);
  }

  // Replays the metadata files in ledger order. Envelope bytes are strictly
  // re-parsed but signatures are not re-checked: they were checked when the
  // record was accepted, and certificates may have expired since.
  void recover() {
    std::vector<RegistryRecord> found;
    for (const auto& entry : std::filesystem::directory_iterator(records_dir())) {
      if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
      canonical::Value doc = canonical::from_json(read_file(entry.path())).value;
      const canonical::Map& m = doc.as_map();
      RegistryRecord rec;
      rec.manifestId = ManifestId{m.at("manifestId").as_string()};
      rec.objectId = m.at("objectId").as_string();
      rec.publishedAt = m.at("publishedAt").as_string();
      rec.receipt = receipt_from_value(m.at("receipt"), Format::json);
      rec.envelopeBytes = read_file(env_path(rec.manifestId));
      found.push_back(std::move(rec));
    }
    std::sort(found.begin(), found.end(), [](const RegistryRecord& a, const RegistryRecord& b) {
      return a.receipt.sequence < b.receipt.sequence;
    });
    for (RegistryRecord& rec : found) {
      SignedManifest env = parse_envelope_sniffed(rec.envelopeBytes);
      Manifest m = parse_manifest(env.payload, env.serialization).manifest;
      index(rec, m);
    }
  }

  static std::string body_field(const std::string& body, const std::string& field) {
    canonical::Value doc = canonical::from_json(to_bytes(body)).value;
    if (!doc.is_map()) raise(Errc::schema_violation, "request body must be a JSON object");
    auto it = doc.as_map().find(field);
    if (it == doc.as_map().end() || !it->second.is_string())
      raise(Errc::schema_violation, "request body must carry a '" + field + "' string");
    return it->second.as_string();
  }

  static std::uint64_t uint_param(const httplib::Request& req, const std::string& name) {
    if (!req.has_param(name))
      raise(Errc::schema_violation, "missing query parameter '" + name + "'");
    const std::string v = req.get_param_value(name);
    if (v.empty() || v.size() > 19 || v.find_first_not_of("0123456789") != std::string::npos)
      raise(Errc::schema_violation, "query parameter '" + name + "' must be a decimal number");
    return std::stoull(v);
  }

  static int status_of(Errc c) {
    switch (c) {
      case Errc::key_mismatch:
      case Errc::bad_signature:
      case Errc::untrusted_root:
      case Errc::expired:
      case Errc::chain_too_long:
      case Errc::expired_issuer:
      case Errc::invalid_issuer_key:
        return 401;
      case Errc::manifest_not_found:
      case Errc::unknown_id:
        return 404;
      case Errc::duplicate_id:
        return 409;
      case Errc::out_of_range:
        return 416;
      default:
        return 400;
    }
  }

  static void reply(httplib::Response& res, const canonical::Value& v) {
    res.set_content(to_string(canonical::to_canonical_json(v)), "application/json");
  }

  template <typename F>
  static void handle(httplib::Response& res, F&& f) {
    try {
      f();
    } catch (const Error& e) {
      res.status = status_of(e.code());
      canonical::Map m;
      m.emplace("code", std::string(errc_name(e.code())));
      m.emplace("error", std::string(e.what()));
      reply(res, canonical::Value(std::move(m)));
    } catch (const std::exception& e) {
      res.status = 500;
      canonical::Map m;
      m.emplace("code", std::string("Internal"));
      m.emplace("error", std::string(e.what()));
      reply(res, canonical::Value(std::move(m)));
    }
  }

  std::filesystem::path dir_;
  TrustStore trust_;
  Clock clock_;
  MerkleLog log_;
  mutable std::shared_mutex mu_;
  std::map<std::string, RegistryRecord> records_;
  std::map<std::string, std::vector<std::string>> byObject_;
  std::map<std::string, std::vector<std::string>> byDigest_;
};

// HTTP client for the registry, doubling as the remote side of manifest
// resolution for bare files and detached stubs.
class RegistryClient : public RemoteLookup {
 public:
  explicit RegistryClient(const std::string& baseUrl) : http_(baseUrl) {
    http_.set_connection_timeout(10, 0);
    http_.set_read_timeout(30, 0);
  }

  struct PublishResult {
    ManifestId id;
    Receipt receipt;
    std::string publishedAt;
    bool created;
  };

  PublishResult publish(std::span<const std::uint8_t> envelopeBytes) {
    canonical::Map body;
    body.emplace("envelope", base64_encode(envelopeBytes));
    auto res = http_.Post("/v1/manifests",
                          to_string(canonical::to_canonical_json(canonical::Value(std::move(body)))),
                          "application/json");
    canonical::Value doc = expect(res, {200, 201});
    const canonical::Map& m = doc.as_map();
    return PublishResult{ManifestId{m.at("manifestId").as_string()},
                         receipt_from_value(m.at("receipt"), Format::json),
                         m.at("publishedAt").as_string(), res->status == 201};
  }

  std::optional<RegistryRecord> fetch(const ManifestId& id) {
    auto res = http_.Get("/v1/manifests/" + id.value);
    if (res && res->status == 404) return std::nullopt;
    return record_from(expect(res, {200}));
  }

  std::vector<RegistryRecord> find_by_object(const std::string& objectId) {
    auto res = http_.Get("/v1/objects/" + objectId + "/manifests");
    std::vector<RegistryRecord> out;
    canonical::Value doc = expect(res, {200});
    for (const canonical::Value& v : doc.as_map().at("manifests").as_array())
      out.push_back(record_from(v));
    return out;
  }

  SignedTreeHead head() {
    auto res = http_.Get("/v1/log/head");
    return tree_head_from_value(expect(res, {200}), Format::json);
  }

  Receipt proof(std::uint64_t sequence, std::uint64_t treeSize) {
    auto res = http_.Get("/v1/log/proof?seq=" + std::to_string(sequence) +
                         "&size=" + std::to_string(treeSize));
    return receipt_from_value(expect(res, {200}), Format::json);
  }

  Bytes log_public_key() {
    auto res = http_.Get("/v1/log/key");
    return base64_decode(expect(res, {200}).as_map().at("publicKey").as_string());
  }

  std::optional<Bytes> fetch_by_id(const ManifestId& id) override {
    auto rec = fetch(id);
    if (!rec) return std::nullopt;
    return std::move(rec->envelopeBytes);
  }

  std::optional<Bytes> fetch_by_digest(const Digest& d) override {
    auto res = http_.Get("/v1/digests/" + d.text());
    if (res && res->status == 404) return std::nullopt;
    return record_from(expect(res, {200})).envelopeBytes;
  }

  std::optional<Bytes> fetch_by_locator(const std::string& uri) override {
    std::string path = uri;
    if (auto at = uri.find("://"); at != std::string::npos) {
      auto slash = uri.find('/', at + 3);
      if (slash == std::string::npos) return std::nullopt;
      path = uri.substr(slash);
    }
    if (path.empty() || path[0] != '/') return std::nullopt;
    auto res = http_.Get(path);
    if (!res || res->status != 200) return std::nullopt;
    canonical::Value doc = canonical::from_json(to_bytes(res->body)).value;
    if (!doc.is_map() || !doc.as_map().count("envelope")) return std::nullopt;
    return base64_decode(doc.as_map().at("envelope").as_string());
  }

 private:
  static Errc errc_for_status(int status) {
    switch (status) {
      case 400: return Errc::malformed_input;
      case 401: return Errc::untrusted_root;
      case 404: return Errc::manifest_not_found;
      case 409: return Errc::duplicate_id;
      case 416: return Errc::out_of_range;
      default: return Errc::io;
    }
  }

  canonical::Value expect(const httplib::Result& res, std::initializer_list<int> ok) {
    if (!res) raise(Errc::io, "registry unreachable: " + httplib::to_string(res.error()));
    canonical::Value doc = canonical::from_json(to_bytes(res->body)).value;
    for (int s : ok)
      if (res->status == s) return doc;
    std::string detail = "registry returned status " + std::to_string(res->status);
    if (doc.is_map() && doc.as_map().count("error"))
      detail += ": " + doc.as_map().at("error").as_string();
    raise(errc_for_status(res->status), detail);
  }

  static RegistryRecord record_from(const canonical::Value& v) {
    const canonical::Map& m = v.as_map();
    RegistryRecord rec;
    rec.manifestId = ManifestId{m.at("manifestId").as_string()};
    if (auto it = m.find("envelope"); it != m.end())
      rec.envelopeBytes = base64_decode(it->second.as_string());
    rec.objectId = m.at("objectId").as_string();
    rec.publishedAt = m.at("publishedAt").as_string();
    rec.receipt = receipt_from_value(m.at("receipt"), Format::json);
    return rec;
  }

  httplib::Client http_;
};

}  // namespace vamp
