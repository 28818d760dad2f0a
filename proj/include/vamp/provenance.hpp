#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "vamp/envelope.hpp"

namespace vamp {

// The provenance graph: verified manifests as nodes, origin back-references
// as directed edges from derived object to source, facsimile relations as
// undirected annotations. Origin edges always form a DAG. An edge may point
// at an id whose manifest was never inserted; such endpoints are tracked as
// unresolved rather than invented.
//
// Many readers, one writer: mutations serialize on a writer lock and publish
// a fresh immutable state, while traversals take a snapshot at call start and
// never observe a half-applied insert.

enum class TraceDirection { ancestors, descendants };

enum class ClosurePolicy { strict, permissive };

enum class NodeStatus { verified, signature_only, unresolved, failed };

inline std::string_view node_status_name(NodeStatus s) {
  switch (s) {
    case NodeStatus::verified: return "verified";
    case NodeStatus::signature_only: return "signature-only";
    case NodeStatus::unresolved: return "unresolved";
    default: return "FAILED";
  }
}

struct ClosureOptions {
  ClosurePolicy policy = ClosurePolicy::strict;
  // When set, a node passes content checking iff it carries a binding set
  // with this name and that one set matches; otherwise every set must match.
  std::optional<std::string> requiredSet;
};

struct NodeReport {
  ManifestId id;
  NodeStatus status = NodeStatus::unresolved;
  std::string detail;
  friend bool operator==(const NodeReport&, const NodeReport&) = default;
};

struct ClosureReport {
  bool pass = false;
  std::vector<NodeReport> nodes;

  const NodeReport* find(const ManifestId& id) const {
    for (const NodeReport& n : nodes)
      if (n.id == id) return &n;
    return nullptr;
  }
};

// Maps a manifest id to that object's current payload bytes, or nothing when
// the content is not on hand.
using ContentResolver = std::function<std::optional<Bytes>(const ManifestId&)>;

enum class GraphFormat { dot, json };

class ProvenanceGraph {
  struct Node {
    SignedManifest envelope;
    Manifest manifest;
  };

  struct State {
    std::map<std::string, std::shared_ptr<const Node>> nodes;
    // child id -> parent ids, in the order the manifest lists them
    std::map<std::string, std::vector<std::string>> origins;
    // normalized (low id, high id, relation name), deduplicated
    std::set<std::tuple<std::string, std::string, std::string>> facsimiles;
  };

 public:
  ProvenanceGraph() : state_(std::make_shared<const State>()) {}

  ProvenanceGraph(ProvenanceGraph&& other) : state_(other.snapshot()) {}
  ProvenanceGraph& operator=(ProvenanceGraph&& other) {
    if (this != &other) {
      auto s = other.snapshot();
      std::lock_guard lk(mu_);
      state_ = std::move(s);
    }
    return *this;
  }
  ProvenanceGraph(const ProvenanceGraph&) = delete;
  ProvenanceGraph& operator=(const ProvenanceGraph&) = delete;

  // Verifies the envelope against the trust store and inserts it under its
  // content-derived id. Re-inserting the identical envelope is a silent
  // no-op; a different envelope under an occupied id is DuplicateId.
  ManifestId add_manifest(const SignedManifest& envelope, const TrustStore& trust,
                          std::int64_t atTime) {
    Manifest m = verify_signed_manifest(envelope, trust, atTime).manifest;
    ManifestId id = compute_manifest_id(m);
    insert(id, envelope, std::move(m));
    return id;
  }

  // Raw insertion under a caller-supplied id, skipping signature checks.
  // add_manifest is the checked entry point; this one exists for callers
  // that have already verified and computed the id, and for exercising the
  // structural guards with ids that honest hashing could never produce.
  void insert_node(const ManifestId& id, const SignedManifest& envelope) {
    insert(id, envelope, parse_manifest(envelope.payload, envelope.serialization).manifest);
  }

  std::size_t size() const { return snapshot()->nodes.size(); }

  bool contains(const ManifestId& id) const { return snapshot()->nodes.count(id.value) > 0; }

  // The stored envelope for an id, or null. The pointer stays valid even if
  // the graph changes afterwards.
  std::shared_ptr<const SignedManifest> find(const ManifestId& id) const {
    auto s = snapshot();
    auto it = s->nodes.find(id.value);
    if (it == s->nodes.end()) return nullptr;
    return {it->second, &it->second->envelope};
  }

  std::shared_ptr<const Manifest> find_manifest(const ManifestId& id) const {
    auto s = snapshot();
    auto it = s->nodes.find(id.value);
    if (it == s->nodes.end()) return nullptr;
    return {it->second, &it->second->manifest};
  }

  // Origin ids referenced by some node but never inserted, sorted.
  std::vector<ManifestId> unresolved() const {
    auto s = snapshot();
    std::vector<ManifestId> out;
    for (const auto& [child, parents] : s->origins)
      for (const std::string& p : parents)
        if (!s->nodes.count(p)) out.push_back(ManifestId{p});
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  // Every node reachable from start along origin edges (ancestors) or
  // against them (descendants), in topological order from the start node,
  // ties broken by id. Facsimile annotations play no part.
  std::vector<ManifestId> trace(const ManifestId& start, TraceDirection dir) const {
    auto s = snapshot();
    if (!s->nodes.count(start.value))
      raise(Errc::unknown_id, "no manifest " + start.value + " in the provenance graph");
    std::vector<ManifestId> out;
    for (std::string& id : ordered_reach(*s, start.value, dir)) out.push_back(ManifestId{std::move(id)});
    return out;
  }

  // Re-verifies every ancestor of start: its envelope signature always, and
  // its content bindings whenever the resolver can produce the bytes. Under
  // the strict policy a missing manifest or missing content sinks the whole
  // closure; the permissive policy settles for checked signatures.
  ClosureReport verify_closure(const ManifestId& start, const ContentResolver& resolve,
                               const TrustStore& trust, std::int64_t atTime,
                               const ClosureOptions& opts = {}) const {
    auto s = snapshot();
    if (!s->nodes.count(start.value))
      raise(Errc::unknown_id, "no manifest " + start.value + " in the provenance graph");

    ClosureReport report;
    std::set<std::string> missing;
    for (const std::string& id : ordered_reach(*s, start.value, TraceDirection::ancestors)) {
      const Node& node = *s->nodes.at(id);
      report.nodes.push_back(check_node(ManifestId{id}, node, resolve, trust, atTime, opts));
      for (const std::string& p : s->origins.at(id))
        if (!s->nodes.count(p)) missing.insert(p);
    }
    for (const std::string& p : missing)
      report.nodes.push_back(NodeReport{ManifestId{p}, NodeStatus::unresolved,
                                        "manifest referenced but never inserted"});

    bool anyFailed = false, anyUnresolved = false;
    for (const NodeReport& n : report.nodes) {
      anyFailed |= n.status == NodeStatus::failed;
      anyUnresolved |= n.status == NodeStatus::unresolved;
    }
    report.pass = !anyFailed && (opts.policy == ClosurePolicy::permissive || !anyUnresolved);
    return report;
  }

  // Deterministic renderings of the whole graph. Origin edges are directed
  // and solid, facsimile annotations undirected and dashed; endpoints with
  // no manifest are drawn as dashed placeholder nodes.
  Bytes export_graph(GraphFormat f) const {
    auto s = snapshot();
    return f == GraphFormat::dot ? export_dot(*s) : export_json(*s);
  }

 private:
  std::shared_ptr<const State> snapshot() const {
    std::lock_guard lk(mu_);
    return state_;
  }

  void insert(const ManifestId& id, const SignedManifest& envelope, Manifest m) {
    std::lock_guard wl(write_mu_);
    auto cur = snapshot();

    if (auto it = cur->nodes.find(id.value); it != cur->nodes.end()) {
      if (it->second->envelope == envelope) return;
      raise(Errc::duplicate_id, "a different envelope is already stored under " + id.value);
    }
    for (const ManifestId& p : m.originManifestIds)
      if (p.value == id.value || reaches(*cur, p.value, id.value))
        raise(Errc::cycle_detected,
              "inserting " + id.value + " would close a cycle through " + p.value);

    auto next = std::make_shared<State>(*cur);
    auto& origins = next->origins[id.value];
    for (const ManifestId& p : m.originManifestIds) origins.push_back(p.value);
    for (const FacsimileRef& f : m.facsimiles)
      next->facsimiles.emplace(std::min(id.value, f.manifestId.value),
                               std::max(id.value, f.manifestId.value),
                               std::string(facsimile_relation_name(f.relation)));
    next->nodes.emplace(id.value,
                        std::make_shared<const Node>(Node{envelope, std::move(m)}));

    std::lock_guard lk(mu_);
    state_ = std::move(next);
  }

  // True when target is reachable from `from` along existing origin edges.
  static bool reaches(const State& s, const std::string& from, const std::string& target) {
    std::vector<const std::string*> stack{&from};
    std::set<std::string> seen;
    while (!stack.empty()) {
      const std::string& n = *stack.back();
      stack.pop_back();
      if (n == target) return true;
      if (!seen.insert(n).second) continue;
      if (auto it = s.origins.find(n); it != s.origins.end())
        for (const std::string& p : it->second) stack.push_back(&p);
    }
    return false;
  }

  // Kahn's algorithm over the subgraph reachable from start, with a min-heap
  // so equal-depth nodes come out in id order. The start node is the unique
  // source of its own reachable subgraph, so it is always emitted first.
  static std::vector<std::string> ordered_reach(const State& s, const std::string& start,
                                                TraceDirection dir) {
    std::map<std::string, std::vector<std::string>> rev;
    if (dir == TraceDirection::descendants)
      for (const auto& [child, parents] : s.origins)
        for (const std::string& p : parents) rev[p].push_back(child);
    auto adj = [&](const std::string& n) -> std::vector<std::string> {
      const auto& edges = dir == TraceDirection::ancestors ? s.origins : rev;
      std::vector<std::string> out;
      if (auto it = edges.find(n); it != edges.end())
        for (const std::string& m : it->second)
          if (s.nodes.count(m)) out.push_back(m);
      return out;
    };

    std::set<std::string> reach{start};
    std::vector<std::string> work{start};
    while (!work.empty()) {
      std::string n = std::move(work.back());
      work.pop_back();
      for (std::string& m : adj(n))
        if (reach.insert(m).second) work.push_back(std::move(m));
    }

    std::map<std::string, std::size_t> indeg;
    for (const std::string& n : reach) indeg[n];
    for (const std::string& n : reach)
      for (const std::string& m : adj(n)) ++indeg[m];

    std::priority_queue<std::string, std::vector<std::string>, std::greater<>> ready;
    for (const auto& [n, d] : indeg)
      if (d == 0) ready.push(n);
    std::vector<std::string> out;
    while (!ready.empty()) {
      std::string n = ready.top();
      ready.pop();
      for (const std::string& m : adj(n))
        if (--indeg[m] == 0) ready.push(m);
      out.push_back(std::move(n));
    }
    return out;
  }

  static NodeReport check_node(ManifestId id, const Node& node, const ContentResolver& resolve,
                               const TrustStore& trust, std::int64_t atTime,
                               const ClosureOptions& opts) {
    NodeReport r;
    r.id = std::move(id);
    try {
      verify_signed_manifest(node.envelope, trust, atTime);
    } catch (const Error& e) {
      r.status = NodeStatus::failed;
      r.detail = e.what();
      return r;
    }

    std::optional<Bytes> content = resolve ? resolve(r.id) : std::nullopt;
    if (!content) {
      r.status = opts.policy == ClosurePolicy::strict ? NodeStatus::unresolved
                                                      : NodeStatus::signature_only;
      r.detail = "content unavailable";
      return r;
    }

    auto check = [&](const BindingSet& set) {
      try {
        return verify_binding(*content, set).pass();
      } catch (const Error&) {
        return false;
      }
    };
    if (opts.requiredSet) {
      for (const BindingSet& set : node.manifest.bindings)
        if (set.name == *opts.requiredSet) {
          if (check(set)) {
            r.status = NodeStatus::verified;
          } else {
            r.status = NodeStatus::failed;
            r.detail = "binding set '" + set.name + "' does not match the content";
          }
          return r;
        }
      r.status = NodeStatus::failed;
      r.detail = "no binding set named '" + *opts.requiredSet + "'";
      return r;
    }
    for (const BindingSet& set : node.manifest.bindings)
      if (!check(set)) {
        r.status = NodeStatus::failed;
        r.detail = "binding set '" + set.name + "' does not match the content";
        return r;
      }
    r.status = NodeStatus::verified;
    return r;
  }

  static std::string dot_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
      if (c == '"' || c == '\\') out.push_back('\\');
      out.push_back(c);
    }
    return out;
  }

  static Bytes export_dot(const State& s) {
    std::string out = "digraph provenance {\n";
    for (const auto& [id, node] : s.nodes)
      out += "  \"" + dot_escape(id) + "\" [label=\"" + dot_escape(node->manifest.objectId) +
             "\\n(" + std::string(object_type_name(node->manifest.objectType)) + ")\"];\n";
    std::set<std::string> placeholders;
    for (const auto& [child, parents] : s.origins)
      for (const std::string& p : parents)
        if (!s.nodes.count(p)) placeholders.insert(p);
    for (const auto& [a, b, rel] : s.facsimiles) {
      if (!s.nodes.count(a)) placeholders.insert(a);
      if (!s.nodes.count(b)) placeholders.insert(b);
    }
    for (const std::string& p : placeholders)
      out += "  \"" + dot_escape(p) + "\" [label=\"unresolved\", style=dashed];\n";
    for (const auto& [child, parents] : s.origins)
      for (const std::string& p : parents)
        out += "  \"" + dot_escape(child) + "\" -> \"" + dot_escape(p) + "\";\n";
    for (const auto& [a, b, rel] : s.facsimiles)
      out += "  \"" + dot_escape(a) + "\" -> \"" + dot_escape(b) +
             "\" [dir=none, style=dashed, label=\"" + dot_escape(rel) + "\"];\n";
    out += "}\n";
    return to_bytes(out);
  }

  static Bytes export_json(const State& s) {
    canonical::Array nodes;
    for (const auto& [id, node] : s.nodes) {
      canonical::Map n;
      n.emplace("id", id);
      n.emplace("objectId", node->manifest.objectId);
      n.emplace("objectType", std::string(object_type_name(node->manifest.objectType)));
      nodes.emplace_back(std::move(n));
    }
    canonical::Array edges;
    for (const auto& [child, parents] : s.origins)
      for (const std::string& p : parents) {
        canonical::Map e;
        e.emplace("child", child);
        e.emplace("parent", p);
        edges.emplace_back(std::move(e));
      }
    canonical::Array fax;
    for (const auto& [a, b, rel] : s.facsimiles) {
      canonical::Map e;
      e.emplace("a", a);
      e.emplace("b", b);
      e.emplace("relation", rel);
      fax.emplace_back(std::move(e));
    }
    canonical::Map doc;
    doc.emplace("facsimileEdges", std::move(fax));
    doc.emplace("nodes", std::move(nodes));
    doc.emplace("originEdges", std::move(edges));
    return canonical::to_canonical_json(canonical::Value(std::move(doc)));
  }

  mutable std::mutex mu_;   // guards the state_ pointer swap
  std::mutex write_mu_;     // serializes writers end to end
  std::shared_ptr<const State> state_;
};

// Durable envelope storage: one `<manifestId>.env` file per manifest plus an
// advisory index that is derived from the files and safe to delete. The
// store does not verify; rebuilding a graph from it does.
class ProvenanceStore {
 public:
  explicit ProvenanceStore(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  const std::filesystem::path& directory() const { return dir_; }

  ManifestId put(const SignedManifest& envelope) {
    Manifest m = parse_manifest(envelope.payload, envelope.serialization).manifest;
    ManifestId id = compute_manifest_id(m);
    write_file(path_of(id), serialize_envelope(envelope));
    rebuild_index();
    return id;
  }

  std::optional<SignedManifest> get(const ManifestId& id) const {
    auto p = path_of(id);
    if (!std::filesystem::exists(p)) return std::nullopt;
    return parse_envelope_sniffed(read_file(p));
  }

  std::vector<ManifestId> ids() const {
    std::vector<ManifestId> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
      if (!entry.is_regular_file() || entry.path().extension() != ".env") continue;
      std::string stem = entry.path().stem().string();
      if (ManifestId::well_formed(stem)) out.push_back(ManifestId{std::move(stem)});
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  ProvenanceGraph load_graph(const TrustStore& trust, std::int64_t atTime) const {
    ProvenanceGraph g;
    for (const ManifestId& id : ids()) g.add_manifest(*get(id), trust, atTime);
    return g;
  }

  void rebuild_index() const {
    canonical::Array arr;
    for (const ManifestId& id : ids()) arr.emplace_back(id.value);
    canonical::Map doc;
    doc.emplace("manifests", std::move(arr));
    write_file(dir_ / "index.json", canonical::to_canonical_json(canonical::Value(std::move(doc))));
  }

 private:
  std::filesystem::path path_of(const ManifestId& id) const {
    return dir_ / (id.value + ".env");
  }

  std::filesystem::path dir_;
};

}  // namespace vamp
