#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "vamp/binding.hpp"
#include "vamp/canonical.hpp"
#include "vamp/digest.hpp"
#include "vamp/errors.hpp"
#include "vamp/schema.hpp"
#include "vamp/timeutil.hpp"

namespace vamp {

// A manifest's identity is the SHA-256 of its canonical JSON bytes, so the id
// is self-certifying: anyone holding the manifest can recompute it, and no
// registry is needed to mint one. Identity is defined over the JSON form even
// when the manifest is stored as CBOR, so one logical manifest has one id.

struct ManifestId {
  std::string value;

  static bool well_formed(std::string_view s) {
    constexpr std::string_view prefix = "sha2-256:";
    if (s.size() != prefix.size() + 64 || s.substr(0, prefix.size()) != prefix) return false;
    for (char c : s.substr(prefix.size()))
      if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
    return true;
  }

  friend bool operator==(const ManifestId&, const ManifestId&) = default;
  friend auto operator<=>(const ManifestId&, const ManifestId&) = default;
};

enum class ObjectType { dataset, code, package, container, model, media, other };

inline std::string_view object_type_name(ObjectType t) {
  switch (t) {
    case ObjectType::dataset: return "dataset";
    case ObjectType::code: return "code";
    case ObjectType::package: return "package";
    case ObjectType::container: return "container";
    case ObjectType::model: return "model";
    case ObjectType::media: return "media";
    case ObjectType::other: return "other";
  }
  raise(Errc::schema_violation, "invalid object type");
}

inline ObjectType object_type_from_name(std::string_view s) {
  if (s == "dataset") return ObjectType::dataset;
  if (s == "code") return ObjectType::code;
  if (s == "package") return ObjectType::package;
  if (s == "container") return ObjectType::container;
  if (s == "model") return ObjectType::model;
  if (s == "media") return ObjectType::media;
  if (s == "other") return ObjectType::other;
  raise(Errc::schema_violation, "unknown object type: " + std::string(s));
}

enum class FacsimileRelation { split_of, rebinding, subsample, oversample, same_content, other };

inline std::string_view facsimile_relation_name(FacsimileRelation r) {
  switch (r) {
    case FacsimileRelation::split_of: return "split-of";
    case FacsimileRelation::rebinding: return "rebinding";
    case FacsimileRelation::subsample: return "subsample";
    case FacsimileRelation::oversample: return "oversample";
    case FacsimileRelation::same_content: return "same-content";
    case FacsimileRelation::other: return "other";
  }
  raise(Errc::schema_violation, "invalid facsimile relation");
}

inline FacsimileRelation facsimile_relation_from_name(std::string_view s) {
  if (s == "split-of") return FacsimileRelation::split_of;
  if (s == "rebinding") return FacsimileRelation::rebinding;
  if (s == "subsample") return FacsimileRelation::subsample;
  if (s == "oversample") return FacsimileRelation::oversample;
  if (s == "same-content") return FacsimileRelation::same_content;
  if (s == "other") return FacsimileRelation::other;
  raise(Errc::schema_violation, "unknown facsimile relation: " + std::string(s));
}

struct FacsimileRef {
  ManifestId manifestId;
  FacsimileRelation relation = FacsimileRelation::other;
  std::optional<std::string> note;
  friend bool operator==(const FacsimileRef&, const FacsimileRef&) = default;
};

struct Manifest {
  std::uint64_t schemaVersion = 1;
  std::string objectId;
  ObjectType objectType = ObjectType::other;
  std::optional<std::string> masterCopyLocator;
  std::string encodingInformation;
  std::optional<std::string> copyright;
  std::string createdAt;
  std::vector<ManifestId> originManifestIds;
  std::optional<std::string> transformation;
  std::vector<FacsimileRef> facsimiles;
  std::vector<BindingSet> bindings;
  friend bool operator==(const Manifest&, const Manifest&) = default;
};

// ---------------------------------------------------------------------------
// Value conversion
// ---------------------------------------------------------------------------

inline canonical::Value manifest_to_value(const Manifest& m, Format f) {
  canonical::Map out;
  out.emplace("schemaVersion", m.schemaVersion);
  out.emplace("objectId", m.objectId);
  out.emplace("objectType", std::string(object_type_name(m.objectType)));
  if (m.masterCopyLocator) out.emplace("masterCopyLocator", *m.masterCopyLocator);
  out.emplace("encodingInformation", m.encodingInformation);
  if (m.copyright) out.emplace("copyright", *m.copyright);
  out.emplace("createdAt", m.createdAt);
  if (!m.originManifestIds.empty()) {
    canonical::Array ids;
    ids.reserve(m.originManifestIds.size());
    for (const ManifestId& id : m.originManifestIds) ids.push_back(id.value);
    out.emplace("originManifestIds", std::move(ids));
  }
  if (m.transformation) out.emplace("transformation", *m.transformation);
  if (!m.facsimiles.empty()) {
    canonical::Array fs;
    fs.reserve(m.facsimiles.size());
    for (const FacsimileRef& fr : m.facsimiles) {
      canonical::Map fm;
      fm.emplace("manifestId", fr.manifestId.value);
      fm.emplace("relation", std::string(facsimile_relation_name(fr.relation)));
      if (fr.note) fm.emplace("note", *fr.note);
      fs.push_back(std::move(fm));
    }
    out.emplace("facsimiles", std::move(fs));
  }
  canonical::Array bs;
  bs.reserve(m.bindings.size());
  for (const BindingSet& b : m.bindings) bs.push_back(binding_to_value(b, f));
  out.emplace("bindings", std::move(bs));
  return canonical::Value(std::move(out));
}

inline Manifest manifest_from_value(const canonical::Value& v, Format f) {
  const canonical::Map& m = schema::require_map(v, "manifest");
  schema::reject_unknown_keys(m,
                              {"schemaVersion", "objectId", "objectType", "masterCopyLocator",
                               "encodingInformation", "copyright", "createdAt",
                               "originManifestIds", "transformation", "facsimiles", "bindings"},
                              "manifest");
  Manifest out;
  out.schemaVersion = schema::require_uint(m, "schemaVersion", "manifest");
  out.objectId = schema::require_string(m, "objectId", "manifest");
  out.objectType = object_type_from_name(schema::require_string(m, "objectType", "manifest"));
  // An explicit null for an optional field decodes as absence; the canonical
  // form omits the key, so strict parsing still reports such input as
  // non-canonical through the re-serialization comparison.
  if (const auto* loc = schema::find(m, "masterCopyLocator"); loc && !loc->is_null()) {
    if (!loc->is_string())
      raise(Errc::schema_violation, "manifest: masterCopyLocator must be a string");
    out.masterCopyLocator = loc->as_string();
  }
  out.encodingInformation = schema::require_string(m, "encodingInformation", "manifest");
  if (const auto* c = schema::find(m, "copyright"); c && !c->is_null()) {
    if (!c->is_string()) raise(Errc::schema_violation, "manifest: copyright must be a string");
    out.copyright = c->as_string();
  }
  out.createdAt = schema::require_string(m, "createdAt", "manifest");
  if (const auto* ids = schema::find(m, "originManifestIds")) {
    if (!ids->is_array())
      raise(Errc::schema_violation, "manifest: originManifestIds must be an array");
    for (const canonical::Value& id : ids->as_array()) {
      if (!id.is_string())
        raise(Errc::schema_violation, "manifest: originManifestIds entries must be strings");
      out.originManifestIds.push_back(ManifestId{id.as_string()});
    }
  }
  if (const auto* t = schema::find(m, "transformation"); t && !t->is_null()) {
    if (!t->is_string()) raise(Errc::schema_violation, "manifest: transformation must be a string");
    out.transformation = t->as_string();
  }
  if (const auto* fs = schema::find(m, "facsimiles")) {
    if (!fs->is_array()) raise(Errc::schema_violation, "manifest: facsimiles must be an array");
    for (const canonical::Value& fv : fs->as_array()) {
      const canonical::Map& fm = schema::require_map(fv, "manifest.facsimiles");
      schema::reject_unknown_keys(fm, {"manifestId", "relation", "note"}, "manifest.facsimiles");
      FacsimileRef fr;
      fr.manifestId = ManifestId{schema::require_string(fm, "manifestId", "manifest.facsimiles")};
      fr.relation =
          facsimile_relation_from_name(schema::require_string(fm, "relation", "manifest.facsimiles"));
      if (const auto* n = schema::find(fm, "note"); n && !n->is_null()) {
        if (!n->is_string())
          raise(Errc::schema_violation, "manifest.facsimiles: note must be a string");
        fr.note = n->as_string();
      }
      out.facsimiles.push_back(std::move(fr));
    }
  }
  for (const canonical::Value& bv : schema::require_array(m, "bindings", "manifest"))
    out.bindings.push_back(binding_from_value(bv, f));
  return out;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct ValidationIssue {
  std::string path;
  std::string message;
  friend bool operator==(const ValidationIssue&, const ValidationIssue&) = default;
};

using ValidationReport = std::vector<ValidationIssue>;

namespace detail {

// Serialization without the validity gate, for hashing a manifest while
// deciding whether it is valid (the self-reference check needs its id).
inline Bytes serialize_unchecked(const Manifest& m, Format f) {
  canonical::Value v = manifest_to_value(m, f);
  return f == Format::json ? canonical::to_canonical_json(v) : canonical::to_canonical_cbor(v);
}

inline ManifestId id_of_canonical_json(std::span<const std::uint8_t> bytes) {
  return ManifestId{hash_bytes(HashAlgorithm::sha2_256, bytes).text()};
}

}  // namespace detail

inline ValidationReport validate_manifest(const Manifest& m) {
  ValidationReport issues;
  auto add = [&](std::string path, std::string message) {
    issues.push_back({std::move(path), std::move(message)});
  };

  if (m.schemaVersion != 1) add("schemaVersion", "must be 1");
  if (m.objectId.empty()) add("objectId", "must be non-empty");
  if (m.objectId.size() > 1024) add("objectId", "must be at most 1024 bytes");
  if (m.masterCopyLocator && m.masterCopyLocator->empty())
    add("masterCopyLocator", "must be non-empty when present");
  try {
    parse_rfc3339_utc(m.createdAt);
  } catch (const Error&) {
    add("createdAt", "must be an RFC 3339 UTC timestamp with Z suffix");
  }

  std::set<std::string> seen_origins;
  for (std::size_t i = 0; i < m.originManifestIds.size(); ++i) {
    const std::string& id = m.originManifestIds[i].value;
    std::string path = "originManifestIds[" + std::to_string(i) + "]";
    if (!ManifestId::well_formed(id)) add(path, "is not a well-formed manifest id");
    if (!seen_origins.insert(id).second) add(path, "duplicate origin id");
  }
  if (!m.originManifestIds.empty()) {
    ManifestId self = detail::id_of_canonical_json(detail::serialize_unchecked(m, Format::json));
    if (seen_origins.count(self.value)) add("originManifestIds", "self-reference");
  }

  for (std::size_t i = 0; i < m.facsimiles.size(); ++i) {
    if (!ManifestId::well_formed(m.facsimiles[i].manifestId.value))
      add("facsimiles[" + std::to_string(i) + "].manifestId", "is not a well-formed manifest id");
  }

  if (m.bindings.empty()) add("bindings", "must contain at least one binding set");
  std::set<std::string> seen_names;
  for (std::size_t i = 0; i < m.bindings.size(); ++i) {
    std::string path = "bindings[" + std::to_string(i) + "]";
    if (!seen_names.insert(m.bindings[i].name).second)
      add(path + ".name", "duplicate binding name");
    for (std::string& issue : validate_binding_structure(m.bindings[i]))
      add(path, std::move(issue));
  }
  return issues;
}

// ---------------------------------------------------------------------------
// Serialization, parsing, identity
// ---------------------------------------------------------------------------

inline Bytes canonical_serialize(const Manifest& m, Format f) {
  ValidationReport issues = validate_manifest(m);
  if (!issues.empty())
    raise(Errc::invalid_manifest, issues.front().path + ": " + issues.front().message);
  return detail::serialize_unchecked(m, f);
}

inline ManifestId compute_manifest_id(const Manifest& m) {
  return detail::id_of_canonical_json(canonical_serialize(m, Format::json));
}

enum class ParseMode { strict, lenient };

struct ParsedManifest {
  Manifest manifest;
  bool canonical = true;  // byte-identical to its own canonical serialization
};

inline ParsedManifest parse_manifest(std::span<const std::uint8_t> bytes, Format f,
                                     ParseMode mode = ParseMode::strict) {
  canonical::Value v;
  if (f == Format::json) {
    v = canonical::from_json(bytes).value;
  } else {
    v = canonical::from_cbor(bytes);
  }
  Manifest m = manifest_from_value(v, f);
  ValidationReport issues = validate_manifest(m);
  if (!issues.empty())
    raise(Errc::schema_violation, issues.front().path + ": " + issues.front().message);

  // Re-serializing and comparing bytes judges canonicality in one stroke:
  // duplicate or unsorted keys, whitespace, long-form integers, escape or
  // float variants, null optionals, and empty lists all surface as a
  // byte difference.
  Bytes canon = detail::serialize_unchecked(m, f);
  bool is_canon = canon.size() == bytes.size() && std::equal(canon.begin(), canon.end(), bytes.begin());
  if (!is_canon && mode == ParseMode::strict)
    raise(Errc::non_canonical, "input is not in canonical form");
  return ParsedManifest{std::move(m), is_canon};
}

}  // namespace vamp
