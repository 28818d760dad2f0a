#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "vamp/binding.hpp"
#include "vamp/envelope.hpp"

namespace vamp {

// Object files carry their manifest in one of two layouts, or not at all:
//
//   text    LF-terminated "#%VAMP-" header lines, then the payload bytes.
//   binary  "VAMP" magic, version 0x01, type byte (0x01 embedded /
//           0x02 detached), serialization byte (0x01 JSON / 0x02 CBOR),
//           big-endian u32 field length, the field, then the payload.
//
// An embedded container carries the whole signed envelope (Base64 in the text
// layout); a detached stub carries only a locator URI. A file with neither
// shape is "bare": the payload is the whole file and the manifest lives in a
// sidecar or a registry. Bindings always cover the payload span only; a
// manifest cannot hash bytes that would contain itself.

enum class ContainerKind { text, binary };

inline constexpr std::size_t kMaxManifestBytes = 16 * 1024 * 1024;

struct ContainerHeader {
  enum class Type { embedded, detached, bare };

  Type type = Type::bare;
  Format serialization = Format::json;       // meaningful unless bare
  std::optional<std::string> locator;        // detached only
  std::optional<SignedManifest> envelope;    // embedded only
  Bytes envelopeBytes;                       // embedded: exact wire bytes
  std::size_t payloadOffset = 0;
  std::size_t payloadLength = 0;
};

inline std::span<const std::uint8_t> payload_of(const ContainerHeader& h,
                                                std::span<const std::uint8_t> file) {
  return file.subspan(h.payloadOffset, h.payloadLength);
}

namespace detail {

inline void check_locator(const std::string& uri) {
  if (uri.empty()) raise(Errc::invalid_locator, "manifest locator must be non-empty");
  if (uri.find('\n') != std::string::npos || uri.find('\r') != std::string::npos)
    raise(Errc::invalid_locator, "manifest locator must not contain line breaks");
  if (!utf8_valid(uri)) raise(Errc::invalid_locator, "manifest locator must be UTF-8");
}

inline void append_u32_be(Bytes& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

inline void append_text(Bytes& out, std::string_view s) {
  out.insert(out.end(), s.begin(), s.end());
}

inline Bytes assemble_text(std::string_view typeName, Format f, std::string_view fieldLine,
                           std::span<const std::uint8_t> payload) {
  Bytes out;
  out.reserve(fieldLine.size() + payload.size() + 128);
  append_text(out, "#%VAMP-Version: 1\n#%VAMP-ManifestType: ");
  append_text(out, typeName);
  append_text(out, "\n#%VAMP-ManifestSerialization: ");
  append_text(out, format_name(f));
  append_text(out, "\n");
  append_text(out, fieldLine);
  append_text(out, "\n#%VAMP-End\n");
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

inline Bytes assemble_binary(std::uint8_t typeByte, Format f, std::span<const std::uint8_t> field,
                             std::span<const std::uint8_t> payload) {
  Bytes out;
  out.reserve(11 + field.size() + payload.size());
  append_text(out, "VAMP");
  out.push_back(0x01);
  out.push_back(typeByte);
  out.push_back(f == Format::json ? 0x01 : 0x02);
  append_u32_be(out, static_cast<std::uint32_t>(field.size()));
  out.insert(out.end(), field.begin(), field.end());
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

}  // namespace detail

// Wraps payload bytes with their signed manifest. Every binding set in the
// manifest is checked against the payload first, so an embedded container can
// never be born inconsistent.
inline Bytes embed_manifest(std::span<const std::uint8_t> payload, const SignedManifest& envelope,
                            ContainerKind kind) {
  Bytes wire = serialize_envelope(envelope);
  if (wire.size() > kMaxManifestBytes)
    raise(Errc::oversize_manifest, "envelope exceeds the 16 MiB manifest cap");
  Manifest m = parse_manifest(envelope.payload, envelope.serialization).manifest;
  for (const BindingSet& b : m.bindings) {
    BindingReport report = verify_binding(payload, b);
    if (!report.pass())
      raise(Errc::binding_mismatch,
            "payload does not satisfy binding set \"" + b.name + "\"");
  }
  if (kind == ContainerKind::text)
    return detail::assemble_text("Embedded", envelope.serialization,
                                 "#%VAMP-Manifest: " + base64_encode(wire), payload);
  return detail::assemble_binary(0x01, envelope.serialization, wire, payload);
}

// Wraps payload bytes with a pointer to where the manifest lives instead of
// the manifest itself.
inline Bytes write_detached_stub(std::span<const std::uint8_t> payload, const std::string& locator,
                                 Format serialization, ContainerKind kind) {
  detail::check_locator(locator);
  if (kind == ContainerKind::text)
    return detail::assemble_text("Detached", serialization, "#%VAMP-ManifestLocator: " + locator,
                                 payload);
  Bytes loc = to_bytes(locator);
  return detail::assemble_binary(0x02, serialization, loc, payload);
}

namespace detail {

// Consumes one LF-terminated header line beginning with the given prefix and
// returns the rest of the line.
inline std::string_view take_line(std::string_view& rest, std::string_view prefix) {
  auto nl = rest.find('\n');
  if (nl == std::string_view::npos)
    raise(Errc::corrupt_header, "container header is truncated");
  std::string_view line = rest.substr(0, nl);
  rest.remove_prefix(nl + 1);
  if (!line.starts_with(prefix))
    raise(Errc::corrupt_header,
          "expected header line \"" + std::string(prefix) + "\", got \"" + std::string(line) +
              "\"");
  return line.substr(prefix.size());
}

inline ContainerHeader extract_text(std::span<const std::uint8_t> file) {
  std::string_view rest(reinterpret_cast<const char*>(file.data()), file.size());
  std::string_view version = take_line(rest, "#%VAMP-Version: ");
  if (version != "1")
    raise(Errc::corrupt_header, "unknown container version: " + std::string(version));
  std::string_view type = take_line(rest, "#%VAMP-ManifestType: ");
  if (type != "Embedded" && type != "Detached")
    raise(Errc::corrupt_header, "unknown manifest type: " + std::string(type));
  std::string_view ser = take_line(rest, "#%VAMP-ManifestSerialization: ");
  ContainerHeader h;
  try {
    h.serialization = format_from_name(ser);
  } catch (const Error&) {
    raise(Errc::corrupt_header, "unknown manifest serialization: " + std::string(ser));
  }
  if (type == "Embedded") {
    h.type = ContainerHeader::Type::embedded;
    std::string_view b64 = take_line(rest, "#%VAMP-Manifest: ");
    try {
      h.envelopeBytes = base64_decode(b64);
      h.envelope = parse_envelope(h.envelopeBytes, h.serialization);
    } catch (const Error& e) {
      raise(Errc::corrupt_header, std::string("embedded manifest is unreadable: ") + e.what());
    }
  } else {
    h.type = ContainerHeader::Type::detached;
    std::string_view uri = take_line(rest, "#%VAMP-ManifestLocator: ");
    if (uri.empty()) raise(Errc::corrupt_header, "manifest locator is empty");
    h.locator = std::string(uri);
  }
  std::string_view end = take_line(rest, "#%VAMP-End");
  if (!end.empty()) raise(Errc::corrupt_header, "malformed end-of-header line");
  h.payloadOffset = file.size() - rest.size();
  h.payloadLength = rest.size();
  return h;
}

inline ContainerHeader extract_binary(std::span<const std::uint8_t> file) {
  if (file.size() < 11) raise(Errc::corrupt_header, "container header is truncated");
  if (file[4] != 0x01)
    raise(Errc::corrupt_header, "unknown container version byte");
  std::uint8_t typeByte = file[5];
  std::uint8_t serByte = file[6];
  if (typeByte != 0x01 && typeByte != 0x02)
    raise(Errc::corrupt_header, "unknown manifest type byte");
  if (serByte != 0x01 && serByte != 0x02)
    raise(Errc::corrupt_header, "unknown serialization byte");
  std::uint64_t len = (std::uint64_t(file[7]) << 24) | (std::uint64_t(file[8]) << 16) |
                      (std::uint64_t(file[9]) << 8) | std::uint64_t(file[10]);
  if (11 + len > file.size())
    raise(Errc::corrupt_header, "container field length exceeds the file");
  std::span<const std::uint8_t> field = file.subspan(11, len);
  ContainerHeader h;
  h.serialization = serByte == 0x01 ? Format::json : Format::cbor;
  if (typeByte == 0x01) {
    h.type = ContainerHeader::Type::embedded;
    h.envelopeBytes.assign(field.begin(), field.end());
    try {
      h.envelope = parse_envelope(h.envelopeBytes, h.serialization);
    } catch (const Error& e) {
      raise(Errc::corrupt_header, std::string("embedded manifest is unreadable: ") + e.what());
    }
  } else {
    h.type = ContainerHeader::Type::detached;
    std::string uri(reinterpret_cast<const char*>(field.data()), field.size());
    if (uri.empty() || !utf8_valid(uri))
      raise(Errc::corrupt_header, "manifest locator is empty or not UTF-8");
    h.locator = std::move(uri);
  }
  h.payloadOffset = 11 + len;
  h.payloadLength = file.size() - h.payloadOffset;
  return h;
}

}  // namespace detail

// Classifies a file by sniffing its first bytes. Files that commit to a
// container layout but violate it raise CorruptHeader; everything else is
// bare, with the payload being the whole file.
inline ContainerHeader extract(std::span<const std::uint8_t> file) {
  std::string_view head(reinterpret_cast<const char*>(file.data()),
                        std::min<std::size_t>(file.size(), 8));
  if (head.starts_with("#%VAMP-")) return detail::extract_text(file);
  if (head.starts_with("VAMP")) return detail::extract_binary(file);
  ContainerHeader h;
  h.type = ContainerHeader::Type::bare;
  h.payloadOffset = 0;
  h.payloadLength = file.size();
  return h;
}

// "data/training.csv" names its sidecar "data/training.csv.man": the suffix
// is appended to the full filename, never substituted for an extension.
inline std::filesystem::path detached_manifest_path(const std::filesystem::path& objectPath) {
  std::filesystem::path p = objectPath;
  p += ".man";
  return p;
}

// Where a resolver can look beyond the local filesystem. Implemented by the
// registry client; the container layer only needs the bytes back.
class RemoteLookup {
 public:
  virtual ~RemoteLookup() = default;
  virtual std::optional<Bytes> fetch_by_locator(const std::string& uri) = 0;
  virtual std::optional<Bytes> fetch_by_id(const ManifestId& id) = 0;
  virtual std::optional<Bytes> fetch_by_digest(const Digest& digest) = 0;
};

struct ResolvedManifest {
  enum class Source { embedded, detached_local, detached_cloud };

  SignedManifest envelope;
  Bytes envelopeBytes;
  Source source = Source::embedded;
  bool sidecarIgnored = false;  // an embedded manifest won over an existing sidecar
};

inline std::string_view resolved_source_name(ResolvedManifest::Source s) {
  switch (s) {
    case ResolvedManifest::Source::embedded: return "embedded";
    case ResolvedManifest::Source::detached_local: return "detached-local";
    default: return "detached-cloud";
  }
}

// Finds the manifest for an object file: an embedded header wins outright, a
// local sidecar comes next, and a registry copy last. When a local and a
// remote copy both exist they must be byte-identical; a silent fork between
// the two storage locations is exactly what this layer exists to catch.
inline ResolvedManifest resolve_manifest(const std::filesystem::path& objectPath,
                                         RemoteLookup* remote = nullptr) {
  Bytes file = read_file(objectPath);
  ContainerHeader h = extract(file);
  bool sidecarExists = std::filesystem::exists(detached_manifest_path(objectPath));

  if (h.type == ContainerHeader::Type::embedded) {
    ResolvedManifest r;
    r.envelope = std::move(*h.envelope);
    r.envelopeBytes = std::move(h.envelopeBytes);
    r.source = ResolvedManifest::Source::embedded;
    r.sidecarIgnored = sidecarExists;
    return r;
  }

  std::optional<Bytes> local;
  std::optional<SignedManifest> localEnvelope;
  if (sidecarExists) {
    local = read_file(detached_manifest_path(objectPath));
    localEnvelope = parse_envelope_sniffed(*local);
  }

  std::optional<Bytes> cloud;
  if (remote) {
    if (h.type == ContainerHeader::Type::detached) {
      cloud = remote->fetch_by_locator(*h.locator);
    } else if (localEnvelope) {
      Manifest m =
          parse_manifest(localEnvelope->payload, localEnvelope->serialization).manifest;
      cloud = remote->fetch_by_id(compute_manifest_id(m));
    } else {
      Digest d = hash_bytes(HashAlgorithm::sha2_256, payload_of(h, file));
      cloud = remote->fetch_by_digest(d);
    }
  }

  if (local && cloud && *local != *cloud)
    raise(Errc::divergent_copies,
          "local sidecar and registry copy of the manifest differ");
  if (local) {
    ResolvedManifest r;
    r.envelope = std::move(*localEnvelope);
    r.envelopeBytes = std::move(*local);
    r.source = ResolvedManifest::Source::detached_local;
    return r;
  }
  if (cloud) {
    ResolvedManifest r;
    r.envelope = parse_envelope_sniffed(*cloud);
    r.envelopeBytes = std::move(*cloud);
    r.source = ResolvedManifest::Source::detached_cloud;
    return r;
  }
  raise(Errc::manifest_not_found,
        "no manifest found for " + objectPath.string() +
            " (no embedded header, no sidecar, no registry copy)");
}

}  // namespace vamp
