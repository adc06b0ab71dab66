#include "symplane/errors.h"
#include "symplane/features.h"

#include "binary_io.h"

#include <zlib.h>

#include <algorithm>

namespace symplane {

namespace {

constexpr std::uint32_t kFmapVersion = 1;
constexpr std::uint32_t kVfeaVersion = 1;

std::uint32_t crc_of(const std::vector<std::uint8_t>& bytes, std::size_t begin, std::size_t end) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks to stay clear of 4 GiB.
  std::size_t pos = begin;
  while (pos < end) {
    const std::size_t chunk = std::min<std::size_t>(end - pos, 1u << 30);
    crc = crc32(crc, bytes.data() + pos, static_cast<uInt>(chunk));
    pos += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

} // namespace

void save_feature_map(const FeatureMap& map, const std::filesystem::path& path) {
  if (map.patches <= 0 || map.dim <= 0 ||
      map.data.size() != static_cast<std::size_t>(map.patches) * map.patches * map.dim) {
    throw DimensionMismatch("feature map data does not match its P x P x d header");
  }
  ByteWriter w;
  w.magic("FMAP");
  w.u32(kFmapVersion);
  w.u32(map.view_id);
  w.u32(static_cast<std::uint32_t>(map.rotation_deg));
  w.u32(static_cast<std::uint32_t>(map.patches));
  w.u32(static_cast<std::uint32_t>(map.dim));
  const std::size_t payloadBegin = w.size();
  for (float v : map.data) {
    w.f32(v);
  }
  w.u32(crc_of(w.bytes(), payloadBegin, w.size()));
  w.save(path);
}

FeatureMap load_feature_map(const std::filesystem::path& path) {
  ByteReader r(read_file_bytes(path), path.string());
  r.expect_magic("FMAP");
  const std::uint32_t version = r.u32();
  if (version != kFmapVersion) {
    throw FormatError(path.string() + ": unsupported FMAP version " + std::to_string(version));
  }
  FeatureMap map;
  map.view_id = r.u32();
  map.rotation_deg = static_cast<int>(r.u32());
  const std::uint32_t p = r.u32();
  const std::uint32_t d = r.u32();
  if (p == 0 || d == 0 || p > 65535 || d > 65535) {
    throw FormatError(path.string() + ": implausible grid size");
  }
  const std::uint64_t count = static_cast<std::uint64_t>(p) * p * d;
  if (r.remaining() != count * 4 + 4) {
    throw FormatError(path.string() + ": payload size does not match header");
  }
  map.patches = static_cast<int>(p);
  map.dim = static_cast<int>(d);
  const std::size_t payloadBegin = r.position();
  const std::uint32_t expected = crc_of(r.bytes(), payloadBegin, payloadBegin + count * 4);
  map.data.resize(count);
  for (float& v : map.data) {
    v = r.f32();
  }
  if (r.u32() != expected) {
    throw ChecksumError(path.string() + ": payload checksum mismatch");
  }
  return map;
}

std::size_t VertexFeatures::uncovered_count() const {
  std::size_t n = 0;
  for (std::uint32_t v : visibility) {
    n += v == 0 ? 1 : 0;
  }
  return n;
}

void save_vertex_features(const VertexFeatures& vf, const std::filesystem::path& path) {
  ByteWriter w;
  w.magic("VFEA");
  w.u32(kVfeaVersion);
  w.u32(static_cast<std::uint32_t>(vf.vertex_count()));
  w.u32(static_cast<std::uint32_t>(vf.dim));
  const std::size_t payloadBegin = w.size();
  for (std::uint32_t v : vf.visibility) {
    w.u32(v);
  }
  for (float v : vf.data) {
    w.f32(v);
  }
  w.u32(crc_of(w.bytes(), payloadBegin, w.size()));
  w.save(path);
}

VertexFeatures load_vertex_features(const std::filesystem::path& path) {
  ByteReader r(read_file_bytes(path), path.string());
  r.expect_magic("VFEA");
  if (r.u32() != kVfeaVersion) {
    throw FormatError(path.string() + ": unsupported vertex feature version");
  }
  const std::uint32_t n = r.u32();
  const std::uint32_t d = r.u32();
  const std::uint64_t payload = static_cast<std::uint64_t>(n) * 4 + static_cast<std::uint64_t>(n) * d * 4;
  if (d == 0 || r.remaining() != payload + 4) {
    throw FormatError(path.string() + ": payload size does not match header");
  }
  const std::uint32_t expected = crc_of(r.bytes(), r.position(), r.position() + payload);
  VertexFeatures vf(n, static_cast<int>(d));
  for (std::uint32_t& v : vf.visibility) {
    v = r.u32();
  }
  for (float& v : vf.data) {
    v = r.f32();
  }
  if (r.u32() != expected) {
    throw ChecksumError(path.string() + ": payload checksum mismatch");
  }
  return vf;
}

} // namespace symplane
