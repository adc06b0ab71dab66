#include "symplane/errors.h"
#include "symplane/geometry.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>

namespace symplane {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) {
      ++i;
    }
    const std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) {
      ++i;
    }
    if (i > start) {
      out.push_back(s.substr(start, i - start));
    }
  }
  return out;
}

double parse_double(std::string_view token, std::size_t line) {
  double value = 0.0;
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError("line " + std::to_string(line) + ": bad number '" + std::string(token) + "'");
  }
  return value;
}

long long parse_int(std::string_view token, std::size_t line) {
  long long value = 0;
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError("line " + std::to_string(line) + ": bad index '" + std::string(token) + "'");
  }
  return value;
}

// Fan triangulation; faces that collapse onto a repeated vertex are dropped.
void append_polygon(TriangleMesh& mesh, const std::vector<std::uint32_t>& poly) {
  for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
    const Face f{poly[0], poly[k], poly[k + 1]};
    if (f[0] != f[1] && f[1] != f[2] && f[0] != f[2]) {
      mesh.faces.push_back(f);
    }
  }
}

void finish(TriangleMesh& mesh) {
  mesh.validate();
  if (mesh.faces.empty()) {
    throw EmptyMesh("mesh has no faces");
  }
}

} // namespace

TriangleMesh parse_obj(std::istream& in) {
  TriangleMesh mesh;
  std::vector<Vec3> normals;
  std::string raw;
  std::size_t lineNo = 0;
  while (std::getline(in, raw)) {
    ++lineNo;
    std::string_view line = trim(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = trim(line.substr(0, hash));
    }
    if (line.empty()) {
      continue;
    }
    const auto tokens = split_ws(line);
    const std::string_view tag = tokens[0];
    if (tag == "v") {
      if (tokens.size() < 4) {
        throw ParseError("line " + std::to_string(lineNo) + ": vertex needs 3 coordinates");
      }
      mesh.vertices.emplace_back(
          parse_double(tokens[1], lineNo), parse_double(tokens[2], lineNo), parse_double(tokens[3], lineNo));
    } else if (tag == "vn") {
      if (tokens.size() < 4) {
        throw ParseError("line " + std::to_string(lineNo) + ": normal needs 3 coordinates");
      }
      normals.emplace_back(
          parse_double(tokens[1], lineNo), parse_double(tokens[2], lineNo), parse_double(tokens[3], lineNo));
    } else if (tag == "f") {
      if (tokens.size() < 4) {
        throw ParseError("line " + std::to_string(lineNo) + ": face needs at least 3 vertices");
      }
      std::vector<std::uint32_t> poly;
      poly.reserve(tokens.size() - 1);
      for (std::size_t t = 1; t < tokens.size(); ++t) {
        std::string_view ref = tokens[t];
        ref = ref.substr(0, ref.find('/'));
        long long idx = parse_int(ref, lineNo);
        const auto count = static_cast<long long>(mesh.vertices.size());
        if (idx < 0) {
          idx += count; // relative index
        } else {
          idx -= 1;
        }
        if (idx < 0 || idx >= count) {
          throw ParseError("line " + std::to_string(lineNo) + ": vertex index out of range");
        }
        poly.push_back(static_cast<std::uint32_t>(idx));
      }
      append_polygon(mesh, poly);
    }
    // vt, g, o, s, usemtl, mtllib ... are ignored.
  }
  if (in.bad()) {
    throw ParseError("read error");
  }
  // Per-vertex normals are only kept when they map one-to-one onto vertices.
  if (normals.size() == mesh.vertices.size()) {
    mesh.normals = std::move(normals);
  }
  finish(mesh);
  return mesh;
}

TriangleMesh parse_off(std::istream& in) {
  // Strip comments, then treat the rest as a token stream.
  std::vector<std::string> tokens;
  std::string raw;
  while (std::getline(in, raw)) {
    if (const auto hash = raw.find('#'); hash != std::string::npos) {
      raw.resize(hash);
    }
    std::istringstream ls(raw);
    std::string tok;
    while (ls >> tok) {
      tokens.push_back(tok);
    }
  }
  std::size_t pos = 0;
  auto next = [&]() -> std::string_view {
    if (pos >= tokens.size()) {
      throw ParseError("unexpected end of OFF file");
    }
    return tokens[pos++];
  };

  std::string_view header = next();
  if (header.substr(0, 3) != "OFF") {
    throw ParseError("missing OFF header");
  }
  if (header.size() > 3) {
    // "OFF3 4 1 0" style with counts glued to the keyword is not supported
    throw ParseError("unsupported OFF variant '" + std::string(header) + "'");
  }
  const long long nv = parse_int(next(), 1);
  const long long nf = parse_int(next(), 1);
  parse_int(next(), 1); // edge count, unused
  if (nv < 0 || nf < 0) {
    throw ParseError("negative element count in OFF header");
  }

  TriangleMesh mesh;
  mesh.vertices.reserve(static_cast<std::size_t>(nv));
  for (long long i = 0; i < nv; ++i) {
    const double x = parse_double(next(), 0);
    const double y = parse_double(next(), 0);
    const double z = parse_double(next(), 0);
    mesh.vertices.emplace_back(x, y, z);
  }
  for (long long f = 0; f < nf; ++f) {
    const long long k = parse_int(next(), 0);
    if (k < 3) {
      throw ParseError("OFF face with fewer than 3 vertices");
    }
    std::vector<std::uint32_t> poly;
    for (long long j = 0; j < k; ++j) {
      const long long idx = parse_int(next(), 0);
      if (idx < 0 || idx >= nv) {
        throw ParseError("OFF face index out of range");
      }
      poly.push_back(static_cast<std::uint32_t>(idx));
    }
    append_polygon(mesh, poly);
  }
  finish(mesh);
  return mesh;
}

TriangleMesh load_mesh(const std::filesystem::path& path, MeshFormat format) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open " + path.string());
  }
  try {
    return format == MeshFormat::Obj ? parse_obj(in) : parse_off(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

TriangleMesh load_mesh(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".obj") {
    return load_mesh(path, MeshFormat::Obj);
  }
  if (ext == ".off") {
    return load_mesh(path, MeshFormat::Off);
  }
  throw ParseError("unknown mesh extension '" + ext + "' for " + path.string());
}

void save_obj(const TriangleMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error("cannot write " + path.string());
  }
  out << std::setprecision(17);
  for (const Vec3& v : mesh.vertices) {
    out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  }
  for (const Face& f : mesh.faces) {
    out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  }
}

} // namespace symplane
