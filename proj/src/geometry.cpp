#include "symplane/geometry.h"

#include "symplane/errors.h"
#include "symplane/random.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace symplane {

void TriangleMesh::validate() const {
  for (const Vec3& v : vertices) {
    if (!v.allFinite()) {
      throw ParseError("mesh has a non-finite vertex coordinate");
    }
  }
  const auto n = static_cast<std::uint32_t>(vertices.size());
  for (std::size_t i = 0; i < faces.size(); ++i) {
    const Face& f = faces[i];
    if (f[0] >= n || f[1] >= n || f[2] >= n) {
      throw ParseError("face " + std::to_string(i) + " references a missing vertex");
    }
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) {
      throw ParseError("face " + std::to_string(i) + " repeats a vertex");
    }
  }
  if (!normals.empty() && normals.size() != vertices.size()) {
    throw ParseError("normal count does not match vertex count");
  }
}

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

NormalizedMesh normalize(const TriangleMesh& mesh) {
  if (mesh.vertices.empty()) {
    throw DegenerateMesh("cannot normalize a mesh without vertices");
  }
  Vec3 lo = mesh.vertices.front();
  Vec3 hi = lo;
  for (const Vec3& v : mesh.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const double diagonal = (hi - lo).norm();
  if (!(diagonal > 0.0) || !std::isfinite(diagonal)) {
    throw DegenerateMesh("mesh bounding box has zero diagonal");
  }

  NormalizedMesh out;
  out.centroidApplied_ = 0.5 * (lo + hi);
  out.mesh_ = mesh;
  for (Vec3& v : out.mesh_.vertices) {
    v -= out.centroidApplied_;
  }
  out.diagonal_ = diagonal;
  return out;
}

Plane Plane::from_normal_offset(const Vec3& normal, double offset) {
  const double len = normal.norm();
  if (!(len > 0.0)) {
    throw InvalidArgument("plane normal has zero length");
  }
  return {normal / len, offset / len};
}

Plane Plane::from_normal_point(const Vec3& normal, const Vec3& point) {
  const double len = normal.norm();
  if (!(len > 0.0)) {
    throw InvalidArgument("plane normal has zero length");
  }
  const Vec3 n = normal / len;
  return {n, -n.dot(point)};
}

Plane Plane::canonical() const {
  // Components this small are rounding residue of an axis-aligned normal;
  // letting their sign decide would make the form unstable.
  constexpr double kNegligible = 1e-12;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(normal[i]) > kNegligible) {
      if (normal[i] < 0.0) {
        return {-normal, -offset};
      }
      return *this;
    }
  }
  return *this;
}

Vec3 reflect_point(const Vec3& p, const Plane& plane) {
  return p - 2.0 * plane.signed_distance(p) * plane.normal;
}

Eigen::Matrix4d reflection_matrix(const Plane& plane) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  const Vec3& n = plane.normal;
  m.topLeftCorner<3, 3>() -= 2.0 * n * n.transpose();
  m.topRightCorner<3, 1>() = -2.0 * plane.offset * n;
  return m;
}

std::vector<SurfaceSample> sample_surface(const NormalizedMesh& nmesh, std::size_t n, std::uint64_t seed) {
  if (n == 0) {
    throw InvalidArgument("sample count must be at least 1");
  }
  const TriangleMesh& mesh = nmesh.mesh();

  std::vector<double> cdf(mesh.faces.size());
  double total = 0.0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto [a, b, c] = mesh.corners(f);
    total += triangle_area(a, b, c);
    cdf[f] = total;
  }
  if (!(total > 0.0)) {
    throw DegenerateMesh("mesh has zero surface area");
  }

  Rng rng(seed);
  std::vector<SurfaceSample> samples;
  samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = uniform01(rng) * total;
    // upper_bound skips zero-area faces: their cdf entry equals the previous one.
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) {
      it = std::prev(cdf.end());
      while (it != cdf.begin() && *it == *std::prev(it)) {
        --it;
      }
    }
    const auto face = static_cast<std::uint32_t>(it - cdf.begin());

    const double r1 = std::sqrt(uniform01(rng));
    const double r2 = uniform01(rng);
    const Vec3 bary(1.0 - r1, r1 * (1.0 - r2), r1 * r2);
    const auto [a, b, c] = mesh.corners(face);
    samples.push_back({bary[0] * a + bary[1] * b + bary[2] * c, face, bary});
  }
  return samples;
}

} // namespace symplane
