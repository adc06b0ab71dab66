#pragma once

#include "symplane/features.h"
#include "symplane/geometry.h"
#include "symplane/random.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace testing {

using symplane::Face;
using symplane::Plane;
using symplane::Rng;
using symplane::TriangleMesh;
using symplane::Vec3;

// Axis-aligned box as 12 triangles.
inline TriangleMesh box_mesh(const Vec3& lo, const Vec3& hi) {
  TriangleMesh m;
  for (int i = 0; i < 8; ++i) {
    m.vertices.emplace_back(i & 1 ? hi.x() : lo.x(), i & 2 ? hi.y() : lo.y(), i & 4 ? hi.z() : lo.z());
  }
  m.faces = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
             {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
  return m;
}

inline Vec3 random_unit(Rng& rng) {
  Vec3 v;
  do {
    v = Vec3(symplane::standard_normal(rng), symplane::standard_normal(rng), symplane::standard_normal(rng));
  } while (v.norm() < 1e-9);
  return v.normalized();
}

inline Vec3 random_point(Rng& rng, double scale = 1.0) {
  return Vec3(symplane::uniform(rng, -scale, scale), symplane::uniform(rng, -scale, scale),
              symplane::uniform(rng, -scale, scale));
}

inline Plane random_plane(Rng& rng, double max_offset = 1.0) {
  return Plane::from_normal_offset(random_unit(rng), symplane::uniform(rng, -max_offset, max_offset));
}

// O(|P| |Q|) Chamfer distance.
inline double brute_chamfer(std::span<const Vec3> P, std::span<const Vec3> Q) {
  auto directed = [](std::span<const Vec3> A, std::span<const Vec3> B) {
    double sum = 0.0;
    for (const Vec3& a : A) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec3& b : B) {
        best = std::min(best, (a - b).squaredNorm());
      }
      sum += best;
    }
    return sum / static_cast<double>(A.size());
  };
  return 0.5 * (directed(P, Q) + directed(Q, P));
}

struct RayHit {
  double t;
  double u;
  double v;
};

// Moller-Trumbore, double-sided.
inline std::optional<RayHit> ray_triangle(const Vec3& o, const Vec3& d, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 p = d.cross(e2);
  const double det = e1.dot(p);
  if (std::abs(det) < 1e-14) {
    return std::nullopt;
  }
  const double inv = 1.0 / det;
  const Vec3 s = o - a;
  const double u = s.dot(p) * inv;
  if (u < 0.0 || u > 1.0) {
    return std::nullopt;
  }
  const Vec3 q = s.cross(e1);
  const double v = d.dot(q) * inv;
  if (v < 0.0 || u + v > 1.0) {
    return std::nullopt;
  }
  const double t = e2.dot(q) * inv;
  if (t <= 0.0) {
    return std::nullopt;
  }
  return RayHit{t, u, v};
}

inline double point_segment_sq(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (p - (a + t * ab)).squaredNorm();
}

// Squared point-triangle distance: interior projection when it falls inside
// the triangle, else the nearest edge.
inline double point_triangle_sq(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 n = (b - a).cross(c - a);
  const double n2 = n.squaredNorm();
  if (n2 > 0.0) {
    const Vec3 proj = p - (p - a).dot(n) / n2 * n;
    const double w0 = (b - proj).cross(c - proj).dot(n);
    const double w1 = (c - proj).cross(a - proj).dot(n);
    const double w2 = (a - proj).cross(b - proj).dot(n);
    if (w0 >= 0.0 && w1 >= 0.0 && w2 >= 0.0) {
      return (p - proj).squaredNorm();
    }
  }
  return std::min({point_segment_sq(p, a, b), point_segment_sq(p, b, c), point_segment_sq(p, c, a)});
}

inline double point_mesh_sq(const Vec3& p, const TriangleMesh& m) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < m.faces.size(); ++f) {
    const auto t = m.corners(f);
    best = std::min(best, point_triangle_sq(p, t[0], t[1], t[2]));
  }
  return best;
}

// Feature cloud with one row per point, features given per point.
inline symplane::FeatureCloud make_cloud(std::vector<Vec3> points, int dim, const std::vector<float>& features) {
  symplane::FeatureCloud c;
  c.dim = dim;
  c.points = std::move(points);
  c.features = features;
  c.samples.resize(c.points.size());
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    c.samples[i].point = c.points[i];
    c.samples[i].bary = Vec3(1.0, 0.0, 0.0);
  }
  return c;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("symplane_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const std::filesystem::path& path() const {
    return path_;
  }
  [[nodiscard]] std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace testing
