#include "symplane/errors.h"
#include "symplane/metrics.h"
#include "symplane/random.h"
#include "symplane/symmetry.h"
#include "symplane/synth.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>

namespace symplane {

namespace {

using Lattice = std::array<int, 3>;

// Boundary of a union of grid cells. Vertices are keyed by lattice corner so
// the surface is watertight; coordinates (2i - N) / (2t) are exactly
// symmetric about zero on every axis.
class CellSurface {
 public:
  CellSurface(Lattice cells, int per_unit, std::function<bool(int, int, int)> occupied)
      : cells_(cells), perUnit_(per_unit), occupied_(std::move(occupied)) {}

  TriangleMesh build() {
    for (int i = 0; i < cells_[0]; ++i) {
      for (int j = 0; j < cells_[1]; ++j) {
        for (int k = 0; k < cells_[2]; ++k) {
          if (!inside({i, j, k})) {
            continue;
          }
          for (int axis = 0; axis < 3; ++axis) {
            for (int dir : {-1, 1}) {
              Lattice nb{i, j, k};
              nb[axis] += dir;
              if (!inside(nb)) {
                emit_face({i, j, k}, axis, dir);
              }
            }
          }
        }
      }
    }
    return std::move(mesh_);
  }

 private:
  bool inside(const Lattice& c) const {
    for (int a = 0; a < 3; ++a) {
      if (c[a] < 0 || c[a] >= cells_[a]) {
        return false;
      }
    }
    return occupied_(c[0], c[1], c[2]);
  }

  std::uint32_t vertex(const Lattice& corner) {
    const auto [it, fresh] = index_.emplace(corner, static_cast<std::uint32_t>(mesh_.vertices.size()));
    if (fresh) {
      Vec3 p;
      for (int a = 0; a < 3; ++a) {
        p[a] = static_cast<double>(2 * corner[a] - cells_[a]) * (0.5 / perUnit_);
      }
      mesh_.vertices.push_back(p);
    }
    return it->second;
  }

  void emit_face(const Lattice& cell, int axis, int dir) {
    const int u = (axis + 1) % 3;
    const int v = (axis + 2) % 3;
    Lattice c0 = cell;
    if (dir > 0) {
      c0[axis] += 1;
    }
    Lattice c1 = c0;
    c1[u] += 1;
    Lattice c2 = c1;
    c2[v] += 1;
    Lattice c3 = c0;
    c3[v] += 1;
    std::array<std::uint32_t, 4> q{vertex(c0), vertex(c1), vertex(c2), vertex(c3)};
    if (dir < 0) {
      std::swap(q[1], q[3]);
    }
    mesh_.faces.push_back({q[0], q[1], q[2]});
    mesh_.faces.push_back({q[0], q[2], q[3]});
  }

  Lattice cells_;
  int perUnit_;
  std::function<bool(int, int, int)> occupied_;
  std::map<Lattice, std::uint32_t> index_;
  TriangleMesh mesh_;
};

std::vector<Plane> axis_planes() {
  return {{Vec3::UnitX(), 0.0}, {Vec3::UnitY(), 0.0}, {Vec3::UnitZ(), 0.0}};
}

TriangleMesh prism_mesh(int n, int t) {
  // Key: (ring a, index along ring, z level). Cap rings a < t only exist at
  // levels 0 and t; ring t is the side wall's perimeter.
  TriangleMesh mesh;
  std::map<Lattice, std::uint32_t> index;
  std::vector<Vec3> corners(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double phi = 2.0 * std::numbers::pi * k / n;
    corners[k] = Vec3(std::cos(phi), std::sin(phi), 0.0);
  }
  auto zAt = [&](int level) {
    return static_cast<double>(2 * level - t) * (0.5 / t);
  };
  // Point b steps along sector k's edge on ring a.
  auto ringPoint = [&](int a, int k, int b) -> Vec3 {
    const Vec3& p = corners[k % n];
    const Vec3& q = corners[(k + 1) % n];
    return (static_cast<double>(a - b) / t) * p + (static_cast<double>(b) / t) * q;
  };
  auto vertex = [&](int a, int k, int b, int level) {
    const int ringSize = a * n;
    const int idx = a == 0 ? 0 : (k * a + b) % ringSize;
    const Lattice key{a, idx, level};
    const auto [it, fresh] = index.emplace(key, static_cast<std::uint32_t>(mesh.vertices.size()));
    if (fresh) {
      Vec3 p = a == 0 ? Vec3::Zero() : ringPoint(a, k, b);
      p.z() = zAt(level);
      mesh.vertices.push_back(p);
    }
    return it->second;
  };
  auto tri = [&](std::uint32_t a, std::uint32_t b, std::uint32_t c, bool flip) {
    if (flip) {
      mesh.faces.push_back({a, c, b});
    } else {
      mesh.faces.push_back({a, b, c});
    }
  };

  for (int level : {0, t}) {
    const bool flip = level == 0; // bottom cap faces -z
    for (int k = 0; k < n; ++k) {
      for (int a = 0; a < t; ++a) {
        for (int b = 0; b <= a; ++b) {
          tri(vertex(a, k, b, level), vertex(a + 1, k, b, level), vertex(a + 1, k, b + 1, level), flip);
          if (b < a) {
            tri(vertex(a, k, b, level), vertex(a + 1, k, b + 1, level), vertex(a, k, b + 1, level), flip);
          }
        }
      }
    }
  }
  for (int k = 0; k < n; ++k) {
    for (int b = 0; b < t; ++b) {
      for (int level = 0; level < t; ++level) {
        const std::uint32_t v00 = vertex(t, k, b, level);
        const std::uint32_t v10 = vertex(t, k, b + 1, level);
        const std::uint32_t v11 = vertex(t, k, b + 1, level + 1);
        const std::uint32_t v01 = vertex(t, k, b, level + 1);
        tri(v00, v10, v11, false);
        tri(v00, v11, v01, false);
      }
    }
  }
  return mesh;
}

TriangleMesh blob_mesh(std::uint64_t seed, int t) {
  // Cube-sphere: subdivided cube surface pushed out along each vertex direction.
  TriangleMesh mesh = CellSurface({t, t, t}, 1, [](int, int, int) { return true; }).build();

  Rng rng(seed);
  struct Lobe {
    Vec3 dir;
    double amplitude;
    double sharpness;
  };
  std::vector<Lobe> lobes;
  for (int l = 0; l < 7; ++l) {
    Vec3 d(standard_normal(rng), standard_normal(rng), standard_normal(rng));
    d.normalize();
    lobes.push_back({d, uniform(rng, 0.15, 0.5), uniform(rng, 3.0, 8.0)});
  }
  for (Vec3& p : mesh.vertices) {
    const Vec3 u = p.normalized();
    double r = 1.0;
    for (const Lobe& l : lobes) {
      r += l.amplitude * std::exp(l.sharpness * (u.dot(l.dir) - 1.0));
    }
    p = r * u;
  }
  return mesh;
}

} // namespace

SynthShape make_shape(ShapeKind kind, std::uint64_t seed, int tessellation, const ShapeOptions& options) {
  if (tessellation < 1) {
    throw InvalidArgument("tessellation must be at least 1");
  }
  const int t = tessellation;
  SynthShape s;
  s.kind = kind;
  s.seed = seed;
  switch (kind) {
    case ShapeKind::Cube: {
      s.name = "cube";
      s.mesh = CellSurface({t, t, t}, t, [](int, int, int) { return true; }).build();
      s.gt = axis_planes();
      const double r = std::sqrt(0.5);
      for (const Vec3& n : {Vec3(r, r, 0), Vec3(r, -r, 0), Vec3(r, 0, r), Vec3(r, 0, -r), Vec3(0, r, r), Vec3(0, r, -r)}) {
        s.extended_gt.push_back({n, 0.0});
      }
      break;
    }
    case ShapeKind::Cuboid: {
      s.name = "cuboid";
      Lattice cells;
      for (int a = 0; a < 3; ++a) {
        cells[a] = static_cast<int>(std::lround(options.cuboid_extents[a] * t));
        if (cells[a] < 1) {
          throw InvalidArgument("cuboid extent is smaller than one grid cell");
        }
      }
      if (cells[0] == cells[1] || cells[1] == cells[2] || cells[0] == cells[2]) {
        throw InvalidArgument("cuboid extents must be pairwise distinct");
      }
      s.mesh = CellSurface(cells, t, [](int, int, int) { return true; }).build();
      s.gt = axis_planes();
      break;
    }
    case ShapeKind::LShape: {
      s.name = "lshape";
      // Long arm along x (3 units), short arm along y (2 units), thickness 1.
      s.mesh = CellSurface({3 * t, 2 * t, t}, t, [t](int i, int j, int) { return j < t || i < t; }).build();
      s.gt = {{Vec3::UnitZ(), 0.0}};
      break;
    }
    case ShapeKind::NgonPrism: {
      const int n = options.ngon_sides;
      if (n < 3) {
        throw InvalidArgument("prism needs at least 3 sides");
      }
      s.name = "prism" + std::to_string(n);
      s.mesh = prism_mesh(n, t);
      for (int m = 0; m < n; ++m) {
        const double phi = std::numbers::pi * m / n;
        s.gt.push_back(Plane{Vec3(-std::sin(phi), std::cos(phi), 0.0), 0.0}.canonical());
      }
      s.gt.push_back({Vec3::UnitZ(), 0.0});
      break;
    }
    case ShapeKind::Blob: {
      s.name = "blob";
      s.mesh = blob_mesh(seed, t);
      break;
    }
  }
  s.mesh.validate();
  return s;
}

Mat3 random_rotation_matrix(std::uint64_t seed) {
  Rng rng(seed);
  const double u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  const double u3 = uniform01(rng);
  const double a = std::sqrt(1.0 - u1);
  const double b = std::sqrt(u1);
  const double tau = 2.0 * std::numbers::pi;
  const Eigen::Quaterniond q(b * std::cos(tau * u3), a * std::sin(tau * u2), a * std::cos(tau * u2), b * std::sin(tau * u3));
  return q.normalized().toRotationMatrix();
}

SynthShape rotate_shape(const SynthShape& shape, const Mat3& rotation) {
  SynthShape out = shape;
  for (Vec3& v : out.mesh.vertices) {
    v = rotation * v;
  }
  for (Vec3& n : out.mesh.normals) {
    n = rotation * n;
  }
  for (Plane& p : out.gt) {
    p = p.rotated(rotation);
  }
  for (Plane& p : out.extended_gt) {
    p = p.rotated(rotation);
  }
  return out;
}

SynthShape random_rotation(const SynthShape& shape, std::uint64_t seed) {
  if (seed == 0) {
    return shape;
  }
  return rotate_shape(shape, random_rotation_matrix(seed));
}

ShapeKind parse_shape_kind(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (s == "cube") {
    return ShapeKind::Cube;
  }
  if (s == "cuboid") {
    return ShapeKind::Cuboid;
  }
  if (s == "lshape" || s == "l") {
    return ShapeKind::LShape;
  }
  if (s == "prism" || s == "ngon" || s == "ngon_prism") {
    return ShapeKind::NgonPrism;
  }
  if (s == "blob") {
    return ShapeKind::Blob;
  }
  throw InvalidArgument("unknown shape kind '" + name + "'");
}

std::string shape_kind_name(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::Cube:
      return "cube";
    case ShapeKind::Cuboid:
      return "cuboid";
    case ShapeKind::LShape:
      return "lshape";
    case ShapeKind::NgonPrism:
      return "prism";
    case ShapeKind::Blob:
      return "blob";
  }
  return "unknown";
}

void export_shape(const SynthShape& shape, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_obj(shape.mesh, dir / (shape.name + ".obj"));
  GroundTruthSet gt;
  gt[shape.name] = shape.gt;
  std::ofstream out(dir / (shape.name + ".json"));
  if (!out) {
    throw Error("cannot write ground truth for " + shape.name);
  }
  out << ground_truth_to_json(gt);
}

std::vector<SynthShape> synthetic_corpus(int tessellation) {
  ShapeOptions hex;
  hex.ngon_sides = 6;
  return {
      make_shape(ShapeKind::Cube, 1, tessellation),
      make_shape(ShapeKind::Cuboid, 2, tessellation),
      make_shape(ShapeKind::NgonPrism, 3, tessellation, hex),
      make_shape(ShapeKind::LShape, 4, tessellation),
      make_shape(ShapeKind::Blob, 7, tessellation),
  };
}

double min_central_plane_chamfer(
    const SynthShape& shape,
    std::size_t n_planes,
    std::size_t n_samples,
    std::uint64_t seed) {
  const NormalizedMesh mesh = normalize(shape.mesh);
  const std::vector<SurfaceSample> samples = sample_surface(mesh, n_samples, seed);
  std::vector<Vec3> pts;
  pts.reserve(samples.size());
  for (const SurfaceSample& s : samples) {
    pts.push_back(s.point / mesh.diagonal());
  }
  const ReflectionChamfer scorer(pts);
  Rng rng(splitmix64(seed));
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n_planes; ++i) {
    Vec3 n(standard_normal(rng), standard_normal(rng), standard_normal(rng));
    best = std::min(best, scorer.evaluate({n.normalized(), 0.0}));
  }
  return best;
}

} // namespace symplane
