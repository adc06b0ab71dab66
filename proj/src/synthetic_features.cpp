#include "symplane/errors.h"
#include "symplane/features.h"
#include "symplane/parallel.h"
#include "symplane/random.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>

namespace symplane {

namespace {

constexpr std::size_t kMaxGroupOrder = 512;
constexpr double kFrequency = 8.0; // radians per diagonal along a unit direction

bool same_transform(const Eigen::Matrix4d& a, const Eigen::Matrix4d& b, double diagonal) {
  const double rot = (a.topLeftCorner<3, 3>() - b.topLeftCorner<3, 3>()).cwiseAbs().maxCoeff();
  const double shift = (a.topRightCorner<3, 1>() - b.topRightCorner<3, 1>()).cwiseAbs().maxCoeff();
  return rot < 1e-9 && shift < 1e-9 * diagonal;
}

} // namespace

SyntheticField::SyntheticField(
    const NormalizedMesh& mesh,
    std::span<const Plane> planes,
    int dim,
    std::uint64_t seed)
    : diagonal_(mesh.diagonal()), dim_(dim) {
  if (dim < 3) {
    throw InvalidArgument("synthetic feature dimension must be at least 3");
  }
  // Closure of the generating reflections under composition.
  group_.push_back(Eigen::Matrix4d::Identity());
  std::vector<Eigen::Matrix4d> gens;
  for (const Plane& p : planes) {
    gens.push_back(reflection_matrix(p));
  }
  std::deque<Eigen::Matrix4d> frontier{group_.front()};
  while (!frontier.empty()) {
    const Eigen::Matrix4d g = frontier.front();
    frontier.pop_front();
    for (const Eigen::Matrix4d& r : gens) {
      const Eigen::Matrix4d h = r * g;
      const bool known = std::any_of(group_.begin(), group_.end(), [&](const Eigen::Matrix4d& e) {
        return same_transform(e, h, diagonal_);
      });
      if (known) {
        continue;
      }
      if (group_.size() >= kMaxGroupOrder) {
        throw InvalidArgument("planes generate an infinite or very large reflection group");
      }
      group_.push_back(h);
      frontier.push_back(h);
    }
  }

  Rng rng(seed);
  frequencies_.resize(static_cast<std::size_t>(dim));
  phases_.resize(static_cast<std::size_t>(dim));
  for (int c = 0; c < dim; ++c) {
    const double x = standard_normal(rng);
    const double y = standard_normal(rng);
    const double z = standard_normal(rng);
    frequencies_[c] = kFrequency * Vec3(x, y, z);
    phases_[c] = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  }
}

void SyntheticField::evaluate(const Vec3& x, std::span<float> out) const {
  // Orbit points are snapped to a fine lattice and sorted, so every member of
  // an orbit sums the same values in the same order.
  const double h = diagonal_ * 0x1.0p-24;
  std::vector<std::array<long long, 3>> orbit;
  orbit.reserve(group_.size());
  for (const Eigen::Matrix4d& g : group_) {
    const Vec3 y = g.topLeftCorner<3, 3>() * x + g.topRightCorner<3, 1>();
    orbit.push_back({std::llround(y.x() / h), std::llround(y.y() / h), std::llround(y.z() / h)});
  }
  std::sort(orbit.begin(), orbit.end());

  std::vector<double> acc(static_cast<std::size_t>(dim_), 0.0);
  for (const auto& q : orbit) {
    const Vec3 p = Vec3(static_cast<double>(q[0]), static_cast<double>(q[1]), static_cast<double>(q[2])) * h / diagonal_;
    for (int c = 0; c < dim_; ++c) {
      acc[c] += std::sin(frequencies_[c].dot(p) + phases_[c]);
    }
  }
  const double n = static_cast<double>(orbit.size());
  for (int c = 0; c < dim_; ++c) {
    out[c] = static_cast<float>(acc[c] / n);
  }
}

VertexFeatures synthetic_features(
    const NormalizedMesh& mesh,
    std::span<const Plane> planes,
    int dim,
    double noise,
    std::uint64_t seed) {
  const SyntheticField field(mesh, planes, dim, seed);
  const std::size_t V = mesh.vertex_count();
  VertexFeatures out(V, dim);
  parallel_for(0, V, 256, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t v = lo; v < hi; ++v) {
      field.evaluate(mesh.mesh().vertices[v], out.row(v));
    }
  });
  std::fill(out.visibility.begin(), out.visibility.end(), 1u);
  if (noise > 0.0) {
    Rng rng(splitmix64(seed ^ 0x6e6f697365ULL));
    for (float& f : out.data) {
      f = static_cast<float>(f + uniform(rng, -noise, noise));
    }
  }
  return out;
}

FeatureMap synthetic_feature_map(
    const NormalizedMesh& nmesh,
    const VertexFeatures& clean_field,
    const FragmentBuffer& fragments,
    RenderKey key,
    int patches,
    double noise,
    std::uint64_t seed) {
  const TriangleMesh& mesh = nmesh.mesh();
  if (patches <= 0 || fragments.width != fragments.height || fragments.width % patches != 0) {
    throw DimensionMismatch("fragment grid is not a square multiple of the patch grid");
  }
  if (clean_field.vertex_count() != mesh.vertices.size()) {
    throw DimensionMismatch("field does not match the mesh vertex count");
  }
  const int patchPx = fragments.width / patches;
  const auto d = static_cast<std::size_t>(clean_field.dim);
  FeatureMap map(key.view_id, key.rotation_deg, patches, clean_field.dim);
  std::vector<double> sum(d);
  for (int pr = 0; pr < patches; ++pr) {
    for (int pc = 0; pc < patches; ++pc) {
      std::fill(sum.begin(), sum.end(), 0.0);
      std::size_t count = 0;
      for (int y = pr * patchPx; y < (pr + 1) * patchPx; ++y) {
        for (int x = pc * patchPx; x < (pc + 1) * patchPx; ++x) {
          const Fragment& f = fragments.at(x, y);
          if (f.empty()) {
            continue;
          }
          const Face& face = mesh.faces.at(static_cast<std::size_t>(f.face_id));
          const auto a = clean_field.row(face[0]);
          const auto b = clean_field.row(face[1]);
          const auto c = clean_field.row(face[2]);
          for (std::size_t k = 0; k < d; ++k) {
            sum[k] += f.bary[0] * a[k] + f.bary[1] * b[k] + f.bary[2] * c[k];
          }
          ++count;
        }
      }
      auto out = map.patch(pr, pc);
      const std::uint64_t cell = static_cast<std::uint64_t>(pr) * patches + pc;
      for (std::size_t k = 0; k < d; ++k) {
        const double mean = count > 0 ? sum[k] / static_cast<double>(count) : 0.0;
        const double u = hash_uniform01(
            seed, (static_cast<std::uint64_t>(key.view_id) << 32) | static_cast<std::uint32_t>(key.rotation_deg),
            cell, k);
        out[k] = static_cast<float>(mean + noise * (2.0 * u - 1.0));
      }
    }
  }
  return map;
}

} // namespace symplane
