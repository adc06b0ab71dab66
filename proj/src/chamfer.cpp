#include "symplane/errors.h"
#include "symplane/random.h"
#include "symplane/symmetry.h"

#include <algorithm>
#include <numeric>

namespace symplane {

namespace {

double directed_mean(std::span<const Vec3> from, const PointKdTree& to) {
  double sum = 0.0;
  for (const Vec3& p : from) {
    sum += to.nearest(p).squared_distance;
  }
  return sum / static_cast<double>(from.size());
}

} // namespace

double chamfer_distance(std::span<const Vec3> P, std::span<const Vec3> Q) {
  if (P.empty() || Q.empty()) {
    throw EmptySet("Chamfer distance needs two non-empty point sets");
  }
  const PointKdTree treeP(P);
  const PointKdTree treeQ(Q);
  return 0.5 * (directed_mean(P, treeQ) + directed_mean(Q, treeP));
}

ReflectionChamfer::ReflectionChamfer(std::span<const Vec3> points)
    : points_(points.begin(), points.end()), order_(points.size()), tree_(points) {
  if (points_.empty()) {
    throw EmptySet("Chamfer distance needs a non-empty point set");
  }
  std::iota(order_.begin(), order_.end(), 0u);
  // Fisher-Yates with a fixed seed: early partial sums then sample the whole
  // shape rather than one spatially coherent patch.
  Rng rng(0x63686d66ULL);
  for (std::size_t i = order_.size(); i > 1; --i) {
    std::swap(order_[i - 1], order_[uniform_index(rng, i)]);
  }
}

double ReflectionChamfer::accumulate(const Plane& plane, std::size_t begin, std::size_t end, double partial) const {
  for (std::size_t t = begin; t < end; ++t) {
    partial += tree_.nearest(reflect_point(points_[order_[t]], plane)).squared_distance;
  }
  return partial;
}

} // namespace symplane
