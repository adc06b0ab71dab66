#include "symplane/kdtree.h"

#include <algorithm>
#include <numeric>

namespace symplane {

PointKdTree::PointKdTree(std::span<const Vec3> points, std::size_t leaf_size) {
  points_.assign(points.begin(), points.end());
  indices_.resize(points_.size());
  std::iota(indices_.begin(), indices_.end(), 0u);
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / std::max<std::size_t>(leaf_size, 1) + 1);
    build(0, static_cast<std::uint32_t>(points_.size()), std::max<std::size_t>(leaf_size, 1));
    std::vector<Vec3> permuted(points_.size());
    for (std::size_t i = 0; i < indices_.size(); ++i) {
      permuted[i] = points[indices_[i]];
    }
    points_ = std::move(permuted);
  }
}

std::uint32_t PointKdTree::build(std::uint32_t begin, std::uint32_t end, std::size_t leaf_size) {
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();
  if (end - begin <= leaf_size) {
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    return id;
  }

  Vec3 lo = points_[indices_[begin]];
  Vec3 hi = lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[indices_[i]]);
    hi = hi.cwiseMax(points_[indices_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] == lo[axis]) {
    // all points coincide
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    return id;
  }

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(
      indices_.begin() + begin, indices_.begin() + mid, indices_.begin() + end, [&](std::uint32_t a, std::uint32_t b) {
        const double pa = points_[a][axis];
        const double pb = points_[b][axis];
        return pa < pb || (pa == pb && a < b);
      });

  const double split = points_[indices_[mid]][axis];
  const std::uint32_t left = build(begin, mid, leaf_size);
  const std::uint32_t right = build(mid, end, leaf_size);
  Node& node = nodes_[id];
  node.axis = axis;
  node.split = split;
  node.begin = begin;
  node.end = end;
  node.left = left;
  node.right = right;
  return id;
}

PointKdTree::Nearest PointKdTree::nearest(const Vec3& query) const {
  Nearest best;
  if (nodes_.empty()) {
    return best;
  }

  struct Pending {
    std::uint32_t node;
    double bound;
  };
  Pending stack[64];
  int top = 0;
  stack[top++] = {0, 0.0};

  while (top > 0) {
    const Pending item = stack[--top];
    // Strict comparison keeps equal-distance candidates reachable for the
    // smaller-index tie-break.
    if (item.bound > best.squared_distance) {
      continue;
    }
    const Node& node = nodes_[item.node];
    if (node.axis < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const Vec3& p = points_[i];
        const double dx = query.x() - p.x();
        const double dy = query.y() - p.y();
        const double dz = query.z() - p.z();
        const double d = dx * dx + dy * dy + dz * dz;
        if (d < best.squared_distance || (d == best.squared_distance && indices_[i] < best.index)) {
          best.squared_distance = d;
          best.index = indices_[i];
        }
      }
      continue;
    }
    const double delta = query[node.axis] - node.split;
    const double planeBound = std::max(item.bound, delta * delta);
    const std::uint32_t nearChild = delta < 0.0 ? node.left : node.right;
    const std::uint32_t farChild = delta < 0.0 ? node.right : node.left;
    // Points equal to the split value can sit on either side, so the far
    // side is bounded by the plane distance, never skipped outright.
    stack[top++] = {farChild, planeBound};
    stack[top++] = {nearChild, item.bound};
  }
  return best;
}

} // namespace symplane
