#pragma once

#include "symplane/geometry.h"

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace symplane {

// Exact nearest-neighbour index over a fixed 3D point set. Immutable after
// construction; concurrent queries are safe.
class PointKdTree {
 public:
  struct Nearest {
    std::uint32_t index = std::numeric_limits<std::uint32_t>::max();
    double squared_distance = std::numeric_limits<double>::infinity();
  };

  PointKdTree() = default;
  explicit PointKdTree(std::span<const Vec3> points, std::size_t leaf_size = 8);

  // Closest stored point; equal distances resolve to the smaller index.
  [[nodiscard]] Nearest nearest(const Vec3& query) const;

  [[nodiscard]] std::size_t size() const {
    return points_.size();
  }

 private:
  struct Node {
    // Leaf when axis < 0: [begin, end) into points_/indices_.
    std::int32_t axis = -1;
    double split = 0.0;
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
  };

  std::uint32_t build(std::uint32_t begin, std::uint32_t end, std::size_t leaf_size);

  std::vector<Vec3> points_; // permuted copy, leaf-contiguous
  std::vector<std::uint32_t> indices_;
  std::vector<Node> nodes_;
};

} // namespace symplane
