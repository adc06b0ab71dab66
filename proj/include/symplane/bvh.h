#pragma once

#include "symplane/geometry.h"

#include <cstdint>
#include <limits>
#include <vector>

namespace symplane {

struct ClosestPoint {
  Vec3 point = Vec3::Zero();
  double squared_distance = std::numeric_limits<double>::infinity();
  std::uint32_t face = std::numeric_limits<std::uint32_t>::max();
};

// Closest point on triangle (a, b, c) to p, by Voronoi-region case analysis.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

// Bounding volume hierarchy over mesh triangles for exact point-to-mesh
// distance queries.
class TriangleBvh {
 public:
  explicit TriangleBvh(const TriangleMesh& mesh, std::size_t leaf_size = 4);

  [[nodiscard]] ClosestPoint closest(const Vec3& query) const;

 private:
  struct Node {
    Eigen::AlignedBox3d box;
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::uint32_t left = 0; // children, interior nodes only
    std::uint32_t right = 0;
    bool leaf = true;
  };

  std::uint32_t build(std::uint32_t begin, std::uint32_t end, std::size_t leaf_size);

  std::vector<std::array<Vec3, 3>> triangles_;
  std::vector<Vec3> centroids_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

} // namespace symplane
