#include "symplane/bvh.h"

#include "symplane/errors.h"

#include <algorithm>
#include <numeric>

namespace symplane {

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) {
    return a;
  }

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) {
    return b;
  }

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    return a + v * ab;
  }

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) {
    return c;
  }

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    return a + w * ac;
  }

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return b + w * (c - b);
  }

  const double denom = va + vb + vc;
  if (!(denom > 0.0)) {
    // Degenerate (collinear) triangle: fall back to the closest edge point.
    auto onSegment = [&](const Vec3& s, const Vec3& t) -> Vec3 {
      const Vec3 st = t - s;
      const double len2 = st.squaredNorm();
      if (!(len2 > 0.0)) {
        return s;
      }
      return s + std::clamp((p - s).dot(st) / len2, 0.0, 1.0) * st;
    };
    const Vec3 cands[3] = {onSegment(a, b), onSegment(b, c), onSegment(a, c)};
    return *std::min_element(std::begin(cands), std::end(cands), [&](const Vec3& x, const Vec3& y) {
      return (x - p).squaredNorm() < (y - p).squaredNorm();
    });
  }
  const double v = vb / denom;
  const double w = vc / denom;
  return a + ab * v + ac * w;
}

TriangleBvh::TriangleBvh(const TriangleMesh& mesh, std::size_t leaf_size) {
  if (mesh.faces.empty()) {
    throw DegenerateMesh("cannot build a BVH over an empty mesh");
  }
  triangles_.reserve(mesh.faces.size());
  centroids_.reserve(mesh.faces.size());
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    triangles_.push_back(mesh.corners(f));
    const auto& t = triangles_.back();
    centroids_.push_back((t[0] + t[1] + t[2]) / 3.0);
  }
  order_.resize(triangles_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  nodes_.reserve(2 * triangles_.size() / std::max<std::size_t>(leaf_size, 1) + 1);
  build(0, static_cast<std::uint32_t>(triangles_.size()), std::max<std::size_t>(leaf_size, 1));
}

std::uint32_t TriangleBvh::build(std::uint32_t begin, std::uint32_t end, std::size_t leaf_size) {
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();
  Eigen::AlignedBox3d box;
  Eigen::AlignedBox3d centroidBox;
  for (std::uint32_t i = begin; i < end; ++i) {
    for (const Vec3& v : triangles_[order_[i]]) {
      box.extend(v);
    }
    centroidBox.extend(centroids_[order_[i]]);
  }
  nodes_[id].box = box;
  nodes_[id].begin = begin;
  nodes_[id].end = end;

  const Vec3 extent = centroidBox.sizes();
  int axis = 0;
  extent.maxCoeff(&axis);
  if (end - begin <= leaf_size || !(extent[axis] > 0.0)) {
    return id;
  }

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(
      order_.begin() + begin, order_.begin() + mid, order_.begin() + end, [&](std::uint32_t a, std::uint32_t b) {
        return centroids_[a][axis] < centroids_[b][axis] || (centroids_[a][axis] == centroids_[b][axis] && a < b);
      });
  const std::uint32_t left = build(begin, mid, leaf_size);
  const std::uint32_t right = build(mid, end, leaf_size);
  nodes_[id].leaf = false;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

ClosestPoint TriangleBvh::closest(const Vec3& query) const {
  ClosestPoint best;
  struct Pending {
    std::uint32_t node;
    double bound;
  };
  std::vector<Pending> stack;
  stack.reserve(64);
  stack.push_back({0, nodes_[0].box.squaredExteriorDistance(query)});
  while (!stack.empty()) {
    const Pending item = stack.back();
    stack.pop_back();
    if (item.bound > best.squared_distance) {
      continue;
    }
    const Node& node = nodes_[item.node];
    if (node.leaf) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const std::uint32_t f = order_[i];
        const auto& t = triangles_[f];
        const Vec3 q = closest_point_on_triangle(query, t[0], t[1], t[2]);
        const double d = (q - query).squaredNorm();
        if (d < best.squared_distance || (d == best.squared_distance && f < best.face)) {
          best = {q, d, f};
        }
      }
      continue;
    }
    const double dl = nodes_[node.left].box.squaredExteriorDistance(query);
    const double dr = nodes_[node.right].box.squaredExteriorDistance(query);
    // Visit the nearer child first (pushed last).
    if (dl <= dr) {
      stack.push_back({node.right, dr});
      stack.push_back({node.left, dl});
    } else {
      stack.push_back({node.left, dl});
      stack.push_back({node.right, dr});
    }
  }
  return best;
}

} // namespace symplane
