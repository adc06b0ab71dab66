#include "symplane/errors.h"
#include "symplane/render.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace symplane {

namespace {

struct ClipVertex {
  Vec3 view;
  Vec3 bary; // barycentric coordinates against the original face
};

double edge(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& p) {
  return (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
}

// Tie rule for pixel centers exactly on an edge; antisymmetric in the edge
// direction, so a shared edge is owned by exactly one of its triangles.
bool owns_edge(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  const double dy = b.y() - a.y();
  const double dx = b.x() - a.x();
  return dy > 0.0 || (dy == 0.0 && dx < 0.0);
}

// Sutherland-Hodgman against z >= near.
std::vector<ClipVertex> clip_near(const std::array<ClipVertex, 3>& tri, double near) {
  std::vector<ClipVertex> out;
  out.reserve(4);
  for (int i = 0; i < 3; ++i) {
    const ClipVertex& cur = tri[i];
    const ClipVertex& nxt = tri[(i + 1) % 3];
    const bool curIn = cur.view.z() >= near;
    const bool nxtIn = nxt.view.z() >= near;
    if (curIn) {
      out.push_back(cur);
    }
    if (curIn != nxtIn) {
      const double t = (near - cur.view.z()) / (nxt.view.z() - cur.view.z());
      out.push_back({cur.view + t * (nxt.view - cur.view), cur.bary + t * (nxt.bary - cur.bary)});
    }
  }
  return out;
}

class Rasterizer {
 public:
  Rasterizer(const Camera& camera, RenderResult& out)
      : camera_(camera),
        out_(out),
        zbuf_(static_cast<std::size_t>(camera.width()) * camera.height(), std::numeric_limits<double>::infinity()) {}

  void draw(std::int32_t faceId, float shade, const ClipVertex& v0, const ClipVertex& v1, const ClipVertex& v2) {
    std::array<const ClipVertex*, 3> v{&v0, &v1, &v2};
    std::array<Eigen::Vector2d, 3> s{camera_.project(v0.view), camera_.project(v1.view), camera_.project(v2.view)};
    double area = edge(s[0], s[1], s[2]);
    if (area == 0.0 || !std::isfinite(area)) {
      return;
    }
    if (area < 0.0) {
      std::swap(v[1], v[2]);
      std::swap(s[1], s[2]);
      area = -area;
    }
    const std::array<double, 3> invZ{1.0 / v[0]->view.z(), 1.0 / v[1]->view.z(), 1.0 / v[2]->view.z()};
    const std::array<bool, 3> owns{owns_edge(s[1], s[2]), owns_edge(s[2], s[0]), owns_edge(s[0], s[1])};

    const double minX = std::min({s[0].x(), s[1].x(), s[2].x()});
    const double maxX = std::max({s[0].x(), s[1].x(), s[2].x()});
    const double minY = std::min({s[0].y(), s[1].y(), s[2].y()});
    const double maxY = std::max({s[0].y(), s[1].y(), s[2].y()});
    const int W = camera_.width();
    const int H = camera_.height();
    const int x0 = static_cast<int>(std::max(0.0, std::ceil(minX - 0.5)));
    const int x1 = static_cast<int>(std::min(W - 1.0, std::floor(maxX - 0.5)));
    const int y0 = static_cast<int>(std::max(0.0, std::ceil(minY - 0.5)));
    const int y1 = static_cast<int>(std::min(H - 1.0, std::floor(maxY - 0.5)));

    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const Eigen::Vector2d p(x + 0.5, y + 0.5);
        const std::array<double, 3> w{edge(s[1], s[2], p), edge(s[2], s[0], p), edge(s[0], s[1], p)};
        bool inside = true;
        for (int i = 0; i < 3 && inside; ++i) {
          inside = w[i] > 0.0 || (w[i] == 0.0 && owns[i]);
        }
        if (!inside) {
          continue;
        }
        const double l0 = w[0] / area * invZ[0];
        const double l1 = w[1] / area * invZ[1];
        const double l2 = w[2] / area * invZ[2];
        const double iz = l0 + l1 + l2;
        const double depth = 1.0 / iz;
        const std::size_t idx = static_cast<std::size_t>(y) * W + x;
        if (!(depth < zbuf_[idx])) {
          continue;
        }
        zbuf_[idx] = depth;
        const Vec3 bary = (l0 * v[0]->bary + l1 * v[1]->bary + l2 * v[2]->bary) / iz;
        Fragment& frag = out_.fragments.pixels[idx];
        frag.face_id = faceId;
        frag.bary = {static_cast<float>(bary[0]), static_cast<float>(bary[1]), static_cast<float>(bary[2])};
        frag.depth = static_cast<float>(depth);
        out_.image.pixels[idx] = shade;
      }
    }
  }

 private:
  const Camera& camera_;
  RenderResult& out_;
  std::vector<double> zbuf_;
};

} // namespace

RenderResult rasterize(const NormalizedMesh& nmesh, const Camera& camera) {
  const TriangleMesh& mesh = nmesh.mesh();
  RenderResult out;
  out.image = GrayImage(camera.width(), camera.height(), kBackground);
  out.fragments = FragmentBuffer(camera.width(), camera.height(), Fragment{});
  const double near = 1e-6 * std::max(nmesh.diagonal(), 1e-300);

  Rasterizer raster(camera, out);
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto [a, b, c] = mesh.corners(f);
    const std::array<ClipVertex, 3> tri{
        ClipVertex{camera.to_view(a), Vec3::UnitX()},
        ClipVertex{camera.to_view(b), Vec3::UnitY()},
        ClipVertex{camera.to_view(c), Vec3::UnitZ()}};
    if (tri[0].view.z() < near && tri[1].view.z() < near && tri[2].view.z() < near) {
      continue;
    }
    const Vec3 normal = (b - a).cross(c - a);
    const double nlen = normal.norm();
    if (!(nlen > 0.0)) {
      continue;
    }
    const Vec3 toEye = (camera.eye() - (a + b + c) / 3.0).normalized();
    const auto shade = static_cast<float>(kAlbedo * std::abs(normal.dot(toEye)) / nlen);

    const auto id = static_cast<std::int32_t>(f);
    if (tri[0].view.z() >= near && tri[1].view.z() >= near && tri[2].view.z() >= near) {
      raster.draw(id, shade, tri[0], tri[1], tri[2]);
      continue;
    }
    const auto poly = clip_near(tri, near);
    for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
      raster.draw(id, shade, poly[0], poly[k], poly[k + 1]);
    }
  }
  return out;
}

template <typename T>
PixelGrid<T> rotate_grid(const PixelGrid<T>& src, int deg) {
  const int d = ((deg % 360) + 360) % 360;
  if (d % 90 != 0) {
    throw InvalidArgument("rotation must be a multiple of 90 degrees");
  }
  if (d == 0) {
    return src;
  }
  const int W = src.width;
  const int H = src.height;
  if (d == 180) {
    PixelGrid<T> out = src;
    std::reverse(out.pixels.begin(), out.pixels.end());
    return out;
  }
  if (W != H) {
    throw InvalidArgument("quarter-turn rotation needs a square grid");
  }
  PixelGrid<T> out(W, H, src.pixels.empty() ? T{} : src.pixels.front());
  for (int r = 0; r < H; ++r) {
    for (int c = 0; c < W; ++c) {
      // 90: top-right moves to top-left (counter-clockwise).
      out.at(c, r) = d == 90 ? src.at(W - 1 - r, c) : src.at(r, W - 1 - c);
    }
  }
  return out;
}

template PixelGrid<Fragment> rotate_grid(const PixelGrid<Fragment>&, int);
template PixelGrid<float> rotate_grid(const PixelGrid<float>&, int);

RenderResult render_view(const NormalizedMesh& mesh, const Viewpoint& view, const CameraSettings& settings) {
  RenderResult base = rasterize(mesh, Camera::for_viewpoint(view, settings));
  if (view.rotation_deg % 360 == 0) {
    return base;
  }
  return {rotate_grid(base.image, view.rotation_deg), rotate_grid(base.fragments, view.rotation_deg)};
}

} // namespace symplane
