#include "symplane/errors.h"
#include "symplane/render.h"

#include <cmath>
#include <numbers>

namespace symplane {

Vec3 default_up_hint(const Vec3& position) {
  const double len = position.norm();
  if (!(len > 0.0)) {
    return Vec3::UnitY();
  }
  const double cosToY = std::abs(position.y()) / len;
  if (cosToY >= std::cos(std::numbers::pi / 180.0)) {
    return Vec3::UnitX();
  }
  return Vec3::UnitY();
}

std::vector<Viewpoint> fibonacci_viewpoints(std::size_t n, double radius) {
  if (n == 0) {
    throw InvalidArgument("viewpoint count must be at least 1");
  }
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  std::vector<Viewpoint> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * static_cast<double>(i);
    const Vec3 p = radius * Vec3(r * std::cos(phi), r * std::sin(phi), z).normalized();
    out.push_back({p, default_up_hint(p), 0});
  }
  return out;
}

std::vector<Viewpoint> regular_viewpoints(int level, double radius) {
  if (level < 1 || level > 7) {
    throw InvalidArgument("regular sampling level must be in [1, 7]");
  }
  // Poles plus 2L-1 latitude rings at polar angles j*pi/(2L). A ring that is m
  // steps from its nearest pole holds 4*ceil(m/2) points, so level 1 is the
  // octahedron and each level refines the previous latitude partition.
  std::vector<Vec3> dirs;
  dirs.emplace_back(0.0, 0.0, 1.0);
  const int rings = 2 * level - 1;
  for (int j = 1; j <= rings; ++j) {
    const int m = std::min(j, 2 * level - j);
    const int count = 4 * ((m + 1) / 2);
    const double theta = std::numbers::pi * j / (2.0 * level);
    for (int k = 0; k < count; ++k) {
      const double phi = 2.0 * std::numbers::pi * k / count;
      dirs.emplace_back(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta));
    }
  }
  dirs.emplace_back(0.0, 0.0, -1.0);

  std::vector<Viewpoint> out;
  out.reserve(dirs.size());
  for (const Vec3& d : dirs) {
    // Snap rounding residue so axis directions are exact.
    Vec3 clean = d;
    for (int i = 0; i < 3; ++i) {
      if (std::abs(clean[i]) < 1e-15) {
        clean[i] = 0.0;
      }
    }
    const Vec3 p = radius * clean.normalized();
    out.push_back({p, default_up_hint(p), 0});
  }
  return out;
}

int regular_level_for_count(std::size_t count) {
  for (int level = 1; level <= 7; ++level) {
    if (static_cast<std::size_t>(2 * level * level + 2 * level + 2) == count) {
      return level;
    }
  }
  return 0;
}

std::vector<Viewpoint> with_rotations(const std::vector<Viewpoint>& views, const std::vector<int>& rotations_deg) {
  std::vector<Viewpoint> out;
  out.reserve(views.size() * rotations_deg.size());
  for (const Viewpoint& v : views) {
    for (int deg : rotations_deg) {
      Viewpoint r = v;
      r.rotation_deg = deg;
      out.push_back(r);
    }
  }
  return out;
}

Camera Camera::look_at(
    const Vec3& eye,
    const Vec3& target,
    const Vec3& up_hint,
    double fov_y_deg,
    int width,
    int height,
    double roll_deg) {
  if (width <= 0 || height <= 0) {
    throw InvalidArgument("image size must be positive");
  }
  if (!(fov_y_deg > 0.0 && fov_y_deg < 180.0)) {
    throw InvalidArgument("field of view must be in (0, 180) degrees");
  }
  const Vec3 forward = (target - eye).normalized();
  Vec3 right = forward.cross(up_hint);
  if (right.norm() < 1e-12) {
    throw InvalidArgument("up hint is parallel to the view direction");
  }
  right.normalize();
  Vec3 up = right.cross(forward);

  const double roll = roll_deg * std::numbers::pi / 180.0;
  const Vec3 rolledRight = std::cos(roll) * right - std::sin(roll) * up;
  const Vec3 rolledUp = std::cos(roll) * up + std::sin(roll) * right;

  Camera cam;
  cam.eye_ = eye;
  cam.axes_.row(0) = rolledRight.transpose();
  cam.axes_.row(1) = rolledUp.transpose();
  cam.axes_.row(2) = forward.transpose();
  cam.focal_ = 0.5 * height / std::tan(0.5 * fov_y_deg * std::numbers::pi / 180.0);
  cam.width_ = width;
  cam.height_ = height;
  return cam;
}

Camera Camera::for_viewpoint(const Viewpoint& view, const CameraSettings& settings) {
  return look_at(
      view.position, Vec3::Zero(), view.up_hint, settings.fov_y_deg, settings.image_size, settings.image_size);
}

Vec3 Camera::ray_direction(double px, double py) const {
  const Vec3 local((px - 0.5 * width_) / focal_, (0.5 * height_ - py) / focal_, 1.0);
  return (axes_.transpose() * local).normalized();
}

std::string render_stem(std::size_t view_index, int rotation_deg) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "view_%03zu_rot%03d", view_index, rotation_deg);
  return buf;
}

} // namespace symplane
