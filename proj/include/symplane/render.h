#pragma once

#include "symplane/geometry.h"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace symplane {

struct Viewpoint {
  Vec3 position = Vec3::UnitZ();
  Vec3 up_hint = Vec3::UnitY();
  // In-plane image rotation, counter-clockwise; one of 0, 90, 180, 270.
  int rotation_deg = 0;
};

// Up hint for a camera at `position` looking at the origin: +y, or +x when
// the view direction is within 1 degree of the y axis.
Vec3 default_up_hint(const Vec3& position);

// Fibonacci lattice: golden-angle azimuth steps, uniform steps in z.
std::vector<Viewpoint> fibonacci_viewpoints(std::size_t n, double radius);

// Latitude/longitude partition seeded from the octahedron. Level L in [1, 7]
// yields 2L^2 + 2L + 2 viewpoints: 6, 14, 26, 42, 62, 86, 114.
std::vector<Viewpoint> regular_viewpoints(int level, double radius = 1.0);
// Level whose viewpoint count is `count`, or 0 when no level matches.
int regular_level_for_count(std::size_t count);

// Every viewpoint repeated once per rotation, viewpoint-major.
std::vector<Viewpoint> with_rotations(const std::vector<Viewpoint>& views, const std::vector<int>& rotations_deg);

struct CameraSettings {
  double radius_factor = 2.2; // camera distance in units of the mesh diagonal
  double fov_y_deg = 40.0;
  int image_size = 518;
};

// Pinhole camera looking at a target. View space: x right, y up, z forward;
// pixel space: x right, y down, pixel (i, j) centered at (i + 0.5, j + 0.5).
class Camera {
 public:
  // Positive roll rotates the resulting image counter-clockwise.
  static Camera look_at(
      const Vec3& eye,
      const Vec3& target,
      const Vec3& up_hint,
      double fov_y_deg,
      int width,
      int height,
      double roll_deg = 0.0);
  // Unrolled camera for a viewpoint; its rotation_deg is applied to the
  // output grids by render_view, not to the camera.
  static Camera for_viewpoint(const Viewpoint& view, const CameraSettings& settings);

  [[nodiscard]] Vec3 to_view(const Vec3& world) const {
    return axes_ * (world - eye_);
  }
  // Continuous pixel coordinates of a view-space point with z > 0.
  [[nodiscard]] Eigen::Vector2d project(const Vec3& view) const {
    return {0.5 * width_ + focal_ * view.x() / view.z(), 0.5 * height_ - focal_ * view.y() / view.z()};
  }
  // World-space unit direction of the ray through continuous pixel (px, py).
  [[nodiscard]] Vec3 ray_direction(double px, double py) const;

  [[nodiscard]] const Vec3& eye() const {
    return eye_;
  }
  [[nodiscard]] Vec3 forward() const {
    return axes_.row(2).transpose();
  }
  [[nodiscard]] const Mat3& axes() const {
    return axes_;
  }
  [[nodiscard]] double focal() const {
    return focal_;
  }
  [[nodiscard]] int width() const {
    return width_;
  }
  [[nodiscard]] int height() const {
    return height_;
  }

 private:
  Vec3 eye_ = Vec3::Zero();
  Mat3 axes_ = Mat3::Identity(); // rows: right, up, forward
  double focal_ = 1.0;
  int width_ = 0;
  int height_ = 0;
};

struct Fragment {
  static constexpr std::int32_t kEmpty = -1;

  std::int32_t face_id = kEmpty;
  std::array<float, 3> bary{0.0f, 0.0f, 0.0f};
  float depth = 0.0f; // view-space distance along the camera axis

  [[nodiscard]] bool empty() const {
    return face_id < 0;
  }
};

template <typename T>
struct PixelGrid {
  int width = 0;
  int height = 0;
  std::vector<T> pixels; // row-major, row 0 at the top

  PixelGrid() = default;
  PixelGrid(int w, int h, const T& fill) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

  T& at(int x, int y) {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
  const T& at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
};

using FragmentBuffer = PixelGrid<Fragment>;
using GrayImage = PixelGrid<float>;

// Counter-clockwise rotation by a multiple of 90 degrees. Non-square grids
// are only accepted for 0 and 180.
template <typename T>
PixelGrid<T> rotate_grid(const PixelGrid<T>& src, int deg);

struct RenderResult {
  GrayImage image;
  FragmentBuffer fragments;
};

constexpr float kBackground = 1.0f;
constexpr double kAlbedo = 0.7;

// Z-buffered, double-sided, perspective-correct rasterization with flat
// Lambertian shading under a headlight. Safe to call concurrently.
RenderResult rasterize(const NormalizedMesh& mesh, const Camera& camera);

// Rasterize from the viewpoint's camera, then rotate image and fragments by
// the viewpoint's rotation.
RenderResult render_view(const NormalizedMesh& mesh, const Viewpoint& view, const CameraSettings& settings);

// view_{vi:03}_rot{deg:03}
std::string render_stem(std::size_t view_index, int rotation_deg);

void write_png(const GrayImage& image, const std::filesystem::path& path);
void write_fragments(const FragmentBuffer& fragments, const std::filesystem::path& path);
FragmentBuffer read_fragments(const std::filesystem::path& path);

} // namespace symplane
