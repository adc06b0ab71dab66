#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace symplane {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Face = std::array<std::uint32_t, 3>;

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  // Optional; empty when the source file carried none.
  std::vector<Vec3> normals;

  // Throws ParseError if an index is out of range, a face repeats a vertex,
  // or a coordinate is not finite.
  void validate() const;

  [[nodiscard]] std::array<Vec3, 3> corners(std::size_t face) const {
    const Face& f = faces[face];
    return {vertices[f[0]], vertices[f[1]], vertices[f[2]]};
  }
};

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);

// Mesh translated so its axis-aligned bounding box is centered on the origin.
// Scale is left untouched; the bounding-box diagonal is carried alongside so
// thresholds can be expressed relative to it.
class NormalizedMesh {
 public:
  NormalizedMesh() = default;

  [[nodiscard]] const TriangleMesh& mesh() const {
    return mesh_;
  }
  [[nodiscard]] double diagonal() const {
    return diagonal_;
  }
  // Translation that was subtracted from the input vertices.
  [[nodiscard]] const Vec3& centroid_applied() const {
    return centroidApplied_;
  }

  [[nodiscard]] std::size_t vertex_count() const {
    return mesh_.vertices.size();
  }
  [[nodiscard]] std::size_t face_count() const {
    return mesh_.faces.size();
  }

 private:
  friend NormalizedMesh normalize(const TriangleMesh& mesh);

  TriangleMesh mesh_;
  double diagonal_ = 0.0;
  Vec3 centroidApplied_ = Vec3::Zero();
};

NormalizedMesh normalize(const TriangleMesh& mesh);

// Plane {x : normal . x + offset = 0} with a unit normal.
struct Plane {
  Vec3 normal = Vec3::UnitX();
  double offset = 0.0;

  static Plane from_normal_offset(const Vec3& normal, double offset);
  // Plane through `point` with normal direction `normal` (need not be unit).
  static Plane from_normal_point(const Vec3& normal, const Vec3& point);

  // Same plane with the sign fixed so the first non-negligible normal
  // component is positive.
  [[nodiscard]] Plane canonical() const;

  [[nodiscard]] double signed_distance(const Vec3& p) const {
    return normal.dot(p) + offset;
  }
  // Point on the plane closest to the origin.
  [[nodiscard]] Vec3 anchor() const {
    return -offset * normal;
  }
  [[nodiscard]] Vec4 as_vec4() const {
    return {normal.x(), normal.y(), normal.z(), offset};
  }
  // Plane expressed in coordinates scaled by `factor`.
  [[nodiscard]] Plane scaled(double factor) const {
    return {normal, offset * factor};
  }
  // Image of the plane under x -> R x.
  [[nodiscard]] Plane rotated(const Mat3& rotation) const {
    return {rotation * normal, offset};
  }
  // Image of the plane under x -> x + shift.
  [[nodiscard]] Plane translated(const Vec3& shift) const {
    return {normal, offset - normal.dot(shift)};
  }
};

Vec3 reflect_point(const Vec3& p, const Plane& plane);

// Affine 4x4 matrix of the reflection across `plane`.
Eigen::Matrix4d reflection_matrix(const Plane& plane);

struct SurfaceSample {
  Vec3 point;
  std::uint32_t face_id = 0;
  Vec3 bary; // (alpha, beta, gamma) against the face's vertex order
};

// Area-weighted uniform surface sampling. Zero-area faces are never chosen.
std::vector<SurfaceSample> sample_surface(const NormalizedMesh& mesh, std::size_t n, std::uint64_t seed);

enum class MeshFormat { Obj, Off };

TriangleMesh parse_obj(std::istream& in);
TriangleMesh parse_off(std::istream& in);
TriangleMesh load_mesh(const std::filesystem::path& path, MeshFormat format);
// Format chosen from the file extension (.obj / .off, case-insensitive).
TriangleMesh load_mesh(const std::filesystem::path& path);
void save_obj(const TriangleMesh& mesh, const std::filesystem::path& path);

} // namespace symplane
