#pragma once

#include "symplane/geometry.h"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace symplane {

enum class ShapeKind { Cube, Cuboid, LShape, NgonPrism, Blob };

struct SynthShape {
  std::string name;
  ShapeKind kind = ShapeKind::Cube;
  std::uint64_t seed = 0;
  TriangleMesh mesh;
  std::vector<Plane> gt;
  // Further exact symmetries that are not part of the primary ground truth
  // (the six diagonal planes of the cube).
  std::vector<Plane> extended_gt;
};

struct ShapeOptions {
  int ngon_sides = 6;
  Vec3 cuboid_extents{1.0, 2.0, 3.0};
};

// Watertight synthetic meshes centered on the origin. `tessellation` is the
// number of grid cells per unit length (box shapes), per side and cap ring
// (prism), or per cube-sphere face edge (blob).
//   Cube      unit cube; gt = 3 axis planes, extended_gt = 6 diagonal planes
//   Cuboid    box with distinct extents; gt = 3 axis planes
//   LShape    L profile with arms of length 3 and 2, thickness 1, extruded by
//             1 along z; gt = the z mid-plane
//   NgonPrism regular n-gon of circumradius 1, height 1, axis z; gt = n
//             vertical planes + the horizontal mid-plane
//   Blob      sphere with random radial lobes; gt empty
SynthShape make_shape(ShapeKind kind, std::uint64_t seed, int tessellation, const ShapeOptions& options = {});

// Uniform random rotation (Shoemake quaternion construction).
Mat3 random_rotation_matrix(std::uint64_t seed);
// Rotates mesh, gt and extended_gt together.
SynthShape rotate_shape(const SynthShape& shape, const Mat3& rotation);
// Seed 0 is the identity; any other seed draws a uniform rotation.
SynthShape random_rotation(const SynthShape& shape, std::uint64_t seed);

ShapeKind parse_shape_kind(const std::string& name);
std::string shape_kind_name(ShapeKind kind);

// Writes <dir>/<name>.obj and <dir>/<name>.json ({name: [[a,b,c,d], ...]}).
void export_shape(const SynthShape& shape, const std::filesystem::path& dir);

// Cube, cuboid, hexagonal prism, L-shape and blob with fixed seeds.
std::vector<SynthShape> synthetic_corpus(int tessellation);

// Smallest reflection Chamfer (diagonal units) of the shape's surface sample
// over random planes through the origin.
double min_central_plane_chamfer(
    const SynthShape& shape,
    std::size_t n_planes,
    std::size_t n_samples,
    std::uint64_t seed);

} // namespace symplane
