#pragma once

#include "symplane/geometry.h"
#include "symplane/render.h"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace symplane {

// Patch-feature grid of one rendered image. Stored row-major as
// (patch row, patch col, channel).
struct FeatureMap {
  std::uint32_t view_id = 0;
  int rotation_deg = 0;
  int patches = 0; // P, grid side
  int dim = 0;     // d, channels per patch
  std::vector<float> data;

  FeatureMap() = default;
  FeatureMap(std::uint32_t view, int rotation, int p, int d)
      : view_id(view), rotation_deg(rotation), patches(p), dim(d), data(static_cast<std::size_t>(p) * p * d, 0.0f) {}

  [[nodiscard]] std::span<const float> patch(int row, int col) const {
    return {data.data() + (static_cast<std::size_t>(row) * patches + col) * dim, static_cast<std::size_t>(dim)};
  }
  [[nodiscard]] std::span<float> patch(int row, int col) {
    return {data.data() + (static_cast<std::size_t>(row) * patches + col) * dim, static_cast<std::size_t>(dim)};
  }
};

// FMAP container: "FMAP", u32 version (1), view_id, rotation_deg, P, d, then
// P*P*d little-endian f32, then CRC-32 of the float payload.
void save_feature_map(const FeatureMap& map, const std::filesystem::path& path);
FeatureMap load_feature_map(const std::filesystem::path& path);

// Per-vertex features averaged over the renders in which each vertex was seen.
struct VertexFeatures {
  int dim = 0;
  std::vector<float> data;                // vertex-major, dim floats per vertex
  std::vector<std::uint32_t> visibility;  // renders that contributed

  VertexFeatures() = default;
  VertexFeatures(std::size_t vertices, int d)
      : dim(d), data(vertices * static_cast<std::size_t>(d), 0.0f), visibility(vertices, 0) {}

  [[nodiscard]] std::size_t vertex_count() const {
    return visibility.size();
  }
  [[nodiscard]] bool covered(std::size_t v) const {
    return visibility[v] > 0;
  }
  [[nodiscard]] std::size_t uncovered_count() const;

  [[nodiscard]] std::span<const float> row(std::size_t v) const {
    return {data.data() + v * dim, static_cast<std::size_t>(dim)};
  }
  [[nodiscard]] std::span<float> row(std::size_t v) {
    return {data.data() + v * dim, static_cast<std::size_t>(dim)};
  }
};

void save_vertex_features(const VertexFeatures& vf, const std::filesystem::path& path);
VertexFeatures load_vertex_features(const std::filesystem::path& path);

// Rendered fragments paired with the feature map extracted from the same image.
struct RenderFeatures {
  const FragmentBuffer* fragments = nullptr;
  const FeatureMap* map = nullptr;
};

// Pixel -> patch lookup is nearest patch (pixel / patch size). Every vertex of
// a face that wins at least one pixel takes part in that render; its
// contribution is the pixel-weighted mean over the patches it was seen in.
// Contributions are then averaged across renders with a fixed pairwise
// summation tree, so repeated identical renders reproduce one render exactly.
// Throws DimensionMismatch on inconsistent grids.
VertexFeatures backproject(const NormalizedMesh& mesh, std::span<const RenderFeatures> renders);

// Streaming form of backproject for render sets too large to hold at once.
// Batches are processed in parallel and folded in order; the result equals
// backproject over the concatenated batches.
class BackprojectionAccumulator {
 public:
  explicit BackprojectionAccumulator(const NormalizedMesh& mesh);
  ~BackprojectionAccumulator();
  BackprojectionAccumulator(const BackprojectionAccumulator&) = delete;
  BackprojectionAccumulator& operator=(const BackprojectionAccumulator&) = delete;

  void add(std::span<const RenderFeatures> renders);
  [[nodiscard]] VertexFeatures finish() const;

 private:
  struct State;
  const NormalizedMesh& mesh_;
  std::unique_ptr<State> state_;
};

// Pairs fragments with maps by (view_id, rotation_deg); `fragment_keys[i]` is
// the key of fragments[i]. Throws PairingError naming the first unmatched
// render.
struct RenderKey {
  std::uint32_t view_id = 0;
  int rotation_deg = 0;
  friend bool operator==(const RenderKey&, const RenderKey&) = default;
};
VertexFeatures backproject_pairs(
    const NormalizedMesh& mesh,
    const std::vector<FragmentBuffer>& fragments,
    const std::vector<RenderKey>& fragment_keys,
    const std::vector<FeatureMap>& maps);

// Sampled surface points with barycentrically interpolated features.
struct FeatureCloud {
  int dim = 0;
  std::vector<Vec3> points;
  std::vector<float> features; // point-major
  std::vector<SurfaceSample> samples;

  [[nodiscard]] std::size_t size() const {
    return points.size();
  }
  [[nodiscard]] std::span<const float> row(std::size_t i) const {
    return {features.data() + i * dim, static_cast<std::size_t>(dim)};
  }
};

struct InterpolationResult {
  FeatureCloud cloud;
  std::size_t dropped = 0; // samples on faces with an uncovered vertex
};

InterpolationResult interpolate_features(
    const NormalizedMesh& mesh,
    const VertexFeatures& vf,
    std::span<const SurfaceSample> samples);

// Cloud made of the mesh vertices themselves (covered ones only).
InterpolationResult vertex_cloud(const NormalizedMesh& mesh, const VertexFeatures& vf);

// Smooth random field that is exactly invariant under the reflection group
// generated by `planes`: the value at x is the mean of random Fourier
// features over the orbit of x, summed in a canonical order.
class SyntheticField {
 public:
  SyntheticField(const NormalizedMesh& mesh, std::span<const Plane> planes, int dim, std::uint64_t seed);

  [[nodiscard]] int dim() const {
    return dim_;
  }
  [[nodiscard]] std::size_t group_order() const {
    return group_.size();
  }
  void evaluate(const Vec3& x, std::span<float> out) const;

 private:
  std::vector<Eigen::Matrix4d> group_;
  std::vector<Vec3> frequencies_;
  std::vector<double> phases_;
  double diagonal_ = 1.0;
  int dim_ = 0;
};

// Field values at the vertices plus i.i.d. uniform noise in [-noise, noise].
// Every vertex counts as covered.
VertexFeatures synthetic_features(
    const NormalizedMesh& mesh,
    std::span<const Plane> planes,
    int dim,
    double noise,
    std::uint64_t seed);

// Deterministic stand-in for the image feature extractor: each patch gets
// the mean of the noise-free vertex field over the object pixels it covers,
// plus noise keyed by (seed, view, rotation, patch, channel). Background-only
// patches are zero plus noise.
FeatureMap synthetic_feature_map(
    const NormalizedMesh& mesh,
    const VertexFeatures& clean_field,
    const FragmentBuffer& fragments,
    RenderKey key,
    int patches,
    double noise,
    std::uint64_t seed);

} // namespace symplane
