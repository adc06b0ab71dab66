#pragma once

#include "symplane/features.h"
#include "symplane/geometry.h"
#include "symplane/render.h"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace symplane {

enum class ViewScheme { Regular, Fibonacci };
enum class SamplingMode { RawMesh, FeatureMesh };
enum class Pairing { Symmetric, Random };

// Rotation sets by name: "1" {0}, "2" {0,180}, "3" {0,90,270},
// "4" {0,90,180,270}, and "t4", the same unrotated image four times.
std::vector<int> rotation_set(const std::string& name);

struct InvarianceConfig {
  std::string id = "config";
  ViewScheme scheme = ViewScheme::Fibonacci;
  std::size_t n_views = 14;
  std::string rotations = "1";
  SamplingMode sampling = SamplingMode::FeatureMesh;
  std::size_t n_points = 10000;
  Pairing pairing = Pairing::Symmetric;

  // Synthetic extractor.
  int dim = 32;
  double noise = 0.02;
  std::uint64_t seed = 0;
  CameraSettings camera;
  int patches = 37;

  void validate() const;
};

struct InvarianceResult {
  InvarianceConfig config;
  double e_mean = 0.0;
  double e_std = 0.0;
  std::vector<std::string> object_ids;
  std::vector<double> per_object;
  std::vector<std::string> failures; // "id: message"
};

// Mean L1 feature distance between each point and the cloud point nearest
// to its reflection. Throws EmptySet.
double discrepancy(const FeatureCloud& cloud, const Plane& plane);

// Same measure with the partner drawn uniformly from the other points.
double random_pairing_discrepancy(const FeatureCloud& cloud, std::uint64_t seed);

struct CorpusObject {
  std::string id;
  TriangleMesh mesh;
  std::vector<Plane> gt; // in the mesh's own coordinates
};

// Vertex features from rendering the object under the config's viewpoints
// and rotations, with patch features from the synthetic extractor driven by
// the object's ground-truth planes.
VertexFeatures render_synthetic_vertex_features(const NormalizedMesh& mesh, std::span<const Plane> planes, const InvarianceConfig& cfg);

// The object's cloud for the config's sampling mode.
FeatureCloud invariance_cloud(const NormalizedMesh& mesh, const VertexFeatures& vf, const InvarianceConfig& cfg);

// E for one object: symmetric pairing averages over all ground-truth planes.
// Throws InvalidArgument when symmetric pairing meets an object without
// ground truth.
double object_discrepancy(const CorpusObject& object, const InvarianceConfig& cfg);

// One result per config. Per-object failures are recorded and excluded from
// the mean. Vertex features are shared between configs that differ only in
// sampling or pairing.
std::vector<InvarianceResult> ablation_grid(std::span<const CorpusObject> corpus, std::span<const InvarianceConfig> configs);

// config_id,scheme,n_views,rotations,sampling,pairing,E_mean,E_std,n_objects
std::string ablation_csv(std::span<const InvarianceResult> results);

// Grid file: "[id]" starts a config, followed by key=value lines (scheme,
// views, rotations, sampling, points, pairing, dim, noise, seed). '#' starts
// a comment.
std::vector<InvarianceConfig> parse_grid(const std::string& text);

} // namespace symplane
