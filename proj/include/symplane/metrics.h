#pragma once

#include "symplane/bvh.h"
#include "symplane/geometry.h"

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace symplane {

inline const std::vector<double> kDefaultThresholds{0.05, 0.1, 0.15, 0.2};

// Symmetry distance error: mean squared distance from reflected surface
// samples to the mesh. Distances are divided by the diagonal unless
// `raw_units` is set.
double sde(const NormalizedMesh& mesh, const Plane& plane, std::size_t n_samples, std::uint64_t seed, bool raw_units = false);
// Same, reusing a prebuilt BVH of `mesh`.
double sde(
    const NormalizedMesh& mesh,
    const TriangleBvh& bvh,
    const Plane& plane,
    std::size_t n_samples,
    std::uint64_t seed,
    bool raw_units = false);

// (a, b, c, d) with unit normal and the offset in diagonal units.
Vec4 plane_vector(const Plane& plane, double diagonal);

// min(|P - Q|, |P + Q|)
double plane_distance(const Vec4& P, const Vec4& Q);

struct ThresholdScore {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double fscore = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

struct EvalReport {
  std::vector<ThresholdScore> per_threshold;
  double fscore_mean = 0.0;
  // Mean SDE over detected planes; NaN when nothing was detected.
  double sde_mean = 0.0;
  std::vector<double> sde_per_plane;
  std::size_t detected = 0;
  std::size_t ground_truth = 0;
};

// Greedy one-to-one matching in ascending plane distance; a pair matches when
// its distance is strictly below the threshold. 0/0 ratios count as 0.
// Thresholds must be positive and ascending.
EvalReport fscore(
    std::span<const Plane> detected,
    std::span<const Plane> gt,
    std::span<const double> thresholds,
    double diagonal);

struct EvalOptions {
  std::vector<double> thresholds = kDefaultThresholds;
  std::size_t sde_samples = 1000;
  std::uint64_t seed = 0;
  bool raw_units = false;
};

// F-score plus per-plane SDE of the detected planes.
EvalReport evaluate(
    const NormalizedMesh& mesh,
    std::span<const Plane> detected,
    std::span<const Plane> gt,
    const EvalOptions& options);

std::string report_to_json(const EvalReport& report);
// One row per threshold.
std::string report_to_csv(const EvalReport& report);

// Ground truth: {"id": [[a, b, c, d], ...], ...}, or a bare array stored
// under the empty id. Normals are rescaled to unit length.
using GroundTruthSet = std::map<std::string, std::vector<Plane>>;
GroundTruthSet parse_ground_truth(const std::string& text);
GroundTruthSet load_ground_truth(const std::filesystem::path& path);
std::string ground_truth_to_json(const GroundTruthSet& gt);

} // namespace symplane
