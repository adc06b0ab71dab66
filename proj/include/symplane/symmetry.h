#pragma once

#include "symplane/features.h"
#include "symplane/geometry.h"
#include "symplane/kdtree.h"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace symplane {

// Anchor i with its two nearest feature-space neighbours j, k under L1.
struct MatchTrio {
  std::uint32_t i = 0;
  std::uint32_t j = 0;
  std::uint32_t k = 0;
  float d_ij = 0.0f;
  float d_ik = 0.0f;
};

struct CandidatePlane {
  enum class Kind { Pair, Trio };

  Plane plane;
  Kind kind = Kind::Pair;
  std::array<std::uint32_t, 3> points{0, 0, 0}; // third entry unused for pairs
  std::optional<double> chamfer;
  std::optional<double> confidence;

  // "pair(a,b)" or "trio(i,j,k)"
  [[nodiscard]] std::string source() const;
};

struct DetectionConfig {
  double origin_tol_frac = 0.05;
  double chamfer_tau1 = 0.01;
  double angle_tau2_deg = 1.0;
  std::size_t max_planes = 10;

  // Throws InvalidArgument unless every threshold is positive and k >= 1.
  void validate() const;
};

// Exact brute-force L1 kNN; equal distances resolve to the smaller index.
// Throws TooFewPoints below 3 points.
std::vector<MatchTrio> match_trios(const FeatureCloud& cloud);

// Up to four candidates per trio: the bisector planes of (i,j), (i,k), (j,k)
// and the plane through all three points. Near-coincident pairs and
// near-collinear trios are skipped, relative to `diagonal`. Planes are
// returned in canonical sign form.
std::vector<CandidatePlane> candidate_planes(
    const FeatureCloud& cloud,
    std::span<const MatchTrio> trios,
    double diagonal);

// Keeps candidates whose distance to the origin is at most frac * diagonal.
std::vector<CandidatePlane> filter_by_origin(std::span<const CandidatePlane> cands, double diagonal, double frac);

// Symmetric Chamfer distance: mean squared nearest-neighbour distance from P
// to Q and from Q to P, averaged. Throws EmptySet.
double chamfer_distance(std::span<const Vec3> P, std::span<const Vec3> Q);

// Chamfer distance between a point set and its mirror image across `plane`.
// Since the reflection is an isometric involution, both directed terms are
// equal and one nearest-neighbour pass over the original points suffices.
// Points, plane and the returned value are in the same units.
class ReflectionChamfer {
 public:
  explicit ReflectionChamfer(std::span<const Vec3> points);

  [[nodiscard]] std::size_t size() const {
    return points_.size();
  }
  // Sum of squared mirror distances for points order[begin..end), added to
  // `partial` one term at a time.
  [[nodiscard]] double accumulate(const Plane& plane, std::size_t begin, std::size_t end, double partial) const;
  [[nodiscard]] double evaluate(const Plane& plane) const {
    return accumulate(plane, 0, points_.size(), 0.0) / static_cast<double>(points_.size());
  }

 private:
  std::vector<Vec3> points_;
  std::vector<std::uint32_t> order_; // fixed pseudo-random evaluation order
  PointKdTree tree_;
};

// Scores each candidate by the Chamfer distance between the cloud and its
// reflection, on coordinates divided by `diagonal`. Keeps chamfer < tau1,
// sets confidence = 1 - chamfer / tau1, orders by chamfer (then candidate
// index), drops planes within tau2 degrees and 0.01 * diagonal offset of an
// already kept plane, and returns at most k planes.
//
// Candidates are scored lazily: partial sums are exact lower bounds, so a
// candidate is only evaluated as far as needed to decide its rank.
std::vector<CandidatePlane> verify_and_select(
    const FeatureCloud& cloud,
    std::span<const CandidatePlane> cands,
    const DetectionConfig& cfg,
    double diagonal);

// Reference implementation of verify_and_select that fully scores every
// candidate. Same output, much slower.
std::vector<CandidatePlane> verify_all(
    const FeatureCloud& cloud,
    std::span<const CandidatePlane> cands,
    const DetectionConfig& cfg,
    double diagonal);

// Greedy best-first deduplication over planes already in ranking order.
bool redundant_plane(const Plane& a, const Plane& b, double angle_tau_deg, double offset_tol);

struct DetectionStats {
  std::size_t trios = 0;
  std::size_t candidates = 0;
  std::size_t after_origin_filter = 0;
};

// match_trios -> candidate_planes -> filter_by_origin -> verify_and_select.
std::vector<CandidatePlane> detect(
    const FeatureCloud& cloud,
    double diagonal,
    const DetectionConfig& cfg,
    DetectionStats* stats = nullptr);

std::string planes_to_json(std::span<const CandidatePlane> planes);
// Accepts the planes_to_json layout; chamfer/confidence/source are optional.
std::vector<CandidatePlane> planes_from_json(const std::string& text);

} // namespace symplane
