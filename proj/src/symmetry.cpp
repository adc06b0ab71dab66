#include "symplane/errors.h"
#include "symplane/parallel.h"
#include "symplane/symmetry.h"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <queue>
#include <tuple>

namespace symplane {

std::string CandidatePlane::source() const {
  if (kind == Kind::Pair) {
    return "pair(" + std::to_string(points[0]) + "," + std::to_string(points[1]) + ")";
  }
  return "trio(" + std::to_string(points[0]) + "," + std::to_string(points[1]) + "," + std::to_string(points[2]) + ")";
}

void DetectionConfig::validate() const {
  if (!(origin_tol_frac > 0.0) || !(chamfer_tau1 > 0.0) || !(angle_tau2_deg > 0.0)) {
    throw InvalidArgument("detection thresholds must be positive");
  }
  if (max_planes < 1) {
    throw InvalidArgument("max_planes must be at least 1");
  }
}

namespace {

constexpr std::size_t kRowBlock = 8;
constexpr int kLanes = 8;

// L1 distances from rows a[0..rows) to b. Lane-split accumulation gives a
// fixed summation order that the compiler can still vectorise.
void l1_block(const float* const* a, std::size_t rows, const float* b, std::size_t d, float* out) {
  for (std::size_t r = 0; r < rows; ++r) {
    float acc[kLanes] = {};
    const float* x = a[r];
    std::size_t c = 0;
    for (; c + kLanes <= d; c += kLanes) {
      for (int l = 0; l < kLanes; ++l) {
        acc[l] += std::abs(x[c + l] - b[c + l]);
      }
    }
    for (int l = 0; c < d; ++c, ++l) {
      acc[l] += std::abs(x[c] - b[c]);
    }
    out[r] = ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
  }
}

} // namespace

std::vector<MatchTrio> match_trios(const FeatureCloud& cloud) {
  const std::size_t n = cloud.size();
  if (n < 3) {
    throw TooFewPoints("feature matching needs at least 3 points, got " + std::to_string(n));
  }
  const auto d = static_cast<std::size_t>(cloud.dim);
  std::vector<MatchTrio> trios(n);
  const std::size_t blocks = (n + kRowBlock - 1) / kRowBlock;
  parallel_for(0, blocks, 4, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t blk = lo; blk < hi; ++blk) {
      const std::size_t i0 = blk * kRowBlock;
      const std::size_t rows = std::min(kRowBlock, n - i0);
      const float* a[kRowBlock];
      float best1[kRowBlock];
      float best2[kRowBlock];
      std::uint32_t idx1[kRowBlock];
      std::uint32_t idx2[kRowBlock];
      for (std::size_t r = 0; r < rows; ++r) {
        a[r] = cloud.features.data() + (i0 + r) * d;
        best1[r] = best2[r] = std::numeric_limits<float>::infinity();
        idx1[r] = idx2[r] = std::numeric_limits<std::uint32_t>::max();
      }
      float dist[kRowBlock];
      for (std::size_t j = 0; j < n; ++j) {
        l1_block(a, rows, cloud.features.data() + j * d, d, dist);
        for (std::size_t r = 0; r < rows; ++r) {
          if (j == i0 + r) {
            continue;
          }
          // Strict comparisons while j ascends keep the smaller index on ties.
          if (dist[r] < best1[r]) {
            best2[r] = best1[r];
            idx2[r] = idx1[r];
            best1[r] = dist[r];
            idx1[r] = static_cast<std::uint32_t>(j);
          } else if (dist[r] < best2[r]) {
            best2[r] = dist[r];
            idx2[r] = static_cast<std::uint32_t>(j);
          }
        }
      }
      for (std::size_t r = 0; r < rows; ++r) {
        // With non-finite features no neighbour may have been accepted.
        if (idx1[r] == std::numeric_limits<std::uint32_t>::max() || idx2[r] == std::numeric_limits<std::uint32_t>::max()) {
          throw InvalidArgument("feature cloud contains non-finite values");
        }
        trios[i0 + r] = {static_cast<std::uint32_t>(i0 + r), idx1[r], idx2[r], best1[r], best2[r]};
      }
    }
  });
  return trios;
}

std::vector<CandidatePlane> candidate_planes(
    const FeatureCloud& cloud,
    std::span<const MatchTrio> trios,
    double diagonal) {
  const double minPair = 1e-6 * diagonal;
  const double minCross = 1e-9 * diagonal * diagonal;
  std::vector<CandidatePlane> out;
  out.reserve(trios.size() * 4);
  auto bisector = [&](std::uint32_t a, std::uint32_t b) {
    const Vec3& pa = cloud.points.at(a);
    const Vec3& pb = cloud.points.at(b);
    const Vec3 delta = pb - pa;
    const double len = delta.norm();
    if (!(len >= minPair)) {
      return;
    }
    CandidatePlane c;
    c.plane = Plane::from_normal_point(delta / len, 0.5 * (pa + pb)).canonical();
    c.kind = CandidatePlane::Kind::Pair;
    c.points = {a, b, 0};
    out.push_back(c);
  };
  for (const MatchTrio& t : trios) {
    bisector(t.i, t.j);
    bisector(t.i, t.k);
    bisector(t.j, t.k);
    const Vec3& pi = cloud.points.at(t.i);
    const Vec3& pj = cloud.points.at(t.j);
    const Vec3& pk = cloud.points.at(t.k);
    const Vec3 normal = (pj - pi).cross(pk - pi);
    if (!(normal.norm() >= minCross)) {
      continue;
    }
    CandidatePlane c;
    c.plane = Plane::from_normal_point(normal, (pi + pj + pk) / 3.0).canonical();
    c.kind = CandidatePlane::Kind::Trio;
    c.points = {t.i, t.j, t.k};
    out.push_back(c);
  }
  return out;
}

std::vector<CandidatePlane> filter_by_origin(std::span<const CandidatePlane> cands, double diagonal, double frac) {
  if (!(diagonal > 0.0)) {
    throw InvalidArgument("object diagonal must be positive");
  }
  std::vector<CandidatePlane> out;
  const double limit = frac * diagonal;
  for (const CandidatePlane& c : cands) {
    if (std::abs(c.plane.offset) <= limit) {
      out.push_back(c);
    }
  }
  return out;
}

bool redundant_plane(const Plane& a, const Plane& b, double angle_tau_deg, double offset_tol) {
  const double dot = a.normal.dot(b.normal);
  const double angle = std::acos(std::min(1.0, std::abs(dot))) * 180.0 / std::numbers::pi;
  if (angle > angle_tau_deg) {
    return false;
  }
  const double offsetGap = dot >= 0.0 ? std::abs(a.offset - b.offset) : std::abs(a.offset + b.offset);
  return offsetGap < offset_tol;
}

namespace {

std::vector<Vec3> scaled_points(const FeatureCloud& cloud, double diagonal) {
  std::vector<Vec3> pts;
  pts.reserve(cloud.size());
  for (const Vec3& p : cloud.points) {
    pts.push_back(p / diagonal);
  }
  return pts;
}

// Consumes scored candidates in ranking order and applies greedy dedup.
class Selector {
 public:
  Selector(const DetectionConfig& cfg, double diagonal) : cfg_(cfg), diagonal_(diagonal) {}

  void offer(const CandidatePlane& c, double chamfer) {
    for (const CandidatePlane& k : kept_) {
      if (redundant_plane(k.plane, c.plane, cfg_.angle_tau2_deg, 0.01 * diagonal_)) {
        return;
      }
    }
    CandidatePlane out = c;
    out.plane = c.plane.canonical();
    out.chamfer = chamfer;
    out.confidence = 1.0 - chamfer / cfg_.chamfer_tau1;
    kept_.push_back(out);
  }
  [[nodiscard]] bool full() const {
    return kept_.size() >= cfg_.max_planes;
  }
  std::vector<CandidatePlane> take() {
    return std::move(kept_);
  }

 private:
  const DetectionConfig& cfg_;
  double diagonal_;
  std::vector<CandidatePlane> kept_;
};

struct PlaneBits {
  std::array<std::uint64_t, 4> bits;
  bool operator<(const PlaneBits& o) const {
    return bits < o.bits;
  }
};

PlaneBits bits_of(const Plane& p) {
  return {{std::bit_cast<std::uint64_t>(p.normal.x()), std::bit_cast<std::uint64_t>(p.normal.y()),
           std::bit_cast<std::uint64_t>(p.normal.z()), std::bit_cast<std::uint64_t>(p.offset)}};
}

} // namespace

std::vector<CandidatePlane> verify_all(
    const FeatureCloud& cloud,
    std::span<const CandidatePlane> cands,
    const DetectionConfig& cfg,
    double diagonal) {
  cfg.validate();
  if (cloud.size() == 0 || cands.empty()) {
    return {};
  }
  const std::vector<Vec3> pts = scaled_points(cloud, diagonal);
  const ReflectionChamfer scorer(pts);
  std::vector<double> score(cands.size());
  parallel_for(0, cands.size(), 16, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t c = lo; c < hi; ++c) {
      score[c] = scorer.evaluate(cands[c].plane.scaled(1.0 / diagonal));
    }
  });
  std::vector<std::size_t> order;
  for (std::size_t c = 0; c < cands.size(); ++c) {
    if (score[c] < cfg.chamfer_tau1) {
      order.push_back(c);
    }
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(score[a], a) < std::tie(score[b], b);
  });
  Selector sel(cfg, diagonal);
  for (std::size_t c : order) {
    if (sel.full()) {
      break;
    }
    sel.offer(cands[c], score[c]);
  }
  return sel.take();
}

std::vector<CandidatePlane> verify_and_select(
    const FeatureCloud& cloud,
    std::span<const CandidatePlane> cands,
    const DetectionConfig& cfg,
    double diagonal) {
  cfg.validate();
  if (cloud.size() == 0 || cands.empty()) {
    return {};
  }
  const std::vector<Vec3> pts = scaled_points(cloud, diagonal);
  const ReflectionChamfer scorer(pts);
  const std::size_t n = pts.size();
  const double total = static_cast<double>(n);

  // Bitwise-identical planes share one evaluation under their first index.
  struct Entry {
    std::size_t index; // first candidate carrying this plane
    Plane plane;       // in diagonal units
    std::size_t done = 0;
    double partial = 0.0;
  };
  std::vector<Entry> entries;
  {
    std::map<PlaneBits, std::size_t> seen;
    for (std::size_t c = 0; c < cands.size(); ++c) {
      if (seen.emplace(bits_of(cands[c].plane), c).second) {
        entries.push_back({c, cands[c].plane.scaled(1.0 / diagonal)});
      }
    }
  }

  auto advance = [&](Entry& e) {
    const std::size_t step = std::max<std::size_t>(64, e.done);
    const std::size_t stop = std::min(n, e.done + step);
    e.partial = scorer.accumulate(e.plane, e.done, stop, e.partial);
    e.done = stop;
  };
  auto bound = [&](const Entry& e) {
    return e.partial / total;
  };

  // Min-heap on (lower bound, candidate index). A fully scored entry at the
  // top is exactly next in ranking order: every other entry's score is at
  // least its bound, and equal scores fall back to the index.
  using Key = std::tuple<double, std::size_t, std::size_t>; // bound, index, entry
  std::priority_queue<Key, std::vector<Key>, std::greater<>> heap;

  parallel_for(0, entries.size(), 64, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t e = lo; e < hi; ++e) {
      advance(entries[e]);
    }
  });
  for (std::size_t e = 0; e < entries.size(); ++e) {
    if (bound(entries[e]) < cfg.chamfer_tau1) {
      heap.emplace(bound(entries[e]), entries[e].index, e);
    }
  }

  // Batch size is fixed so the sequence of evaluations does not depend on
  // the number of worker threads.
  constexpr std::size_t kBatch = 32;
  Selector sel(cfg, diagonal);
  std::vector<std::size_t> batch;
  while (!heap.empty() && !sel.full()) {
    const auto [lb, index, top] = heap.top();
    if (!(lb < cfg.chamfer_tau1)) {
      break;
    }
    if (entries[top].done == n) {
      heap.pop();
      sel.offer(cands[index], lb);
      continue;
    }
    batch.clear();
    while (!heap.empty() && batch.size() < kBatch) {
      const std::size_t e = std::get<2>(heap.top());
      if (entries[e].done == n) {
        break;
      }
      batch.push_back(e);
      heap.pop();
    }
    parallel_for(0, batch.size(), 1, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t b = lo; b < hi; ++b) {
        advance(entries[batch[b]]);
      }
    });
    for (std::size_t e : batch) {
      if (bound(entries[e]) < cfg.chamfer_tau1) {
        heap.emplace(bound(entries[e]), entries[e].index, e);
      }
    }
  }
  return sel.take();
}

std::vector<CandidatePlane> detect(
    const FeatureCloud& cloud,
    double diagonal,
    const DetectionConfig& cfg,
    DetectionStats* stats) {
  cfg.validate();
  const std::vector<MatchTrio> trios = match_trios(cloud);
  const std::vector<CandidatePlane> cands = candidate_planes(cloud, trios, diagonal);
  const std::vector<CandidatePlane> filtered = filter_by_origin(cands, diagonal, cfg.origin_tol_frac);
  if (stats) {
    stats->trios = trios.size();
    stats->candidates = cands.size();
    stats->after_origin_filter = filtered.size();
  }
  return verify_and_select(cloud, filtered, cfg, diagonal);
}

std::string planes_to_json(std::span<const CandidatePlane> planes) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const CandidatePlane& c : planes) {
    const Plane p = c.plane.canonical();
    nlohmann::ordered_json j;
    j["normal"] = {p.normal.x(), p.normal.y(), p.normal.z()};
    j["offset"] = p.offset;
    j["chamfer"] = c.chamfer ? nlohmann::ordered_json(*c.chamfer) : nlohmann::ordered_json(nullptr);
    j["confidence"] = c.confidence ? nlohmann::ordered_json(*c.confidence) : nlohmann::ordered_json(nullptr);
    j["source"] = c.source();
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

std::vector<CandidatePlane> planes_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("planes JSON: ") + e.what());
  }
  if (!doc.is_array()) {
    throw ParseError("planes JSON must be an array");
  }
  std::vector<CandidatePlane> out;
  for (const auto& j : doc) {
    try {
      const auto& n = j.at("normal");
      CandidatePlane c;
      c.plane = Plane::from_normal_offset(
          Vec3(n.at(0).get<double>(), n.at(1).get<double>(), n.at(2).get<double>()), j.at("offset").get<double>());
      if (j.contains("chamfer") && j["chamfer"].is_number()) {
        c.chamfer = j["chamfer"].get<double>();
      }
      if (j.contains("confidence") && j["confidence"].is_number()) {
        c.confidence = j["confidence"].get<double>();
      }
      if (j.contains("source") && j["source"].is_string()) {
        const std::string s = j["source"].get<std::string>();
        unsigned a = 0, b = 0, d = 0;
        if (std::sscanf(s.c_str(), "trio(%u,%u,%u)", &a, &b, &d) == 3) {
          c.kind = CandidatePlane::Kind::Trio;
          c.points = {a, b, d};
        } else if (std::sscanf(s.c_str(), "pair(%u,%u)", &a, &b) == 2) {
          c.points = {a, b, 0};
        }
      }
      out.push_back(c);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("planes JSON entry: ") + e.what());
    } catch (const InvalidArgument& e) {
      throw ParseError(std::string("planes JSON entry: ") + e.what());
    }
  }
  return out;
}

} // namespace symplane
