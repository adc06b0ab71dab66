#include "symplane/errors.h"
#include "symplane/metrics.h"
#include "symplane/parallel.h"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <tuple>

namespace symplane {

double sde(
    const NormalizedMesh& mesh,
    const TriangleBvh& bvh,
    const Plane& plane,
    std::size_t n_samples,
    std::uint64_t seed,
    bool raw_units) {
  const std::vector<SurfaceSample> samples = sample_surface(mesh, n_samples, seed);
  std::vector<double> sq(samples.size());
  parallel_for(0, samples.size(), 128, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      sq[i] = bvh.closest(reflect_point(samples[i].point, plane)).squared_distance;
    }
  });
  double sum = 0.0;
  for (double v : sq) {
    sum += v;
  }
  double mean = sum / static_cast<double>(sq.size());
  if (!raw_units) {
    mean /= mesh.diagonal() * mesh.diagonal();
  }
  return mean;
}

double sde(const NormalizedMesh& mesh, const Plane& plane, std::size_t n_samples, std::uint64_t seed, bool raw_units) {
  const TriangleBvh bvh(mesh.mesh());
  return sde(mesh, bvh, plane, n_samples, seed, raw_units);
}

Vec4 plane_vector(const Plane& plane, double diagonal) {
  const double len = plane.normal.norm();
  return {plane.normal.x() / len, plane.normal.y() / len, plane.normal.z() / len, plane.offset / len / diagonal};
}

double plane_distance(const Vec4& P, const Vec4& Q) {
  return std::min((P - Q).norm(), (P + Q).norm());
}

EvalReport fscore(
    std::span<const Plane> detected,
    std::span<const Plane> gt,
    std::span<const double> thresholds,
    double diagonal) {
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    if (!(thresholds[t] > 0.0) || (t > 0 && thresholds[t] < thresholds[t - 1])) {
      throw InvalidArgument("thresholds must be positive and ascending");
    }
  }
  if (thresholds.empty()) {
    throw InvalidArgument("at least one threshold is required");
  }
  struct Pair {
    double dist;
    std::size_t det;
    std::size_t gt;
  };
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < detected.size(); ++i) {
    for (std::size_t j = 0; j < gt.size(); ++j) {
      pairs.push_back({plane_distance(plane_vector(detected[i], diagonal), plane_vector(gt[j], diagonal)), i, j});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    return std::tie(a.dist, a.det, a.gt) < std::tie(b.dist, b.det, b.gt);
  });

  auto ratio = [](double num, double den) {
    return den > 0.0 ? num / den : 0.0;
  };
  EvalReport report;
  report.detected = detected.size();
  report.ground_truth = gt.size();
  double fsum = 0.0;
  for (double threshold : thresholds) {
    std::vector<bool> detUsed(detected.size(), false);
    std::vector<bool> gtUsed(gt.size(), false);
    std::size_t tp = 0;
    for (const Pair& p : pairs) {
      if (!(p.dist < threshold)) {
        break;
      }
      if (!detUsed[p.det] && !gtUsed[p.gt]) {
        detUsed[p.det] = gtUsed[p.gt] = true;
        ++tp;
      }
    }
    ThresholdScore s;
    s.threshold = threshold;
    s.tp = tp;
    s.fp = detected.size() - tp;
    s.fn = gt.size() - tp;
    s.precision = ratio(static_cast<double>(tp), static_cast<double>(s.tp + s.fp));
    s.recall = ratio(static_cast<double>(tp), static_cast<double>(s.tp + s.fn));
    s.fscore = ratio(2.0 * s.precision * s.recall, s.precision + s.recall);
    fsum += s.fscore;
    report.per_threshold.push_back(s);
  }
  report.fscore_mean = fsum / static_cast<double>(thresholds.size());
  report.sde_mean = std::numeric_limits<double>::quiet_NaN();
  return report;
}

EvalReport evaluate(
    const NormalizedMesh& mesh,
    std::span<const Plane> detected,
    std::span<const Plane> gt,
    const EvalOptions& options) {
  EvalReport report = fscore(detected, gt, options.thresholds, mesh.diagonal());
  if (!detected.empty()) {
    const TriangleBvh bvh(mesh.mesh());
    double sum = 0.0;
    for (const Plane& p : detected) {
      const double v = sde(mesh, bvh, p, options.sde_samples, options.seed, options.raw_units);
      report.sde_per_plane.push_back(v);
      sum += v;
    }
    report.sde_mean = sum / static_cast<double>(detected.size());
  }
  return report;
}

namespace {

nlohmann::ordered_json number_or_na(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json("n/a");
}

} // namespace

std::string report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["sde_mean"] = number_or_na(report.sde_mean);
  j["sde_per_plane"] = report.sde_per_plane;
  j["fscore_mean"] = report.fscore_mean;
  j["detected"] = report.detected;
  j["ground_truth"] = report.ground_truth;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const ThresholdScore& s : report.per_threshold) {
    rows.push_back({{"threshold", s.threshold},
                    {"precision", s.precision},
                    {"recall", s.recall},
                    {"fscore", s.fscore},
                    {"tp", s.tp},
                    {"fp", s.fp},
                    {"fn", s.fn}});
  }
  j["per_threshold"] = std::move(rows);
  return j.dump(2) + "\n";
}

std::string report_to_csv(const EvalReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "threshold,precision,recall,fscore,tp,fp,fn,sde_mean\n";
  for (const ThresholdScore& s : report.per_threshold) {
    out << s.threshold << ',' << s.precision << ',' << s.recall << ',' << s.fscore << ',' << s.tp << ',' << s.fp
        << ',' << s.fn << ',';
    if (std::isfinite(report.sde_mean)) {
      out << report.sde_mean;
    } else {
      out << "n/a";
    }
    out << '\n';
  }
  return out.str();
}

namespace {

std::vector<Plane> parse_plane_list(const nlohmann::json& arr, const std::string& id) {
  if (!arr.is_array()) {
    throw ParseError("ground truth for '" + id + "' must be an array of 4-vectors");
  }
  std::vector<Plane> planes;
  for (const auto& v : arr) {
    if (!v.is_array() || v.size() != 4) {
      throw ParseError("ground truth plane for '" + id + "' must have 4 components");
    }
    try {
      planes.push_back(Plane::from_normal_offset(
          Vec3(v[0].get<double>(), v[1].get<double>(), v[2].get<double>()), v[3].get<double>()));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("ground truth for '" + id + "': " + e.what());
    } catch (const InvalidArgument& e) {
      throw ParseError("ground truth for '" + id + "': " + e.what());
    }
  }
  return planes;
}

} // namespace

GroundTruthSet parse_ground_truth(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("ground truth JSON: ") + e.what());
  }
  GroundTruthSet out;
  if (doc.is_array()) {
    out[""] = parse_plane_list(doc, "");
  } else if (doc.is_object()) {
    for (const auto& [id, arr] : doc.items()) {
      out[id] = parse_plane_list(arr, id);
    }
  } else {
    throw ParseError("ground truth JSON must be an object or an array");
  }
  return out;
}

GroundTruthSet load_ground_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open ground truth " + path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_ground_truth(ss.str());
}

std::string ground_truth_to_json(const GroundTruthSet& gt) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [id, planes] : gt) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const Plane& p : planes) {
      arr.push_back({p.normal.x(), p.normal.y(), p.normal.z(), p.offset});
    }
    j[id] = std::move(arr);
  }
  return j.dump(2) + "\n";
}

} // namespace symplane
