#include "symplane/analysis.h"
#include "symplane/errors.h"
#include "symplane/kdtree.h"
#include "symplane/parallel.h"
#include "symplane/random.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace symplane {

std::vector<int> rotation_set(const std::string& name) {
  if (name == "1") {
    return {0};
  }
  if (name == "2") {
    return {0, 180};
  }
  if (name == "3") {
    return {0, 90, 270};
  }
  if (name == "4") {
    return {0, 90, 180, 270};
  }
  if (name == "t4" || name == "T4") {
    return {0, 0, 0, 0};
  }
  throw InvalidArgument("unknown rotation set '" + name + "' (expected 1, 2, 3, 4 or t4)");
}

void InvarianceConfig::validate() const {
  if (n_views < 1) {
    throw InvalidArgument("n_views must be at least 1");
  }
  rotation_set(rotations);
  if (scheme == ViewScheme::Regular && regular_level_for_count(n_views) == 0) {
    throw InvalidArgument(
        "regular sampling supports 6, 14, 26, 42, 62, 86 or 114 views, not " + std::to_string(n_views));
  }
  if (sampling == SamplingMode::FeatureMesh && n_points < 1) {
    throw InvalidArgument("feature-mesh sampling needs at least one point");
  }
  if (dim < 3 || patches < 1 || camera.image_size % patches != 0) {
    throw InvalidArgument("synthetic extractor needs dim >= 3 and an image size divisible by the patch count");
  }
}

double discrepancy(const FeatureCloud& cloud, const Plane& plane) {
  if (cloud.size() == 0) {
    throw EmptySet("discrepancy of an empty cloud");
  }
  const PointKdTree tree(cloud.points);
  std::vector<double> terms(cloud.size());
  parallel_for(0, cloud.size(), 256, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const std::uint32_t j = tree.nearest(reflect_point(cloud.points[i], plane)).index;
      const auto a = cloud.row(i);
      const auto b = cloud.row(j);
      double sum = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) {
        sum += std::abs(static_cast<double>(a[k]) - static_cast<double>(b[k]));
      }
      terms[i] = sum;
    }
  });
  double total = 0.0;
  for (double t : terms) {
    total += t;
  }
  return total / static_cast<double>(terms.size());
}

double random_pairing_discrepancy(const FeatureCloud& cloud, std::uint64_t seed) {
  const std::size_t n = cloud.size();
  if (n < 2) {
    throw EmptySet("random pairing needs at least two points");
  }
  Rng rng(seed);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t j = uniform_index(rng, n - 1);
    if (j >= i) {
      ++j;
    }
    const auto a = cloud.row(i);
    const auto b = cloud.row(j);
    double sum = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      sum += std::abs(static_cast<double>(a[k]) - static_cast<double>(b[k]));
    }
    total += sum;
  }
  return total / static_cast<double>(n);
}

VertexFeatures render_synthetic_vertex_features(
    const NormalizedMesh& mesh,
    std::span<const Plane> planes,
    const InvarianceConfig& cfg) {
  cfg.validate();
  const VertexFeatures clean = synthetic_features(mesh, planes, cfg.dim, 0.0, cfg.seed);
  const double radius = cfg.camera.radius_factor * mesh.diagonal();
  const std::vector<Viewpoint> views = cfg.scheme == ViewScheme::Fibonacci
      ? fibonacci_viewpoints(cfg.n_views, radius)
      : regular_viewpoints(regular_level_for_count(cfg.n_views), radius);
  const std::vector<int> rotations = rotation_set(cfg.rotations);

  struct Job {
    std::uint32_t view;
    int rotation;
  };
  std::vector<Job> jobs;
  for (std::size_t v = 0; v < views.size(); ++v) {
    for (int r : rotations) {
      jobs.push_back({static_cast<std::uint32_t>(v), r});
    }
  }

  BackprojectionAccumulator acc(mesh);
  constexpr std::size_t kChunk = 8;
  for (std::size_t start = 0; start < jobs.size(); start += kChunk) {
    const std::size_t stop = std::min(jobs.size(), start + kChunk);
    std::vector<FragmentBuffer> frags(stop - start);
    std::vector<FeatureMap> maps(stop - start);
    parallel_for(start, stop, 1, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t j = lo; j < hi; ++j) {
        Viewpoint vp = views[jobs[j].view];
        vp.rotation_deg = jobs[j].rotation;
        frags[j - start] = render_view(mesh, vp, cfg.camera).fragments;
        maps[j - start] = synthetic_feature_map(
            mesh, clean, frags[j - start], {jobs[j].view, jobs[j].rotation}, cfg.patches, cfg.noise, cfg.seed);
      }
    });
    std::vector<RenderFeatures> renders;
    for (std::size_t j = 0; j < frags.size(); ++j) {
      renders.push_back({&frags[j], &maps[j]});
    }
    acc.add(renders);
  }
  return acc.finish();
}

FeatureCloud invariance_cloud(const NormalizedMesh& mesh, const VertexFeatures& vf, const InvarianceConfig& cfg) {
  if (cfg.sampling == SamplingMode::RawMesh) {
    return vertex_cloud(mesh, vf).cloud;
  }
  const std::vector<SurfaceSample> samples = sample_surface(mesh, cfg.n_points, cfg.seed);
  return interpolate_features(mesh, vf, samples).cloud;
}

namespace {

std::vector<Plane> planes_in_normalized_frame(const NormalizedMesh& mesh, std::span<const Plane> planes) {
  std::vector<Plane> out;
  for (const Plane& p : planes) {
    out.push_back(p.translated(-mesh.centroid_applied()));
  }
  return out;
}

double cloud_discrepancy(const FeatureCloud& cloud, std::span<const Plane> planes, const InvarianceConfig& cfg) {
  if (cfg.pairing == Pairing::Random) {
    return random_pairing_discrepancy(cloud, cfg.seed);
  }
  if (planes.empty()) {
    throw InvalidArgument("symmetric pairing needs at least one ground-truth plane");
  }
  double sum = 0.0;
  for (const Plane& p : planes) {
    sum += discrepancy(cloud, p);
  }
  return sum / static_cast<double>(planes.size());
}

std::string feature_cache_key(const InvarianceConfig& c) {
  std::ostringstream k;
  k.precision(17);
  k << static_cast<int>(c.scheme) << '|' << c.n_views << '|' << c.rotations << '|' << c.dim << '|' << c.noise << '|'
    << c.seed << '|' << c.patches << '|' << c.camera.radius_factor << '|' << c.camera.fov_y_deg << '|'
    << c.camera.image_size;
  return k.str();
}

} // namespace

double object_discrepancy(const CorpusObject& object, const InvarianceConfig& cfg) {
  const NormalizedMesh mesh = normalize(object.mesh);
  const std::vector<Plane> planes = planes_in_normalized_frame(mesh, object.gt);
  if (cfg.pairing == Pairing::Symmetric && planes.empty()) {
    throw InvalidArgument("symmetric pairing needs at least one ground-truth plane");
  }
  const VertexFeatures vf = render_synthetic_vertex_features(mesh, planes, cfg);
  return cloud_discrepancy(invariance_cloud(mesh, vf, cfg), planes, cfg);
}

std::vector<InvarianceResult> ablation_grid(std::span<const CorpusObject> corpus, std::span<const InvarianceConfig> configs) {
  for (const InvarianceConfig& c : configs) {
    c.validate();
  }
  std::vector<InvarianceResult> results(configs.size());
  for (std::size_t c = 0; c < configs.size(); ++c) {
    results[c].config = configs[c];
  }

  for (const CorpusObject& object : corpus) {
    std::map<std::string, VertexFeatures> cache;
    NormalizedMesh mesh;
    std::vector<Plane> planes;
    try {
      mesh = normalize(object.mesh);
      planes = planes_in_normalized_frame(mesh, object.gt);
    } catch (const std::exception& e) {
      for (InvarianceResult& r : results) {
        r.failures.push_back(object.id + ": " + e.what());
      }
      continue;
    }
    for (std::size_t c = 0; c < configs.size(); ++c) {
      const InvarianceConfig& cfg = configs[c];
      try {
        if (cfg.pairing == Pairing::Symmetric && planes.empty()) {
          throw InvalidArgument("no ground-truth plane");
        }
        const std::string key = feature_cache_key(cfg);
        auto it = cache.find(key);
        if (it == cache.end()) {
          it = cache.emplace(key, render_synthetic_vertex_features(mesh, planes, cfg)).first;
        }
        const double e = cloud_discrepancy(invariance_cloud(mesh, it->second, cfg), planes, cfg);
        results[c].object_ids.push_back(object.id);
        results[c].per_object.push_back(e);
      } catch (const std::exception& e) {
        results[c].failures.push_back(object.id + ": " + e.what());
      }
    }
  }

  for (InvarianceResult& r : results) {
    const std::size_t n = r.per_object.size();
    if (n == 0) {
      r.e_mean = r.e_std = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    double sum = 0.0;
    for (double e : r.per_object) {
      sum += e;
    }
    r.e_mean = sum / static_cast<double>(n);
    double var = 0.0;
    for (double e : r.per_object) {
      var += (e - r.e_mean) * (e - r.e_mean);
    }
    r.e_std = std::sqrt(var / static_cast<double>(n));
  }
  return results;
}

std::string ablation_csv(std::span<const InvarianceResult> results) {
  std::ostringstream out;
  out.precision(10);
  out << "config_id,scheme,n_views,rotations,sampling,pairing,E_mean,E_std,n_objects\n";
  for (const InvarianceResult& r : results) {
    const InvarianceConfig& c = r.config;
    out << c.id << ',' << (c.scheme == ViewScheme::Fibonacci ? "fibonacci" : "regular") << ',' << c.n_views << ','
        << c.rotations << ',';
    if (c.sampling == SamplingMode::RawMesh) {
      out << "RM";
    } else {
      out << "FM" << c.n_points;
    }
    out << ',' << (c.pairing == Pairing::Symmetric ? "symmetric" : "random") << ',' << r.e_mean << ',' << r.e_std
        << ',' << r.per_object.size() << '\n';
  }
  return out.str();
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void apply_grid_key(InvarianceConfig& c, const std::string& key, const std::string& value, int line) {
  auto fail = [&](const std::string& why) {
    throw ParseError("grid line " + std::to_string(line) + ": " + why);
  };
  try {
    if (key == "scheme") {
      if (value == "fib" || value == "fibonacci") {
        c.scheme = ViewScheme::Fibonacci;
      } else if (value == "reg" || value == "regular") {
        c.scheme = ViewScheme::Regular;
      } else {
        fail("unknown scheme '" + value + "'");
      }
    } else if (key == "views") {
      c.n_views = std::stoul(value);
    } else if (key == "rotations") {
      try {
        rotation_set(value);
      } catch (const InvalidArgument&) {
        fail("unknown rotation set '" + value + "'");
      }
      c.rotations = value;
    } else if (key == "sampling") {
      if (value == "raw" || value == "rm") {
        c.sampling = SamplingMode::RawMesh;
      } else if (value == "feature" || value == "fm") {
        c.sampling = SamplingMode::FeatureMesh;
      } else {
        fail("unknown sampling '" + value + "'");
      }
    } else if (key == "points") {
      c.n_points = std::stoul(value);
    } else if (key == "pairing") {
      if (value == "symmetric") {
        c.pairing = Pairing::Symmetric;
      } else if (value == "random") {
        c.pairing = Pairing::Random;
      } else {
        fail("unknown pairing '" + value + "'");
      }
    } else if (key == "dim") {
      c.dim = std::stoi(value);
    } else if (key == "noise") {
      c.noise = std::stod(value);
    } else if (key == "seed") {
      c.seed = std::stoull(value);
    } else {
      fail("unknown key '" + key + "'");
    }
  } catch (const std::logic_error&) {
    fail("bad value '" + value + "' for " + key);
  }
}

} // namespace

std::vector<InvarianceConfig> parse_grid(const std::string& text) {
  std::vector<InvarianceConfig> out;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = trim(raw.substr(0, raw.find('#')));
    if (s.empty()) {
      continue;
    }
    if (s.front() == '[') {
      if (s.back() != ']' || s.size() < 3) {
        throw ParseError("grid line " + std::to_string(line) + ": malformed section header");
      }
      out.emplace_back();
      out.back().id = trim(s.substr(1, s.size() - 2));
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw ParseError("grid line " + std::to_string(line) + ": expected key=value");
    }
    if (out.empty()) {
      throw ParseError("grid line " + std::to_string(line) + ": key before the first [config] header");
    }
    apply_grid_key(out.back(), trim(s.substr(0, eq)), trim(s.substr(eq + 1)), line);
  }
  for (const InvarianceConfig& c : out) {
    c.validate();
  }
  return out;
}

} // namespace symplane
