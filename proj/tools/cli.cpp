#include "cli.h"

#include "manifest.h"

#include "symplane/analysis.h"
#include "symplane/errors.h"
#include "symplane/features.h"
#include "symplane/metrics.h"
#include "symplane/parallel.h"
#include "symplane/render.h"
#include "symplane/symmetry.h"
#include "symplane/synth.h"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace symplane::cli {
namespace {

// Raised by command handlers to leave with a specific exit code.
struct Exit {
  int code;
  std::string message;
};

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open " + path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) {
      throw Error("cannot write " + path.string());
    }
    out << text;
  }
  fs::rename(tmp, path);
}

fs::path resolve(const fs::path& dir, const std::string& rel) {
  const fs::path p(rel);
  return p.is_absolute() ? p : dir / p;
}

NormalizedMesh load_normalized(const fs::path& path) {
  try {
    return normalize(load_mesh(path));
  } catch (const ParseError& e) {
    throw Exit{kParseFailure, e.what()};
  } catch (const EmptyMesh& e) {
    throw Exit{kParseFailure, e.what()};
  } catch (const DegenerateMesh& e) {
    throw Exit{kParseFailure, e.what()};
  }
}

// Ground truth for `id`: the entry of that name, else the single entry of
// a one-object file. Planes are mapped into the normalized frame.
std::optional<std::vector<Plane>> ground_truth_for(const fs::path& path, const std::string& id, const NormalizedMesh& mesh) {
  if (!fs::exists(path)) {
    return std::nullopt;
  }
  const GroundTruthSet set = load_ground_truth(path);
  auto it = set.find(id);
  if (it == set.end() && set.size() == 1) {
    it = set.begin();
  }
  if (it == set.end()) {
    return std::nullopt;
  }
  std::vector<Plane> planes;
  for (const Plane& p : it->second) {
    planes.push_back(p.translated(-mesh.centroid_applied()));
  }
  return planes;
}

std::vector<Plane> require_ground_truth(const fs::path& path, const std::string& id, const NormalizedMesh& mesh) {
  auto gt = ground_truth_for(path, id, mesh);
  if (!gt) {
    throw Exit{kMissingGroundTruth, "no ground truth for '" + id + "' in " + path.string()};
  }
  return *gt;
}

std::string fmt(double v, int digits = 6) {
  std::ostringstream ss;
  ss << std::setprecision(digits) << v;
  return ss.str();
}

// ---------------------------------------------------------------- render

struct RenderArgs {
  std::string mesh;
  std::size_t views = 14;
  std::string scheme = "fib";
  std::string rotations = "1";
  std::string out;
  std::string id;
  CameraSettings camera;
  bool no_png = false;
};

int cmd_render(const RenderArgs& a, std::ostream& out, std::ostream& err) {
  if (a.views == 0) {
    throw Exit{kUsage, "--views must be at least 1"};
  }
  std::vector<int> rotations;
  try {
    rotations = rotation_set(a.rotations);
  } catch (const Error& e) {
    throw Exit{kUsage, e.what()};
  }
  if (a.camera.image_size <= 0 || !(a.camera.fov_y_deg > 0.0 && a.camera.fov_y_deg < 180.0) ||
      !(a.camera.radius_factor > 0.0)) {
    throw Exit{kUsage, "invalid camera settings"};
  }
  const fs::path mesh_path(a.mesh);
  const NormalizedMesh mesh = load_normalized(mesh_path);
  const double radius = a.camera.radius_factor * mesh.diagonal();
  std::vector<Viewpoint> base;
  if (a.scheme == "fib") {
    base = fibonacci_viewpoints(a.views, radius);
  } else {
    const int level = regular_level_for_count(a.views);
    if (level == 0) {
      throw Exit{kUsage, "--scheme reg supports 6, 14, 26, 42, 62, 86 or 114 views, not " + std::to_string(a.views)};
    }
    base = regular_viewpoints(level, radius);
  }

  const fs::path dir(a.out);
  const fs::path render_dir = dir / "renders";
  fs::create_directories(render_dir);

  // Unique (view, rotation) jobs; t4 repeats share one set of files.
  struct Job {
    std::size_t view;
    int rotation;
  };
  std::vector<Job> jobs;
  std::set<std::pair<std::size_t, int>> seen;
  for (std::size_t v = 0; v < base.size(); ++v) {
    for (int r : rotations) {
      if (seen.insert({v, r}).second) {
        jobs.push_back({v, r});
      }
    }
  }

  const std::size_t batch = std::max<std::size_t>(8, 2 * static_cast<std::size_t>(thread_count()));
  std::size_t written = 0;
  try {
    for (std::size_t start = 0; start < jobs.size(); start += batch) {
      const std::size_t stop = std::min(jobs.size(), start + batch);
      std::vector<RenderResult> results(stop - start);
      parallel_for(start, stop, 1, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
          Viewpoint vp = base[jobs[i].view];
          vp.rotation_deg = jobs[i].rotation;
          results[i - start] = render_view(mesh, vp, a.camera);
        }
      });
      for (std::size_t i = start; i < stop; ++i) {
        const std::string stem = render_stem(jobs[i].view, jobs[i].rotation);
        if (!a.no_png) {
          write_png(results[i - start].image, render_dir / (stem + ".png"));
        }
        write_fragments(results[i - start].fragments, render_dir / (stem + ".frag"));
        ++written;
      }
    }
  } catch (const std::exception& e) {
    throw Exit{kRenderFailure, std::string("render failed: ") + e.what()};
  }

  RunManifest m;
  m.object_id = a.id.empty() ? mesh_path.stem().string() : a.id;
  m.mesh = relative_to(fs::absolute(mesh_path), fs::absolute(dir));
  m.config["render"] = {
      {"views", a.views},
      {"scheme", a.scheme},
      {"rotations", a.rotations},
      {"image_size", a.camera.image_size},
      {"fov_deg", a.camera.fov_y_deg},
      {"radius_factor", a.camera.radius_factor},
  };
  for (std::size_t v = 0; v < base.size(); ++v) {
    for (int r : rotations) {
      const std::string stem = render_stem(v, r);
      m.renders.push_back(
          {static_cast<std::uint32_t>(v), r, a.no_png ? std::string() : "renders/" + stem + ".png",
           "renders/" + stem + ".frag"});
    }
  }
  m.save(dir);
  out << "rendered " << m.renders.size() << " views (" << written << " unique) of " << m.object_id << " into "
      << dir.string() << "\n";
  out << "config_hash " << m.config_hash() << "\n";
  (void)err;
  return kOk;
}

// ---------------------------------------------------------- synth-extract

struct ExtractArgs {
  std::string manifest;
  std::string gt;
  std::string out;
  int dim = 32;
  double noise = 0.02;
  std::uint64_t seed = 0;
  int patches = 37;
};

int cmd_synth_extract(const ExtractArgs& a, std::ostream& out, std::ostream& err) {
  const fs::path dir = manifest_dir(a.manifest);
  RunManifest m = RunManifest::load(a.manifest);
  const NormalizedMesh mesh = load_normalized(resolve(dir, m.mesh));
  std::vector<Plane> planes;
  if (!a.gt.empty()) {
    planes = require_ground_truth(a.gt, m.object_id, mesh);
  } else {
    err << "no --gt given; the synthetic field has no symmetry\n";
  }
  if (a.dim <= 0 || a.patches <= 0 || a.noise < 0.0) {
    throw Exit{kUsage, "--dim and --patches must be positive, --noise non-negative"};
  }
  const VertexFeatures clean = synthetic_features(mesh, planes, a.dim, 0.0, a.seed);
  const fs::path feature_dir = a.out.empty() ? dir / "features" : fs::path(a.out);
  fs::create_directories(feature_dir);

  std::set<std::pair<std::uint32_t, int>> seen;
  std::size_t count = 0;
  for (const RenderEntry& r : m.renders) {
    if (!seen.insert({r.view, r.rotation}).second) {
      continue;
    }
    const FragmentBuffer frags = read_fragments(resolve(dir, r.frag));
    const FeatureMap map =
        synthetic_feature_map(mesh, clean, frags, {r.view, r.rotation}, a.patches, a.noise, a.seed);
    save_feature_map(map, feature_dir / (render_stem(r.view, r.rotation) + ".fmap"));
    ++count;
  }
  m.feature_dir = relative_to(fs::absolute(feature_dir), fs::absolute(dir));
  m.config["extract"] = {
      {"kind", "synthetic"}, {"dim", a.dim}, {"noise", a.noise}, {"seed", a.seed}, {"patches", a.patches}};
  m.save(dir);
  out << "wrote " << count << " feature maps to " << feature_dir.string() << "\n";
  return kOk;
}

// ------------------------------------------------------------ backproject

struct BackprojectArgs {
  std::string manifest;
  std::string features;
  std::string out;
  bool synthetic = false;
  std::string gt;
  int dim = 32;
  double noise = 0.02;
  std::uint64_t seed = 0;
};

int cmd_backproject(const BackprojectArgs& a, std::ostream& out, std::ostream& err) {
  const fs::path dir = manifest_dir(a.manifest);
  RunManifest m = RunManifest::load(a.manifest);
  const NormalizedMesh mesh = load_normalized(resolve(dir, m.mesh));
  VertexFeatures vf;

  if (a.synthetic) {
    if (a.gt.empty()) {
      throw Exit{kUsage, "--synthetic-features needs --gt"};
    }
    if (a.dim <= 0 || a.noise < 0.0) {
      throw Exit{kUsage, "--dim must be positive, --noise non-negative"};
    }
    const std::vector<Plane> planes = require_ground_truth(a.gt, m.object_id, mesh);
    vf = synthetic_features(mesh, planes, a.dim, a.noise, a.seed);
    m.config["backproject"] = {
        {"kind", "synthetic"}, {"dim", a.dim}, {"noise", a.noise}, {"seed", a.seed}};
  } else {
    fs::path feature_dir;
    if (!a.features.empty()) {
      feature_dir = a.features;
    } else if (!m.feature_dir.empty()) {
      feature_dir = resolve(dir, m.feature_dir);
    } else {
      throw Exit{kUsage, "no feature directory: pass --features or --synthetic-features"};
    }
    // Every render must have its map before any work starts.
    for (const RenderEntry& r : m.renders) {
      const fs::path fmap = feature_dir / (render_stem(r.view, r.rotation) + ".fmap");
      if (!fs::exists(fmap)) {
        throw Exit{
            kPairingFailure, "missing feature map for view " + std::to_string(r.view) + " rotation " +
                                 std::to_string(r.rotation) + " (" + fmap.string() + ")"};
      }
    }
    BackprojectionAccumulator acc(mesh);
    const std::size_t batch = 8;
    for (std::size_t start = 0; start < m.renders.size(); start += batch) {
      const std::size_t stop = std::min(m.renders.size(), start + batch);
      std::vector<FragmentBuffer> frags(stop - start);
      std::vector<FeatureMap> maps(stop - start);
      std::vector<RenderFeatures> pairs(stop - start);
      for (std::size_t i = start; i < stop; ++i) {
        const RenderEntry& r = m.renders[i];
        frags[i - start] = read_fragments(resolve(dir, r.frag));
        maps[i - start] = load_feature_map(feature_dir / (render_stem(r.view, r.rotation) + ".fmap"));
        if (maps[i - start].view_id != r.view || maps[i - start].rotation_deg != r.rotation) {
          throw PairingError(
              "feature map " + render_stem(r.view, r.rotation) + ".fmap carries view " +
              std::to_string(maps[i - start].view_id) + " rotation " + std::to_string(maps[i - start].rotation_deg));
        }
        pairs[i - start] = {&frags[i - start], &maps[i - start]};
      }
      acc.add(pairs);
    }
    vf = acc.finish();
    m.config["backproject"] = {{"kind", "maps"}};
  }

  const fs::path vf_path = a.out.empty() ? dir / "vertex_features.vfea" : fs::path(a.out);
  save_vertex_features(vf, vf_path);
  m.vertex_features = relative_to(fs::absolute(vf_path), fs::absolute(dir));
  m.save(dir);

  const std::size_t uncovered = vf.uncovered_count();
  const double frac = vf.vertex_count() ? static_cast<double>(uncovered) / vf.vertex_count() : 0.0;
  out << "coverage: " << (vf.vertex_count() - uncovered) << "/" << vf.vertex_count()
      << " vertices covered, uncovered fraction " << fmt(frac, 4) << "\n";
  (void)err;
  return kOk;
}

// ----------------------------------------------------------------- detect

struct DetectArgs {
  std::string manifest;
  std::string out;
  std::size_t points = 10000;
  double tau1 = 0.01;
  double tau2 = 1.0;
  std::size_t k = 10;
  double origin = 0.05;
  std::uint64_t seed = 0;
};

int cmd_detect(const DetectArgs& a, std::ostream& out, std::ostream& err) {
  const fs::path dir = manifest_dir(a.manifest);
  RunManifest m = RunManifest::load(a.manifest);
  DetectionConfig cfg;
  cfg.chamfer_tau1 = a.tau1;
  cfg.angle_tau2_deg = a.tau2;
  cfg.max_planes = a.k;
  cfg.origin_tol_frac = a.origin;
  try {
    cfg.validate();
  } catch (const InvalidArgument& e) {
    throw Exit{kUsage, e.what()};
  }
  if (m.vertex_features.empty() || !fs::exists(resolve(dir, m.vertex_features))) {
    throw Exit{kNoVertexFeatures, "no vertex features for '" + m.object_id + "'; run backproject first"};
  }
  const NormalizedMesh mesh = load_normalized(resolve(dir, m.mesh));
  const VertexFeatures vf = load_vertex_features(resolve(dir, m.vertex_features));
  if (vf.vertex_count() != mesh.vertex_count()) {
    throw DimensionMismatch("vertex features cover " + std::to_string(vf.vertex_count()) + " vertices, mesh has " +
                            std::to_string(mesh.vertex_count()));
  }
  InterpolationResult ir;
  if (a.points == 0) {
    ir = vertex_cloud(mesh, vf);
  } else {
    const auto samples = sample_surface(mesh, a.points, a.seed);
    ir = interpolate_features(mesh, vf, samples);
  }
  if (ir.dropped > 0) {
    err << ir.dropped << " samples dropped on faces with unseen vertices\n";
  }
  if (ir.cloud.size() < 3) {
    throw Exit{kNoVertexFeatures, "fewer than 3 feature points after sampling"};
  }
  DetectionStats stats;
  const auto planes = detect(ir.cloud, mesh.diagonal(), cfg, &stats);

  const fs::path planes_path = a.out.empty() ? dir / "planes.json" : fs::path(a.out);
  write_text(planes_path, planes_to_json(planes));
  m.planes = relative_to(fs::absolute(planes_path), fs::absolute(dir));
  m.config["detect"] = {{"points", a.points}, {"tau1", a.tau1},   {"tau2", a.tau2},
                        {"k", a.k},           {"origin", a.origin}, {"seed", a.seed}};
  m.save(dir);

  err << stats.trios << " trios, " << stats.candidates << " candidates, " << stats.after_origin_filter
      << " near the origin\n";
  for (std::size_t i = 0; i < planes.size(); ++i) {
    const Plane& p = planes[i].plane;
    char line[256];
    std::snprintf(
        line, sizeof(line), "plane %zu: n=(%.6f, %.6f, %.6f) d=%.6f chamfer=%.6g confidence=%.4f %s\n", i,
        p.normal.x(), p.normal.y(), p.normal.z(), p.offset, planes[i].chamfer.value_or(0.0),
        planes[i].confidence.value_or(0.0), planes[i].source().c_str());
    out << line;
  }
  out << planes.size() << " planes\n";
  return kOk;
}

// --------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string planes;
  std::string gt;
  std::string mesh;
  std::string id;
  std::vector<double> thresholds = kDefaultThresholds;
  std::size_t samples = 1000;
  std::uint64_t seed = 0;
  bool raw = false;
  std::string out_json;
  std::string out_csv;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out, std::ostream& err) {
  const NormalizedMesh mesh = load_normalized(a.mesh);
  const std::string id = a.id.empty() ? fs::path(a.mesh).stem().string() : a.id;
  const std::vector<Plane> gt = require_ground_truth(a.gt, id, mesh);
  std::vector<Plane> detected;
  for (const CandidatePlane& c : planes_from_json(read_text(a.planes))) {
    detected.push_back(c.plane);
  }
  EvalOptions opts;
  opts.thresholds = a.thresholds;
  opts.sde_samples = a.samples;
  opts.seed = a.seed;
  opts.raw_units = a.raw;
  EvalReport report;
  try {
    report = evaluate(mesh, detected, gt, opts);
  } catch (const InvalidArgument& e) {
    throw Exit{kUsage, e.what()};
  }

  const fs::path base = fs::path(a.planes).parent_path();
  const fs::path json_path = a.out_json.empty() ? base / "report.json" : fs::path(a.out_json);
  const fs::path csv_path = a.out_csv.empty() ? base / "report.csv" : fs::path(a.out_csv);
  write_text(json_path, report_to_json(report));
  write_text(csv_path, report_to_csv(report));

  out << "fscore_mean " << fmt(report.fscore_mean) << "\n";
  out << "sde_mean " << (std::isfinite(report.sde_mean) ? fmt(report.sde_mean) : std::string("n/a")) << "\n";
  for (const ThresholdScore& t : report.per_threshold) {
    out << "  threshold " << fmt(t.threshold) << ": precision " << fmt(t.precision, 4) << " recall "
        << fmt(t.recall, 4) << " fscore " << fmt(t.fscore, 4) << "\n";
  }
  (void)err;
  return kOk;
}

// ------------------------------------------------------------- invariance

struct InvarianceArgs {
  std::string corpus;
  std::string grid;
  std::string pairing;
  std::string out;
};

std::vector<CorpusObject> load_corpus(const fs::path& dir, std::ostream& err) {
  if (!fs::is_directory(dir)) {
    throw Exit{kUsage, "corpus directory " + dir.string() + " does not exist"};
  }
  std::vector<fs::path> meshes;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (entry.is_regular_file() && (ext == ".obj" || ext == ".off")) {
      meshes.push_back(entry.path());
    }
  }
  std::sort(meshes.begin(), meshes.end());
  std::vector<CorpusObject> corpus;
  for (const fs::path& p : meshes) {
    CorpusObject obj;
    obj.id = p.stem().string();
    try {
      obj.mesh = load_mesh(p);
    } catch (const Error& e) {
      err << obj.id << ": " << e.what() << " (skipped)\n";
      continue;
    }
    const fs::path gt_path = fs::path(p).replace_extension(".json");
    if (fs::exists(gt_path)) {
      try {
        const GroundTruthSet set = load_ground_truth(gt_path);
        auto it = set.find(obj.id);
        if (it == set.end() && set.size() == 1) {
          it = set.begin();
        }
        if (it != set.end()) {
          obj.gt = it->second;
        }
      } catch (const Error& e) {
        err << obj.id << ": " << e.what() << "\n";
      }
    }
    corpus.push_back(std::move(obj));
  }
  return corpus;
}

int cmd_invariance(const InvarianceArgs& a, std::ostream& out, std::ostream& err) {
  const std::vector<CorpusObject> corpus = load_corpus(a.corpus, err);
  if (corpus.empty()) {
    throw Exit{kUsage, "corpus " + a.corpus + " holds no meshes"};
  }
  std::vector<InvarianceConfig> configs;
  if (!a.grid.empty()) {
    try {
      configs = parse_grid(read_text(a.grid));
    } catch (const InvalidArgument& e) {
      throw Exit{kUsage, e.what()};
    }
  } else {
    configs.push_back(InvarianceConfig{});
  }
  if (!a.pairing.empty()) {
    std::vector<InvarianceConfig> expanded;
    for (const InvarianceConfig& c : configs) {
      if (a.pairing == "symmetric" || a.pairing == "both") {
        InvarianceConfig s = c;
        s.pairing = Pairing::Symmetric;
        if (a.pairing == "both") {
          s.id += "-sym";
        }
        expanded.push_back(s);
      }
      if (a.pairing == "random" || a.pairing == "both") {
        InvarianceConfig r = c;
        r.pairing = Pairing::Random;
        if (a.pairing == "both") {
          r.id += "-rand";
        }
        expanded.push_back(r);
      }
    }
    configs = std::move(expanded);
  }
  for (const InvarianceConfig& c : configs) {
    try {
      c.validate();
    } catch (const InvalidArgument& e) {
      throw Exit{kUsage, "config " + c.id + ": " + e.what()};
    }
  }
  const auto results = ablation_grid(corpus, configs);
  for (const InvarianceResult& r : results) {
    for (const std::string& f : r.failures) {
      err << r.config.id << ": " << f << "\n";
    }
  }
  const std::string csv = ablation_csv(results);
  if (a.out.empty()) {
    out << csv;
  } else {
    write_text(a.out, csv);
    out << "wrote " << results.size() << " rows to " << a.out << "\n";
  }
  return kOk;
}

// ------------------------------------------------------------------ synth

struct SynthArgs {
  std::string kind = "cube";
  std::uint64_t seed = 0;
  int tessellation = 8;
  int sides = 6;
  std::uint64_t rotate = 0;
  std::string name;
  std::string out = ".";
};

int cmd_synth(const SynthArgs& a, std::ostream& out, std::ostream& err) {
  ShapeKind kind;
  try {
    kind = parse_shape_kind(a.kind);
  } catch (const Error& e) {
    throw Exit{kUsage, e.what()};
  }
  if (a.tessellation < 1 || a.sides < 3) {
    throw Exit{kUsage, "--tessellation must be >= 1 and --sides >= 3"};
  }
  ShapeOptions opts;
  opts.ngon_sides = a.sides;
  SynthShape shape = random_rotation(make_shape(kind, a.seed, a.tessellation, opts), a.rotate);
  if (!a.name.empty()) {
    shape.name = a.name;
  }
  export_shape(shape, a.out);
  out << "wrote " << (fs::path(a.out) / (shape.name + ".obj")).string() << " (" << shape.mesh.vertices.size()
      << " vertices, " << shape.mesh.faces.size() << " faces, " << shape.gt.size() << " planes)\n";
  (void)err;
  return kOk;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reflective symmetry plane detection from multi-view features", "symplane"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);
  app.set_config("--config", "", "key=value configuration file");
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (default: SYMPLANE_THREADS, else all cores)")
      ->check(CLI::PositiveNumber);

  RenderArgs ra;
  auto* render = app.add_subcommand("render", "render a mesh from many viewpoints");
  render->add_option("mesh", ra.mesh, "mesh file (.obj or .off)")->required();
  render->add_option("--views", ra.views, "number of viewpoints")->capture_default_str();
  render->add_option("--scheme", ra.scheme, "viewpoint layout")
      ->check(CLI::IsMember({"fib", "reg"}))
      ->capture_default_str();
  render->add_option("--rotations", ra.rotations, "in-plane rotation set")
      ->check(CLI::IsMember({"1", "2", "3", "4", "t4"}))
      ->capture_default_str();
  render->add_option("--out", ra.out, "output run directory")->required();
  render->add_option("--id", ra.id, "object id (default: mesh file stem)");
  render->add_option("--image-size", ra.camera.image_size, "square image side in pixels")->capture_default_str();
  render->add_option("--fov", ra.camera.fov_y_deg, "vertical field of view in degrees")->capture_default_str();
  render->add_option("--radius-factor", ra.camera.radius_factor, "camera distance in mesh diagonals")
      ->capture_default_str();
  render->add_flag("--no-png", ra.no_png, "write fragment buffers only");

  ExtractArgs xa;
  auto* extract = app.add_subcommand("synth-extract", "write synthetic feature maps for every render");
  extract->add_option("manifest", xa.manifest, "run manifest or its directory")->required();
  extract->add_option("--gt", xa.gt, "ground-truth planes JSON");
  extract->add_option("--out", xa.out, "feature map directory (default: <run>/features)");
  extract->add_option("--dim", xa.dim, "feature channels")->capture_default_str();
  extract->add_option("--noise", xa.noise, "uniform noise amplitude")->capture_default_str();
  extract->add_option("--seed", xa.seed, "random seed")->capture_default_str();
  extract->add_option("--patches", xa.patches, "patch grid side")->capture_default_str();

  BackprojectArgs ba;
  auto* back = app.add_subcommand("backproject", "average feature maps onto mesh vertices");
  back->add_option("manifest", ba.manifest, "run manifest or its directory")->required();
  back->add_option("--features", ba.features, "feature map directory (default: from the manifest)");
  back->add_option("--out", ba.out, "vertex feature file (default: <run>/vertex_features.vfea)");
  back->add_flag("--synthetic-features", ba.synthetic, "use a synthetic field built from --gt instead of maps");
  back->add_option("--gt", ba.gt, "ground-truth planes JSON");
  back->add_option("--dim", ba.dim, "synthetic feature channels")->capture_default_str();
  back->add_option("--noise", ba.noise, "synthetic noise amplitude")->capture_default_str();
  back->add_option("--seed", ba.seed, "synthetic seed")->capture_default_str();

  DetectArgs da;
  auto* det = app.add_subcommand("detect", "detect symmetry planes");
  det->add_option("manifest", da.manifest, "run manifest or its directory")->required();
  det->add_option("--out", da.out, "planes JSON (default: <run>/planes.json)");
  det->add_option("--points", da.points, "surface samples (0: use the vertices)")->capture_default_str();
  det->add_option("--tau1", da.tau1, "Chamfer acceptance threshold")->capture_default_str();
  det->add_option("--tau2", da.tau2, "duplicate angle in degrees")->capture_default_str();
  det->add_option("--k", da.k, "maximum number of planes")->capture_default_str();
  det->add_option("--origin", da.origin, "origin distance tolerance in diagonals")->capture_default_str();
  det->add_option("--seed", da.seed, "sampling seed")->capture_default_str();

  EvaluateArgs ea;
  auto* eval = app.add_subcommand("evaluate", "score detected planes against ground truth");
  eval->add_option("--planes", ea.planes, "planes JSON")->required();
  eval->add_option("--gt", ea.gt, "ground-truth planes JSON")->required();
  eval->add_option("--mesh", ea.mesh, "mesh file")->required();
  eval->add_option("--id", ea.id, "object id in the ground-truth file (default: mesh file stem)");
  eval->add_option("--thresholds", ea.thresholds, "plane distance thresholds")->delimiter(',');
  eval->add_option("--samples", ea.samples, "SDE surface samples")->capture_default_str();
  eval->add_option("--seed", ea.seed, "SDE sampling seed")->capture_default_str();
  eval->add_flag("--raw-units", ea.raw, "report SDE in mesh units");
  eval->add_option("--out-json", ea.out_json, "report JSON (default: next to the planes)");
  eval->add_option("--out-csv", ea.out_csv, "report CSV (default: next to the planes)");

  InvarianceArgs ia;
  auto* inv = app.add_subcommand("invariance", "measure feature discrepancy across a corpus");
  inv->add_option("corpus", ia.corpus, "directory of meshes with <stem>.json ground truth")->required();
  inv->add_option("--grid", ia.grid, "config grid file");
  inv->add_option("--pairing", ia.pairing, "override pairing of every config")
      ->check(CLI::IsMember({"symmetric", "random", "both"}));
  inv->add_option("--out", ia.out, "CSV file (default: stdout)");

  SynthArgs sa;
  auto* syn = app.add_subcommand("synth", "write a synthetic shape with its ground truth");
  syn->add_option("--kind", sa.kind, "cube, cuboid, lshape, prism or blob")->capture_default_str();
  syn->add_option("--seed", sa.seed, "shape seed")->capture_default_str();
  syn->add_option("--tessellation", sa.tessellation, "cells per unit length")->capture_default_str();
  syn->add_option("--sides", sa.sides, "prism sides")->capture_default_str();
  syn->add_option("--rotate", sa.rotate, "random rotation seed (0: none)")->capture_default_str();
  syn->add_option("--name", sa.name, "output name");
  syn->add_option("--out", sa.out, "output directory")->capture_default_str();

  std::vector<std::string> rev(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(rev.begin(), rev.end());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  set_thread_count(threads > 0 ? threads : default_thread_count());

  try {
    if (render->parsed()) {
      return cmd_render(ra, out, err);
    }
    if (extract->parsed()) {
      return cmd_synth_extract(xa, out, err);
    }
    if (back->parsed()) {
      return cmd_backproject(ba, out, err);
    }
    if (det->parsed()) {
      return cmd_detect(da, out, err);
    }
    if (eval->parsed()) {
      return cmd_evaluate(ea, out, err);
    }
    if (inv->parsed()) {
      return cmd_invariance(ia, out, err);
    }
    if (syn->parsed()) {
      return cmd_synth(sa, out, err);
    }
  } catch (const Exit& e) {
    err << "error: " << e.message << "\n";
    return e.code;
  } catch (const PairingError& e) {
    err << "error: " << e.what() << "\n";
    return kPairingFailure;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kParseFailure;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}

} // namespace symplane::cli
