#include "symplane/errors.h"
#include "symplane/features.h"
#include "symplane/parallel.h"

#include <algorithm>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <tuple>

namespace symplane {

namespace {

// One render's mean feature per visible vertex, vertices ascending.
struct Contribution {
  std::vector<std::uint32_t> vertices;
  std::vector<double> values;
};

struct PatchHit {
  std::uint32_t vertex;
  std::uint32_t patch;
  std::uint32_t count;

  bool operator<(const PatchHit& o) const {
    return std::tie(vertex, patch, count) < std::tie(o.vertex, o.patch, o.count);
  }
};

Contribution render_contribution(const TriangleMesh& mesh, const FragmentBuffer& frags, const FeatureMap& map) {
  const int P = map.patches;
  const int patchPx = frags.width / P;
  const std::uint64_t cells = static_cast<std::uint64_t>(P) * P;

  // (face, patch) keys of every covered pixel, run-length counted after sorting.
  std::vector<std::uint64_t> keys;
  for (int y = 0; y < frags.height; ++y) {
    for (int x = 0; x < frags.width; ++x) {
      const Fragment& f = frags.at(x, y);
      if (f.empty()) {
        continue;
      }
      if (static_cast<std::size_t>(f.face_id) >= mesh.faces.size()) {
        throw DimensionMismatch("fragment references face " + std::to_string(f.face_id) + " beyond the mesh");
      }
      const std::uint64_t patch = static_cast<std::uint64_t>(y / patchPx) * P + static_cast<std::uint64_t>(x / patchPx);
      keys.push_back(static_cast<std::uint64_t>(f.face_id) * cells + patch);
    }
  }
  std::sort(keys.begin(), keys.end());

  std::vector<PatchHit> hits;
  for (std::size_t i = 0; i < keys.size();) {
    std::size_t j = i;
    while (j < keys.size() && keys[j] == keys[i]) {
      ++j;
    }
    const Face& face = mesh.faces[keys[i] / cells];
    const auto patch = static_cast<std::uint32_t>(keys[i] % cells);
    const auto count = static_cast<std::uint32_t>(j - i);
    for (std::uint32_t v : face) {
      hits.push_back({v, patch, count});
    }
    i = j;
  }
  std::sort(hits.begin(), hits.end());

  const auto d = static_cast<std::size_t>(map.dim);
  Contribution out;
  for (std::size_t i = 0; i < hits.size();) {
    const std::uint32_t v = hits[i].vertex;
    out.vertices.push_back(v);
    const std::size_t base = out.values.size();
    out.values.resize(base + d, 0.0);
    double weight = 0.0;
    for (; i < hits.size() && hits[i].vertex == v; ++i) {
      const double c = hits[i].count;
      const float* f = map.data.data() + static_cast<std::size_t>(hits[i].patch) * d;
      for (std::size_t k = 0; k < d; ++k) {
        out.values[base + k] += c * f[k];
      }
      weight += c;
    }
    for (std::size_t k = 0; k < d; ++k) {
      out.values[base + k] /= weight;
    }
  }
  return out;
}

// Pairwise summation over a stream of dense arrays: a binary counter of
// partial sums whose tree shape depends only on the stream length.
class PairwiseAccumulator {
 public:
  explicit PairwiseAccumulator(std::size_t length) : length_(length) {}

  void push(std::vector<double> values) {
    std::size_t size = 1;
    while (!levels_.empty() && levels_.back().size == size) {
      std::vector<double>& prev = levels_.back().sum;
      for (std::size_t i = 0; i < length_; ++i) {
        values[i] = prev[i] + values[i];
      }
      levels_.pop_back();
      size *= 2;
    }
    levels_.push_back({std::move(values), size});
  }

  std::vector<double> total() const {
    if (levels_.empty()) {
      return std::vector<double>(length_, 0.0);
    }
    std::vector<double> acc = levels_.back().sum;
    for (std::size_t l = levels_.size() - 1; l-- > 0;) {
      for (std::size_t i = 0; i < length_; ++i) {
        acc[i] = levels_[l].sum[i] + acc[i];
      }
    }
    return acc;
  }

 private:
  struct Level {
    std::vector<double> sum;
    std::size_t size;
  };
  std::size_t length_;
  std::vector<Level> levels_;
};

} // namespace

struct BackprojectionAccumulator::State {
  int dim = -1;
  int patches = -1;
  std::vector<std::uint32_t> visibility;
  std::unique_ptr<PairwiseAccumulator> sum;
};

BackprojectionAccumulator::BackprojectionAccumulator(const NormalizedMesh& mesh)
    : mesh_(mesh), state_(std::make_unique<State>()) {
  state_->visibility.assign(mesh.vertex_count(), 0);
}

BackprojectionAccumulator::~BackprojectionAccumulator() = default;

void BackprojectionAccumulator::add(std::span<const RenderFeatures> renders) {
  State& st = *state_;
  for (const RenderFeatures& r : renders) {
    const FeatureMap& m = *r.map;
    const FragmentBuffer& f = *r.fragments;
    if (st.dim < 0) {
      if (m.dim <= 0 || m.patches <= 0) {
        throw DimensionMismatch("feature map has an empty grid");
      }
      st.dim = m.dim;
      st.patches = m.patches;
      st.sum = std::make_unique<PairwiseAccumulator>(mesh_.vertex_count() * static_cast<std::size_t>(st.dim));
    }
    if (m.dim != st.dim || m.patches != st.patches) {
      throw DimensionMismatch("feature maps disagree on grid size or feature dimension");
    }
    if (m.data.size() != static_cast<std::size_t>(m.patches) * m.patches * m.dim) {
      throw DimensionMismatch("feature map data does not match its header");
    }
    if (f.width != f.height || f.width % m.patches != 0) {
      throw DimensionMismatch(
          "fragment grid " + std::to_string(f.width) + "x" + std::to_string(f.height) +
          " is not a square multiple of the " + std::to_string(m.patches) + "-patch grid");
    }
  }

  const TriangleMesh& mesh = mesh_.mesh();
  const std::size_t V = mesh.vertices.size();
  const auto d = static_cast<std::size_t>(st.dim);
  // Renders are evaluated in parallel batches but folded in list order.
  const std::size_t batch = std::max<std::size_t>(8, 2 * static_cast<std::size_t>(thread_count()));
  for (std::size_t start = 0; start < renders.size(); start += batch) {
    const std::size_t stop = std::min(renders.size(), start + batch);
    std::vector<Contribution> parts(stop - start);
    parallel_for(start, stop, 1, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t r = lo; r < hi; ++r) {
        parts[r - start] = render_contribution(mesh, *renders[r].fragments, *renders[r].map);
      }
    });
    for (Contribution& c : parts) {
      std::vector<double> dense(V * d, 0.0);
      for (std::size_t i = 0; i < c.vertices.size(); ++i) {
        const std::uint32_t v = c.vertices[i];
        std::copy_n(c.values.begin() + static_cast<std::ptrdiff_t>(i * d), d, dense.begin() + static_cast<std::ptrdiff_t>(v * d));
        ++st.visibility[v];
      }
      st.sum->push(std::move(dense));
      c = {};
    }
  }
}

VertexFeatures BackprojectionAccumulator::finish() const {
  const State& st = *state_;
  if (st.dim < 0) {
    throw DimensionMismatch("backprojection needs at least one render");
  }
  const std::size_t V = mesh_.vertex_count();
  const auto d = static_cast<std::size_t>(st.dim);
  VertexFeatures out(V, st.dim);
  out.visibility = st.visibility;
  const std::vector<double> total = st.sum->total();
  for (std::size_t v = 0; v < V; ++v) {
    if (out.visibility[v] == 0) {
      continue;
    }
    const double n = out.visibility[v];
    for (std::size_t k = 0; k < d; ++k) {
      out.data[v * d + k] = static_cast<float>(total[v * d + k] / n);
    }
  }
  return out;
}

VertexFeatures backproject(const NormalizedMesh& mesh, std::span<const RenderFeatures> renders) {
  BackprojectionAccumulator acc(mesh);
  acc.add(renders);
  return acc.finish();
}

VertexFeatures backproject_pairs(
    const NormalizedMesh& mesh,
    const std::vector<FragmentBuffer>& fragments,
    const std::vector<RenderKey>& fragment_keys,
    const std::vector<FeatureMap>& maps) {
  if (fragments.size() != fragment_keys.size()) {
    throw InvalidArgument("one key per fragment buffer is required");
  }
  // Repeated keys (the T4 control) pair up in order of occurrence.
  std::map<std::pair<std::uint32_t, int>, std::vector<std::size_t>> byKey;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    byKey[{maps[i].view_id, maps[i].rotation_deg}].push_back(i);
  }
  std::map<std::pair<std::uint32_t, int>, std::size_t> used;
  std::vector<RenderFeatures> renders;
  renders.reserve(fragments.size());
  for (std::size_t i = 0; i < fragments.size(); ++i) {
    const std::pair<std::uint32_t, int> key{fragment_keys[i].view_id, fragment_keys[i].rotation_deg};
    const auto it = byKey.find(key);
    std::size_t& n = used[key];
    if (it == byKey.end() || n >= it->second.size()) {
      throw PairingError(
          "no feature map for view " + std::to_string(key.first) + " rotation " + std::to_string(key.second) + " (" +
          render_stem(key.first, key.second) + ")");
    }
    renders.push_back({&fragments[i], &maps[it->second[n++]]});
  }
  return backproject(mesh, renders);
}

InterpolationResult interpolate_features(
    const NormalizedMesh& nmesh,
    const VertexFeatures& vf,
    std::span<const SurfaceSample> samples) {
  const TriangleMesh& mesh = nmesh.mesh();
  if (vf.vertex_count() != mesh.vertices.size()) {
    throw DimensionMismatch("vertex features do not match the mesh vertex count");
  }
  const auto d = static_cast<std::size_t>(vf.dim);
  InterpolationResult out;
  out.cloud.dim = vf.dim;
  out.cloud.points.reserve(samples.size());
  out.cloud.features.reserve(samples.size() * d);
  out.cloud.samples.reserve(samples.size());
  for (const SurfaceSample& s : samples) {
    const Face& f = mesh.faces.at(s.face_id);
    if (!vf.covered(f[0]) || !vf.covered(f[1]) || !vf.covered(f[2])) {
      ++out.dropped;
      continue;
    }
    const auto a = vf.row(f[0]);
    const auto b = vf.row(f[1]);
    const auto c = vf.row(f[2]);
    for (std::size_t k = 0; k < d; ++k) {
      out.cloud.features.push_back(static_cast<float>(s.bary[0] * a[k] + s.bary[1] * b[k] + s.bary[2] * c[k]));
    }
    out.cloud.points.push_back(s.point);
    out.cloud.samples.push_back(s);
  }
  return out;
}

InterpolationResult vertex_cloud(const NormalizedMesh& nmesh, const VertexFeatures& vf) {
  const TriangleMesh& mesh = nmesh.mesh();
  if (vf.vertex_count() != mesh.vertices.size()) {
    throw DimensionMismatch("vertex features do not match the mesh vertex count");
  }
  // First incident face and corner of every vertex, for provenance.
  constexpr auto kNone = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::pair<std::uint32_t, int>> incident(mesh.vertices.size(), {kNone, 0});
  for (std::size_t f = mesh.faces.size(); f-- > 0;) {
    for (int k = 0; k < 3; ++k) {
      incident[mesh.faces[f][k]] = {static_cast<std::uint32_t>(f), k};
    }
  }
  InterpolationResult out;
  out.cloud.dim = vf.dim;
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    if (!vf.covered(v) || incident[v].first == kNone) {
      ++out.dropped;
      continue;
    }
    Vec3 bary = Vec3::Zero();
    bary[incident[v].second] = 1.0;
    out.cloud.points.push_back(mesh.vertices[v]);
    out.cloud.samples.push_back({mesh.vertices[v], incident[v].first, bary});
    const auto row = vf.row(v);
    out.cloud.features.insert(out.cloud.features.end(), row.begin(), row.end());
  }
  return out;
}

} // namespace symplane
