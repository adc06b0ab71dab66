#include "support.h"

#include "symplane/errors.h"
#include "symplane/render.h"
#include "symplane/synth.h"

#include <doctest.h>

#include <numbers>
#include <set>
#include <thread>

using namespace symplane;

namespace {

double angle_deg(const Vec3& a, const Vec3& b) {
  return std::acos(std::clamp(a.normalized().dot(b.normalized()), -1.0, 1.0)) * 180.0 / std::numbers::pi;
}

struct OracleHit {
  int face = -1;
  double t = 0.0;
  double u = 0.0;
  double v = 0.0;
};

OracleHit cast(const TriangleMesh& m, const Vec3& o, const Vec3& d) {
  OracleHit best;
  best.t = std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < m.faces.size(); ++f) {
    const auto c = m.corners(f);
    if (auto h = testing::ray_triangle(o, d, c[0], c[1], c[2]); h && h->t < best.t) {
      best = {static_cast<int>(f), h->t, h->u, h->v};
    }
  }
  return best;
}

} // namespace

TEST_SUITE("render") {

TEST_CASE("fibonacci viewpoints") {
  SUBCASE("single point") {
    const auto v = fibonacci_viewpoints(1, 2.5);
    REQUIRE(v.size() == 1);
    CHECK(v[0].position.norm() == doctest::Approx(2.5).epsilon(1e-12));
  }
  SUBCASE("144 points are unit and spread") {
    const auto v = fibonacci_viewpoints(144, 1.0);
    REQUIRE(v.size() == 144);
    double min_angle = 180.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      CHECK(std::abs(v[i].position.norm() - 1.0) < 1e-9);
      for (std::size_t j = i + 1; j < v.size(); ++j) {
        min_angle = std::min(min_angle, angle_deg(v[i].position, v[j].position));
      }
    }
    CHECK(min_angle > 11.0);
  }
  SUBCASE("42 points balance around the origin") {
    const auto v = fibonacci_viewpoints(42, 1.0);
    Vec3 c = Vec3::Zero();
    for (const auto& p : v) {
      c += p.position;
    }
    CHECK((c / 42.0).norm() < 0.05);
  }
  SUBCASE("coverage within 30 degrees for n >= 42") {
    for (std::size_t n : {42, 86, 144}) {
      const auto v = fibonacci_viewpoints(n, 1.0);
      Rng rng(n);
      double worst = 0.0;
      for (int i = 0; i < 10000; ++i) {
        const Vec3 q = testing::random_unit(rng);
        double best = 180.0;
        for (const auto& p : v) {
          best = std::min(best, angle_deg(q, p.position));
        }
        worst = std::max(worst, best);
      }
      CHECK(worst < 30.0);
    }
  }
  SUBCASE("deterministic") {
    const auto a = fibonacci_viewpoints(20, 1.0);
    const auto b = fibonacci_viewpoints(20, 1.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK((a[i].position - b[i].position).norm() == 0.0);
    }
  }
}

TEST_CASE("regular viewpoints") {
  SUBCASE("level 1 is the octahedron") {
    const auto v = regular_viewpoints(1);
    REQUIRE(v.size() == 6);
    std::set<std::array<long, 3>> dirs;
    for (const auto& p : v) {
      dirs.insert({std::lround(p.position.x()), std::lround(p.position.y()), std::lround(p.position.z())});
      CHECK(std::abs(p.position.norm() - 1.0) < 1e-12);
    }
    const std::set<std::array<long, 3>> expected{{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
    CHECK(dirs == expected);
  }
  SUBCASE("counts per level") {
    const std::array<std::size_t, 7> counts{6, 14, 26, 42, 62, 86, 114};
    for (int level = 1; level <= 7; ++level) {
      const auto v = regular_viewpoints(level, 3.0);
      CHECK(v.size() == counts[level - 1]);
      CHECK(regular_level_for_count(counts[level - 1]) == level);
      for (const auto& p : v) {
        CHECK(std::abs(p.position.norm() - 3.0) < 1e-9);
      }
      for (std::size_t i = 0; i < v.size(); ++i) {
        for (std::size_t j = i + 1; j < v.size(); ++j) {
          CHECK((v[i].position - v[j].position).norm() > 1e-6);
        }
      }
    }
    CHECK(regular_level_for_count(144) == 0);
  }
  SUBCASE("levels outside [1, 7]") {
    CHECK_THROWS_AS(regular_viewpoints(0), InvalidArgument);
    CHECK_THROWS_AS(regular_viewpoints(8), InvalidArgument);
  }
}

TEST_CASE("with_rotations is viewpoint-major") {
  const auto v = with_rotations(fibonacci_viewpoints(3, 1.0), {0, 90, 180, 270});
  REQUIRE(v.size() == 12);
  CHECK(v[0].rotation_deg == 0);
  CHECK(v[1].rotation_deg == 90);
  CHECK((v[3].position - v[0].position).norm() == 0.0);
  CHECK((v[4].position - v[0].position).norm() > 0.0);
}

TEST_CASE("up hint falls back near the y axis") {
  CHECK((default_up_hint(Vec3(1, 0, 0)) - Vec3::UnitY()).norm() == 0.0);
  CHECK((default_up_hint(Vec3(0, 2, 0)) - Vec3::UnitX()).norm() == 0.0);
  CHECK((default_up_hint(Vec3(0.001, -1, 0)) - Vec3::UnitX()).norm() == 0.0);
}

TEST_CASE("face-on cube") {
  const NormalizedMesh cube = normalize(testing::box_mesh(Vec3(-0.5, -0.5, -0.5), Vec3(0.5, 0.5, 0.5)));
  const Camera cam = Camera::look_at(Vec3(0, 0, 3), Vec3::Zero(), Vec3::UnitY(), 40.0, 65, 65);
  const RenderResult r = rasterize(cube, cam);
  const Fragment& center = r.fragments.at(32, 32);
  REQUIRE(!center.empty());
  // Front face is z = +0.5, the faces 2 and 3 of the box (vertices 4..7).
  CHECK((center.face_id == 2 || center.face_id == 3));
  CHECK(center.depth == doctest::Approx(2.5).epsilon(1e-6));
  // Every other face the center ray crosses lies further away.
  const Vec3 d = cam.ray_direction(32.5, 32.5);
  for (std::size_t f = 0; f < cube.face_count(); ++f) {
    const auto c = cube.mesh().corners(f);
    if (auto h = testing::ray_triangle(cam.eye(), d, c[0], c[1], c[2]); h && static_cast<int>(f) != center.face_id) {
      CHECK(h->t * d.dot(cam.forward()) >= center.depth - 1e-9);
    }
  }
  CHECK(r.image.at(32, 32) < kBackground);
  CHECK(r.fragments.at(0, 0).empty());
  CHECK(r.image.at(0, 0) == kBackground);
}

TEST_CASE("mesh behind the camera") {
  const NormalizedMesh cube = normalize(testing::box_mesh(Vec3(-0.5, -0.5, -0.5), Vec3(0.5, 0.5, 0.5)));
  const Camera cam = Camera::look_at(Vec3(0, 0, 3), Vec3(0, 0, 6), Vec3::UnitY(), 40.0, 32, 32);
  const RenderResult r = rasterize(cube, cam);
  for (const Fragment& f : r.fragments.pixels) {
    CHECK(f.empty());
  }
}

TEST_CASE("ray casting oracle") {
  Rng rng(2024);
  int checked = 0;
  for (int trial = 0; trial < 4; ++trial) {
    const SynthShape shape = random_rotation(
        make_shape(trial % 2 ? ShapeKind::Blob : ShapeKind::LShape, trial + 1, 2), 100 + trial);
    const NormalizedMesh mesh = normalize(shape.mesh);
    const Vec3 eye = testing::random_unit(rng) * 2.2 * mesh.diagonal();
    const Camera cam = Camera::look_at(eye, Vec3::Zero(), default_up_hint(eye), 40.0, 96, 96);
    const RenderResult r = rasterize(mesh, cam);
    std::vector<std::pair<int, int>> hits;
    for (int y = 0; y < 96; ++y) {
      for (int x = 0; x < 96; ++x) {
        if (!r.fragments.at(x, y).empty()) {
          hits.emplace_back(x, y);
        }
      }
    }
    REQUIRE(hits.size() > 100);
    for (int s = 0; s < 100; ++s) {
      const auto [x, y] = hits[uniform_index(rng, hits.size())];
      const Fragment& f = r.fragments.at(x, y);
      const Vec3 d = cam.ray_direction(x + 0.5, y + 0.5);
      const OracleHit h = cast(mesh.mesh(), cam.eye(), d);
      CHECK(h.face == f.face_id);
      CHECK(std::abs(h.t * d.dot(cam.forward()) - f.depth) < 1e-4);
      if (h.face == f.face_id) {
        CHECK(std::abs((1.0 - h.u - h.v) - f.bary[0]) < 1e-4);
        CHECK(std::abs(h.u - f.bary[1]) < 1e-4);
        CHECK(std::abs(h.v - f.bary[2]) < 1e-4);
      }
      ++checked;
    }
  }
  CHECK(checked == 400);
}

TEST_CASE("fragment and image agree, barycentrics reproject") {
  const NormalizedMesh mesh = normalize(make_shape(ShapeKind::NgonPrism, 0, 3).mesh);
  for (const Viewpoint& vp : fibonacci_viewpoints(5, 2.2 * mesh.diagonal())) {
    const Camera cam = Camera::for_viewpoint(vp, CameraSettings{2.2, 40.0, 80});
    const RenderResult r = rasterize(mesh, cam);
    for (int y = 0; y < 80; ++y) {
      for (int x = 0; x < 80; ++x) {
        const Fragment& f = r.fragments.at(x, y);
        CHECK((r.image.at(x, y) != kBackground) == !f.empty());
        if (f.empty()) {
          continue;
        }
        CHECK(std::abs(f.bary[0] + f.bary[1] + f.bary[2] - 1.0f) < 1e-5f);
        const auto c = mesh.mesh().corners(static_cast<std::size_t>(f.face_id));
        const Vec3 world = f.bary[0] * c[0] + f.bary[1] * c[1] + f.bary[2] * c[2];
        const Eigen::Vector2d px = cam.project(cam.to_view(world));
        CHECK((px - Eigen::Vector2d(x + 0.5, y + 0.5)).norm() < 1.0);
      }
    }
  }
}

TEST_CASE("rotating the grid matches a rolled camera") {
  const NormalizedMesh mesh = normalize(make_shape(ShapeKind::LShape, 0, 2).mesh);
  const Vec3 eye = Vec3(1.0, 0.7, 1.3).normalized() * 2.2 * mesh.diagonal();
  for (int deg : {90, 180, 270}) {
    const Camera flat = Camera::look_at(eye, Vec3::Zero(), Vec3::UnitY(), 40.0, 64, 64);
    const Camera rolled = Camera::look_at(eye, Vec3::Zero(), Vec3::UnitY(), 40.0, 64, 64, deg);
    const FragmentBuffer a = rotate_grid(rasterize(mesh, flat).fragments, deg);
    const FragmentBuffer b = rasterize(mesh, rolled).fragments;
    std::size_t same = 0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i) {
      same += a.pixels[i].face_id == b.pixels[i].face_id;
    }
    CHECK(static_cast<double>(same) / a.pixels.size() >= 0.95);

    Viewpoint vp;
    vp.position = eye;
    vp.up_hint = Vec3::UnitY();
    vp.rotation_deg = deg;
    const RenderResult rv = render_view(mesh, vp, CameraSettings{2.2, 40.0, 64});
    for (std::size_t i = 0; i < a.pixels.size(); ++i) {
      CHECK(rv.fragments.pixels[i].face_id == a.pixels[i].face_id);
    }
  }
}

TEST_CASE("rotate_grid") {
  PixelGrid<float> g(3, 2, 0.0f);
  for (int y = 0; y < 2; ++y) {
    for (int x = 0; x < 3; ++x) {
      g.at(x, y) = static_cast<float>(10 * y + x);
    }
  }
  const auto r180 = rotate_grid(g, 180);
  CHECK(r180.at(0, 0) == g.at(2, 1));
  CHECK_THROWS_AS(rotate_grid(g, 90), InvalidArgument);

  PixelGrid<float> s(2, 2, 0.0f);
  s.at(1, 0) = 7.0f; // top right
  // Counter-clockwise quarter turn moves the top-right pixel to the top left.
  CHECK(rotate_grid(s, 90).at(0, 0) == 7.0f);
  CHECK(rotate_grid(rotate_grid(s, 90), 270).pixels == s.pixels);
}

TEST_CASE("render files") {
  testing::TempDir dir("render");
  CHECK(render_stem(3, 90) == "view_003_rot090");
  CHECK(render_stem(114, 0) == "view_114_rot000");

  const NormalizedMesh mesh = normalize(make_shape(ShapeKind::Cube, 0, 2).mesh);
  Viewpoint vp;
  vp.position = Vec3(1, 2, 3).normalized() * 2.2 * mesh.diagonal();
  const RenderResult r = render_view(mesh, vp, CameraSettings{2.2, 40.0, 48});
  write_fragments(r.fragments, dir / "a.frag");
  const FragmentBuffer back = read_fragments(dir / "a.frag");
  REQUIRE(back.width == 48);
  REQUIRE(back.height == 48);
  for (std::size_t i = 0; i < back.pixels.size(); ++i) {
    CHECK(back.pixels[i].face_id == r.fragments.pixels[i].face_id);
    CHECK(back.pixels[i].bary == r.fragments.pixels[i].bary);
    CHECK(back.pixels[i].depth == r.fragments.pixels[i].depth);
  }
  const std::string bytes = testing::read_file(dir / "a.frag");
  CHECK(bytes.size() == 12 + 48 * 48 * 20);
  CHECK(bytes.substr(0, 4) == "FRAG");

  testing::write_file(dir / "short.frag", bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(read_fragments(dir / "short.frag"), FormatError);
  testing::write_file(dir / "magic.frag", "FRAX" + bytes.substr(4));
  CHECK_THROWS_AS(read_fragments(dir / "magic.frag"), FormatError);

  write_png(r.image, dir / "a.png");
  const std::string png = testing::read_file(dir / "a.png");
  REQUIRE(png.size() > 8);
  CHECK(png.substr(1, 3) == "PNG");
}

TEST_CASE("concurrent renders match sequential ones") {
  const NormalizedMesh mesh = normalize(make_shape(ShapeKind::Blob, 3, 3).mesh);
  const auto views = fibonacci_viewpoints(6, 2.2 * mesh.diagonal());
  std::vector<RenderResult> seq;
  for (const auto& v : views) {
    seq.push_back(render_view(mesh, v, CameraSettings{2.2, 40.0, 40}));
  }
  std::vector<RenderResult> par(views.size());
  std::vector<std::thread> threads;
  for (std::size_t i = 0; i < views.size(); ++i) {
    threads.emplace_back([&, i] { par[i] = render_view(mesh, views[i], CameraSettings{2.2, 40.0, 40}); });
  }
  for (auto& t : threads) {
    t.join();
  }
  for (std::size_t i = 0; i < views.size(); ++i) {
    CHECK(par[i].image.pixels == seq[i].image.pixels);
  }
}

} // TEST_SUITE
