#include "support.h"

#include "symplane/errors.h"
#include "symplane/symmetry.h"
#include "symplane/synth.h"

#include <doctest.h>

#include <numbers>

using namespace symplane;

namespace {

double angle_mod_sign(const Vec3& a, const Vec3& b) {
  return std::acos(std::min(1.0, std::abs(a.normalized().dot(b.normalized())))) * 180.0 / std::numbers::pi;
}

// Vertex cloud of a synthetic shape with noise-free group-invariant features.
FeatureCloud invariant_vertex_cloud(const SynthShape& shape, int dim, double noise, NormalizedMesh& mesh) {
  mesh = normalize(shape.mesh);
  const VertexFeatures vf = synthetic_features(mesh, shape.gt, dim, noise, 3);
  return vertex_cloud(mesh, vf).cloud;
}

// Points with random, per-point unique features.
FeatureCloud random_feature_cloud(std::vector<Vec3> points, int dim, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<float> f(points.size() * dim);
  for (float& x : f) {
    x = static_cast<float>(uniform01(rng));
  }
  return testing::make_cloud(std::move(points), dim, f);
}

CandidatePlane candidate(const Plane& p) {
  CandidatePlane c;
  c.plane = p.canonical();
  return c;
}

} // namespace

TEST_SUITE("symmetry") {

TEST_CASE("match_trios") {
  SUBCASE("one-dimensional features") {
    const FeatureCloud c = testing::make_cloud({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0)}, 1, {0.0f, 1.0f, 5.0f});
    const auto t = match_trios(c);
    REQUIRE(t.size() == 3);
    CHECK(t[0].i == 0);
    CHECK(t[0].j == 1);
    CHECK(t[0].k == 2);
    CHECK(t[0].d_ij == 1.0f);
    CHECK(t[0].d_ik == 5.0f);
    CHECK(t[2].j == 1);
  }
  SUBCASE("duplicate feature is the first neighbour") {
    const FeatureCloud c = testing::make_cloud(
        {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0), Vec3(3, 0, 0)}, 2, {0, 0, 3, 1, 9, 9, 3, 1});
    const auto t = match_trios(c);
    CHECK(t[1].j == 3);
    CHECK(t[1].d_ij == 0.0f);
    CHECK(t[3].j == 1);
  }
  SUBCASE("ties go to the smaller index") {
    const FeatureCloud c =
        testing::make_cloud({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0), Vec3(3, 0, 0)}, 1, {0, 2, -2, 2});
    const auto t = match_trios(c);
    CHECK(t[0].j == 1);
    CHECK(t[0].k == 2);
  }
  SUBCASE("brute force agreement") {
    Rng rng(8);
    std::vector<Vec3> pts(300);
    for (auto& p : pts) {
      p = testing::random_point(rng);
    }
    const FeatureCloud c = random_feature_cloud(pts, 7, 9);
    const auto t = match_trios(c);
    for (std::size_t i = 0; i < c.size(); ++i) {
      std::vector<std::pair<double, std::size_t>> d;
      for (std::size_t l = 0; l < c.size(); ++l) {
        if (l == i) {
          continue;
        }
        double s = 0.0;
        for (int ch = 0; ch < 7; ++ch) {
          s += std::abs(static_cast<double>(c.row(i)[ch]) - c.row(l)[ch]);
        }
        d.emplace_back(s, l);
      }
      std::sort(d.begin(), d.end());
      CHECK(t[i].i == i);
      CHECK(t[i].j == d[0].second);
      CHECK(t[i].k == d[1].second);
      CHECK(t[i].d_ij == doctest::Approx(d[0].first).epsilon(1e-5));
    }
  }
  SUBCASE("too few points") {
    const FeatureCloud c = testing::make_cloud({Vec3(0, 0, 0), Vec3(1, 0, 0)}, 1, {0, 1});
    CHECK_THROWS_AS(match_trios(c), TooFewPoints);
  }
  SUBCASE("mirror partners are found") {
    Rng rng(31);
    const Plane mirror = Plane::from_normal_offset(Vec3(1, 0.2, -0.1), 0.05);
    std::vector<Vec3> pts;
    for (int i = 0; i < 500; ++i) {
      pts.push_back(testing::random_point(rng));
    }
    for (int i = 0; i < 500; ++i) {
      pts.push_back(reflect_point(pts[static_cast<std::size_t>(i)], mirror));
    }
    TriangleMesh dummy = testing::box_mesh(Vec3(-2, -2, -2), Vec3(2, 2, 2));
    const NormalizedMesh frame = normalize(dummy);
    const SyntheticField field(frame, std::span(&mirror, 1), 16, 5);
    std::vector<float> f(pts.size() * 16);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      field.evaluate(pts[i], std::span(f.data() + i * 16, 16));
    }
    const FeatureCloud c = testing::make_cloud(pts, 16, f);
    const auto t = match_trios(c);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      const std::size_t partner = i < 500 ? i + 500 : i - 500;
      hits += t[i].j == partner;
    }
    CHECK(static_cast<double>(hits) / c.size() >= 0.99);
  }
}

TEST_CASE("candidate_planes") {
  const double diag = 1.0;
  SUBCASE("pair bisector") {
    const FeatureCloud c =
        testing::make_cloud({Vec3(1, 0, 0), Vec3(-1, 0, 0), Vec3(0, 5, 0)}, 1, {0, 0, 1});
    const MatchTrio t{0, 1, 2, 0.0f, 1.0f};
    const auto cands = candidate_planes(c, std::span(&t, 1), diag);
    REQUIRE(!cands.empty());
    CHECK(cands[0].kind == CandidatePlane::Kind::Pair);
    CHECK((cands[0].plane.normal - Vec3(1, 0, 0)).norm() < 1e-15);
    CHECK(std::abs(cands[0].plane.offset) < 1e-15);
    CHECK(cands[0].source() == "pair(0,1)");
  }
  SUBCASE("trio plane") {
    const FeatureCloud c = testing::make_cloud({Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)}, 1, {0, 0, 0});
    const MatchTrio t{0, 1, 2, 0.0f, 0.0f};
    const auto cands = candidate_planes(c, std::span(&t, 1), diag);
    REQUIRE(cands.size() == 4);
    const CandidatePlane& tp = cands[3];
    CHECK(tp.kind == CandidatePlane::Kind::Trio);
    CHECK((tp.plane.normal - Vec3(1, 1, 1).normalized()).norm() < 1e-12);
    CHECK(std::abs(tp.plane.signed_distance(Vec3(1, 1, 1) / 3.0)) < 1e-12);
    CHECK(tp.source() == "trio(0,1,2)");
  }
  SUBCASE("collinear trio gives only pair planes") {
    const FeatureCloud c = testing::make_cloud({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0)}, 1, {0, 0, 0});
    const MatchTrio t{0, 1, 2, 0.0f, 0.0f};
    const auto cands = candidate_planes(c, std::span(&t, 1), diag);
    CHECK(cands.size() == 3);
    for (const auto& x : cands) {
      CHECK(x.kind == CandidatePlane::Kind::Pair);
    }
  }
  SUBCASE("coincident pair is skipped") {
    const FeatureCloud c = testing::make_cloud({Vec3(0, 0, 0), Vec3(0, 0, 0), Vec3(2, 0, 0)}, 1, {0, 0, 0});
    const MatchTrio t{0, 1, 2, 0.0f, 0.0f};
    const auto cands = candidate_planes(c, std::span(&t, 1), diag);
    CHECK(cands.size() == 2);
  }
  SUBCASE("planes are canonical") {
    const FeatureCloud c = testing::make_cloud({Vec3(0, 1, 0), Vec3(0, -1, 0), Vec3(0, 0, 3)}, 1, {0, 0, 0});
    const MatchTrio t{0, 1, 2, 0.0f, 0.0f};
    for (const auto& x : candidate_planes(c, std::span(&t, 1), diag)) {
      const Plane canon = x.plane.canonical();
      CHECK((canon.normal - x.plane.normal).norm() == 0.0);
    }
  }
}

TEST_CASE("filter_by_origin") {
  const double od = 2.0;
  const std::vector<CandidatePlane> cands{
      candidate(Plane{Vec3::UnitX(), 0.0}), candidate(Plane{Vec3::UnitX(), -0.06 * od}),
      candidate(Plane{Vec3::UnitX(), -0.05 * od}), candidate(Plane{Vec3::UnitY(), 0.05 * od})};
  const auto kept = filter_by_origin(cands, od, 0.05);
  REQUIRE(kept.size() == 3);
  CHECK(kept[0].plane.offset == 0.0);
  CHECK(kept[1].plane.offset == -0.05 * od);
  CHECK(filter_by_origin(cands, od, 1e-9).size() == 1);
}

TEST_CASE("chamfer_distance") {
  const std::vector<Vec3> P{Vec3(0, 0, 0)};
  const std::vector<Vec3> Q{Vec3(1, 0, 0)};
  CHECK(chamfer_distance(P, Q) == 1.0);
  CHECK(chamfer_distance(P, P) == 0.0);
  CHECK_THROWS_AS(chamfer_distance(P, std::vector<Vec3>{}), EmptySet);

  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vec3> a(500);
    std::vector<Vec3> b(1 + uniform_index(rng, 500));
    for (auto& p : a) {
      p = testing::random_point(rng);
    }
    for (auto& p : b) {
      p = testing::random_point(rng);
    }
    CHECK(std::abs(chamfer_distance(a, b) - testing::brute_chamfer(a, b)) < 1e-12);
  }
}

TEST_CASE("reflection chamfer equals the two-sided definition") {
  Rng rng(77);
  std::vector<Vec3> pts(400);
  for (auto& p : pts) {
    p = testing::random_point(rng);
  }
  const ReflectionChamfer rc(pts);
  for (int i = 0; i < 10; ++i) {
    const Plane pl = testing::random_plane(rng, 0.2);
    std::vector<Vec3> mirrored;
    for (const Vec3& p : pts) {
      mirrored.push_back(reflect_point(p, pl));
    }
    CHECK(std::abs(rc.evaluate(pl) - testing::brute_chamfer(pts, mirrored)) < 1e-12);
  }
}

TEST_CASE("verify_and_select") {
  DetectionConfig cfg;

  SUBCASE("true plane of a mirror cube cloud") {
    NormalizedMesh mesh;
    const FeatureCloud c = invariant_vertex_cloud(make_shape(ShapeKind::Cube, 0, 4), 8, 0.0, mesh);
    const std::vector<CandidatePlane> cands{
        candidate(Plane::from_normal_offset(Vec3(1, 0.3, 0), 0.0)), candidate(Plane{Vec3::UnitY(), 0.0})};
    const auto out = verify_and_select(c, cands, cfg, mesh.diagonal());
    REQUIRE(!out.empty());
    CHECK((out[0].plane.normal - Vec3::UnitY()).norm() < 1e-12);
    CHECK(*out[0].chamfer < 1e-6);
    CHECK(*out[0].confidence > 0.9999);
  }

  SUBCASE("near-duplicate normals keep the better plane") {
    NormalizedMesh mesh;
    const FeatureCloud c = invariant_vertex_cloud(make_shape(ShapeKind::Cube, 0, 4), 8, 0.0, mesh);
    const double a = 0.5 * std::numbers::pi / 180.0;
    const std::vector<CandidatePlane> cands{
        candidate(Plane{Vec3(std::cos(a), std::sin(a), 0.0), 0.0}), candidate(Plane{Vec3::UnitX(), 0.0})};
    const auto out = verify_and_select(c, cands, cfg, mesh.diagonal());
    REQUIRE(out.size() == 1);
    CHECK((out[0].plane.normal - Vec3::UnitX()).norm() < 1e-12);
  }

  SUBCASE("parallel planes at distinct offsets are both kept") {
    std::vector<Vec3> pts;
    for (int i = -5; i <= 5; ++i) {
      pts.emplace_back(0.01 * i, 0.0, 0.0);
    }
    const FeatureCloud c = random_feature_cloud(pts, 2, 1);
    cfg.chamfer_tau1 = 1.0;
    const std::vector<CandidatePlane> cands{
        candidate(Plane{Vec3::UnitX(), 0.0}), candidate(Plane{Vec3::UnitX(), -0.05})};
    const auto out = verify_and_select(c, cands, cfg, 1.0);
    CHECK(out.size() == 2);
  }

  SUBCASE("diagonal plane through an asymmetric blob") {
    const SynthShape blob = make_shape(ShapeKind::Blob, 7, 12);
    const NormalizedMesh mesh = normalize(blob.mesh);
    std::vector<Vec3> pts;
    for (const auto& s : sample_surface(mesh, 2000, 1)) {
      pts.push_back(s.point);
    }
    const FeatureCloud c = random_feature_cloud(pts, 4, 2);
    const CandidatePlane diag = candidate(Plane::from_normal_offset(Vec3(1, 1, 0), 0.0));
    const auto out = verify_and_select(c, std::span(&diag, 1), cfg, mesh.diagonal());
    CHECK(out.empty());
    std::vector<Vec3> scaled;
    for (const Vec3& p : pts) {
      scaled.push_back(p / mesh.diagonal());
    }
    CHECK(ReflectionChamfer(scaled).evaluate(diag.plane) >= cfg.chamfer_tau1);
  }

  SUBCASE("lazy selection equals full evaluation") {
    Rng rng(4);
    const SynthShape shape = make_shape(ShapeKind::LShape, 0, 3);
    const NormalizedMesh mesh = normalize(shape.mesh);
    std::vector<Vec3> pts;
    for (const auto& s : sample_surface(mesh, 1500, 5)) {
      pts.push_back(s.point);
    }
    const FeatureCloud c = random_feature_cloud(pts, 3, 6);
    for (int trial = 0; trial < 6; ++trial) {
      std::vector<CandidatePlane> cands;
      for (int i = 0; i < 120; ++i) {
        Plane p = testing::random_plane(rng, 0.02 * mesh.diagonal());
        if (i % 7 == 0) {
          p = shape.gt[0];
        }
        if (i % 11 == 0) {
          const Vec3 axis = testing::random_unit(rng);
          p = Plane{Eigen::AngleAxisd(0.004 * (i % 5), axis) * Vec3::UnitZ(), 0.0};
        }
        cands.push_back(candidate(p));
      }
      DetectionConfig local;
      local.chamfer_tau1 = trial % 2 ? 0.01 : 0.05;
      local.max_planes = 1 + static_cast<std::size_t>(trial) * 3;
      const auto lazy = verify_and_select(c, cands, local, mesh.diagonal());
      const auto full = verify_all(c, cands, local, mesh.diagonal());
      REQUIRE(lazy.size() == full.size());
      for (std::size_t i = 0; i < lazy.size(); ++i) {
        CHECK(lazy[i].plane.as_vec4() == full[i].plane.as_vec4());
        CHECK(*lazy[i].chamfer == *full[i].chamfer);
        CHECK(*lazy[i].confidence == *full[i].confidence);
      }
    }
  }
}

TEST_CASE("detect") {
  DetectionConfig cfg;

  SUBCASE("cube with exact features finds the axis planes") {
    NormalizedMesh mesh;
    const SynthShape cube = make_shape(ShapeKind::Cube, 0, 4);
    const FeatureCloud c = invariant_vertex_cloud(cube, 16, 0.0, mesh);
    const auto out = detect(c, mesh.diagonal(), cfg);
    CHECK(out.size() <= cfg.max_planes);
    for (const Plane& gt : cube.gt) {
      bool found = false;
      for (const auto& p : out) {
        if (angle_mod_sign(p.plane.normal, gt.normal) < 1e-6 && std::abs(p.plane.offset) < 1e-9) {
          found = true;
          CHECK(*p.chamfer < 1e-6);
        }
      }
      CHECK(found);
    }
  }

  SUBCASE("sphere points with injective features") {
    Rng rng(19);
    std::vector<Vec3> pts;
    for (int i = 0; i < 800; ++i) {
      pts.push_back(testing::random_unit(rng));
    }
    const FeatureCloud c = random_feature_cloud(pts, 8, 3);
    const auto out = detect(c, 2.0 * std::sqrt(3.0), cfg);
    CHECK(out.size() <= cfg.max_planes);
    for (const auto& p : out) {
      CHECK(*p.chamfer < cfg.chamfer_tau1);
    }
  }

  SUBCASE("asymmetric blob with injective features") {
    const SynthShape blob = make_shape(ShapeKind::Blob, 7, 12);
    const NormalizedMesh mesh = normalize(blob.mesh);
    std::vector<Vec3> pts;
    for (const auto& s : sample_surface(mesh, 3000, 1)) {
      pts.push_back(s.point);
    }
    const FeatureCloud c = random_feature_cloud(pts, 16, 2);
    const auto out = detect(c, mesh.diagonal(), cfg);
    CHECK(out.empty());
  }

  SUBCASE("output properties and rigid invariance") {
    // Surface samples rather than the vertex lattice, whose many exactly
    // tied chamfers would make the k-th place arbitrary.
    const SynthShape shape = make_shape(ShapeKind::Cuboid, 0, 3);
    const NormalizedMesh mesh = normalize(shape.mesh);
    const VertexFeatures vf = synthetic_features(mesh, shape.gt, 16, 0.002, 3);
    const FeatureCloud c = interpolate_features(mesh, vf, sample_surface(mesh, 2000, 8)).cloud;
    const auto out = detect(c, mesh.diagonal(), cfg);
    REQUIRE(!out.empty());
    for (std::size_t i = 0; i < out.size(); ++i) {
      CHECK(*out[i].confidence > 0.0);
      CHECK(*out[i].confidence <= 1.0);
      if (i > 0) {
        CHECK(*out[i].chamfer >= *out[i - 1].chamfer);
        CHECK(*out[i].confidence <= *out[i - 1].confidence);
      }
      for (std::size_t j = 0; j < i; ++j) {
        CHECK(!redundant_plane(out[i].plane, out[j].plane, cfg.angle_tau2_deg, 0.01 * mesh.diagonal()));
      }
    }

    const Mat3 R = random_rotation_matrix(5);
    FeatureCloud rotated = c;
    for (Vec3& p : rotated.points) {
      p = R * p;
    }
    const auto rout = detect(rotated, mesh.diagonal(), cfg);
    REQUIRE(rout.size() == out.size());
    // Near-equal chamfers may swap rank, so match planes as a set.
    for (const auto& p : out) {
      bool matched = false;
      for (const auto& q : rout) {
        matched = matched || (angle_mod_sign(q.plane.normal, R * p.plane.normal) < 0.5 &&
                              std::abs(*q.chamfer - *p.chamfer) < 1e-9);
      }
      CHECK(matched);
    }

    DetectionConfig strict = cfg;
    strict.chamfer_tau1 = 0.5 * *out.front().chamfer + 0.5 * *out.back().chamfer;
    const auto fewer = detect(c, mesh.diagonal(), strict);
    CHECK(fewer.size() <= out.size());
    for (const auto& p : fewer) {
      CHECK(*p.chamfer < strict.chamfer_tau1);
    }
  }

  SUBCASE("k caps the output") {
    NormalizedMesh mesh;
    const FeatureCloud c = invariant_vertex_cloud(make_shape(ShapeKind::Cube, 0, 3), 16, 0.0, mesh);
    DetectionConfig one = cfg;
    one.max_planes = 1;
    CHECK(detect(c, mesh.diagonal(), one).size() == 1);
  }

  SUBCASE("config validation") {
    DetectionConfig bad = cfg;
    bad.chamfer_tau1 = 0.0;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad = cfg;
    bad.max_planes = 0;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  }
}

TEST_CASE("planes json") {
  std::vector<CandidatePlane> planes(2);
  planes[0].plane = Plane{Vec3(0, -1, 0), 0.25};
  planes[0].chamfer = 0.001;
  planes[0].confidence = 0.9;
  planes[0].points = {3, 9, 0};
  planes[1].plane = Plane{Vec3(1, 1, 0).normalized(), 0.0};
  planes[1].kind = CandidatePlane::Kind::Trio;
  planes[1].points = {1, 2, 3};
  const std::string text = planes_to_json(planes);
  const auto back = planes_from_json(text);
  REQUIRE(back.size() == 2);
  CHECK((back[0].plane.normal - Vec3(0, 1, 0)).norm() == 0.0);
  CHECK(back[0].plane.offset == -0.25);
  CHECK(*back[0].chamfer == 0.001);
  CHECK(*back[0].confidence == 0.9);
  CHECK(back[0].source() == "pair(3,9)");
  CHECK(back[1].source() == "trio(1,2,3)");
  CHECK(!back[1].chamfer.has_value());
  CHECK(planes_to_json({}) == "[]\n");
  CHECK_THROWS_AS(planes_from_json("{\"normal\": 1}"), ParseError);
  CHECK_THROWS_AS(planes_from_json("[{\"offset\": 1}]"), ParseError);
}

} // TEST_SUITE
