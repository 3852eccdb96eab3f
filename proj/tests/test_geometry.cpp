#include <cmath>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"

#include "advreal/core/errors.hpp"
#include "advreal/geometry/control_points.hpp"
#include "advreal/geometry/humanoid.hpp"
#include "advreal/geometry/obj_io.hpp"
#include "advreal/geometry/stress.hpp"
#include "advreal/geometry/tps.hpp"

using namespace advreal;
using namespace advreal::geometry;

namespace {

GarmentMesh two_vertex_mesh(double dist) {
  GarmentMesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(dist, 0, 0)};
  m.edges = {{0, 1, 1.0}};
  return m;
}

}  // namespace

TEST_CASE("stress: isolated vertex and symmetric pair") {
  GarmentMesh m = two_vertex_mesh(1.0);
  m.vertices.emplace_back(5, 5, 5);
  const auto s = compute_vertex_stress(m);
  CHECK(s.sigma.size() == 3);
  CHECK(s.sigma[0] == doctest::Approx(1.0));
  CHECK(s.sigma[1] == doctest::Approx(1.0));
  CHECK(s.sigma[2] == 0.0);
}

TEST_CASE("stress: empty mesh is a domain error") {
  GarmentMesh m;
  CHECK_THROWS_AS(compute_vertex_stress(m), DomainError);
}

TEST_CASE("stress: random 50-vertex mesh matches the double loop") {
  Rng rng(7);
  GarmentMesh m = oracle::random_mesh(rng, 50);
  derive_edges_from_faces(m);
  const auto s = compute_vertex_stress(m);
  const auto ref = oracle::stress_double_loop(m);
  for (std::size_t i = 0; i < ref.size(); ++i) CHECK(s.sigma[i] == doctest::Approx(ref[i]).epsilon(1e-12));
}

TEST_CASE("stress: inverse-degree weights are symmetric and nonnegative") {
  Rng rng(3);
  GarmentMesh m = oracle::random_mesh(rng, 30);
  derive_edges_from_faces(m, AdjacencyWeighting::kInverseDegree);
  for (const auto& e : m.edges) {
    CHECK(e.weight > 0.0);
    CHECK(e.weight <= 1.0);
  }
  CHECK_NOTHROW(m.validate());
}

TEST_CASE("mesh validation rejects degenerate faces and bad indices") {
  GarmentMesh m = two_vertex_mesh(1.0);
  m.vertices.emplace_back(0, 1, 0);
  m.faces = {{0, 1, 1}};
  CHECK_THROWS_AS(m.validate(), DomainError);
  m.faces = {{0, 1, 7}};
  CHECK_THROWS_AS(m.validate(), DomainError);
  m.faces = {{0, 1, 2}};
  m.edges.push_back({0, 2, -1.0});
  CHECK_THROWS_AS(m.validate(), DomainError);
}

TEST_CASE("select_high_stress: threshold and ordering") {
  CHECK(select_high_stress({{0.1, 0.2}}, 0.8).empty());
  CHECK(select_high_stress({{0.9, 0.7, 1.2}}, 0.8) == std::vector<int>{2, 0});
  // ties resolved by ascending index
  CHECK(select_high_stress({{1.0, 2.0, 1.0, 2.0}}, 0.5) == std::vector<int>{1, 3, 0, 2});
  CHECK_THROWS_AS(select_high_stress({{1.0}}, -0.1), DomainError);
}

TEST_CASE("select_high_stress: random fields equal filter-then-sort") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> sigma(100);
    for (auto& s : sigma) s = std::round(uniform(rng, 0, 3) * 10) / 10;  // plenty of ties
    CHECK(select_high_stress({sigma}, 0.8) == oracle::filter_sort(sigma, 0.8));
  }
}

TEST_CASE("control points: single candidate, coincident pair, empty list") {
  StressField s{{2.0, 1.5}};
  std::vector<Vec3> pos{Vec3(0, 0, 0), Vec3(0, 0, 0)};
  ControlSelection sel{0.01, 1.0, 0};
  auto one = select_control_points({0}, s, pos, sel);
  CHECK(one.indices == std::vector<int>{0});

  auto pair = select_control_points({0, 1}, s, pos, sel);
  CHECK(pair.indices == std::vector<int>{0});

  auto none = select_control_points({}, s, pos, sel);
  CHECK(none.indices.empty());
  CHECK(none.empty_candidates);
}

TEST_CASE("control points: gamma 0.01, rho 0.2 on 100 candidates equals the greedy oracle") {
  Rng rng(5);
  std::vector<double> sigma(100);
  std::vector<Vec3> pos(100);
  for (int i = 0; i < 100; ++i) {
    sigma[i] = uniform(rng, 0.5, 3.0);
    pos[i] = Vec3(uniform(rng, 0, 0.05), uniform(rng, 0, 0.05), 0.0);  // crowded so isolation matters
  }
  const auto order = oracle::filter_sort(sigma, 0.8);
  const auto got = select_control_points(order, {sigma}, pos, {0.01, 0.2, 4});
  CHECK(got.indices == oracle::greedy_isolation(order, sigma, pos, 0.01, 0.2, 4));
  CHECK(got.target_offsets.size() == got.indices.size());
}

TEST_CASE("control points: lower bound dominates a small density target") {
  StressField s{{5, 4, 3, 2, 1}};
  std::vector<Vec3> pos;
  for (int i = 0; i < 5; ++i) pos.emplace_back(i, 0, 0);
  const auto got = select_control_points({0, 1, 2, 3, 4}, s, pos, {0.01, 0.2, 3});
  CHECK(got.size() == 3);  // max(3, floor(0.2 * 5) = 1)
}

TEST_CASE("tps: zero offsets give zero weights") {
  ControlPointSet c;
  c.indices = {0, 1, 2};
  c.positions = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  c.target_offsets.assign(3, Vec3::Zero());
  const auto w = solve_tps_weights(c, TpsConfig{});
  CHECK(w.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("tps: single control point reproduces its offset through the ridge") {
  ControlPointSet c;
  c.indices = {0};
  c.positions = {Vec3(1, 2, 3)};
  c.target_offsets = {Vec3(0, 0, 1)};
  const auto w = solve_tps_weights(c, TpsConfig{});
  const auto ref = oracle::tps_weights_linear(c.positions, c.target_offsets);
  CHECK(w(0, 2) == doctest::Approx(ref[0].z()).epsilon(1e-12));
  const Vec3 at = evaluate_rbf(c, w, TpsConfig{}, c.positions[0]);
  CHECK((at - Vec3(0, 0, 1)).norm() < 1e-8);
}

TEST_CASE("tps: five random control points interpolate to 1e-8") {
  Rng rng(9);
  ControlPointSet c;
  for (int k = 0; k < 5; ++k) {
    c.indices.push_back(k);
    c.positions.emplace_back(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1));
    c.target_offsets.emplace_back(uniform(rng, -0.2, 0.2), uniform(rng, -0.2, 0.2), uniform(rng, -0.2, 0.2));
  }
  const TpsConfig cfg;
  const auto w = solve_tps_weights(c, cfg);
  for (int m = 0; m < 5; ++m) {
    CHECK((evaluate_rbf(c, w, cfg, c.positions[m]) - c.target_offsets[m]).norm() < 1e-8);
  }
}

TEST_CASE("tps: gaussian kernel also interpolates") {
  Rng rng(21);
  ControlPointSet c;
  for (int k = 0; k < 6; ++k) {
    c.indices.push_back(k);
    c.positions.emplace_back(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1));
    c.target_offsets.emplace_back(uniform(rng, -0.2, 0.2), 0.0, 0.1);
  }
  TpsConfig cfg;
  cfg.kernel = RbfKernel::kGaussian;
  cfg.kernel_width = 0.8;
  const auto w = solve_tps_weights(c, cfg);
  for (int m = 0; m < 6; ++m) CHECK((evaluate_rbf(c, w, cfg, c.positions[m]) - c.target_offsets[m]).norm() < 1e-8);
}

TEST_CASE("tps: duplicate control positions are singular") {
  ControlPointSet c;
  c.indices = {0, 1};
  c.positions = {Vec3(0, 0, 0), Vec3(0, 0, 0)};
  c.target_offsets = {Vec3(1, 0, 0), Vec3(0, 1, 0)};
  CHECK_THROWS_AS(solve_tps_weights(c, TpsConfig{}), NumericalError);
}

TEST_CASE("deform: identity, deterministic TPS, and the displacement cap") {
  Rng rng(4);
  GarmentMesh g = make_garment_panel({}, rng);
  const auto stress = compute_vertex_stress(g);
  auto cand = select_high_stress(stress, 0.8);
  auto control = select_control_points(cand, stress, g.vertices, {});
  REQUIRE(control.size() > 0);

  TpsConfig cfg;
  cfg.noise_scale = 0.0;
  SUBCASE("zero offsets and no noise leave the mesh untouched") {
    const GarmentMesh out = deform(g, control, stress, cfg);
    for (std::size_t i = 0; i < g.vertices.size(); ++i) CHECK(out.vertices[i] == g.vertices[i]);
    CHECK(out.faces == g.faces);
  }
  SUBCASE("deterministic TPS matches the per-vertex RBF oracle") {
    sample_target_offsets(control, 0.2, rng);
    cfg.max_displacement = 1e6;  // cap inactive
    const GarmentMesh out = deform(g, control, stress, cfg);
    const auto w = oracle::tps_weights_linear(control.positions, control.target_offsets);
    for (std::size_t i = 0; i < g.vertices.size(); ++i) {
      const Vec3 expected = g.vertices[i] + oracle::rbf_sum_linear(control.positions, w, g.vertices[i]);
      CHECK((out.vertices[i] - expected).norm() < 1e-8);
    }
  }
  SUBCASE("a displacement of twice the cap is clamped to the cap") {
    ControlPointSet one;
    one.indices = {0};
    one.positions = {g.vertices[0]};
    const double cap = cfg.max_displacement * (1.0 + cfg.stress_gain * stress.sigma[0]);
    one.target_offsets = {Vec3(2.0 * cap, 0, 0)};
    const GarmentMesh out = deform(g, one, stress, cfg);
    CHECK((out.vertices[0] - g.vertices[0]).norm() == doctest::Approx(cap).epsilon(1e-12));
  }
}

TEST_CASE("deform: same seed gives bit-identical output, cap always respected") {
  Rng rng(12);
  GarmentMesh g = make_garment_panel({}, rng);
  const auto stress = compute_vertex_stress(g);
  auto control = select_control_points(select_high_stress(stress, 0.8), stress, g.vertices, {});
  sample_target_offsets(control, 0.6, rng);
  TpsConfig cfg;
  cfg.noise_scale = 0.3;
  cfg.rng_seed = 99;
  const auto a = deform(g, control, stress, cfg);
  const auto b = deform(g, control, stress, cfg);
  for (std::size_t i = 0; i < g.vertices.size(); ++i) {
    CHECK(a.vertices[i] == b.vertices[i]);
    const double cap = cfg.max_displacement * (1.0 + cfg.stress_gain * stress.sigma[i]);
    CHECK((a.vertices[i] - g.vertices[i]).norm() <= cap + 1e-9);
  }
}

TEST_CASE("noise samples with identity covariance are centred") {
  TpsConfig cfg;
  constexpr int kSeeds = 10000;
  Vec3 mean = Vec3::Zero();
  for (int s = 0; s < kSeeds; ++s) {
    cfg.rng_seed = static_cast<std::uint64_t>(s);
    mean += sample_vertex_noise(1, cfg)[0];
  }
  mean /= kSeeds;
  const double bound = 5.0 / std::sqrt(static_cast<double>(kSeeds));
  CHECK(std::abs(mean.x()) < bound);
  CHECK(std::abs(mean.y()) < bound);
  CHECK(std::abs(mean.z()) < bound);
}

TEST_CASE("tps config validation") {
  TpsConfig cfg;
  cfg.max_displacement = 0.0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = TpsConfig{};
  cfg.noise_covariance(0, 1) = 0.5;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = TpsConfig{};
  cfg.noise_covariance = -Eigen::Matrix3d::Identity();
  CHECK_THROWS_AS(cfg.validate(), DomainError);
}

TEST_CASE("obj: parse quads, texcoords, negative indices; write/read preserves geometry") {
  std::istringstream in(
      "# quad\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvt 0 0\nvt 1 0\nvt 1 1\nvt 0 1\nf 1/1 2/2 3/3 4/4\nf -4/-4 -2/-2 -1/-1\n");
  GarmentMesh m = read_obj(in);
  CHECK(m.vertices.size() == 4);
  CHECK(m.faces.size() == 3);
  CHECK(m.uv.size() == 4);
  CHECK(m.edges.size() == 5);
  std::ostringstream out;
  write_obj(out, m);
  std::istringstream back(out.str());
  GarmentMesh m2 = read_obj(back);
  CHECK(m2.vertices == m.vertices);
  CHECK(m2.faces == m.faces);
  CHECK(m2.uv == m.uv);

  std::istringstream bad("v 0 0 0\nf 1 2 3\n");
  CHECK_THROWS_AS(read_obj(bad), DomainError);
}

TEST_CASE("procedural meshes are valid") {
  const BodyMesh body = make_body();
  CHECK(body.faces.size() == body.face_material.size());
  double top = 0.0;
  for (const auto& v : body.vertices) top = std::max(top, v.y());
  CHECK(top == doctest::Approx(kPersonHeightMeters * kModelUnitsPerMeter).epsilon(0.01));
  Rng rng(1);
  const GarmentMesh g = make_garment_panel({}, rng);
  CHECK_NOTHROW(g.validate());
  const auto s = compute_vertex_stress(g);
  // Default threshold 0.8 selects a strict, nonempty subset.
  const auto sel = select_high_stress(s, 0.8);
  CHECK(!sel.empty());
}
