#include <cmath>

#include "shield/filter.hpp"
#include "shield/simharness.hpp"
#include "shield_verify/oracles.hpp"
#include "support.hpp"

using namespace shield;
using namespace shield::test;

namespace {

Matrix planar_selector() { return Matrix::Identity(2, 2); }

Matrix di_selector() {
  Matrix c = Matrix::Zero(2, 4);
  c(0, 0) = 1.0;
  c(1, 2) = 1.0;
  return c;
}

Vector di_state(const Vec2& p, const Vec2& v = Vec2::Zero()) { return vec({p(0), v(0), p(1), v(1)}); }

Obstacle unit_circle() { return Obstacle(Circle{Vec2(0, 0), 1.0}); }
Obstacle unit_square() {
  return Obstacle(Polytope({Vec2(-0.5, -0.5), Vec2(0.5, -0.5), Vec2(0.5, 0.5), Vec2(-0.5, 0.5)}));
}

void check_separates(const Halfspace& h, const Obstacle& obs, verify::Rng& rng, int samples) {
  for (const Vec2& z : verify::sample_obstacle_points(rng, obs, samples)) {
    const Vector zv = vec({z(0), z(1)});
    CHECK(h.a.dot(zv) < h.b);
  }
}

// Constant-gain nominal controller driving the double integrator to a goal.
Vector di_nominal(const Vector& x, const Vec2& goal, const AxisServo& servo) {
  return vec({servo.command(x(0), x(1), goal(0)), servo.command(x(2), x(3), goal(1))});
}

}  // namespace

TEST_CASE("exterior halfspace examples") {
  const Obstacle c = unit_circle();
  const Vector x = vec({2, 0});
  const ProjectionResult proj = project(c, Vec2(2, 0));
  const Halfspace h = exterior_halfspace(x, proj, planar_selector(), 0.1);
  CHECK((h.a - vec({1, 0})).norm() < 1e-12);
  CHECK(h.b == doctest::Approx(1.1));
  const Halfspace tangent = exterior_halfspace(x, proj, planar_selector(), 0.0);
  CHECK(tangent.b == doctest::Approx(1.0));
  CHECK(tangent.value(vec({1, 0})) == doctest::Approx(0.0));

  const Obstacle goal_circle(Circle{Vec2(18, 16), 1.5});
  const Vector xs = di_state(Vec2(18, 20), Vec2(1, -1));
  const Halfspace hp = exterior_halfspace(xs, project(goal_circle, Vec2(18, 20)), di_selector(), 0.4);
  CHECK((hp.a - vec({0, 0, 1, 0})).norm() < 1e-12);
  CHECK(hp.b == doctest::Approx(17.9));

  ProjectionResult inside;
  inside.point = Vec2(2, 0);
  CHECK(error_code_of([&] { exterior_halfspace(x, inside, planar_selector(), 0.1); }) ==
        ErrorCode::DegenerateProjection);
  CHECK(error_code_of([&] { exterior_halfspace(x, proj, planar_selector(), -0.1); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("boundary halfspace examples") {
  const Halfspace h = boundary_halfspace(vec({1, 0}), unit_circle(), planar_selector(), 0.3);
  CHECK((h.a - vec({1, 0})).norm() < 1e-12);
  CHECK(h.b == doctest::Approx(1.3));

  const Obstacle sq = unit_square();
  const Halfspace face = boundary_halfspace(vec({0.5, 0}), sq, planar_selector(), 0.0);
  CHECK((face.a - vec({1, 0})).norm() < 1e-12);
  CHECK(face.b == doctest::Approx(0.5));
  const Halfspace corner = boundary_halfspace(vec({0.5, 0.5}), sq, planar_selector(), 0.0);
  CHECK((corner.a - vec({1, 1}) / std::sqrt(2.0)).norm() < 1e-12);

  verify::Rng rng(7);
  check_separates(boundary_halfspace(vec({0.5, 0.5}), sq, planar_selector(), 0.01), sq, rng, 500);
}

TEST_CASE("interior halfspace examples") {
  const Obstacle big(Circle{Vec2(0, 0), 2.0});
  const Halfspace h = interior_halfspace(vec({1, 0}), big, planar_selector());
  CHECK((h.a - vec({1, 0})).norm() < 1e-8);
  CHECK(h.value(vec({1, 0})) == doctest::Approx(-1.0));

  const Obstacle sq = unit_square();
  const Halfspace face = interior_halfspace(vec({0.25, 0}), sq, planar_selector());
  CHECK((face.a - vec({1, 0})).norm() < 1e-8);
  CHECK(face.value(vec({0.25, 0})) == doctest::Approx(-0.25));

  // At the center the gradient vanishes; the query is nudged along +x once.
  const Halfspace center = interior_halfspace(vec({0, 0}), sq, planar_selector());
  CHECK((center.a - vec({1, 0})).norm() < 1e-8);
  CHECK(center.value(vec({0, 0})) == doctest::Approx(-0.5));

  CHECK(error_code_of([&] { interior_halfspace(vec({3, 0}), sq, planar_selector()); }) == ErrorCode::NotInside);
}

TEST_CASE("interior halfspace: feasible steps reduce depth") {
  verify::Rng rng(11);
  for (ObstacleKind kind : {ObstacleKind::Circle, ObstacleKind::Ellipse, ObstacleKind::Polytope,
                            ObstacleKind::Spectrahedron}) {
    for (int trial = 0; trial < 10; ++trial) {
      const Obstacle obs = verify::random_obstacle(rng, kind);
      const auto pts = verify::sample_obstacle_points(rng, obs, 10);
      const Vec2 p = pts.front();
      const double r = depth(obs, p);
      if (r < 1e-3) continue;
      const Halfspace h = interior_halfspace(vec({p(0), p(1)}), obs, planar_selector());
      const double gamma = uniform(rng, 0.05, 1.0);
      const double need = (1.0 - gamma) * h.value(vec({p(0), p(1)}));
      for (int s = 0; s < 50; ++s) {
        const Vec2 z = p + Vec2(uniform(rng, -r, r), uniform(rng, -r, r)) * 2.0;
        if (h.value(vec({z(0), z(1)})) < need) continue;
        CHECK(depth(obs, z) < r - 1e-9);
      }
    }
  }
}

TEST_CASE("emitted halfspaces separate the obstacle") {
  verify::Rng rng(12);
  for (ObstacleKind kind : {ObstacleKind::Circle, ObstacleKind::Ellipse, ObstacleKind::Polytope,
                            ObstacleKind::Spectrahedron}) {
    for (int trial = 0; trial < 5; ++trial) {
      const Obstacle obs = verify::random_obstacle(rng, kind);
      const Vec2 outside = verify::point_at_distance(rng, obs, uniform(rng, 0.01, 2.0));
      const Vector x = vec({outside(0), outside(1)});
      const Halfspace ext = exterior_halfspace(x, project(obs, outside), planar_selector(), 0.0);
      check_separates(ext, obs, rng, 500);
      const Vec2 edge = project(obs, outside).point;
      const Halfspace bnd = boundary_halfspace(vec({edge(0), edge(1)}), obs, planar_selector(), 1e-3);
      check_separates(bnd, obs, rng, 500);
    }
  }
}

TEST_CASE("assembled subset function") {
  const HalfspaceStack one = assemble_subset_function({Halfspace{vec({1, 0}), 1.0}});
  CHECK(one.value(vec({2, 0})) == 1.0);
  CHECK(one.contains(vec({2, 0})));

  const HalfspaceStack two = assemble_subset_function({Halfspace{vec({1, 0}), 1.0}, Halfspace{vec({0, 1}), 1.0}});
  CHECK(two.value(vec({2, 0})) == -1.0);
  CHECK_FALSE(two.contains(vec({2, 0})));

  const Scenario sc = load_scenario(SHIELD_SCENARIO_DIR "/double_integrator.json");
  REQUIRE(sc.obstacles.size() == 4);
  const Vector x0 = sc.initial_state;
  const auto projections = joint_projection(x0, sc.obstacles, di_selector());
  std::vector<Halfspace> parts;
  for (std::size_t i = 0; i < projections.size(); ++i)
    parts.push_back(exterior_halfspace(x0, projections[i], di_selector(), 0.4));
  for (const Halfspace& h : parts) CHECK(h.value(x0) >= 0.0);
  CHECK(assemble_subset_function(parts).contains(x0));

  CHECK(error_code_of([] {
          assemble_subset_function({Halfspace{vec({1, 0}), 0.0}, Halfspace{vec({1, 0, 0}), 0.0}});
        }) == ErrorCode::DimMismatch);
}

TEST_CASE("step rows encode the exponential condition") {
  const AffineDynamics dyn = double_integrator(0.01);
  const Halfspace h{vec({0, 0, 1, 0}), 1.4};
  const Vector x = di_state(Vec2(0, 3), Vec2(0, -40));
  const LinearConstraintSet rows = HalfspaceStack({h}).step_rows(x, dyn, 0.2);
  REQUIRE(rows.inequality_count() == 1);
  verify::Rng rng(13);
  for (int i = 0; i < 200; ++i) {
    const Vector u = vec({uniform(rng, -3000, 3000), uniform(rng, -3000, 3000)});
    const bool holds = h.value(dyn.step(x, u)) >= 0.8 * h.value(x) - 1e-9;
    CHECK(holds == rows.satisfied(u, 1e-9));
  }
}

TEST_CASE("joint projection") {
  const Scenario sc = load_scenario(SHIELD_SCENARIO_DIR "/double_integrator.json");
  CHECK(joint_projection(vec({1, 0, 2, 0}), std::span<const Obstacle>(), di_selector()).empty());

  verify::Rng rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector x = di_state(Vec2(uniform(rng, -2, 22), uniform(rng, -2, 22)));
    const auto seq = joint_projection(x, sc.obstacles, di_selector());
    const auto par = joint_projection(x, sc.obstacles, di_selector(), true);
    REQUIRE(seq.size() == sc.obstacles.size());
    for (std::size_t i = 0; i < seq.size(); ++i) {
      const ProjectionResult single = project(sc.obstacles[i], di_selector() * x);
      CHECK((seq[i].point - single.point).norm() <= 1e-9);
      CHECK(seq[i].point == par[i].point);
      CHECK(seq[i].distance == par[i].distance);
    }
  }
}

TEST_CASE("pdte_step examples") {
  const AffineDynamics dyn = double_integrator(0.01);
  const std::vector<Obstacle> obs{unit_circle()};
  FilterConfig cfg;
  cfg.gamma = 0.2;
  cfg.epsilon = 0.4;
  const LinearConstraintSet none(2);

  SUBCASE("far away, gentle input passes through") {
    const FilterOutcome out = pdte_step(di_state(Vec2(30, 30)), vec({0.5, -0.5}), obs, dyn, di_selector(), cfg, none);
    CHECK(out.mode == FilterMode::NominalPassthrough);
    CHECK(out.u == vec({0.5, -0.5}));
    REQUIRE(out.obstacles.size() == 1);
    CHECK(out.obstacles[0].location == Location::Exterior);
  }
  SUBCASE("one active row: closed-form projection") {
    // h = p_v - 1.4 at (0, 3); the step needs 0.01 v_v + 5e-5 u_v >= -0.32.
    const FilterOutcome out =
        pdte_step(di_state(Vec2(0, 3), Vec2(0, -40)), vec({3, -2}), obs, dyn, di_selector(), cfg, none);
    CHECK(out.mode == FilterMode::Filtered);
    CHECK(out.u(0) == doctest::Approx(3.0));
    CHECK(out.u(1) == doctest::Approx(1600.0).epsilon(1e-9));
  }
  SUBCASE("contradictory extra rows fall back to slack") {
    LinearConstraintSet extra(2);
    extra.add_leq(vec({1, 0}), -1.0);
    extra.add_geq(vec({1, 0}), 1.0);
    const FilterOutcome out = pdte_step(di_state(Vec2(30, 30)), vec({0, 0}), obs, dyn, di_selector(), cfg, extra);
    CHECK(out.mode == FilterMode::SlackRelaxed);
    REQUIRE(out.slack);
    CHECK(out.slack->maxCoeff() > 0.0);
    CHECK(out.slack->minCoeff() >= 0.0);
  }
  SUBCASE("interior start uses the depth halfspace") {
    const FilterOutcome out = pdte_step(di_state(Vec2(0.5, 0)), vec({0, 0}), obs, dyn, di_selector(), cfg, none);
    REQUIRE(out.obstacles.size() == 1);
    CHECK(out.obstacles[0].location == Location::Interior);
    CHECK(out.mode == FilterMode::Filtered);
  }
  SUBCASE("bad configuration is rejected") {
    FilterConfig bad = cfg;
    bad.gamma = 0.0;
    CHECK(error_code_of([&] { bad.validate(); }) == ErrorCode::ValidationError);
    bad = cfg;
    bad.c_perp = 1.5;
    CHECK(error_code_of([&] { bad.validate(); }) == ErrorCode::ValidationError);
    bad = cfg;
    bad.epsilon_overrides = {std::optional<double>(-1.0)};
    CHECK(error_code_of([&] { bad.validate(); }) == ErrorCode::ValidationError);
  }
}

TEST_CASE("pdte closed loop: forward invariance and exponential rows") {
  const Scenario sc = load_scenario(SHIELD_SCENARIO_DIR "/double_integrator.json");
  const AffineDynamics dyn = double_integrator(sc.sample_time);
  const AxisServo servo(sc.sample_time, 1.0, sc.weights);
  const LinearConstraintSet none(2);
  verify::Rng rng(15);
  int clean_runs = 0;
  for (int run = 0; run < 8; ++run) {
    FilterConfig cfg = sc.filter_config;
    cfg.gamma = uniform(rng, 0.05, 0.5);
    Vector x = di_state(Vec2(uniform(rng, -1, 1), uniform(rng, -1, 1)));
    const Vec2 goal(uniform(rng, 16, 20), uniform(rng, 18, 21));
    bool clean = true;
    for (int k = 0; k < 1000; ++k) {
      const FilterOutcome out = pdte_step(x, di_nominal(x, goal, servo), sc.obstacles, dyn, di_selector(), cfg, none);
      const Vector next = dyn.step(x, out.u);
      if (out.mode == FilterMode::Filtered) {
        for (const ObstacleRecord& rec : out.obstacles)
          CHECK(rec.halfspace->value(next) >= (1.0 - cfg.gamma) * rec.halfspace->value(x) - 1e-8);
      }
      if (out.mode != FilterMode::NominalPassthrough && out.mode != FilterMode::Filtered) clean = false;
      x = next;
      if (clean)
        for (const Obstacle& o : sc.obstacles) CHECK_FALSE(contains(o, di_selector() * x));
    }
    clean_runs += clean;
  }
  CHECK(clean_runs > 0);
}

TEST_CASE("halfspace restriction is never less conservative at gamma = 1") {
  const AffineDynamics dyn = double_integrator(0.1);
  const LinearConstraintSet none(2);
  verify::Rng rng(16);
  for (int trial = 0; trial < 200; ++trial) {
    const Circle c{Vec2(uniform(rng, -2, 2), uniform(rng, -2, 2)), uniform(rng, 0.3, 2)};
    const double eps = uniform(rng, 0, 0.5);
    const Vec2 dir = Vec2(uniform(rng, -1, 1), uniform(rng, -1, 1)).normalized();
    const Vec2 p = c.center + dir * (c.radius + eps + uniform(rng, 0.05, 2));
    const Vector x = di_state(p, Vec2(uniform(rng, -3, 3), uniform(rng, -3, 3)));
    const Vector u_nom = vec({uniform(rng, -50, 50), uniform(rng, -50, 50)});
    FilterConfig cfg;
    cfg.gamma = 1.0;
    cfg.epsilon = eps;
    const std::vector<Obstacle> obs{Obstacle(c)};
    const FilterOutcome pdte = pdte_step(x, u_nom, obs, dyn, di_selector(), cfg, none);
    const FilterOutcome base = nonconvex_circle_step(x, u_nom, c, dyn, di_selector(), 1.0, eps, none);
    REQUIRE(pdte.mode != FilterMode::FallbackNominal);
    REQUIRE(base.mode != FilterMode::FallbackNominal);
    CHECK((pdte.u - u_nom).squaredNorm() >= (base.u - u_nom).squaredNorm() - 1e-8);
  }
}

TEST_CASE("indefinite filter examples") {
  // Single integrator in the plane with H(x) = diag(x1, x2).
  AffineDynamics dyn;
  dyn.A = Matrix::Identity(2, 2);
  dyn.B = 0.1 * Matrix::Identity(2, 2);
  dyn.sample_time = 0.1;
  const MatrixMap h = [](const Vector& z) { return SymmetricMatrix::diagonal(z); };
  const LinearConstraintSet none(2);

  const FilterOutcome neutral = indefinite_step(vec({-1, 5}), vec({0, 0}), h, 2, dyn, 0.5, none);
  CHECK(neutral.mode == FilterMode::NominalPassthrough);
  CHECK(neutral.u == vec({0, 0}));

  // lambda_2 = 2, so each diagonal entry may drop by at most gamma * 2 = 1.
  const FilterOutcome pushed = indefinite_step(vec({-1, 2}), vec({-20, 0}), h, 2, dyn, 0.5, none);
  CHECK(pushed.mode == FilterMode::Filtered);
  CHECK(pushed.u(0) == doctest::Approx(-10.0).epsilon(1e-6));
  CHECK(std::abs(pushed.u(1)) < 1e-6);

  const MatrixMap curved = [](const Vector& z) { return SymmetricMatrix::diagonal(vec({z(0) * z(0), z(1)})); };
  CHECK(error_code_of([&] { indefinite_step(vec({1, 1}), vec({0, 0}), curved, 1, dyn, 0.5, none); }) ==
        ErrorCode::NonAffineH);
}

TEST_CASE("indefinite filter keeps the eigenvalue bound along trajectories") {
  AffineDynamics dyn;
  dyn.A = Matrix::Identity(2, 2);
  dyn.B = 0.05 * Matrix::Identity(2, 2);
  dyn.sample_time = 0.05;
  const LinearConstraintSet none(2);
  verify::Rng rng(17);
  for (int trial = 0; trial < 6; ++trial) {
    const SymmetricMatrix a0 = SymmetricMatrix(random_symmetric(rng, 3)) + 3.0 * SymmetricMatrix::identity(3);
    const SymmetricMatrix a1(random_symmetric(rng, 3)), a2(random_symmetric(rng, 3));
    const MatrixMap h = [&](const Vector& z) { return a0 + z(0) * a1 + z(1) * a2; };
    const int j = 1 + trial % 3;
    const double gamma = uniform(rng, 0.1, 0.6);
    Vector x = vec({0, 0});
    const Vector push = vec({uniform(rng, -40, 40), uniform(rng, -40, 40)});
    const double l0 = eigenvalue(h(x), j);
    double bound = l0;
    for (int k = 1; k <= 60; ++k) {
      const FilterOutcome out = indefinite_step(x, push, h, j, dyn, gamma, none);
      REQUIRE(out.mode != FilterMode::FallbackNominal);
      x = dyn.step(x, out.u);
      bound *= 1.0 - gamma;
      CHECK(eigenvalue(h(x), j) >= bound - 1e-6);
    }
  }
}

TEST_CASE("nonconvex circle baseline") {
  const AffineDynamics dyn = double_integrator(0.1);
  const Circle c{Vec2(0, 0), 1.0};
  const LinearConstraintSet none(2);

  const FilterOutcome free = nonconvex_circle_step(di_state(Vec2(5, 5)), vec({1, 1}), c, dyn, di_selector(), 0.2, 0.1, none);
  CHECK(free.mode == FilterMode::NominalPassthrough);

  verify::Rng rng(18);
  int active = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const Vec2 p(uniform(rng, -3, 3), uniform(rng, 1.3, 3));
    const Vector x = di_state(p, Vec2(0, uniform(rng, -8, -2)));
    const Vector u_nom = vec({uniform(rng, -20, 20), uniform(rng, -40, 0)});
    const double gamma = 0.3, eps = 0.1;
    const FilterOutcome out = nonconvex_circle_step(x, u_nom, c, dyn, di_selector(), gamma, eps, none);
    if (out.mode != FilterMode::Filtered) continue;
    ++active;
    // Same quadratic row written out by hand in u.
    const Matrix cp = di_selector();
    const Vec2 w = cp * (dyn.A * x) - c.center;
    const Eigen::Matrix2d d = cp * dyn.B;
    const double rho = c.radius + eps;
    const double bx = (cp * x - c.center).squaredNorm() - rho * rho;
    const double ref = verify::oracle_gtrs_objective(Vec2(u_nom(0), u_nom(1)), -(d.transpose() * d),
                                                     -(d.transpose() * w), -w.squaredNorm() + rho * rho + (1 - gamma) * bx,
                                                     200.0);
    CHECK((out.u - u_nom).squaredNorm() == doctest::Approx(ref).epsilon(1e-5));
  }
  CHECK(active > 5);

  // Input box that pins u to zero, conflicting with the quadratic row.
  LinearConstraintSet cap(2);
  for (const Vector& e : {vec({1, 0}), vec({0, 1})}) {
    cap.add_leq(e, 0.0);
    cap.add_geq(e, 0.0);
  }
  const FilterOutcome stuck =
      nonconvex_circle_step(di_state(Vec2(0, 1.3), Vec2(0, -10)), vec({0, 0}), c, dyn, di_selector(), 0.2, 0.1, cap);
  CHECK(stuck.mode == FilterMode::SlackRelaxed);
}

TEST_CASE("zeroing certificate") {
  const std::vector<double> zeros{0, 0, 0, 0};
  CHECK(zeroing_certificate(zeros, 0.3));
  const std::vector<double> good{-1, -0.4, -0.2};
  CHECK(zeroing_certificate(good, 0.5));
  // Bounds -1, -0.8, -0.64: the last entry is below.
  const std::vector<double> bad{-1, -0.5, -0.7};
  CHECK_FALSE(zeroing_certificate(bad, 0.2));
  const std::vector<double> above{-1, -0.5, -0.3};
  CHECK(zeroing_certificate(above, 0.2));
  CHECK(zeroing_certificate(std::vector<double>{}, 0.2));
  CHECK(error_code_of([&] { zeroing_certificate(good, 0.0); }) == ErrorCode::InvalidArgument);
}
