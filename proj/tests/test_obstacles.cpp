#include <cmath>

#include "shield/obstacles.hpp"
#include "shield_verify/oracles.hpp"
#include "support.hpp"

using namespace shield;
using namespace shield::test;

namespace {

const Matrix kC = position_selector();

Vector state(double ph, double pv, double vh = 0.0, double vv = 0.0) { return vec({ph, vh, pv, vv}); }

Obstacle unit_square() { return Obstacle(Polytope({{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}})); }

Spectrahedron shipped_spectrahedron(const Vec2& center = Vec2(7.5, 7.5)) {
  Matrix a1(3, 3), a2(3, 3);
  a1 << 0, 0.8, 0, 0.8, 0, 0.8, 0, 0.8, 0;
  a2 << 0, 0, 1.6, 0, 0, 2.4, 1.6, 2.4, 0;
  return Spectrahedron{center, 0.0, SymmetricMatrix::identity(3) * 2.0, SymmetricMatrix(a1), SymmetricMatrix(a2)};
}

// Smallest distance from p to a dense sample of the boundary.
double boundary_distance(const Obstacle& obs, const Vec2& p) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 20000; ++i) best = std::min(best, (verify::oracle_boundary_point(obs, i / 20000.0) - p).norm());
  return best;
}

}  // namespace

TEST_CASE("contains examples") {
  const Obstacle unit(Circle{{0, 0}, 1});
  CHECK(contains(unit, Vec2(0.5, 0)));
  CHECK_FALSE(contains(unit, Vec2(2, 0)));
  CHECK(contains(Obstacle(shipped_spectrahedron()), Vec2(7.5, 7.5)));
}

TEST_CASE("shape validation") {
  CHECK(error_code_of([] { Obstacle(Circle{{0, 0}, -1}); }) == ErrorCode::InvalidArgument);
  CHECK(error_code_of([] { Obstacle(Ellipse{{0, 0}, {1, 1}, 2, 1}); }) == ErrorCode::InvalidArgument);
  CHECK(error_code_of([] { Obstacle(Ellipse{{0, 0}, {1, 0}, 1, 2}); }) == ErrorCode::InvalidArgument);
  CHECK(error_code_of([] { Obstacle(Polytope({{0, 0}, {1, 0}})); }) == ErrorCode::InvalidArgument);
  CHECK(error_code_of([] { Obstacle(Polytope({{0, 0}, {2, 0}, {1, 0.1}, {2, 2}, {0, 2}})); }) ==
        ErrorCode::InvalidArgument);
  Spectrahedron s = shipped_spectrahedron();
  s.a0 = -s.a0;
  CHECK(error_code_of([&] { Obstacle{s}; }) == ErrorCode::InvalidArgument);
  // A pencil without any negative direction never leaves the PSD cone.
  Spectrahedron open = shipped_spectrahedron();
  open.a1 = SymmetricMatrix::identity(3);
  open.a2 = SymmetricMatrix::zero(3);
  CHECK(error_code_of([&] { Obstacle{open}; }) == ErrorCode::InvalidArgument);
}

TEST_CASE("polytope rows are normalized and contain the centroid") {
  const Polytope pentagon = Polytope::regular({14, 11}, 2.0, 5, M_PI / 2);
  CHECK(pentagon.face_count() == 5);
  CHECK((pentagon.vertices().front() - Vec2(14, 13)).norm() < 1e-12);
  for (int i = 0; i < pentagon.face_count(); ++i) {
    CHECK(pentagon.normals()[static_cast<std::size_t>(i)].norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(-pentagon.row_a(i).dot(pentagon.centroid()) - pentagon.row_b(i) <= 0.0);
  }
  // Clockwise input is reordered.
  const Polytope cw({{0, 0}, {0, 1}, {1, 1}, {1, 0}});
  CHECK(cw.normals().front().dot(Vec2(0.5, 0.5) - cw.vertices().front()) < 0.0);
}

TEST_CASE("projection examples") {
  const ProjectionResult c = project(Obstacle(Circle{{18, 16}, 1.5}), Vec2(18, 20));
  CHECK((c.point - Vec2(18, 17.5)).norm() < 1e-12);
  CHECK(c.distance == doctest::Approx(2.5));

  const ProjectionResult e = project(Obstacle(Ellipse{{0, 0}, {1, 0}, 2, 1}), Vec2(4, 0));
  CHECK((e.point - Vec2(2, 0)).norm() < 1e-9);

  const ProjectionResult p = project(Obstacle(Polytope::regular({14, 11}, 2.0, 5, M_PI / 2)), Vec2(14, 16));
  CHECK((p.point - Vec2(14, 13)).norm() < 1e-9);
  CHECK(p.distance == doctest::Approx(3.0));

  const ProjectionResult inside = project(Obstacle(Circle{{0, 0}, 1}), Vec2(0.2, 0.1));
  CHECK(inside.point == Vec2(0.2, 0.1));
  CHECK(inside.distance == 0.0);
}

TEST_CASE("projection invariants on random shapes") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 400; ++trial) {
    const Obstacle obs = verify::random_obstacle(rng, static_cast<ObstacleKind>(trial % 4));
    const bool lmi = obs.kind() == ObstacleKind::Spectrahedron;
    const Vec2 p(uniform(rng, -9, 9), uniform(rng, -9, 9)), q(uniform(rng, -9, 9), uniform(rng, -9, 9));
    const ProjectionResult pp = project(obs, p), pq = project(obs, q);
    CHECK(pp.distance == doctest::Approx((p - pp.point).norm()).epsilon(1e-12));
    CHECK(contains(obs, pp.point, 1e-7));
    CHECK((project(obs, pp.point).point - pp.point).norm() <= (lmi ? 1e-7 : 1e-9));
    CHECK((pp.point - pq.point).norm() <= (p - q).norm() + (lmi ? 1e-6 : 1e-9));
    CHECK((pp.point - verify::oracle_projection(obs, p)).norm() <= (lmi ? 1e-3 : 1e-6));
  }
}

TEST_CASE("depth examples") {
  CHECK(depth(unit_square(), Vec2(0, 0)) == doctest::Approx(0.5));
  CHECK(depth(unit_square(), Vec2(0.25, 0)) == doctest::Approx(0.25));
  CHECK(depth(Obstacle(Circle{{0, 0}, 2}), Vec2(1, 0)) == doctest::Approx(1.0));
  CHECK(depth(Obstacle(Circle{{0, 0}, 2}), Vec2(3, 0)) == 0.0);
}

TEST_CASE("depth equals the distance to the boundary") {
  std::mt19937_64 rng(32);
  int checked = 0;
  while (checked < 120) {
    const Obstacle obs = verify::random_obstacle(rng, static_cast<ObstacleKind>(checked % 4));
    const auto [lo, hi] = verify::oracle_bounds(obs);
    const Vec2 p(uniform(rng, lo.x(), hi.x()), uniform(rng, lo.y(), hi.y()));
    if (!contains(obs, p, 0.0)) continue;
    ++checked;
    const double d = depth(obs, p), ref = boundary_distance(obs, p);
    CHECK(d > 0.0);
    if (obs.kind() == ObstacleKind::Spectrahedron) CHECK(std::abs(d - ref) <= 0.02 * ref + 1e-3);
    else CHECK(std::abs(d - ref) <= 1e-6 + 1e-3 * ref);

    const Vec2 edge = verify::oracle_boundary_point(obs, uniform(rng, 0, 1));
    CHECK(depth(obs, edge) <= 1e-5);
  }
}

TEST_CASE("signed distance is negative inside") {
  const Obstacle c(Circle{{0, 0}, 1});
  CHECK(signed_distance(c, Vec2(3, 0)) == doctest::Approx(2.0));
  CHECK(signed_distance(c, Vec2(0.25, 0)) == doctest::Approx(-0.75));
}

TEST_CASE("boundary normals") {
  CHECK((boundary_normal(Obstacle(Circle{{0, 0}, 1}), Vec2(1, 0)).normal - Vec2(1, 0)).norm() < 1e-12);
  CHECK((boundary_normal(unit_square(), Vec2(0.5, 0)).normal - Vec2(1, 0)).norm() < 1e-12);
  CHECK((boundary_normal(unit_square(), Vec2(0.5, 0.5)).normal - Vec2(1, 1).normalized()).norm() < 1e-12);
}

TEST_CASE("outline and support points") {
  std::mt19937_64 rng(33);
  for (int k = 0; k < 4; ++k) {
    const Obstacle obs = verify::random_obstacle(rng, static_cast<ObstacleKind>(k));
    const std::vector<Vec2> ring = outline(obs, 256);
    CHECK(ring.size() >= 3);
    for (const Vec2& p : ring) CHECK(std::abs(signed_distance(obs, p)) < 1e-5);
    for (int i = 0; i < 16; ++i) {
      const Vec2 n(std::cos(i * M_PI / 8), std::sin(i * M_PI / 8));
      const Vec2 s = support_point(obs, n);
      for (const Vec2& p : ring) CHECK(n.dot(p) <= n.dot(s) + 1e-6);
    }
  }
}

TEST_CASE("cbf_circle") {
  const Circle c{{2, -0.75}, 1.0};
  const QuadraticForm h = cbf_circle(c, kC, 0.2);
  CHECK(h.value(state(2, -0.75)) == doctest::Approx(1.44));
  CHECK(h.value(state(2 + 1.2, -0.75)) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(h.value(state(2, 1.25)) == doctest::Approx(-2.56));

  std::mt19937_64 rng(34);
  for (int i = 0; i < 10; ++i) {
    const Vector x = random_matrix(rng, 4, 1) * 3.0;
    const Vec2 p = kC * x;
    CHECK(h.value(x) == doctest::Approx(1.44 - (p - c.center).squaredNorm()).epsilon(1e-12));
    // Positive exactly inside the inflated disk.
    CHECK((h.value(x) > 0.0) == ((p - c.center).norm() < 1.2));
  }
}

TEST_CASE("cbf_ellipse") {
  const Ellipse e{{2.5, 5}, Vec2(1, -1).normalized(), std::sqrt(10.0), std::sqrt(2.0)};
  const QuadraticForm h = cbf_ellipse(e, kC, 0.4);
  CHECK(h.value(state(2.5, 5)) == doctest::Approx(1.0));
  const Vec2 tip = e.center + (e.major + 0.4) * e.axis;
  CHECK(std::abs(h.value(state(tip.x(), tip.y()))) < 1e-12);
  const Vec2 side = e.center + (e.minor + 0.4) * Vec2(-e.axis.y(), e.axis.x());
  CHECK(std::abs(h.value(state(side.x(), side.y()))) < 1e-12);
}

TEST_CASE("polytope combinatorial rows") {
  const Polytope square({{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}});
  const AffineDynamics dyn = double_integrator(0.01);
  const double eps = 0.1, gamma = 0.2;

  // Holding position: u = 0 from rest keeps every row satisfied.
  const Vector far = state(3, 0.2);
  const LinearConstraintSet rows = polytope_combinatorial_rows(square, far, dyn, kC, eps, gamma);
  CHECK(rows.inequality_count() == 4);
  CHECK(rows.satisfied(vec({0, 0}), 1e-12));

  // At rest with u = 0 the next state equals x, so each residual is
  // gamma (h_max + |h_i - h_max|).
  const Vector h = polytope_face_values(square, far, kC, eps);
  const double hmax = h.maxCoeff();
  const Vector slack = rows.h() - rows.G() * vec({0, 0});
  for (int i = 0; i < 4; ++i) CHECK(slack(i) == doctest::Approx(gamma * (hmax + std::abs(h(i) - hmax))));

  // Hand expansion for face 1 (normal +x, offset 0.5) at x = (1, 0.3, 0.2, -0.1):
  // h(x+) = p_h + T v_h + T^2/2 u_h - 0.5 - eps >= h(x) - gamma (hmax + |h - hmax|).
  const Vector x = state(1, 0.2, 0.3, -0.1);
  const LinearConstraintSet r = polytope_combinatorial_rows(square, x, dyn, kC, eps, gamma);
  const Vector hx = polytope_face_values(square, x, kC, eps);
  int face = -1;
  for (int i = 0; i < 4; ++i)
    if ((square.normals()[static_cast<std::size_t>(i)] - Vec2(1, 0)).norm() < 1e-12) face = i;
  REQUIRE(face >= 0);
  const double rhs_hand = hx(face) - gamma * (hx.maxCoeff() + std::abs(hx(face) - hx.maxCoeff()));
  // As G u <= h: -(T^2/2) u_h <= (1 + T v_h - 0.5 - eps) - rhs_hand.
  CHECK(r.G()(face, 0) == doctest::Approx(-0.5 * 0.01 * 0.01));
  CHECK(r.G()(face, 1) == doctest::Approx(0.0));
  CHECK(r.h()(face) == doctest::Approx(1.0 + 0.01 * 0.3 - 0.5 - eps - rhs_hand));
}

TEST_CASE("spectrahedron safe matrix and indefinite pair") {
  const Spectrahedron s = shipped_spectrahedron();
  // With no shrink, at the center H = -A0.
  const SymmetricMatrix h0 = spectrahedron_safe_matrix(s, state(7.5, 7.5), kC, 0.0);
  CHECK((h0.matrix() + s.a0.matrix()).norm() < 1e-12);

  const AffineDynamics dyn = double_integrator(0.01);
  const double gamma = 0.2, cp = 0.05, ratio = 0.25;
  const Vector x = state(10.5, 7.5);
  const LmiPair pair = spectrahedron_indefinite_pair(s, x, dyn, kC, ratio, gamma, cp);
  const SymmetricMatrix hx = spectrahedron_safe_matrix(s, x, kC, ratio);
  CHECK(pair.lambda_max == doctest::Approx(max_eigenvalue(hx)));

  // From rest, u = 0 leaves the position unchanged, so
  // F = c_perp (lambda_max I - H(x)) + gamma lambda_max I, PSD outside the set.
  REQUIRE(pair.lambda_max > 0.0);
  const SymmetricMatrix hold = affine_pencil(pair.f0, pair.f, vec({0, 0}));
  const Matrix eye = Matrix::Identity(3, 3);
  const Matrix expected = cp * (pair.lambda_max * eye - hx.matrix()) + gamma * pair.lambda_max * eye;
  CHECK((hold.matrix() - expected).norm() < 1e-12);
  CHECK(min_eigenvalue(hold) >= 0.0);

  // Slopes: H is affine in position with dH/dp_h = -(1 - ratio) A1 here (angle 0),
  // and u_h moves p_h by T^2/2.
  const Matrix slope_h = -(1.0 - ratio) * s.a1.matrix() * (0.5 * 0.01 * 0.01);
  CHECK((pair.f[0].matrix() - slope_h).norm() < 1e-15);
  const Matrix slope_v = -(1.0 - ratio) * s.a2.matrix() * (0.5 * 0.01 * 0.01);
  CHECK((pair.f[1].matrix() - slope_v).norm() < 1e-15);
}
