#include <cmath>

#include "shield/plants.hpp"
#include "support.hpp"

using namespace shield;
using namespace shield::test;

namespace {

BicopterState hover_state(double ph = 0.0, double pv = 0.0) {
  BicopterState x = BicopterState::Zero();
  x(0) = ph;
  x(2) = pv;
  return x;
}

// exp(M) by scaling and squaring of a long Taylor series.
Matrix expm(const Matrix& m) {
  const Matrix scaled = m / 1024.0;
  Matrix term = Matrix::Identity(m.rows(), m.cols()), sum = term;
  for (int k = 1; k < 30; ++k) {
    term = term * scaled / k;
    sum += term;
  }
  for (int i = 0; i < 10; ++i) sum = sum * sum;
  return sum;
}

}  // namespace

TEST_CASE("double integrator examples") {
  const AffineDynamics one = double_integrator(1.0);
  CHECK((one.step(vec({0, 1, 0, 0}), vec({0, 0})) - vec({1, 1, 0, 0})).norm() == 0.0);
  CHECK((one.step(vec({0, 0, 0, 0}), vec({1, 0})) - vec({0.5, 1, 0, 0})).norm() == 0.0);

  const AffineDynamics di = double_integrator(0.01);
  CHECK(di.A(0, 1) == 0.01);
  CHECK(di.B(0, 0) == doctest::Approx(5e-5).epsilon(1e-15));
  CHECK(di.B(1, 0) == 0.01);
  CHECK(di.B(2, 1) == doctest::Approx(5e-5).epsilon(1e-15));
  CHECK(di.B(0, 1) == 0.0);
  CHECK(error_code_of([] { double_integrator(0.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("double integrator matches constant-acceleration kinematics") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const double ts = uniform(rng, 0.001, 0.1);
    const AffineDynamics di = double_integrator(ts);
    Vector x = random_matrix(rng, 4, 1);
    const Vector x0 = x, u = random_matrix(rng, 2, 1);
    const int k = 1 + trial * 7;
    for (int i = 0; i < k; ++i) x = di.step(x, u);
    const double t = k * ts;
    const double ph = x0(0) + x0(1) * t + 0.5 * u(0) * t * t;
    const double pv = x0(2) + x0(3) * t + 0.5 * u(1) * t * t;
    CHECK(std::abs(x(0) - ph) <= 1e-12 * (1.0 + std::abs(ph)) * k);
    CHECK(std::abs(x(2) - pv) <= 1e-12 * (1.0 + std::abs(pv)) * k);
  }
}

TEST_CASE("dare_gain scalar cases") {
  const Matrix one = Matrix::Ones(1, 1);
  const LqrGain stable = dare_gain(0.5 * one, one, 0.0 * one, one);
  CHECK(std::abs(stable.K(0, 0)) < 1e-12);

  const LqrGain unit = dare_gain(one, one, one, one);
  const double p = (1.0 + std::sqrt(5.0)) / 2.0;
  CHECK(unit.P(0, 0) == doctest::Approx(p).epsilon(1e-10));
  CHECK(unit.K(0, 0) == doctest::Approx(p / (1.0 + p)).epsilon(1e-10));

  CHECK(error_code_of([&] { dare_gain(one, one, one, 0.0 * one); }) == ErrorCode::InvalidArgument);
  // An unstabilizable pair never settles.
  CHECK(error_code_of([&] { dare_gain(2.0 * one, 0.0 * one, one, one, 1e-10, 1000); }) == ErrorCode::NoConvergence);
}

TEST_CASE("dare_gain on the double integrator: fixed point and value iteration") {
  for (double ts : {0.01, 0.005}) {
    Matrix a(2, 2), b(2, 1);
    a << 1, ts, 0, 1;
    b << ts * ts / 2, ts;
    const Matrix q = Matrix::Identity(2, 2), r = Matrix::Ones(1, 1);
    const LqrGain g = dare_gain(a, b, q, r);
    CHECK(g.iterations < 100000);
    const Matrix& p = g.P;
    const Matrix riccati = q + a.transpose() * p * a -
                           a.transpose() * p * b * (r + b.transpose() * p * b).inverse() * b.transpose() * p * a;
    CHECK((riccati - p).norm() <= 1e-10 * (1.0 + p.norm()) * 10);

    // Value iteration: iterate the finite-horizon cost-to-go for 10^6 steps.
    Matrix v = Matrix::Zero(2, 2);
    for (int k = 0; k < 1000000; ++k) {
      const Matrix bv = b.transpose() * v;
      v = q + a.transpose() * v * a - (bv * a).transpose() * (r + bv * b).inverse() * (bv * a);
    }
    const Matrix k_ref = (r + b.transpose() * v * b).inverse() * b.transpose() * v * a;
    CHECK((g.K - k_ref).norm() <= 1e-8 * (1.0 + k_ref.norm()));

    const Matrix closed = a - b * g.K;
    CHECK(Eigen::EigenSolver<Matrix>(closed).eigenvalues().cwiseAbs().maxCoeff() < 1.0);
  }
}

TEST_CASE("servo synthesis covers the shipped gains") {
  for (const AxisWeights w : {AxisWeights{10, 1, 0.5, 1}, AxisWeights{0.5, 1, 0, 1}, AxisWeights{1, 1, 0, 1}}) {
    const AxisServo s(0.005, 1.0, w);
    CHECK(s.has_integrator() == (w.integral > 0));
  }
  const AxisServo inner(0.005, 0.01, AxisWeights{500, 1, 1, 0.01});
  CHECK(inner.gain()(0, 0) > 0.0);
  const AxisServo di(0.01, 1.0, AxisWeights{});
  // Commands push the position toward the reference.
  CHECK(di.command(0.0, 0.0, 1.0) > 0.0);
  CHECK(di.command(2.0, 0.0, 1.0) < 0.0);
}

TEST_CASE("servo integrator clamps") {
  AxisServo s(0.01, 1.0, AxisWeights{1, 1, 1, 1}, 0.5);
  for (int i = 0; i < 10000; ++i) s.advance(10.0, 0.0);
  CHECK(s.integral() == doctest::Approx(0.5));
  s.reset();
  CHECK(s.integral() == 0.0);
}

TEST_CASE("bicopter derivative") {
  const BicopterParams p;
  BicopterState x = BicopterState::Zero();
  x(1) = 0.3;
  x(3) = -0.2;
  const BicopterState hover = bicopter_derivative(x, p.mass * p.gravity, 0.0, p);
  CHECK(hover(0) == 0.3);
  CHECK(hover(2) == -0.2);
  CHECK(std::abs(hover(1)) + std::abs(hover(3)) + std::abs(hover(4)) + std::abs(hover(5)) < 1e-12);

  x.setZero();
  x(4) = M_PI / 2;
  const BicopterState side = bicopter_derivative(x, p.mass, 0.0, p);
  CHECK(side(1) == doctest::Approx(1.0));
  CHECK(side(3) == doctest::Approx(p.gravity));

  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    BicopterState s;
    for (int i = 0; i < 6; ++i) s(i) = uniform(rng, -2, 2);
    const double thrust = uniform(rng, 0, 20), torque = uniform(rng, -1, 1);
    const BicopterState d = bicopter_derivative(s, thrust, torque, p);
    CHECK(d(0) == s(1));
    CHECK(d(1) == doctest::Approx(thrust / p.mass * std::sin(s(4))));
    CHECK(d(2) == s(3));
    CHECK(d(3) == doctest::Approx(-thrust / p.mass * std::cos(s(4)) + p.gravity));
    CHECK(d(4) == s(5));
    CHECK(d(5) == doctest::Approx(torque / p.inertia));
  }
}

TEST_CASE("rk4 zero-order hold") {
  const BicopterParams p;
  const BicopterState x0 = hover_state(1.0, 2.0);
  CHECK((rk4_zoh_step(x0, p.mass * p.gravity, 0.0, p, 0.005) - x0).norm() < 1e-12);

  // Level attitude, extra thrust: constant vertical acceleration -dT/m.
  const double extra = 3.0, ts = 0.005;
  const BicopterState up = rk4_zoh_step(x0, p.mass * p.gravity + extra, 0.0, p, ts);
  CHECK(up(2) == doctest::Approx(2.0 - 0.5 * extra / p.mass * ts * ts).epsilon(1e-12));
  CHECK(std::abs(up(3) + extra / p.mass * ts) < 1e-9);

  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    BicopterState s;
    for (int i = 0; i < 6; ++i) s(i) = uniform(rng, -1, 1);
    const double thrust = uniform(rng, 5, 15), torque = uniform(rng, -0.1, 0.1);
    const BicopterState fine = rk4_zoh_step(s, thrust, torque, p, ts, 64);
    CHECK((rk4_zoh_step(s, thrust, torque, p, ts, 4) - fine).norm() < 1e-8);
    CHECK((rk4_zoh_step(s, thrust, torque, p, ts, 2) - rk4_zoh_step(s, thrust, torque, p, ts, 4)).norm() < 1e-8);
  }
  CHECK(error_code_of([&] { rk4_zoh_step(x0, 1.0, 0.0, p, ts, 0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("rk4 step linearizes to the hover model") {
  const BicopterParams p;
  const double ts = 0.005, mg = p.mass * p.gravity, h = 1e-6;
  const BicopterState x0 = hover_state();
  Matrix jac(6, 6);
  for (int i = 0; i < 6; ++i) {
    BicopterState dp = x0, dm = x0;
    dp(i) += h;
    dm(i) -= h;
    jac.col(i) = (rk4_zoh_step(dp, mg, 0.0, p, ts) - rk4_zoh_step(dm, mg, 0.0, p, ts)) / (2.0 * h);
  }
  // Continuous linearization at hover: v_h' = g theta, theta' = omega.
  Matrix ac = Matrix::Zero(6, 6);
  ac(0, 1) = 1.0;
  ac(2, 3) = 1.0;
  ac(4, 5) = 1.0;
  ac(1, 4) = p.gravity;
  CHECK((jac - expm(ac * ts)).norm() < 1e-8);

  // Translational and attitude blocks are the sampled double integrators.
  Matrix a_pos(2, 2);
  a_pos << 1, ts, 0, 1;
  CHECK((jac.block(0, 0, 2, 2) - a_pos).norm() <= 10 * ts * ts);
  CHECK((jac.block(2, 2, 2, 2) - a_pos).norm() <= 10 * ts * ts);
  CHECK((jac.block(4, 4, 2, 2) - a_pos).norm() <= 10 * ts * ts);
  // Vertical and attitude channels decouple at hover.
  CHECK(jac.block(2, 4, 2, 2).norm() < 1e-9);
  CHECK(jac.block(4, 0, 2, 4).norm() < 1e-9);
}

TEST_CASE("f_map") {
  const BicopterParams p;
  const double mg = p.mass * p.gravity;
  const ThrustAttitude a = f_map(Vec2(0, 0), p);
  CHECK(a.thrust == doctest::Approx(mg));
  CHECK(a.attitude == 0.0);
  const ThrustAttitude b = f_map(Vec2(mg, 0), p);
  CHECK(b.thrust == doctest::Approx(std::sqrt(2.0) * mg));
  CHECK(b.attitude == doctest::Approx(M_PI / 4));
  const ThrustAttitude c = f_map(Vec2(0, 2 * mg), p);
  CHECK(c.thrust == doctest::Approx(mg));
  CHECK(c.attitude == doctest::Approx(M_PI));

  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 200; ++trial) {
    const double theta = uniform(rng, -1.5, 1.5), thrust = uniform(rng, 0.1, 30);
    const ThrustAttitude r = f_map(Vec2(thrust * std::sin(theta), mg - thrust * std::cos(theta)), p);
    CHECK(std::abs(r.thrust - thrust) < 1e-10);
    CHECK(std::abs(r.attitude - theta) < 1e-10);
  }
}

TEST_CASE("velocity barrier rows") {
  const AffineDynamics dyn = double_integrator(0.005);
  const double vmax = 4.0, gamma = 0.1;
  const LinearConstraintSet rest = velocity_cbf_rows(vec({0, 0, 0, 0}), dyn, vmax, vmax, gamma);
  CHECK(rest.inequality_count() == 4);
  // At u = 0 and v = 0 each row holds with margin gamma v_max.
  const Vector margin = rest.h() - rest.G() * vec({0, 0});
  for (int i = 0; i < 4; ++i) CHECK(margin(i) == doctest::Approx(gamma * vmax));

  // At the limit, u = 0 is exactly neutral and pushing outward violates.
  const LinearConstraintSet edge = velocity_cbf_rows(vec({0, vmax, 0, 0}), dyn, vmax, vmax, gamma);
  CHECK(edge.max_violation(vec({0, 0})) == doctest::Approx(0.0));
  CHECK(edge.max_violation(vec({1, 0})) > 0.0);

  // Hand expansion of the v_h upper row: vmax - (v_h + T u_h / m) >= (1 - gamma)(vmax - v_h).
  const Vector x = vec({0, 1.5, 0, -2.0});
  const LinearConstraintSet rows = velocity_cbf_rows(x, dyn, vmax, vmax, gamma);
  bool found = false;
  for (int i = 0; i < 4; ++i) {
    if (std::abs(rows.G()(i, 0) - 0.005) < 1e-15 && rows.G()(i, 1) == 0.0) {
      CHECK(rows.h()(i) == doctest::Approx(vmax - 1.5 - (1 - gamma) * (vmax - 1.5)));
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("tilt rows bound the mapped attitude") {
  const BicopterParams p;
  const double mg = p.mass * p.gravity, tilt = 30.0 * M_PI / 180.0, t = std::tan(tilt);
  const LinearConstraintSet rows = tilt_constraint_rows(p, tilt);
  CHECK(rows.satisfied(vec({0, 0}), 0.0));
  const Vector edge = vec({t * (mg - 2.0), 2.0});
  CHECK(rows.max_violation(edge) < 1e-12);
  CHECK(f_map(Vec2(edge(0), edge(1)), p).attitude == doctest::Approx(tilt).epsilon(1e-12));

  std::mt19937_64 rng(45);
  int feasible = 0;
  for (int trial = 0; trial < 5000; ++trial) {
    const Vector u = vec({uniform(rng, -20, 20), uniform(rng, -20, mg - 1e-3)});
    if (!rows.satisfied(u, 0.0)) continue;
    ++feasible;
    CHECK(std::abs(f_map(Vec2(u(0), u(1)), p).attitude) <= tilt + 1e-9);
  }
  CHECK(feasible > 500);
  CHECK(error_code_of([&] { tilt_constraint_rows(p, M_PI / 2); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("bicopter loop") {
  BicopterLoopConfig cfg;
  SUBCASE("hover at the reference stays put") {
    cfg.reference = Vec2(3, -1);
    BicopterLoop loop(cfg, hover_state(3, -1));
    for (int k = 0; k < 200; ++k) {
      const BicopterState before = loop.state();
      loop.apply(loop.nominal_input());
      CHECK((loop.state() - before).norm() <= 1e-9);
    }
  }
  SUBCASE("step in the horizontal reference approaches monotonically") {
    cfg.reference = Vec2(1, 0);
    BicopterLoop loop(cfg, hover_state());
    double last = 0.0;
    for (int k = 0; k < static_cast<int>(2.0 / cfg.sample_time); ++k) {
      loop.apply(loop.nominal_input());
      CHECK(loop.state()(0) >= last - 1e-12);
      last = loop.state()(0);
    }
    CHECK(last > 0.5);
  }
  SUBCASE("zero virtual input coasts") {
    BicopterState x0 = hover_state();
    x0(1) = 1.0;
    x0(3) = 0.5;
    BicopterLoop loop(cfg, x0);
    const int steps = 200;
    for (int k = 0; k < steps; ++k) loop.apply(Vec2(0, 0));
    const double t = steps * cfg.sample_time;
    CHECK(loop.state()(0) == doctest::Approx(t).epsilon(1e-9));
    CHECK(loop.state()(2) == doctest::Approx(0.5 * t).epsilon(1e-9));
    CHECK(std::abs(loop.state()(4)) < 1e-12);
  }
}

TEST_CASE("translational design model") {
  const BicopterParams p{2.0, 0.01, 0.3, 9.81};
  const AffineDynamics m = bicopter_translational_model(p, 0.005);
  const AffineDynamics di = double_integrator(0.005, 2.0);
  CHECK((m.A - di.A).norm() == 0.0);
  CHECK((m.B - di.B).norm() == 0.0);
}
