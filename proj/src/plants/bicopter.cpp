#include <cmath>

#include "shield/plants.hpp"

namespace shield {

BicopterState bicopter_derivative(const BicopterState& x, double thrust, double torque,
                                  const BicopterParams& p) {
  BicopterState dx;
  dx(0) = x(1);
  dx(1) = thrust / p.mass * std::sin(x(4));
  dx(2) = x(3);
  dx(3) = -thrust / p.mass * std::cos(x(4)) + p.gravity;
  dx(4) = x(5);
  dx(5) = torque / p.inertia;
  return dx;
}

BicopterState rk4_zoh_step(const BicopterState& x, double thrust, double torque,
                           const BicopterParams& p, double ts, int substeps) {
  require(ts > 0.0 && substeps >= 1, ErrorCode::InvalidArgument, "RK4 needs ts > 0 and substeps >= 1");
  const double h = ts / substeps;
  BicopterState s = x;
  for (int i = 0; i < substeps; ++i) {
    const BicopterState k1 = bicopter_derivative(s, thrust, torque, p);
    const BicopterState k2 = bicopter_derivative(s + 0.5 * h * k1, thrust, torque, p);
    const BicopterState k3 = bicopter_derivative(s + 0.5 * h * k2, thrust, torque, p);
    const BicopterState k4 = bicopter_derivative(s + h * k3, thrust, torque, p);
    s += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return s;
}

ThrustAttitude f_map(const Vec2& u, const BicopterParams& p) {
  const double vertical = p.mass * p.gravity - u(1);
  return {std::hypot(u(0), vertical), std::atan2(u(0), vertical)};
}

AffineDynamics bicopter_translational_model(const BicopterParams& p, double ts) {
  return double_integrator(ts, p.mass);
}

LinearConstraintSet velocity_cbf_rows(const Vector& x, const AffineDynamics& dyn, double vh_max,
                                      double vv_max, double gamma) {
  require(x.size() == 4 && dyn.state_dim() == 4 && dyn.input_dim() == 2, ErrorCode::DimMismatch,
          "velocity rows expect the 4-state translational model");
  require(vh_max > 0.0 && vv_max > 0.0, ErrorCode::InvalidArgument, "velocity limits must be positive");
  Matrix s = Matrix::Zero(4, 4);
  s(0, 1) = 1.0;
  s(1, 1) = -1.0;
  s(2, 3) = 1.0;
  s(3, 3) = -1.0;
  const Eigen::Vector4d vmax(vh_max, vh_max, vv_max, vv_max);
  const Vector hx = s * x + vmax;
  const Vector drift = s * (dyn.A * x) + vmax;
  const Matrix sb = s * dyn.B;
  LinearConstraintSet rows(2);
  // S B u >= (1 - gamma) h(x) - h(A x)
  for (int i = 0; i < 4; ++i) rows.add_geq(sb.row(i).transpose(), (1.0 - gamma) * hx(i) - drift(i));
  return rows;
}

LinearConstraintSet tilt_constraint_rows(const BicopterParams& p, double tilt_max) {
  require(tilt_max > 0.0 && tilt_max < M_PI / 2.0, ErrorCode::InvalidArgument, "tilt bound must lie in (0, pi/2)");
  const double t = std::tan(tilt_max);
  LinearConstraintSet rows(2);
  rows.add_geq(Vector(Vec2(1.0, -t)), -p.mass * p.gravity * t);
  rows.add_geq(Vector(Vec2(-1.0, -t)), -p.mass * p.gravity * t);
  return rows;
}

BicopterLoop::BicopterLoop(const BicopterLoopConfig& cfg, const BicopterState& x0)
    : cfg_(cfg),
      x_(x0),
      horizontal_(cfg.sample_time, cfg.params.mass, cfg.outer, cfg.integrator_limit),
      vertical_(cfg.sample_time, cfg.params.mass, cfg.outer_vertical, cfg.integrator_limit),
      attitude_(cfg.sample_time, cfg.params.inertia, cfg.inner, cfg.integrator_limit) {}

Vector BicopterLoop::translational_state() const { return Vector(x_.head<4>()); }

Vec2 BicopterLoop::nominal_input() const {
  return {horizontal_.command(x_(0), x_(1), cfg_.reference(0)),
          vertical_.command(x_(2), x_(3), cfg_.reference(1))};
}

void BicopterLoop::apply(const Vec2& u) {
  const ThrustAttitude cmd = f_map(u, cfg_.params);
  const double torque = attitude_.command(x_(4), x_(5), cmd.attitude);
  horizontal_.advance(x_(0), cfg_.reference(0));
  vertical_.advance(x_(2), cfg_.reference(1));
  attitude_.advance(x_(4), cmd.attitude);
  x_ = rk4_zoh_step(x_, cmd.thrust, torque, cfg_.params, cfg_.sample_time, cfg_.substeps);
}

}  // namespace shield
