#pragma once

#include <Eigen/Dense>

#include "shield/conic_solvers.hpp"

namespace shield {

// Discrete-time model x+ = A x + B u used by the filters.
struct AffineDynamics {
  Matrix A;
  Matrix B;
  double sample_time = 0.0;

  int state_dim() const { return static_cast<int>(A.rows()); }
  int input_dim() const { return static_cast<int>(B.cols()); }
  Vector step(const Vector& x, const Vector& u) const;
};

// Planar double integrator with state (p_h, v_h, p_v, v_v) and input a force
// per axis: x+ = A x + B u with blocks [[1, T], [0, 1]] and [T^2/(2m), T/m].
AffineDynamics double_integrator(double ts, double mass = 1.0);

// Selects (p_h, p_v) from the 4-dimensional translational state.
Matrix position_selector();

struct LqrGain {
  Matrix K;  // u = -K x
  Matrix P;
  int iterations = 0;
};

// Infinite-horizon discrete LQR by fixed-point Riccati iteration from P = Q.
LqrGain dare_gain(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r,
                  double tol = 1e-10, int max_iterations = 100000);

struct AxisWeights {
  double position = 1.0;
  double velocity = 1.0;
  double integral = 0.0;  // 0 disables the integrator state
  double input = 1.0;
};

// One-axis LQR servo on the sampled double integrator [T^2/(2c), T/c] with an
// optional forward-Euler error integrator clamped to +-integrator_limit.
class AxisServo {
 public:
  AxisServo(double ts, double inertia, const AxisWeights& w, double integrator_limit = 10.0);

  // -K [pos - ref, vel, integral]; does not advance the integrator.
  double command(double pos, double vel, double ref) const;
  void advance(double pos, double ref);
  void reset() { integral_ = 0.0; }

  double integral() const { return integral_; }
  const Matrix& gain() const { return gain_.K; }
  bool has_integrator() const { return integrates_; }

 private:
  double ts_;
  bool integrates_;
  double limit_;
  LqrGain gain_;
  double integral_ = 0.0;
};

// ---- Planar bicopter -------------------------------------------------------

struct BicopterParams {
  double mass = 1.0;
  double inertia = 0.01;
  double arm = 0.3;
  double gravity = 9.81;
};

// (p_h, v_h, p_v, v_v, theta, omega)
using BicopterState = Eigen::Matrix<double, 6, 1>;

// p' = v, v_h' = (T/m) sin(theta), v_v' = -(T/m) cos(theta) + g,
// theta' = omega, omega' = tau / J.
BicopterState bicopter_derivative(const BicopterState& x, double thrust, double torque,
                                  const BicopterParams& params);

// Zero-order-hold RK4 over one sample period split into `substeps` stages.
BicopterState rk4_zoh_step(const BicopterState& x, double thrust, double torque,
                           const BicopterParams& params, double ts, int substeps = 4);

struct ThrustAttitude {
  double thrust;
  double attitude;
};

// Virtual force (u_h, u_v) to thrust and attitude reference.
ThrustAttitude f_map(const Vec2& u, const BicopterParams& params);

// Decoupled translational design model used by the outer loop and the filter.
AffineDynamics bicopter_translational_model(const BicopterParams& params, double ts);

// Velocity barrier rows h_v(A x + B u) >= (1 - gamma) h_v(x) with
// h_v = [v_h + vh_max, vh_max - v_h, v_v + vv_max, vv_max - v_v].
LinearConstraintSet velocity_cbf_rows(const Vector& x, const AffineDynamics& dyn, double vh_max,
                                      double vv_max, double gamma);

// Tilt bound [1, -t; -1, -t] u >= -m g t with t = tan(tilt_max).
LinearConstraintSet tilt_constraint_rows(const BicopterParams& params, double tilt_max);

struct BicopterLoopConfig {
  BicopterParams params;
  double sample_time = 0.005;
  int substeps = 4;
  AxisWeights outer{10.0, 1.0, 0.5, 1.0};
  AxisWeights outer_vertical{10.0, 1.0, 0.5, 1.0};
  AxisWeights inner{50.0, 1.0, 1.0, 0.1};
  double integrator_limit = 10.0;
  Vec2 reference{18.0, 20.0};
};

// Outer LQR on positions, thrust mapping, inner attitude LQR, RK4 plant.
class BicopterLoop {
 public:
  BicopterLoop(const BicopterLoopConfig& cfg, const BicopterState& x0);

  const BicopterState& state() const { return x_; }
  // Translational state (p_h, v_h, p_v, v_v).
  Vector translational_state() const;
  Vec2 nominal_input() const;
  // Advances integrators and the plant by one sample with virtual input u.
  void apply(const Vec2& u);

  const BicopterLoopConfig& config() const { return cfg_; }

 private:
  BicopterLoopConfig cfg_;
  BicopterState x_;
  AxisServo horizontal_;
  AxisServo vertical_;
  AxisServo attitude_;
};

}  // namespace shield
