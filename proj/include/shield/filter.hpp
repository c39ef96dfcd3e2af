#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shield/obstacles.hpp"

namespace shield {

// h(z) = a^T z - b over the full state.
struct Halfspace {
  Vector a;
  double b = 0.0;
  double value(const Vector& z) const { return a.dot(z) - b; }
};

struct FilterConfig {
  double gamma = 0.2;
  double epsilon = 0.4;
  // Per-obstacle buffer overrides, indexed like the obstacle list.
  std::vector<std::optional<double>> epsilon_overrides;
  double switch_band = 1e-6;
  double slack_weight = 1e4;
  // Spectrahedron shrink ratio and c_perp, used by the indefinite variant.
  double epsilon_ratio = 0.25;
  double c_perp = 0.05;

  void validate() const;
  double epsilon_for(std::size_t obstacle) const;
};

enum class FilterMode { NominalPassthrough, Filtered, SlackRelaxed, FallbackNominal };

const char* to_string(FilterMode mode);

struct ObstacleRecord {
  Location location = Location::Exterior;
  ProjectionResult projection;
  std::optional<Halfspace> halfspace;
};

struct FilterOutcome {
  Vector u;
  FilterMode mode = FilterMode::NominalPassthrough;
  std::vector<ObstacleRecord> obstacles;
  std::vector<SolveReport> reports;
  std::optional<Vector> slack;
  double projection_time = 0.0;  // projections and halfspace construction
  double solve_time = 0.0;       // row assembly and QP / LMI solves
  std::string note;
};

// Position x_k outside the closed obstacle, projected to P:
// a = C^T d with d = (C x - P) / ||C x - P||, b = eps + d^T P.
Halfspace exterior_halfspace(const Vector& x, const ProjectionResult& proj, const Matrix& c_pos,
                             double eps, double switch_band = 1e-6);

// Position within the switching band of the boundary: a supporting
// hyperplane with the outward normal, shifted out by eps.
Halfspace boundary_halfspace(const Vector& x, const Obstacle& obs, const Matrix& c_pos, double eps,
                             double switch_band = 1e-6);

// Position strictly inside: a = -C^T g / ||g|| with g the depth gradient
// (central differences, step 1e-5) and b = a^T x + depth, so that
// h(x_k) = -depth. Retries once 1e-6 along +e_1 when the gradient vanishes.
Halfspace interior_halfspace(const Vector& x, const Obstacle& obs, const Matrix& c_pos);

// Pointwise minimum of affine functions.
class HalfspaceStack {
 public:
  explicit HalfspaceStack(std::vector<Halfspace> parts);
  const std::vector<Halfspace>& parts() const { return parts_; }
  double value(const Vector& z) const;
  bool contains(const Vector& z) const { return value(z) >= 0.0; }
  // Rows h_i(A x + B u) >= (1 - gamma) h_i(x).
  LinearConstraintSet step_rows(const Vector& x, const AffineDynamics& dyn, double gamma) const;

 private:
  std::vector<Halfspace> parts_;
};

HalfspaceStack assemble_subset_function(std::vector<Halfspace> parts);

// Projections of C x onto every obstacle; `parallel` runs them concurrently.
std::vector<ProjectionResult> joint_projection(const Vector& x, std::span<const Obstacle> obstacles,
                                               const Matrix& c_pos, bool parallel = false);

Location classify(const Obstacle& obs, const Vec2& p, const ProjectionResult& proj, double band);

// One step of the projection-based filter.
FilterOutcome pdte_step(const Vector& x, const Vector& u_nom, std::span<const Obstacle> obstacles,
                        const AffineDynamics& dyn, const Matrix& c_pos, const FilterConfig& cfg,
                        const LinearConstraintSet& extra);

using MatrixMap = std::function<SymmetricMatrix(const Vector&)>;

struct IndefiniteBlock {
  MatrixMap h;  // must be affine in the state
  int j = 1;    // keep lambda_j(H) >= 0
};

// H(A x + B u) - H(x) + gamma lambda_j(H(x)) I >= 0 per block, by cutting planes.
FilterOutcome indefinite_step(const Vector& x, const Vector& u_nom, std::span<const IndefiniteBlock> blocks,
                              const AffineDynamics& dyn, double gamma, const LinearConstraintSet& extra);

FilterOutcome indefinite_step(const Vector& x, const Vector& u_nom, const MatrixMap& h, int j,
                              const AffineDynamics& dyn, double gamma, const LinearConstraintSet& extra);

// Affine coefficients of u -> H(A x + B u) - extracted by probing; throws
// NonAffineH when the map is not affine.
struct AffineMatrixPencil {
  SymmetricMatrix constant;
  std::vector<SymmetricMatrix> slopes;
};
AffineMatrixPencil extract_affine_pencil(const MatrixMap& h, const Vector& x, const AffineDynamics& dyn);

// Quadratic circle barrier b(x) = ||C x - c||^2 - (r + eps)^2 with
// b(x+) >= (1 - gamma) b(x), solved globally over the linear rows. When that
// is infeasible, every row (the quadratic one included) gets weighted slack.
FilterOutcome nonconvex_circle_step(const Vector& x, const Vector& u_nom, const Circle& circle,
                                    const AffineDynamics& dyn, const Matrix& c_pos, double gamma,
                                    double eps, const LinearConstraintSet& extra,
                                    double slack_weight = 1e4);

// lambda_1(H_k) >= (1 - gamma)^k lambda_1(H_0) - tol for every k, with
// tol = base_tol * (1 + |lambda_1(H_0)|).
bool zeroing_certificate(std::span<const double> lambda1, double gamma, double base_tol = 1e-7);

}  // namespace shield
