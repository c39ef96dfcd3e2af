#pragma once

#include <random>
#include <vector>

#include "shield/filter.hpp"

// Brute-force reference computations. None of these call the solver or
// eigen code they are used to check.
namespace shield::verify {

using Rng = std::mt19937_64;

// Eigen's self-adjoint QR solver, independent of the Jacobi sweeps.
double oracle_min_eig(const Matrix& m);
double oracle_max_eig(const Matrix& m);

bool oracle_contains(const Obstacle& obs, const Vec2& p, double tol = 1e-9);

// Boundary point at parameter t in [0, 1), counterclockwise.
Vec2 oracle_boundary_point(const Obstacle& obs, double t);

// Nearest obstacle point. Polytopes use exact segment projections; the
// other shapes a 4096-point boundary grid polished by golden section.
Vec2 oracle_projection(const Obstacle& obs, const Vec2& p);

// Global optimum of min ||u - u0||^2 s.t. u^T M u + 2 v^T u + d <= 0 in two
// dimensions: 2001 x 2001 grid over [u0 - r, u0 + r]^2 with zoom polish,
// refined by a first-hit scan over rays from u0. Returns +inf when no grid
// point is feasible.
double oracle_gtrs_objective(const Vec2& u0, const Eigen::Matrix2d& m, const Vec2& v, double d, double r);

// Random shapes of every kind, sized 0.5 to 3 m around a center in [-5, 5]^2.
Obstacle random_obstacle(Rng& rng, ObstacleKind kind);

// Point at exactly `gap` from the obstacle along a random outward normal.
Vec2 point_at_distance(Rng& rng, const Obstacle& obs, double gap);

// `count` obstacle points: 80% uniform interior samples, 20% boundary.
std::vector<Vec2> sample_obstacle_points(Rng& rng, const Obstacle& obs, int count);

// Axis-aligned bounds of the obstacle from a dense boundary sweep.
std::pair<Vec2, Vec2> oracle_bounds(const Obstacle& obs);

}  // namespace shield::verify
