#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shield/symcone.hpp"

namespace shield {

// Linear rows over u in R^m: G u <= h and E u == e.
class LinearConstraintSet {
 public:
  explicit LinearConstraintSet(int dim = 0);

  int dim() const { return dim_; }
  int inequality_count() const { return static_cast<int>(g_.rows()); }
  int equality_count() const { return static_cast<int>(e_.rows()); }

  // Rows whose coefficients are all zero are rejected.
  void add_leq(const Vector& row, double rhs);
  void add_geq(const Vector& row, double rhs) { add_leq(-row, -rhs); }
  void add_eq(const Vector& row, double rhs);
  void append(const LinearConstraintSet& other);

  const Matrix& G() const { return g_; }
  const Vector& h() const { return h_; }
  const Matrix& E() const { return e_; }
  const Vector& e() const { return erhs_; }

  // Largest violation over all rows (0 when feasible).
  double max_violation(const Vector& u) const;
  bool satisfied(const Vector& u, double tol) const { return max_violation(u) <= tol; }

  // Drops inequality rows equal to an earlier row within `tol`.
  LinearConstraintSet deduplicated(double tol = 1e-12) const;

 private:
  int dim_;
  Matrix g_;
  Vector h_;
  Matrix e_;
  Vector erhs_;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, MaxIterations, NumericalFailure, EmptySet };

const char* to_string(SolveStatus status);

struct SolveReport {
  SolveStatus status = SolveStatus::NumericalFailure;
  std::optional<Vector> solution;
  int iterations = 0;
  double residual = 0.0;
  double objective = 0.0;
  double wall_time = 0.0;

  bool ok() const { return status == SolveStatus::Optimal && solution.has_value(); }
};

// min ||u - u0||^2 subject to `cons`. Primal active set with lowest-index
// tie-breaking; a feasible start comes from the warm start when it is
// feasible and otherwise from an LP Phase I. Returns u0 itself when u0 is
// feasible.
SolveReport solve_ls_lin(const Vector& u0, const LinearConstraintSet& cons,
                         const std::optional<Vector>& warm = std::nullopt);

// max c^T u subject to `cons`, u free. Two-phase dense simplex, Bland's rule.
SolveReport solve_lp(const Vector& c, const LinearConstraintSet& cons);

// min ||u - u0||^2 subject to u^T M u + 2 v^T u + d <= 0 (global solution).
SolveReport solve_gtrs(const Vector& u0, const SymmetricMatrix& m, const Vector& v, double d);

// Euclidean projection of z0 onto {z : A0 + z1 A1 + z2 A2 >= 0}.
SolveReport project_psd_affine_slice(const SymmetricMatrix& a0, const SymmetricMatrix& a1,
                                     const SymmetricMatrix& a2, const Vec2& z0,
                                     double tol = 1e-8);

// min ||u - u0||^2 subject to F0 + sum_i u_i F_i >= 0 and optional linear
// rows, by eigenvector cutting planes (at most 500 cuts).
// `iterations` counts the cuts added.
SolveReport solve_lmi_ls(const Vector& u0, const SymmetricMatrix& f0,
                         std::span<const SymmetricMatrix> f,
                         const LinearConstraintSet* linear = nullptr);

// F0 + sum_i u_i F_i.
SymmetricMatrix affine_pencil(const SymmetricMatrix& f0, std::span<const SymmetricMatrix> f,
                              const Vector& u);

}  // namespace shield
