#include <chrono>
#include <cmath>
#include <vector>

#include "shield/conic_solvers.hpp"

namespace shield {
namespace {

constexpr double kPivotTol = 1e-12;
constexpr double kCostTol = 1e-10;
constexpr int kMaxPivots = 20000;

enum class PhaseResult { Optimal, Unbounded, MaxIterations };

// Dense tableau: rows 0..r-1 hold [A | rhs]; basis[i] is the basic column of row i.
struct Tableau {
  Matrix t;
  std::vector<int> basis;
  int cols() const { return static_cast<int>(t.cols()) - 1; }
  int rows() const { return static_cast<int>(t.rows()); }

  void pivot(int row, int col) {
    t.row(row) /= t(row, col);
    for (int i = 0; i < rows(); ++i) {
      if (i != row && t(i, col) != 0.0) t.row(i) -= t(i, col) * t.row(row);
    }
    basis[row] = col;
  }
};

// Maximizes cost^T x over the tableau, entering only columns with allowed[j].
PhaseResult run_phase(Tableau& tab, const Vector& cost, const std::vector<bool>& allowed, int& pivots) {
  const int n = tab.cols();
  while (true) {
    if (pivots >= kMaxPivots) return PhaseResult::MaxIterations;
    // Bland: smallest improving column.
    int enter = -1;
    for (int j = 0; j < n && enter < 0; ++j) {
      if (!allowed[j]) continue;
      double z = 0.0;
      for (int i = 0; i < tab.rows(); ++i) z += cost(tab.basis[i]) * tab.t(i, j);
      if (cost(j) - z > kCostTol) enter = j;
    }
    if (enter < 0) return PhaseResult::Optimal;

    int leave = -1;
    double best = 0.0;
    for (int i = 0; i < tab.rows(); ++i) {
      const double a = tab.t(i, enter);
      if (a <= kPivotTol) continue;
      const double ratio = tab.t(i, n) / a;
      if (leave < 0 || ratio < best - 1e-15 ||
          (std::abs(ratio - best) <= 1e-15 && tab.basis[i] < tab.basis[leave])) {
        leave = i;
        best = ratio;
      }
    }
    if (leave < 0) return PhaseResult::Unbounded;
    tab.pivot(leave, enter);
    ++pivots;
  }
}

}  // namespace

SolveReport solve_lp(const Vector& c, const LinearConstraintSet& cons) {
  const auto start = std::chrono::steady_clock::now();
  const int m = cons.dim();
  require(c.size() == m, ErrorCode::DimMismatch, "LP cost has wrong dimension");
  require(c.allFinite(), ErrorCode::NonFinite, "LP cost is not finite");

  const int k = cons.inequality_count();
  const int q = cons.equality_count();
  const int r = k + q;
  const int nvar = 2 * m + k;     // u+, u-, slacks
  const int ncol = nvar + r;      // plus one artificial per row

  Tableau tab{Matrix::Zero(r, ncol + 1), std::vector<int>(r)};
  for (int i = 0; i < r; ++i) {
    Vector row = i < k ? Vector(cons.G().row(i).transpose()) : Vector(cons.E().row(i - k).transpose());
    double rhs = i < k ? cons.h()(i) : cons.e()(i - k);
    double sign = rhs < 0.0 ? -1.0 : 1.0;
    tab.t.block(i, 0, 1, m) = sign * row.transpose();
    tab.t.block(i, m, 1, m) = -sign * row.transpose();
    if (i < k) tab.t(i, 2 * m + i) = sign;
    tab.t(i, nvar + i) = 1.0;
    tab.t(i, ncol) = sign * rhs;
    tab.basis[i] = nvar + i;
  }

  SolveReport rep;
  int pivots = 0;

  Vector phase1 = Vector::Zero(ncol);
  phase1.tail(r).setConstant(-1.0);
  std::vector<bool> allowed(ncol, true);
  if (run_phase(tab, phase1, allowed, pivots) == PhaseResult::MaxIterations) {
    rep.status = SolveStatus::MaxIterations;
    rep.iterations = pivots;
    return rep;
  }
  double infeas = 0.0;
  for (int i = 0; i < r; ++i)
    if (tab.basis[i] >= nvar) infeas += tab.t(i, ncol);
  const double scale = 1.0 + (r > 0 ? tab.t.col(ncol).cwiseAbs().maxCoeff() : 0.0);
  if (infeas > 1e-9 * scale) {
    rep.status = SolveStatus::Infeasible;
    rep.iterations = pivots;
    rep.residual = infeas;
    return rep;
  }
  // Drive zero-level artificials out of the basis where possible.
  for (int i = 0; i < r; ++i) {
    if (tab.basis[i] < nvar) continue;
    for (int j = 0; j < nvar; ++j) {
      if (std::abs(tab.t(i, j)) > 1e-9) {
        tab.pivot(i, j);
        break;
      }
    }
  }
  for (int j = nvar; j < ncol; ++j) allowed[j] = false;

  Vector phase2 = Vector::Zero(ncol);
  phase2.head(m) = c;
  phase2.segment(m, m) = -c;
  const PhaseResult res = run_phase(tab, phase2, allowed, pivots);
  rep.iterations = pivots;
  if (res == PhaseResult::MaxIterations) {
    rep.status = SolveStatus::MaxIterations;
    return rep;
  }
  if (res == PhaseResult::Unbounded) {
    rep.status = SolveStatus::Unbounded;
    return rep;
  }

  Vector x = Vector::Zero(ncol);
  for (int i = 0; i < r; ++i) x(tab.basis[i]) = tab.t(i, ncol);
  Vector u = x.head(m) - x.segment(m, m);
  rep.status = SolveStatus::Optimal;
  rep.solution = u;
  rep.objective = c.dot(u);
  rep.residual = cons.max_violation(u);
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace shield
