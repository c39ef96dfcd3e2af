#include <algorithm>
#include <chrono>
#include <cmath>
#include <vector>

#include "shield/conic_solvers.hpp"

namespace shield {
namespace {

constexpr double kFeasTol = 1e-10;
constexpr double kMultiplierTol = 1e-12;

// Phase I: max -t subject to G u - t <= h, -t <= 0, E u == e.
std::optional<Vector> phase_one(const LinearConstraintSet& cons, SolveReport& rep) {
  const int m = cons.dim();
  LinearConstraintSet lifted(m + 1);
  for (int i = 0; i < cons.inequality_count(); ++i) {
    Vector row(m + 1);
    row << cons.G().row(i).transpose(), -1.0;
    lifted.add_leq(row, cons.h()(i));
  }
  Vector tneg = Vector::Zero(m + 1);
  tneg(m) = -1.0;
  lifted.add_leq(tneg, 0.0);
  for (int i = 0; i < cons.equality_count(); ++i) {
    Vector row(m + 1);
    row << cons.E().row(i).transpose(), 0.0;
    lifted.add_eq(row, cons.e()(i));
  }
  Vector c = Vector::Zero(m + 1);
  c(m) = -1.0;
  const SolveReport lp = solve_lp(c, lifted);
  rep.iterations += lp.iterations;
  if (lp.status != SolveStatus::Optimal) {
    rep.status = lp.status == SolveStatus::Infeasible ? SolveStatus::Infeasible : lp.status;
    return std::nullopt;
  }
  const Vector& z = *lp.solution;
  if (z(m) > 1e-9) {
    rep.status = SolveStatus::Infeasible;
    rep.residual = z(m);
    return std::nullopt;
  }
  return Vector(z.head(m));
}

// Rows of the working set stacked as a matrix (equalities first).
Matrix working_matrix(const LinearConstraintSet& cons, const std::vector<int>& active) {
  const int q = cons.equality_count();
  Matrix w(q + static_cast<int>(active.size()), cons.dim());
  if (q > 0) w.topRows(q) = cons.E();
  for (std::size_t i = 0; i < active.size(); ++i) w.row(q + static_cast<int>(i)) = cons.G().row(active[i]);
  return w;
}

bool independent_of(const Matrix& w, const Vector& row) {
  if (w.rows() == 0) return row.norm() > 0.0;
  Matrix stacked(w.rows() + 1, w.cols());
  stacked << w, row.transpose();
  Eigen::FullPivHouseholderQR<Matrix> qr(stacked.transpose());
  qr.setThreshold(1e-10);
  return qr.rank() == stacked.rows();
}

}  // namespace

SolveReport solve_ls_lin(const Vector& u0, const LinearConstraintSet& raw,
                         const std::optional<Vector>& warm) {
  const auto start = std::chrono::steady_clock::now();
  auto finish = [&](SolveReport& r) {
    r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
  };
  require(u0.size() == raw.dim(), ErrorCode::DimMismatch, "target dimension differs from constraints");
  require(u0.allFinite(), ErrorCode::NonFinite, "non-finite target");
  if (warm) require(warm->size() == raw.dim(), ErrorCode::DimMismatch, "warm start has wrong dimension");

  const LinearConstraintSet cons = raw.deduplicated();
  const int m = cons.dim();
  const int k = cons.inequality_count();
  SolveReport rep;

  if (cons.satisfied(u0, kFeasTol)) {
    rep.status = SolveStatus::Optimal;
    rep.solution = u0;
    rep.residual = cons.max_violation(u0);
    return finish(rep);
  }

  Vector x;
  if (warm && warm->allFinite() && cons.satisfied(*warm, kFeasTol)) {
    x = *warm;
  } else {
    auto start_point = phase_one(cons, rep);
    if (!start_point) return finish(rep);
    x = *start_point;
  }

  // Initial working set: active rows at x, kept linearly independent.
  std::vector<int> active;
  {
    Matrix w = working_matrix(cons, active);
    for (int i = 0; i < k; ++i) {
      if (std::abs(cons.G().row(i).dot(x) - cons.h()(i)) > kFeasTol) continue;
      if (independent_of(w, cons.G().row(i).transpose())) {
        active.push_back(i);
        w = working_matrix(cons, active);
      }
    }
  }

  const int q = cons.equality_count();
  const int max_steps = 100 * (m + k);
  for (int step = 0; step < max_steps; ++step) {
    rep.iterations = rep.iterations + 1;
    const Matrix w = working_matrix(cons, active);
    const Vector grad = x - u0;
    Vector p;
    Vector lambda;
    if (w.rows() == 0) {
      p = -grad;
    } else {
      Eigen::HouseholderQR<Matrix> qr(w.transpose());
      const Matrix qfull = qr.householderQ() * Matrix::Identity(m, m);
      const int r = static_cast<int>(w.rows());
      const Matrix q1 = qfull.leftCols(r);
      const Matrix q2 = qfull.rightCols(m - r);
      p = -(q2 * (q2.transpose() * grad));
      // Multipliers from grad + W^T lambda = 0.
      const Matrix rmat = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
      lambda = rmat.triangularView<Eigen::Upper>().solve(-(q1.transpose() * grad));
    }

    if (p.norm() <= 1e-12 * (1.0 + x.norm())) {
      int drop = -1;
      double most_negative = -kMultiplierTol;
      for (std::size_t i = 0; i < active.size(); ++i) {
        const double li = lambda(q + static_cast<int>(i));
        if (li < most_negative ||
            (drop >= 0 && li == most_negative && active[i] < active[static_cast<std::size_t>(drop)])) {
          most_negative = li;
          drop = static_cast<int>(i);
        }
      }
      if (drop < 0) {
        rep.status = SolveStatus::Optimal;
        rep.solution = x;
        rep.objective = (x - u0).squaredNorm();
        rep.residual = cons.max_violation(x);
        return finish(rep);
      }
      active.erase(active.begin() + drop);
      continue;
    }

    double alpha = 1.0;
    int blocking = -1;
    for (int i = 0; i < k; ++i) {
      if (std::find(active.begin(), active.end(), i) != active.end()) continue;
      const double gp = cons.G().row(i).dot(p);
      if (gp <= 1e-14 * (1.0 + p.norm())) continue;
      const double slack = std::max(0.0, cons.h()(i) - cons.G().row(i).dot(x));
      const double ratio = slack / gp;
      if (ratio < alpha) {
        alpha = ratio;
        blocking = i;
      }
    }
    x += alpha * p;
    if (blocking >= 0) {
      active.push_back(blocking);
    }
  }
  rep.status = SolveStatus::MaxIterations;
  rep.solution = x;
  rep.residual = cons.max_violation(x);
  return finish(rep);
}

}  // namespace shield
