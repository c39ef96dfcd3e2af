#include <chrono>
#include <cmath>

#include "shield/conic_solvers.hpp"

namespace shield {

SolveReport solve_lmi_ls(const Vector& u0, const SymmetricMatrix& f0,
                         std::span<const SymmetricMatrix> f, const LinearConstraintSet* linear) {
  const auto start = std::chrono::steady_clock::now();
  const int m = static_cast<int>(u0.size());
  require(static_cast<int>(f.size()) == m, ErrorCode::DimMismatch, "one pencil matrix per variable expected");
  if (linear) require(linear->dim() == m, ErrorCode::DimMismatch, "linear rows have wrong dimension");

  LinearConstraintSet cuts(m);
  if (linear) cuts.append(*linear);
  SolveReport rep;
  auto done = [&](SolveStatus status, const std::optional<Vector>& u, double resid) {
    rep.status = status;
    rep.solution = u;
    if (u) rep.objective = (*u - u0).squaredNorm();
    rep.residual = resid;
    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
  };

  constexpr int kMaxCuts = 500;
  Vector u = u0;
  if (linear && !linear->satisfied(u0, 1e-10)) {
    const SolveReport first = solve_ls_lin(u0, cuts);
    if (!first.ok()) return done(first.status, std::nullopt, first.residual);
    u = *first.solution;
  }
  int added = 0;
  while (true) {
    const SymmetricMatrix fu = affine_pencil(f0, f, u);
    const EigenSystem es = eigendecompose(fu);
    const double floor = -1e-7 * (1.0 + fu.frobenius_norm());
    if (es.values(0) >= floor) return done(SolveStatus::Optimal, u, std::max(0.0, -es.values(0)));
    if (added >= kMaxCuts) return done(SolveStatus::MaxIterations, u, -es.values(0));

    // One cut per violated eigenvector: q^T F(u) q >= 0.
    for (int k = 0; k < fu.dim() && es.values(k) < floor && added < kMaxCuts; ++k) {
      const Vector q = es.vectors.col(k);
      Vector row(m);
      for (int i = 0; i < m; ++i) row(i) = -q.dot(f[i].matrix() * q);
      const double rhs = q.dot(f0.matrix() * q);
      if (row.cwiseAbs().maxCoeff() <= 1e-14 * (1.0 + std::abs(rhs))) {
        return done(SolveStatus::Infeasible, std::nullopt, -es.values(0));
      }
      cuts.add_leq(row, rhs);
      ++added;
    }
    rep.iterations = added;
    const SolveReport sub = solve_ls_lin(u0, cuts);
    if (!sub.ok()) return done(sub.status, std::nullopt, sub.residual);
    u = *sub.solution;
  }
}

}  // namespace shield
