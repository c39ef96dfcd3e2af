#include <chrono>
#include <cmath>
#include <limits>

#include "shield/conic_solvers.hpp"

namespace shield {

SolveReport solve_gtrs(const Vector& u0, const SymmetricMatrix& msym, const Vector& v, double d) {
  const auto start = std::chrono::steady_clock::now();
  const int n = msym.dim();
  require(u0.size() == n && v.size() == n, ErrorCode::DimMismatch, "GTRS data dimensions differ");
  require(u0.allFinite() && v.allFinite() && std::isfinite(d) && msym.is_finite(),
          ErrorCode::NonFinite, "non-finite GTRS data");

  const Matrix& m = msym.matrix();
  auto q_of = [&](const Vector& u) { return u.dot(m * u) + 2.0 * v.dot(u) + d; };
  SolveReport rep;
  auto done = [&](SolveStatus status, const std::optional<Vector>& u) {
    rep.status = status;
    rep.solution = u;
    if (u) {
      rep.objective = (*u - u0).squaredNorm();
      rep.residual = std::max(0.0, q_of(*u));
    }
    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
  };

  if (q_of(u0) <= 0.0) return done(SolveStatus::Optimal, u0);

  const EigenSystem es = eigendecompose(msym);
  const Vector& lam = es.values;
  const Matrix& qm = es.vectors;
  const Vector a = qm.transpose() * u0;
  const Vector b = qm.transpose() * v;
  const double scale = 1.0 + lam.cwiseAbs().maxCoeff();
  const double zero_eig = 1e-14 * scale;

  // Empty feasible set: M >= 0, v in range(M), and min q > 0.
  if (lam(0) >= -zero_eig) {
    bool bounded_below = true;
    double qmin = d;
    for (int i = 0; i < n; ++i) {
      if (lam(i) <= zero_eig) {
        if (std::abs(b(i)) > 1e-14 * (1.0 + b.norm())) bounded_below = false;
      } else {
        qmin -= b(i) * b(i) / lam(i);
      }
    }
    if (bounded_below && qmin > 1e-12 * (1.0 + std::abs(d))) return done(SolveStatus::Infeasible, std::nullopt);
  }

  auto y_of = [&](double mu) {
    Vector y(n);
    for (int i = 0; i < n; ++i) y(i) = (a(i) - mu * b(i)) / (1.0 + mu * lam(i));
    return y;
  };
  auto phi_y = [&](const Vector& y) { return y.dot(lam.asDiagonal() * y) + 2.0 * b.dot(y) + d; };

  const double inf = std::numeric_limits<double>::infinity();
  const double mu_max = lam(0) < -zero_eig ? -1.0 / lam(0) : inf;

  if (std::isfinite(mu_max)) {
    // Hard case: the multiplier pole is not excited by the data.
    bool hard = true;
    for (int i = 0; i < n && hard; ++i) {
      if (std::abs(lam(i) - lam(0)) > 1e-12 * scale) continue;
      const double num = a(i) - mu_max * b(i);
      hard = std::abs(num) <= 1e-10 * (1.0 + std::abs(a(i)) + mu_max * std::abs(b(i)));
    }
    if (hard) {
      Vector ybar(n);
      for (int i = 0; i < n; ++i) {
        ybar(i) = std::abs(lam(i) - lam(0)) <= 1e-12 * scale
                      ? 0.0
                      : (a(i) - mu_max * b(i)) / (1.0 + mu_max * lam(i));
      }
      const double phi_hard = phi_y(ybar);
      if (phi_hard > 0.0) {
        // Move along the first extreme eigenvector until the constraint is tight.
        const double qa = lam(0), qb = b(0), qc = phi_hard;
        const double disc = std::sqrt(std::max(0.0, qb * qb - qa * qc));
        const double t1 = (-qb + disc) / qa, t2 = (-qb - disc) / qa;
        const double tau = std::abs(t1 - a(0)) <= std::abs(t2 - a(0)) ? t1 : t2;
        Vector y = ybar;
        y(0) = tau;
        rep.iterations = 1;
        return done(SolveStatus::Optimal, Vector(qm * y));
      }
    }
  }

  // phi(mu) is nonincreasing on [0, mu_max); bracket its root and bisect.
  double lo = 0.0, hi;
  if (std::isfinite(mu_max)) {
    hi = mu_max;
  } else {
    hi = 1.0;
    int grow = 0;
    while (phi_y(y_of(hi)) > 0.0) {
      lo = hi;
      hi *= 2.0;
      if (++grow > 2000 || !std::isfinite(hi)) return done(SolveStatus::NumericalFailure, std::nullopt);
    }
  }
  int it = 0;
  for (; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double phi = phi_y(y_of(mid));
    if (!std::isfinite(phi) || phi <= 0.0) hi = mid;
    else lo = mid;
  }
  rep.iterations = it;
  Vector y = y_of(hi);
  if (!y.allFinite()) y = y_of(lo);
  if (!y.allFinite()) return done(SolveStatus::NumericalFailure, std::nullopt);
  return done(SolveStatus::Optimal, Vector(qm * y));
}

}  // namespace shield
