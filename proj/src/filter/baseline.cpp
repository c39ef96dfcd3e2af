#include <chrono>
#include <cmath>
#include <limits>

#include "shield/filter.hpp"
#include "slack.hpp"

namespace shield {
namespace {

using Clock = std::chrono::steady_clock;

struct QuadraticRow {
  Matrix m;
  Vector v;
  double d;
  double value(const Vector& u) const { return u.dot(m * u) + 2.0 * v.dot(u) + d; }
};

// Candidate minimizers of ||u - u0||^2 with q(u) <= 0 tight and the rows in
// `active` held as equalities.
void restricted_candidates(const Vector& u0, const QuadraticRow& q, const Matrix& active,
                           const Vector& rhs, std::vector<Vector>& out) {
  const int m = static_cast<int>(u0.size());
  Vector ubar = u0;
  Matrix basis;
  if (active.rows() == 0) {
    basis = Matrix::Identity(m, m);
  } else {
    Eigen::FullPivHouseholderQR<Matrix> qr(active.transpose());
    qr.setThreshold(1e-10);
    if (qr.rank() < active.rows()) return;
    // Closest point to u0 on {active u = rhs}.
    const Matrix gram = active * active.transpose();
    ubar = u0 - active.transpose() * gram.ldlt().solve(active * u0 - rhs);
    const Matrix qfull = qr.matrixQ();
    basis = qfull.rightCols(m - active.rows());
  }
  const int nd = static_cast<int>(basis.cols());
  if (nd == 0) {
    out.push_back(ubar);
    return;
  }
  const Matrix mr = basis.transpose() * q.m * basis;
  const Vector vr = basis.transpose() * (q.m * ubar + q.v);
  const double dr = q.value(ubar);
  if (nd == 1) {
    // Both roots of alpha y^2 + 2 beta y + delta, plus y = 0 when feasible.
    const double alpha = mr(0, 0), beta = vr(0);
    if (dr <= 0.0) out.push_back(ubar);
    if (std::abs(alpha) <= 1e-14 * (1.0 + std::abs(beta))) {
      if (std::abs(beta) > 0.0) out.push_back(ubar + basis.col(0) * (-dr / (2.0 * beta)));
      return;
    }
    const double disc = beta * beta - alpha * dr;
    if (disc < 0.0) return;
    const double s = std::sqrt(disc);
    out.push_back(ubar + basis.col(0) * ((-beta + s) / alpha));
    out.push_back(ubar + basis.col(0) * ((-beta - s) / alpha));
    return;
  }
  const SolveReport rep = solve_gtrs(Vector::Zero(nd), SymmetricMatrix(mr), vr, dr);
  if (rep.ok()) out.push_back(ubar + basis * *rep.solution);
}

// Minimizes ||u - u0||^2 + w sum max(0, G u - h)^2 on the circle q(u) = 0
// parametrized by w + D u = R (cos t, sin t).
std::optional<Vector> penalized_on_boundary(const Vector& u0, const Matrix& dmat, const Vec2& w,
                                            double radius, const LinearConstraintSet& rows, double weight) {
  if (dmat.rows() != 2 || dmat.cols() != 2 || std::abs(dmat.determinant()) <= 1e-300) return std::nullopt;
  const Eigen::Matrix2d dinv = Eigen::Matrix2d(dmat).inverse();
  auto u_of = [&](double t) { return Vector(dinv * (radius * Vec2(std::cos(t), std::sin(t)) - w)); };
  auto cost = [&](double t) {
    const Vector u = u_of(t);
    double c = (u - u0).squaredNorm();
    if (rows.inequality_count() > 0) c += weight * (rows.G() * u - rows.h()).cwiseMax(0.0).squaredNorm();
    return c;
  };
  constexpr int kSamples = 3600;
  int best = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int k = 0; k < kSamples; ++k) {
    const double c = cost(2.0 * M_PI * k / kSamples);
    if (c < best_cost) {
      best_cost = c;
      best = k;
    }
  }
  const double h = 2.0 * M_PI / kSamples;
  double a = h * (best - 1), b = h * (best + 1);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 100 && b - a > 1e-14; ++it) {
    const double c1 = b - g * (b - a), c2 = a + g * (b - a);
    if (cost(c1) < cost(c2)) b = c2;
    else a = c1;
  }
  const double t = 0.5 * (a + b);
  return cost(t) <= best_cost ? u_of(t) : u_of(h * best);
}

// Gradient descent with Armijo backtracking; J is C^1 and piecewise smooth.
template <class Cost, class Grad>
Vector descend(Vector u, const Cost& cost, const Grad& grad) {
  double f = cost(u);
  double step = 1.0;
  for (int it = 0; it < 500; ++it) {
    const Vector g = grad(u);
    const double gn = g.squaredNorm();
    if (gn <= 1e-24 * (1.0 + f)) break;
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt, step *= 0.5) {
      const Vector trial = u - step * g;
      const double ft = cost(trial);
      if (ft <= f - 1e-4 * step * gn) {
        u = trial;
        f = ft;
        moved = true;
        break;
      }
    }
    if (!moved) break;
    step *= 4.0;
  }
  return u;
}

}  // namespace

FilterOutcome nonconvex_circle_step(const Vector& x, const Vector& u_nom, const Circle& circle,
                                    const AffineDynamics& dyn, const Matrix& c_pos, double gamma,
                                    double eps, const LinearConstraintSet& extra, double slack_weight) {
  require(x.size() == dyn.state_dim() && u_nom.size() == dyn.input_dim() && extra.dim() == dyn.input_dim(),
          ErrorCode::DimMismatch, "filter inputs do not match the dynamics");
  require(gamma > 0.0 && gamma <= 1.0 && eps >= 0.0, ErrorCode::InvalidArgument, "invalid gamma or buffer");
  FilterOutcome out;
  out.u = u_nom;
  const auto t0 = Clock::now();

  // b(x+) >= (1 - gamma) b(x)  <=>  q(u) <= 0.
  const double rho = circle.radius + eps;
  const Vec2 w = c_pos * (dyn.A * x) - circle.center;
  const Matrix dmat = c_pos * dyn.B;
  const double bx = (c_pos * x - circle.center).squaredNorm() - rho * rho;
  const QuadraticRow q{-(dmat.transpose() * dmat), -(dmat.transpose() * w),
                       -w.squaredNorm() + rho * rho + (1.0 - gamma) * bx};
  const double qtol = 1e-9 * (1.0 + std::abs(q.d) + w.squaredNorm());
  auto feasible = [&](const Vector& u) { return q.value(u) <= qtol && extra.satisfied(u, 1e-9); };
  auto finish = [&]() {
    out.solve_time = std::chrono::duration<double>(Clock::now() - t0).count();
    return out;
  };

  if (feasible(u_nom)) {
    out.mode = FilterMode::NominalPassthrough;
    return finish();
  }

  std::optional<Vector> best;
  const SolveReport relaxed = solve_ls_lin(u_nom, extra);
  out.reports.push_back(relaxed);
  if (relaxed.ok()) {
    if (q.value(*relaxed.solution) <= qtol) {
      best = *relaxed.solution;
    } else {
      // The quadratic row is active; enumerate active linear subsets.
      const LinearConstraintSet rows = extra.deduplicated();
      const int k = rows.inequality_count();
      const int m = rows.dim();
      std::vector<Vector> cands;
      std::vector<int> subset;
      auto visit = [&](auto&& self, int first) -> void {
        const int ne = rows.equality_count();
        Matrix act(ne + static_cast<int>(subset.size()), m);
        Vector rhs(act.rows());
        if (ne > 0) {
          act.topRows(ne) = rows.E();
          rhs.head(ne) = rows.e();
        }
        for (std::size_t s = 0; s < subset.size(); ++s) {
          act.row(ne + static_cast<int>(s)) = rows.G().row(subset[s]);
          rhs(ne + static_cast<int>(s)) = rows.h()(subset[s]);
        }
        restricted_candidates(u_nom, q, act, rhs, cands);
        if (static_cast<int>(act.rows()) >= m) return;
        for (int i = first; i < k; ++i) {
          subset.push_back(i);
          self(self, i + 1);
          subset.pop_back();
        }
      };
      visit(visit, 0);
      double best_cost = std::numeric_limits<double>::infinity();
      for (const Vector& c : cands) {
        if (!c.allFinite() || !feasible(c)) continue;
        const double cost = (c - u_nom).squaredNorm();
        if (cost < best_cost) {
          best_cost = cost;
          best = c;
        }
      }
    }
  }
  if (best) {
    out.u = *best;
    out.mode = FilterMode::Filtered;
    return finish();
  }

  // Slack retry with nonnegative slack on every row, the quadratic included:
  // minimize J(u) = ||u - u0||^2 + w (q(u)_+^2 + ||(G u - h)_+||^2). The
  // linear-slack QP minimizer is optimal when it satisfies q; otherwise the
  // best of a local descent from it and the best point on q = 0 is taken.
  const detail::SlackSolution convex = detail::solve_with_slack(u_nom, extra, slack_weight);
  out.reports.push_back(convex.report);
  auto violation = [&](const Vector& u) {
    Vector s(1 + extra.inequality_count());
    s(0) = std::max(0.0, q.value(u));
    if (extra.inequality_count() > 0) s.tail(extra.inequality_count()) = (extra.G() * u - extra.h()).cwiseMax(0.0);
    return s;
  };
  auto total_cost = [&](const Vector& u) { return (u - u_nom).squaredNorm() + slack_weight * violation(u).squaredNorm(); };
  std::optional<Vector> relaxed_u;
  if (convex.report.ok() && extra.equality_count() == 0) {
    relaxed_u = convex.u;
    if (q.value(convex.u) > 0.0) {
      relaxed_u = descend(convex.u, total_cost, [&](const Vector& u) {
        const Vector s = violation(u);
        Vector g = 2.0 * (u - u_nom) + 2.0 * slack_weight * s(0) * 2.0 * (q.m * u + q.v);
        if (extra.inequality_count() > 0) g += 2.0 * slack_weight * extra.G().transpose() * s.tail(extra.inequality_count());
        return g;
      });
      const double r2 = rho * rho + (1.0 - gamma) * bx;
      if (r2 > 0.0) {
        const auto on_circle = penalized_on_boundary(u_nom, dmat, w, std::sqrt(r2), extra, slack_weight);
        if (on_circle && on_circle->allFinite() && total_cost(*on_circle) < total_cost(*relaxed_u)) relaxed_u = on_circle;
      }
    }
  }
  if (relaxed_u && relaxed_u->allFinite()) {
    out.u = *relaxed_u;
    out.slack = violation(out.u);
    out.mode = FilterMode::SlackRelaxed;
  } else {
    out.mode = FilterMode::FallbackNominal;
    out.note = "quadratic barrier and linear rows admit no relaxed solution";
  }
  return finish();
}

}  // namespace shield
