#include <chrono>
#include <cmath>

#include "shield/conic_solvers.hpp"

namespace shield {
namespace {

Matrix psd_part(const Matrix& x) {
  const EigenSystem es = eigendecompose(SymmetricMatrix(x));
  return es.vectors * es.values.cwiseMax(0.0).asDiagonal() * es.vectors.transpose();
}

}  // namespace

// Dykstra's alternating projections in the product space (z, X) between the
// graph {X = A(z)} and {X >= 0}. The z-block carries the metric
// W = I - delta * Gram(A1, A2), so the graph-weighted distance equals the
// Euclidean distance in z and the limit is the Euclidean projection.
SolveReport project_psd_affine_slice(const SymmetricMatrix& a0, const SymmetricMatrix& a1,
                                     const SymmetricMatrix& a2, const Vec2& z0, double tol) {
  const auto start = std::chrono::steady_clock::now();
  require(a0.dim() == a1.dim() && a0.dim() == a2.dim(), ErrorCode::DimMismatch,
          "slice matrices differ in size");
  require(z0.allFinite() && a0.is_finite() && a1.is_finite() && a2.is_finite(), ErrorCode::NonFinite,
          "non-finite slice data");
  const Matrix& m0 = a0.matrix();
  const Matrix& m1 = a1.matrix();
  const Matrix& m2 = a2.matrix();
  auto pencil = [&](const Vec2& z) { return Matrix(m0 + z(0) * m1 + z(1) * m2); };
  auto lmin = [&](const Vec2& z) { return min_eigenvalue(SymmetricMatrix(pencil(z))); };
  const double scale = 1.0 + m0.norm() + m1.norm() + m2.norm();

  SolveReport rep;
  auto done = [&](SolveStatus status, const std::optional<Vec2>& z) {
    rep.status = status;
    if (z) {
      rep.solution = Vector(*z);
      rep.objective = (*z - z0).squaredNorm();
      rep.residual = std::max(0.0, -lmin(*z));
    }
    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
  };

  if (lmin(z0) >= 0.0) return done(SolveStatus::Optimal, z0);

  Eigen::Matrix2d gram;
  gram << (m1.array() * m1.array()).sum(), (m1.array() * m2.array()).sum(),
      (m1.array() * m2.array()).sum(), (m2.array() * m2.array()).sum();
  const double gmax = gram.selfadjointView<Eigen::Upper>().eigenvalues().maxCoeff();
  if (gmax <= 1e-300) return done(SolveStatus::EmptySet, std::nullopt);
  const double delta = 0.5 / gmax;
  // With A0 > 0 the slice contains z = 0, so a stalled gap is slow progress.
  const bool a0_definite = min_eigenvalue(a0) > 0.0;
  const Eigen::Matrix2d w = Eigen::Matrix2d::Identity() - delta * gram;

  auto graph_project = [&](const Vec2& a, const Matrix& b) {
    const Matrix r = b - m0;
    Vec2 lt((m1.array() * r.array()).sum(), (m2.array() * r.array()).sum());
    return Vec2(w * a + delta * lt);
  };

  Vec2 xz = z0;
  Matrix xm = pencil(z0);
  Vec2 pz = Vec2::Zero(), qz = Vec2::Zero();
  Matrix pm = Matrix::Zero(m0.rows(), m0.cols()), qm = pm;
  Vec2 yz = xz;
  double gap = 0.0, last_gap = -1.0;
  int it = 0;
  constexpr int kMaxIter = 20000;
  for (; it < kMaxIter; ++it) {
    const Vec2 prev = yz;
    yz = graph_project(xz + pz, xm + pm);
    const Matrix ym = pencil(yz);
    pz = xz + pz - yz;
    pm = xm + pm - ym;
    const Matrix xm_new = psd_part(ym + qm);
    const Vec2 xz_new = yz + qz;
    qz = yz + qz - xz_new;
    qm = ym + qm - xm_new;
    xz = xz_new;
    xm = xm_new;
    gap = std::sqrt((xz - yz).squaredNorm() + delta * (xm - ym).squaredNorm());
    if (it > 0 && (yz - prev).norm() <= tol * (1.0 + yz.norm()) && gap <= std::sqrt(tol) * scale) break;
    if (it % 2000 == 1999) {
      if (!a0_definite && last_gap >= 0.0 && gap > 1e-6 * scale && std::abs(last_gap - gap) <= 1e-12 * scale)
        return done(SolveStatus::EmptySet, std::nullopt);
      last_gap = gap;
    }
  }
  rep.iterations = it + 1;

  // Restore exact feasibility by pulling toward z = 0 when A0 is positive definite.
  auto pull_in = [&](Vec2 z) {
    if (lmin(z) >= 0.0 || !a0_definite) return z;
    double lo = 0.0, hi = 1.0;
    for (int k = 0; k < 80; ++k) {
      const double mid = 0.5 * (lo + hi);
      if (lmin(Vec2(mid * z)) >= 0.0) lo = mid;
      else hi = mid;
    }
    return Vec2(lo * z);
  };
  Vec2 z = pull_in(yz);
  if (it >= kMaxIter) {
    // Dykstra can crawl on thin slices; the cutting-plane solver handles the
    // same problem directly.
    const SymmetricMatrix slopes[] = {a1, a2};
    const SolveReport cuts = solve_lmi_ls(Vector(z0), a0, slopes);
    if (cuts.ok()) {
      rep.iterations += cuts.iterations;
      return done(SolveStatus::Optimal, pull_in(Vec2((*cuts.solution)(0), (*cuts.solution)(1))));
    }
    if (gap > 1e-6 * scale) return done(SolveStatus::EmptySet, std::nullopt);
    return done(SolveStatus::MaxIterations, z);
  }
  return done(SolveStatus::Optimal, z);
}

}  // namespace shield
