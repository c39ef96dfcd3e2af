#include <algorithm>
#include <cmath>

#include "shield/plants.hpp"

namespace shield {

LqrGain dare_gain(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r, double tol,
                  int max_iterations) {
  const auto n = a.rows();
  require(a.cols() == n && b.rows() == n && q.rows() == n && q.cols() == n &&
              r.rows() == b.cols() && r.cols() == b.cols(),
          ErrorCode::DimMismatch, "LQR data dimensions are inconsistent");
  require(min_eigenvalue(SymmetricMatrix(q)) >= -1e-12, ErrorCode::InvalidArgument, "Q must be PSD");
  require(min_eigenvalue(SymmetricMatrix(r)) > 0.0, ErrorCode::InvalidArgument, "R must be positive definite");

  Matrix p = q;
  for (int it = 1; it <= max_iterations; ++it) {
    const Matrix btp = b.transpose() * p;
    const Matrix gain = (r + btp * b).ldlt().solve(btp * a);
    Matrix next = q + a.transpose() * p * a - a.transpose() * p * b * gain;
    next = 0.5 * (next + next.transpose());
    const double change = (next - p).lpNorm<Eigen::Infinity>();
    p = next;
    if (!p.allFinite()) break;
    if (change <= tol * (1.0 + p.lpNorm<Eigen::Infinity>())) {
      const Matrix bp = b.transpose() * p;
      return LqrGain{(r + bp * b).ldlt().solve(bp * a), p, it};
    }
  }
  throw Error(ErrorCode::NoConvergence, "Riccati iteration did not converge");
}

AxisServo::AxisServo(double ts, double inertia, const AxisWeights& w, double integrator_limit)
    : ts_(ts), integrates_(w.integral > 0.0), limit_(integrator_limit) {
  require(ts > 0.0 && inertia > 0.0 && w.input > 0.0, ErrorCode::InvalidArgument,
          "servo needs positive sample time, inertia and input weight");
  const int n = integrates_ ? 3 : 2;
  Matrix a = Matrix::Identity(n, n);
  a(0, 1) = ts;
  Matrix b = Matrix::Zero(n, 1);
  b(0, 0) = ts * ts / (2.0 * inertia);
  b(1, 0) = ts / inertia;
  Vector qd(n);
  qd(0) = w.position;
  qd(1) = w.velocity;
  if (integrates_) {
    a(2, 0) = ts;
    qd(2) = w.integral;
  }
  gain_ = dare_gain(a, b, Matrix(qd.asDiagonal()), Matrix::Constant(1, 1, w.input));
  const Matrix closed = a - b * gain_.K;
  const double radius = Eigen::EigenSolver<Matrix>(closed, false).eigenvalues().cwiseAbs().maxCoeff();
  require(radius < 1.0, ErrorCode::NoConvergence, "servo gain does not stabilize the design model");
}

double AxisServo::command(double pos, double vel, double ref) const {
  double u = -(gain_.K(0, 0) * (pos - ref) + gain_.K(0, 1) * vel);
  if (integrates_) u -= gain_.K(0, 2) * integral_;
  return u;
}

void AxisServo::advance(double pos, double ref) {
  if (integrates_) integral_ = std::clamp(integral_ + ts_ * (pos - ref), -limit_, limit_);
}

}  // namespace shield
