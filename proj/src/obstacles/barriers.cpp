#include <algorithm>
#include <cmath>

#include "shield/obstacles.hpp"

namespace shield {
namespace {

void check_position_map(const Matrix& c_pos, Eigen::Index n) {
  require(c_pos.rows() == 2 && c_pos.cols() == n, ErrorCode::DimMismatch,
          "position selector must be 2 x state dimension");
}

}  // namespace

QuadraticForm cbf_circle(const Circle& c, const Matrix& c_pos, double eps) {
  require(eps >= 0.0, ErrorCode::InvalidArgument, "buffer must be nonnegative");
  const double rho = c.radius + eps;
  return {-(c_pos.transpose() * c_pos), c_pos.transpose() * c.center, rho * rho - c.center.squaredNorm()};
}

QuadraticForm cbf_ellipse(const Ellipse& e, const Matrix& c_pos, double eps) {
  require(eps >= 0.0, ErrorCode::InvalidArgument, "buffer must be nonnegative");
  const Eigen::Matrix2d m = e.shape(eps);
  return {-(c_pos.transpose() * m * c_pos), c_pos.transpose() * (m * e.center),
          1.0 - e.center.dot(m * e.center)};
}

Vector polytope_face_values(const Polytope& poly, const Vector& x, const Matrix& c_pos, double eps) {
  check_position_map(c_pos, x.size());
  const Vec2 p = c_pos * x;
  Vector h(poly.face_count());
  for (int i = 0; i < poly.face_count(); ++i) h(i) = poly.normals()[i].dot(p) - poly.offsets()[i] - eps;
  return h;
}

LinearConstraintSet polytope_combinatorial_rows(const Polytope& poly, const Vector& x,
                                                const AffineDynamics& dyn, const Matrix& c_pos,
                                                double eps, double gamma) {
  check_position_map(c_pos, x.size());
  require(dyn.state_dim() == x.size(), ErrorCode::DimMismatch, "state does not match dynamics");
  const Vector hx = polytope_face_values(poly, x, c_pos, eps);
  const Vector hdrift = polytope_face_values(poly, dyn.A * x, c_pos, eps);
  const double hmax = hx.maxCoeff();
  const Matrix cb = c_pos * dyn.B;
  LinearConstraintSet rows(dyn.input_dim());
  for (int i = 0; i < poly.face_count(); ++i) {
    const double target = hx(i) - gamma * (hmax + std::abs(hx(i) - hmax));
    rows.add_geq(cb.transpose() * poly.normals()[i], target - hdrift(i));
  }
  return rows;
}

SymmetricMatrix spectrahedron_safe_matrix(const Spectrahedron& s, const Vector& x, const Matrix& c_pos,
                                          double ratio) {
  check_position_map(c_pos, x.size());
  require(ratio >= 0.0 && ratio < 1.0, ErrorCode::InvalidArgument, "shrink ratio must lie in [0, 1)");
  const Vec2 z = (1.0 - ratio) * s.to_local(c_pos * x);
  return -s.pencil(z);
}

LmiPair spectrahedron_indefinite_pair(const Spectrahedron& s, const Vector& x, const AffineDynamics& dyn,
                                      const Matrix& c_pos, double ratio, double gamma, double c_perp) {
  require(dyn.state_dim() == x.size(), ErrorCode::DimMismatch, "state does not match dynamics");
  const SymmetricMatrix hx = spectrahedron_safe_matrix(s, x, c_pos, ratio);
  const SymmetricMatrix hdrift = spectrahedron_safe_matrix(s, dyn.A * x, c_pos, ratio);
  const double lmax = max_eigenvalue(hx);
  const int p = hx.dim();
  LmiPair out;
  out.lambda_max = lmax;
  out.f0 = hdrift - (1.0 + c_perp) * hx + ((gamma + c_perp) * lmax) * SymmetricMatrix::identity(p);
  const Matrix dz = (1.0 - ratio) * s.rotation() * c_pos * dyn.B;
  for (int i = 0; i < dyn.input_dim(); ++i) {
    out.f.push_back(SymmetricMatrix(Matrix(-(dz(0, i) * s.a1.matrix() + dz(1, i) * s.a2.matrix()))));
  }
  return out;
}

}  // namespace shield
