#include <cmath>
#include <limits>

#include "shield/filter.hpp"

namespace shield {
namespace {

Vec2 depth_gradient(const Obstacle& obs, const Vec2& p) {
  constexpr double h = 1e-5;
  Vec2 g;
  for (int i = 0; i < 2; ++i) {
    Vec2 e = Vec2::Zero();
    e(i) = h;
    g(i) = (depth(obs, p + e) - depth(obs, p - e)) / (2.0 * h);
  }
  return g;
}

}  // namespace

Halfspace exterior_halfspace(const Vector& x, const ProjectionResult& proj, const Matrix& c_pos,
                             double eps, double switch_band) {
  require(c_pos.rows() == 2 && c_pos.cols() == x.size(), ErrorCode::DimMismatch,
          "position selector does not match the state");
  require(eps >= 0.0, ErrorCode::InvalidArgument, "buffer must be nonnegative");
  const Vec2 diff = c_pos * x - proj.point;
  const double dist = diff.norm();
  require(dist > switch_band, ErrorCode::DegenerateProjection,
          "exterior halfspace needs the state outside the switching band");
  const Vec2 d = diff / dist;
  return {c_pos.transpose() * d, eps + d.dot(proj.point)};
}

Halfspace boundary_halfspace(const Vector& x, const Obstacle& obs, const Matrix& c_pos, double eps,
                             double switch_band) {
  require(c_pos.rows() == 2 && c_pos.cols() == x.size(), ErrorCode::DimMismatch,
          "position selector does not match the state");
  const SupportingNormal sn = boundary_normal(obs, c_pos * x, switch_band);
  return {c_pos.transpose() * sn.normal, eps + sn.offset};
}

Halfspace interior_halfspace(const Vector& x, const Obstacle& obs, const Matrix& c_pos) {
  require(c_pos.rows() == 2 && c_pos.cols() == x.size(), ErrorCode::DimMismatch,
          "position selector does not match the state");
  const Vec2 p = c_pos * x;
  const double r = depth(obs, p);
  require(r > 0.0, ErrorCode::NotInside, "interior halfspace needs a point of positive depth");
  Vec2 g = depth_gradient(obs, p);
  if (g.norm() <= 1e-8) g = depth_gradient(obs, p + Vec2(1e-6, 0.0));
  require(g.norm() > 1e-8, ErrorCode::ZeroGradient, "depth gradient vanishes");
  const Vector a = -(c_pos.transpose() * (g / g.norm()));
  return {a, a.dot(x) + r};
}

HalfspaceStack::HalfspaceStack(std::vector<Halfspace> parts) : parts_(std::move(parts)) {
  for (const Halfspace& h : parts_) {
    require(h.a.size() == parts_.front().a.size(), ErrorCode::DimMismatch, "halfspaces differ in dimension");
    require(h.a.allFinite() && std::isfinite(h.b), ErrorCode::NonFinite, "non-finite halfspace");
  }
}

double HalfspaceStack::value(const Vector& z) const {
  double v = std::numeric_limits<double>::infinity();
  for (const Halfspace& h : parts_) v = std::min(v, h.value(z));
  return v;
}

LinearConstraintSet HalfspaceStack::step_rows(const Vector& x, const AffineDynamics& dyn, double gamma) const {
  LinearConstraintSet rows(dyn.input_dim());
  const Vector drift = dyn.A * x;
  for (const Halfspace& h : parts_) {
    const Vector row = dyn.B.transpose() * h.a;
    const double rhs = (1.0 - gamma) * h.value(x) - h.value(drift);
    if (row.cwiseAbs().maxCoeff() <= 1e-14) {
      require(rhs <= 0.0, ErrorCode::InvalidArgument, "barrier row has no input authority");
      continue;
    }
    rows.add_geq(row, rhs);
  }
  return rows;
}

HalfspaceStack assemble_subset_function(std::vector<Halfspace> parts) {
  return HalfspaceStack(std::move(parts));
}

Location classify(const Obstacle& obs, const Vec2& p, const ProjectionResult& proj, double band) {
  if (proj.distance > band) return Location::Exterior;
  if (!contains(obs, p, 0.0)) return Location::Boundary;
  return depth(obs, p) > band ? Location::Interior : Location::Boundary;
}

}  // namespace shield
