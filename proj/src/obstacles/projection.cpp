#include <cmath>
#include <limits>

#include "shield/obstacles.hpp"

namespace shield {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---- Ellipse in its own frame: semi-axes l, point y --------------------------

double ellipse_level(const Vec2& w, const Vec2& l) {
  return w(0) * w(0) / (l(0) * l(0)) + w(1) * w(1) / (l(1) * l(1));
}

// Closest boundary point to y, inside or outside. Root of
// F(t) = sum (l_i y_i / (l_i^2 + t))^2 - 1 on (-min l^2, inf), where F decreases;
// safeguarded Newton with bisection fallback.
Vec2 ellipse_nearest_boundary(const Vec2& y, const Vec2& l, int* iterations = nullptr) {
  const Vec2 l2 = l.cwiseProduct(l);
  auto f = [&](double t) {
    const double a = l(0) * y(0) / (l2(0) + t), b = l(1) * y(1) / (l2(1) + t);
    return a * a + b * b - 1.0;
  };
  auto df = [&](double t) {
    const double a = l(0) * y(0), b = l(1) * y(1);
    return -2.0 * a * a / std::pow(l2(0) + t, 3) - 2.0 * b * b / std::pow(l2(1) + t, 3);
  };
  auto point = [&](double t) { return Vec2(l2(0) * y(0) / (l2(0) + t), l2(1) * y(1) / (l2(1) + t)); };

  const int small = l(0) <= l(1) ? 0 : 1;
  const int other = 1 - small;
  double lo, hi;
  if (f(0.0) <= 0.0) {
    lo = -l2(small);
    hi = 0.0;
  } else {
    lo = 0.0;
    hi = l.maxCoeff() * y.norm();
  }
  double t = hi > 0.0 ? 0.0 : 0.5 * (lo + hi);
  int it = 0;
  for (; it < 200; ++it) {
    const double ft = f(t);
    if (ft == 0.0) break;
    if (ft > 0.0) lo = t;
    else hi = t;
    double next = t - ft / df(t);
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - t);
    t = next;
    if (step <= 1e-12 * (1.0 + std::abs(t)) || hi - lo <= 1e-15 * (1.0 + std::abs(t))) break;
  }
  if (iterations) *iterations = it;
  Vec2 w = point(t);
  if (std::abs(ellipse_level(w, l) - 1.0) > 1e-9 && l2(other) > l2(small)) {
    // y lies on the long axis deep inside: the nearest points leave the axis.
    w(other) = l2(other) * y(other) / (l2(other) - l2(small));
    const double rest = std::max(0.0, 1.0 - w(other) * w(other) / l2(other));
    w(small) = (y(small) < 0.0 ? -1.0 : 1.0) * l(small) * std::sqrt(rest);
  }
  if (!w.allFinite() || std::abs(ellipse_level(w, l) - 1.0) > 1e-6) {
    // Degenerate data (e.g. y at the center of a circle-shaped ellipse).
    w = Vec2::Zero();
    w(small) = l(small);
  }
  return w;
}

// ---- Spectrahedron radial exits -------------------------------------------

// Exit distances along rays from an interior local point z.
class RadialProbe {
 public:
  RadialProbe(const Spectrahedron& s, const Vec2& z) : s_(s) {
    const EigenSystem es = eigendecompose(s.pencil(z));
    interior_ = es.values(0) > 0.0;
    if (interior_) {
      isqrt_ = es.vectors * es.values.cwiseSqrt().cwiseInverse().asDiagonal() * es.vectors.transpose();
    }
  }
  bool interior() const { return interior_; }

  double exit(const Vec2& d) const {
    const Matrix b = d(0) * s_.a1.matrix() + d(1) * s_.a2.matrix();
    const double top = max_eigenvalue(SymmetricMatrix(Matrix(-(isqrt_ * b * isqrt_))));
    return top > 0.0 ? 1.0 / top : kInf;
  }
  double exit_angle(double phi) const { return exit(Vec2(std::cos(phi), std::sin(phi))); }

 private:
  const Spectrahedron& s_;
  bool interior_ = false;
  Matrix isqrt_;
};

// Minimizes f over the circle: `samples` angles, then golden section around the best.
template <class F>
std::pair<double, double> minimize_on_circle(F f, int samples) {
  int best = 0;
  double best_val = kInf;
  for (int k = 0; k < samples; ++k) {
    const double v = f(2.0 * M_PI * k / samples);
    if (v < best_val) {
      best_val = v;
      best = k;
    }
  }
  const double h = 2.0 * M_PI / samples;
  double a = h * (best - 1), b = h * (best + 1);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 80 && b - a > 1e-13; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  const double phi = fc < fd ? c : d;
  const double val = std::min(fc, fd);
  if (val <= best_val) return {phi, val};
  return {h * best, best_val};
}

double spectrahedron_depth_local(const Spectrahedron& s, const Vec2& z) {
  const RadialProbe probe(s, z);
  if (!probe.interior()) return 0.0;
  return minimize_on_circle([&](double phi) { return probe.exit_angle(phi); }, 64).second;
}

}  // namespace

bool contains(const Obstacle& obs, const Vec2& p, double tol) {
  switch (obs.kind()) {
    case ObstacleKind::Circle: {
      const Circle& c = obs.as<Circle>();
      return (p - c.center).norm() <= c.radius + tol * (1.0 + c.radius);
    }
    case ObstacleKind::Ellipse: {
      const Ellipse& e = obs.as<Ellipse>();
      return ellipse_level(e.rotation().transpose() * (p - e.center), Vec2(e.major, e.minor)) <= 1.0 + tol;
    }
    case ObstacleKind::Polytope: {
      const Polytope& poly = obs.as<Polytope>();
      for (int i = 0; i < poly.face_count(); ++i)
        if (poly.normals()[i].dot(p) - poly.offsets()[i] > tol * (1.0 + std::abs(poly.offsets()[i]))) return false;
      return true;
    }
    case ObstacleKind::Spectrahedron: {
      const Spectrahedron& s = obs.as<Spectrahedron>();
      const SymmetricMatrix a = s.pencil(s.to_local(p));
      return min_eigenvalue(a) >= -tol * (1.0 + a.frobenius_norm());
    }
  }
  return false;
}

ProjectionResult project(const Obstacle& obs, const Vec2& p) {
  require(p.allFinite(), ErrorCode::NonFinite, "projection of a non-finite point");
  ProjectionResult out{p, 0.0, SolveStatus::Optimal, 0};
  switch (obs.kind()) {
    case ObstacleKind::Circle: {
      const Circle& c = obs.as<Circle>();
      const Vec2 d = p - c.center;
      const double r = d.norm();
      if (r > c.radius) out.point = c.center + c.radius * d / r;
      break;
    }
    case ObstacleKind::Ellipse: {
      const Ellipse& e = obs.as<Ellipse>();
      const Eigen::Matrix2d q = e.rotation();
      const Vec2 l(e.major, e.minor);
      const Vec2 y = q.transpose() * (p - e.center);
      if (ellipse_level(y, l) > 1.0) out.point = e.center + q * ellipse_nearest_boundary(y, l, &out.iterations);
      break;
    }
    case ObstacleKind::Polytope: {
      const Polytope& poly = obs.as<Polytope>();
      if (contains(obs, p, 0.0)) break;
      LinearConstraintSet rows(2);
      for (int i = 0; i < poly.face_count(); ++i) rows.add_leq(Vector(poly.normals()[i]), poly.offsets()[i]);
      Vec2 warm = poly.vertices().front();
      for (const Vec2& v : poly.vertices())
        if ((v - p).squaredNorm() < (warm - p).squaredNorm()) warm = v;
      const SolveReport rep = solve_ls_lin(Vector(p), rows, Vector(warm));
      out.status = rep.status;
      out.iterations = rep.iterations;
      if (rep.solution) out.point = Vec2((*rep.solution)(0), (*rep.solution)(1));
      if (!rep.ok()) throw Error(ErrorCode::DegenerateProjection, "polytope projection failed");
      break;
    }
    case ObstacleKind::Spectrahedron: {
      const Spectrahedron& s = obs.as<Spectrahedron>();
      const SolveReport rep = project_psd_affine_slice(s.a0, s.a1, s.a2, s.to_local(p));
      out.status = rep.status;
      out.iterations = rep.iterations;
      if (!rep.solution) throw Error(ErrorCode::DegenerateProjection, "spectrahedron projection failed");
      out.point = s.to_world(Vec2((*rep.solution)(0), (*rep.solution)(1)));
      break;
    }
  }
  out.distance = (p - out.point).norm();
  return out;
}

double depth(const Obstacle& obs, const Vec2& p) {
  require(p.allFinite(), ErrorCode::NonFinite, "depth of a non-finite point");
  switch (obs.kind()) {
    case ObstacleKind::Circle: {
      const Circle& c = obs.as<Circle>();
      return std::max(0.0, c.radius - (p - c.center).norm());
    }
    case ObstacleKind::Ellipse: {
      const Ellipse& e = obs.as<Ellipse>();
      const Vec2 l(e.major, e.minor);
      const Vec2 y = e.rotation().transpose() * (p - e.center);
      if (ellipse_level(y, l) >= 1.0) return 0.0;
      return (ellipse_nearest_boundary(y, l) - y).norm();
    }
    case ObstacleKind::Polytope: {
      // Largest R with n_i^T p + R ||n_i|| <= o_i.
      const Polytope& poly = obs.as<Polytope>();
      LinearConstraintSet rows(1);
      for (int i = 0; i < poly.face_count(); ++i)
        rows.add_leq(Vector::Constant(1, poly.normals()[i].norm()), poly.offsets()[i] - poly.normals()[i].dot(p));
      const SolveReport rep = solve_lp(Vector::Ones(1), rows);
      if (!rep.ok()) throw Error(ErrorCode::DegenerateProjection, "polytope depth LP failed");
      return std::max(0.0, (*rep.solution)(0));
    }
    case ObstacleKind::Spectrahedron: {
      const Spectrahedron& s = obs.as<Spectrahedron>();
      return spectrahedron_depth_local(s, s.to_local(p));
    }
  }
  return 0.0;
}

double signed_distance(const Obstacle& obs, const Vec2& p) {
  if (contains(obs, p, 0.0)) return -depth(obs, p);
  return project(obs, p).distance;
}

SupportingNormal boundary_normal(const Obstacle& obs, const Vec2& p, double band) {
  Vec2 n;
  switch (obs.kind()) {
    case ObstacleKind::Circle: {
      n = p - obs.as<Circle>().center;
      break;
    }
    case ObstacleKind::Ellipse: {
      const Ellipse& e = obs.as<Ellipse>();
      const Eigen::Matrix2d q = e.rotation();
      const Vec2 l(e.major, e.minor);
      const Vec2 w = ellipse_nearest_boundary(q.transpose() * (p - e.center), l);
      n = e.shape() * (q * w);
      break;
    }
    case ObstacleKind::Polytope: {
      const Polytope& poly = obs.as<Polytope>();
      double gmax = -kInf;
      for (int i = 0; i < poly.face_count(); ++i)
        gmax = std::max(gmax, poly.normals()[i].dot(p) - poly.offsets()[i]);
      n = Vec2::Zero();
      for (int i = 0; i < poly.face_count(); ++i) {
        const double g = poly.normals()[i].dot(p) - poly.offsets()[i];
        if (g >= -band || g >= gmax - 1e-12) n += poly.normals()[i];
      }
      break;
    }
    case ObstacleKind::Spectrahedron: {
      const Spectrahedron& s = obs.as<Spectrahedron>();
      const Vec2 z = s.to_local(p);
      const EigenSystem es = eigendecompose(s.pencil(z));
      const Vector q1 = es.vectors.col(0);
      const Vec2 d(-q1.dot(s.a1.matrix() * q1), -q1.dot(s.a2.matrix() * q1));
      const double dn = d.norm();
      require(dn > 1e-12, ErrorCode::NoNormalAvailable, "spectrahedron pencil gives no normal direction");
      // Every z' in the set satisfies d^T z' <= d^T z + lambda_min(A(z)).
      const Vec2 dl = d / dn;
      const Vec2 nw = s.rotation().transpose() * dl;
      return {nw, nw.dot(s.center) + dl.dot(z) + es.values(0) / dn};
    }
  }
  require(n.norm() > 1e-12, ErrorCode::NoNormalAvailable, "no outward normal at this point");
  n.normalize();
  return {n, n.dot(support_point(obs, n))};
}

Vec2 support_point(const Obstacle& obs, const Vec2& direction) {
  require(direction.norm() > 0.0, ErrorCode::InvalidArgument, "support direction must be nonzero");
  const Vec2 n = direction.normalized();
  switch (obs.kind()) {
    case ObstacleKind::Circle: {
      const Circle& c = obs.as<Circle>();
      return c.center + c.radius * n;
    }
    case ObstacleKind::Ellipse: {
      const Ellipse& e = obs.as<Ellipse>();
      const Eigen::Matrix2d minv = e.shape().inverse();
      return e.center + minv * n / std::sqrt(n.dot(minv * n));
    }
    case ObstacleKind::Polytope: {
      const Polytope& poly = obs.as<Polytope>();
      Vec2 best = poly.vertices().front();
      for (const Vec2& v : poly.vertices())
        if (n.dot(v) > n.dot(best)) best = v;
      return best;
    }
    case ObstacleKind::Spectrahedron: {
      const Spectrahedron& s = obs.as<Spectrahedron>();
      const RadialProbe probe(s, Vec2::Zero());
      const Vec2 nl = s.rotation() * n;
      auto neg_support = [&](double phi) {
        const Vec2 d(std::cos(phi), std::sin(phi));
        return -probe.exit(d) * nl.dot(d);
      };
      const double phi = minimize_on_circle(neg_support, 512).first;
      return s.to_world(probe.exit_angle(phi) * Vec2(std::cos(phi), std::sin(phi)));
    }
  }
  return Vec2::Zero();
}

std::vector<Vec2> outline(const Obstacle& obs, int samples) {
  require(samples >= 3, ErrorCode::InvalidArgument, "outline needs at least three samples");
  std::vector<Vec2> pts;
  pts.reserve(static_cast<std::size_t>(samples));
  switch (obs.kind()) {
    case ObstacleKind::Circle: {
      const Circle& c = obs.as<Circle>();
      for (int k = 0; k < samples; ++k) {
        const double a = 2.0 * M_PI * k / samples;
        pts.emplace_back(c.center + c.radius * Vec2(std::cos(a), std::sin(a)));
      }
      break;
    }
    case ObstacleKind::Ellipse: {
      const Ellipse& e = obs.as<Ellipse>();
      const Eigen::Matrix2d q = e.rotation();
      for (int k = 0; k < samples; ++k) {
        const double a = 2.0 * M_PI * k / samples;
        pts.emplace_back(e.center + q * Vec2(e.major * std::cos(a), e.minor * std::sin(a)));
      }
      break;
    }
    case ObstacleKind::Polytope: {
      const Polytope& poly = obs.as<Polytope>();
      const auto& v = poly.vertices();
      const int n = static_cast<int>(v.size());
      double perimeter = 0.0;
      for (int i = 0; i < n; ++i) perimeter += (v[(i + 1) % n] - v[i]).norm();
      for (int i = 0; i < n; ++i) {
        const Vec2& a = v[i];
        const Vec2& b = v[(i + 1) % n];
        const int m = std::max(1, static_cast<int>(std::round(samples * (b - a).norm() / perimeter)));
        for (int k = 0; k < m; ++k) pts.emplace_back(a + (b - a) * (static_cast<double>(k) / m));
      }
      break;
    }
    case ObstacleKind::Spectrahedron: {
      const Spectrahedron& s = obs.as<Spectrahedron>();
      const RadialProbe probe(s, Vec2::Zero());
      for (int k = 0; k < samples; ++k) {
        const double a = 2.0 * M_PI * k / samples;
        const Vec2 d(std::cos(a), std::sin(a));
        pts.emplace_back(s.to_world(probe.exit(d) * d));
      }
      break;
    }
  }
  return pts;
}

}  // namespace shield
