#include "shield_verify/oracles.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace shield::verify {
namespace {

constexpr int kGrid = 4096;

double golden_min(const std::function<double(double)>& f, double a, double b) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
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
  return 0.5 * (a + b);
}

Vec2 segment_projection(const Vec2& a, const Vec2& b, const Vec2& p) {
  const Vec2 e = b - a;
  const double t = std::clamp((p - a).dot(e) / e.squaredNorm(), 0.0, 1.0);
  return a + t * e;
}

// Exit distance from the spectrahedron center along the world direction w.
double radial_exit(const Spectrahedron& s, const Vec2& w) {
  const Vec2 d = s.rotation() * w;
  const Eigen::LLT<Matrix> llt(s.a0.matrix());
  const Matrix linv = llt.matrixL().solve(Matrix::Identity(s.a0.dim(), s.a0.dim()));
  const Matrix m = linv * (d(0) * s.a1.matrix() + d(1) * s.a2.matrix()) * linv.transpose();
  const double lo = oracle_min_eig(0.5 * (m + m.transpose()));
  return lo < 0.0 ? -1.0 / lo : std::numeric_limits<double>::infinity();
}

double uniform(Rng& rng, double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }

Matrix random_rotation(Rng& rng, int p) {
  std::normal_distribution<double> n;
  Matrix g(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) g(i, j) = n(rng);
  return Eigen::HouseholderQR<Matrix>(g).householderQ();
}

}  // namespace

double oracle_min_eig(const Matrix& m) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(m, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

double oracle_max_eig(const Matrix& m) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(m, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
}

bool oracle_contains(const Obstacle& obs, const Vec2& p, double tol) {
  switch (obs.kind()) {
    case ObstacleKind::Circle: {
      const Circle& c = obs.as<Circle>();
      return (p - c.center).norm() <= c.radius + tol;
    }
    case ObstacleKind::Ellipse: {
      const Ellipse& e = obs.as<Ellipse>();
      const Vec2 q = p - e.center;
      const Vec2 n(-e.axis.y(), e.axis.x());
      const double a = q.dot(e.axis) / e.major, b = q.dot(n) / e.minor;
      return a * a + b * b <= 1.0 + tol;
    }
    case ObstacleKind::Polytope: {
      const Polytope& poly = obs.as<Polytope>();
      const auto& v = poly.vertices();
      for (std::size_t i = 0; i < v.size(); ++i) {
        const Vec2 e = v[(i + 1) % v.size()] - v[i];
        const Vec2 r = p - v[i];
        if (e.x() * r.y() - e.y() * r.x() < -tol * e.norm()) return false;
      }
      return true;
    }
    case ObstacleKind::Spectrahedron: {
      const Spectrahedron& s = obs.as<Spectrahedron>();
      const Vec2 z = s.rotation() * (p - s.center);
      return oracle_min_eig(s.a0.matrix() + z(0) * s.a1.matrix() + z(1) * s.a2.matrix()) >= -tol;
    }
  }
  return false;
}

Vec2 oracle_boundary_point(const Obstacle& obs, double t) {
  const double a = 2.0 * M_PI * t;
  const Vec2 w(std::cos(a), std::sin(a));
  switch (obs.kind()) {
    case ObstacleKind::Circle: {
      const Circle& c = obs.as<Circle>();
      return c.center + c.radius * w;
    }
    case ObstacleKind::Ellipse: {
      const Ellipse& e = obs.as<Ellipse>();
      const Vec2 n(-e.axis.y(), e.axis.x());
      return e.center + e.major * w.x() * e.axis + e.minor * w.y() * n;
    }
    case ObstacleKind::Polytope: {
      const auto& v = obs.as<Polytope>().vertices();
      std::vector<double> len(v.size());
      double total = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) total += len[i] = (v[(i + 1) % v.size()] - v[i]).norm();
      double s = (t - std::floor(t)) * total;
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (s <= len[i] || i + 1 == v.size()) return v[i] + std::min(s / len[i], 1.0) * (v[(i + 1) % v.size()] - v[i]);
        s -= len[i];
      }
      return v.front();
    }
    case ObstacleKind::Spectrahedron: {
      const Spectrahedron& s = obs.as<Spectrahedron>();
      return s.center + radial_exit(s, w) * w;
    }
  }
  return Vec2::Zero();
}

Vec2 oracle_projection(const Obstacle& obs, const Vec2& p) {
  if (oracle_contains(obs, p, 0.0)) return p;
  if (obs.kind() == ObstacleKind::Polytope) {
    const auto& v = obs.as<Polytope>().vertices();
    Vec2 best = v.front();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Vec2 q = segment_projection(v[i], v[(i + 1) % v.size()], p);
      if ((q - p).squaredNorm() < (best - p).squaredNorm()) best = q;
    }
    return best;
  }
  auto dist2 = [&](double t) { return (oracle_boundary_point(obs, t) - p).squaredNorm(); };
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int k = 0; k < kGrid; ++k) {
    const double d = dist2(static_cast<double>(k) / kGrid);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  const double t = golden_min(dist2, (best - 1.0) / kGrid, (best + 1.0) / kGrid);
  return oracle_boundary_point(obs, t);
}

double oracle_gtrs_objective(const Vec2& u0, const Eigen::Matrix2d& m, const Vec2& v, double d, double r) {
  auto q = [&](double x, double y) {
    return m(0, 0) * x * x + 2.0 * m(0, 1) * x * y + m(1, 1) * y * y + 2.0 * (v(0) * x + v(1) * y) + d;
  };
  double best = std::numeric_limits<double>::infinity();
  Vec2 arg = u0;
  auto scan = [&](const Vec2& center, double half, int n) {
    const double h = 2.0 * half / (n - 1);
    for (int i = 0; i < n; ++i) {
      const double x = center.x() - half + i * h;
      for (int j = 0; j < n; ++j) {
        const double y = center.y() - half + j * h;
        const double f = (x - u0.x()) * (x - u0.x()) + (y - u0.y()) * (y - u0.y());
        if (f < best && q(x, y) <= 0.0) {
          best = f;
          arg = Vec2(x, y);
        }
      }
    }
    return h;
  };
  double h = scan(u0, r, 2001);
  if (!std::isfinite(best)) return best;
  for (int round = 0; round < 10; ++round) h = scan(arg, 2.0 * h, 201);

  // The grid cannot separate boundary arcs whose distances differ by less
  // than its resolution. Along a ray u0 + t w the constraint is the scalar
  // quadratic a t^2 + 2 b t + c, so the first feasible t is a root; minimize
  // it over the ray angle.
  const double c = q(u0.x(), u0.y());
  if (c <= 0.0) return 0.0;
  auto first_hit = [&](double phi) {
    const Vec2 w(std::cos(phi), std::sin(phi));
    const double a = w.dot(m * w), b = w.dot(m * u0 + v);
    const double inf = std::numeric_limits<double>::infinity();
    if (std::abs(a) < 1e-14) return b < 0.0 ? -c / (2.0 * b) : inf;
    const double disc = b * b - a * c;
    if (disc < 0.0) return inf;
    const double s = std::sqrt(disc);
    double lo = (-b - s) / a, hi = (-b + s) / a;
    if (lo > hi) std::swap(lo, hi);
    if (lo >= 0.0) return lo;
    return hi >= 0.0 ? hi : inf;
  };
  constexpr int kRays = 20000;
  std::vector<double> t(kRays);
  for (int i = 0; i < kRays; ++i) t[static_cast<std::size_t>(i)] = first_hit(2.0 * M_PI * i / kRays);
  const double step = 2.0 * M_PI / kRays;
  for (int i = 0; i < kRays; ++i) {
    const double here = t[static_cast<std::size_t>(i)];
    if (!std::isfinite(here) || here > t[static_cast<std::size_t>((i + 1) % kRays)] ||
        here > t[static_cast<std::size_t>((i + kRays - 1) % kRays)])
      continue;
    double lo = (i - 1) * step, hi = (i + 1) * step;
    for (int it = 0; it < 100; ++it) {
      const double m1 = lo + (hi - lo) * 0.381966, m2 = hi - (hi - lo) * 0.381966;
      if (first_hit(m1) < first_hit(m2)) hi = m2;
      else lo = m1;
    }
    const double hit = std::min({first_hit(0.5 * (lo + hi)), here});
    best = std::min(best, hit * hit);
  }
  return best;
}

Obstacle random_obstacle(Rng& rng, ObstacleKind kind) {
  const Vec2 c(uniform(rng, -5, 5), uniform(rng, -5, 5));
  switch (kind) {
    case ObstacleKind::Circle:
      return Obstacle(Circle{c, uniform(rng, 0.5, 3.0)});
    case ObstacleKind::Ellipse: {
      const double a = uniform(rng, 0, 2 * M_PI);
      const double major = uniform(rng, 0.8, 3.0);
      return Obstacle(Ellipse{c, Vec2(std::cos(a), std::sin(a)), major, major * uniform(rng, 0.2, 1.0)});
    }
    case ObstacleKind::Polytope: {
      // Convex hull of random points on a circle, kept convex by angle sorting.
      const int n = std::uniform_int_distribution<int>(3, 8)(rng);
      const double radius = uniform(rng, 0.5, 3.0);
      std::vector<double> angles(static_cast<std::size_t>(n));
      for (double& a : angles) a = uniform(rng, 0, 2 * M_PI);
      std::sort(angles.begin(), angles.end());
      for (std::size_t i = 0; i < angles.size(); ++i) angles[i] = std::max(angles[i], i ? angles[i - 1] + 0.05 : 0.0);
      if (angles.back() > 2 * M_PI - 0.05) return Obstacle(Polytope::regular(c, radius, n, angles.front()));
      std::vector<Vec2> pts;
      for (double a : angles) pts.emplace_back(c + radius * Vec2(std::cos(a), std::sin(a)));
      try {
        return Obstacle(Polytope(pts));
      } catch (const Error&) {
        return Obstacle(Polytope::regular(c, radius, n, angles.front()));
      }
    }
    case ObstacleKind::Spectrahedron: {
      const int p = std::uniform_int_distribution<int>(2, 4)(rng);
      Vector ev(p);
      for (int i = 0; i < p; ++i) ev(i) = uniform(rng, 0.5, 2.0);
      const Matrix q0 = random_rotation(rng, p);
      const Matrix a0 = q0 * ev.asDiagonal() * q0.transpose();
      auto traceless = [&]() {
        Vector e(p);
        for (int i = 0; i < p; ++i) e(i) = uniform(rng, -1, 1);
        e.array() -= e.mean();
        const Matrix q = random_rotation(rng, p);
        return Matrix(q * e.asDiagonal() * q.transpose());
      };
      // Radial exit distance t(w) = 1 / lambda_max(-L^-1 (w1 A1 + w2 A2) L^-T)
      // with A0 = L L^T; rescaling A1 and A2 by s scales every t by 1 / s.
      const Matrix l_inv = Eigen::LLT<Matrix>(a0).matrixL().solve(Matrix::Identity(p, p));
      for (int attempt = 0;; ++attempt) {
        const Matrix a1 = traceless(), a2 = traceless();
        double t_min = std::numeric_limits<double>::infinity(), t_max = 0.0;
        for (int k = 0; k < 360; ++k) {
          const double phi = 2.0 * M_PI * k / 360;
          const Matrix b = -(std::cos(phi) * a1 + std::sin(phi) * a2);
          const double top = oracle_max_eig(l_inv * b * l_inv.transpose());
          const double t = top > 0.0 ? 1.0 / top : std::numeric_limits<double>::infinity();
          t_min = std::min(t_min, t);
          t_max = std::max(t_max, t);
        }
        if (std::isfinite(t_max) && t_min >= 0.1 * t_max) {
          const double s = t_max / uniform(rng, 0.5, 3.0);
          try {
            return Obstacle(Spectrahedron{c, uniform(rng, -M_PI, M_PI), SymmetricMatrix(a0),
                                          SymmetricMatrix(Matrix(s * a1)), SymmetricMatrix(Matrix(s * a2))});
          } catch (const Error&) {
          }
        }
        if (attempt > 1000) throw Error(ErrorCode::InvalidArgument, "could not draw a bounded spectrahedron");
      }
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown obstacle kind");
}

Vec2 point_at_distance(Rng& rng, const Obstacle& obs, double gap) {
  const double a = uniform(rng, 0, 2 * M_PI);
  const Vec2 n(std::cos(a), std::sin(a));
  if (obs.kind() == ObstacleKind::Spectrahedron) {
    // Support point by dense boundary sweep, then step out along n.
    Vec2 best = oracle_boundary_point(obs, 0.0);
    for (int k = 1; k < kGrid; ++k) {
      const Vec2 b = oracle_boundary_point(obs, static_cast<double>(k) / kGrid);
      if (n.dot(b) > n.dot(best)) best = b;
    }
    const Vec2 p = best + gap * n;
    return p;
  }
  if (obs.kind() == ObstacleKind::Polytope) {
    // The maximizing vertex is exact.
    const auto& v = obs.as<Polytope>().vertices();
    Vec2 top = v.front();
    for (const Vec2& x : v)
      if (n.dot(x) > n.dot(top)) top = x;
    return top + gap * n;
  }
  double best_t = 0.0, best_v = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < kGrid; ++k) {
    const double v = n.dot(oracle_boundary_point(obs, static_cast<double>(k) / kGrid));
    if (v > best_v) {
      best_v = v;
      best_t = static_cast<double>(k) / kGrid;
    }
  }
  const double t = golden_min([&](double s) { return -n.dot(oracle_boundary_point(obs, s)); }, best_t - 1.0 / kGrid,
                              best_t + 1.0 / kGrid);
  return oracle_boundary_point(obs, t) + gap * n;
}

std::pair<Vec2, Vec2> oracle_bounds(const Obstacle& obs) {
  Vec2 lo = Vec2::Constant(std::numeric_limits<double>::infinity()), hi = -lo;
  for (int k = 0; k < kGrid; ++k) {
    const Vec2 b = oracle_boundary_point(obs, static_cast<double>(k) / kGrid);
    lo = lo.cwiseMin(b);
    hi = hi.cwiseMax(b);
  }
  return {lo, hi};
}

std::vector<Vec2> sample_obstacle_points(Rng& rng, const Obstacle& obs, int count) {
  const auto [lo, hi] = oracle_bounds(obs);
  std::vector<Vec2> out;
  const int interior = count * 4 / 5;
  while (static_cast<int>(out.size()) < interior) {
    const Vec2 p(uniform(rng, lo.x(), hi.x()), uniform(rng, lo.y(), hi.y()));
    if (oracle_contains(obs, p, 0.0)) out.push_back(p);
  }
  while (static_cast<int>(out.size()) < count) out.push_back(oracle_boundary_point(obs, uniform(rng, 0, 1)));
  return out;
}

}  // namespace shield::verify
