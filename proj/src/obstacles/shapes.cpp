#include <algorithm>
#include <cmath>

#include "shield/obstacles.hpp"

namespace shield {

Eigen::Matrix2d Ellipse::rotation() const {
  Eigen::Matrix2d q;
  q << axis(0), -axis(1), axis(1), axis(0);
  return q;
}

Eigen::Matrix2d Ellipse::shape(double eps) const {
  const Eigen::Matrix2d q = rotation();
  const Eigen::Vector2d inv(1.0 / ((major + eps) * (major + eps)), 1.0 / ((minor + eps) * (minor + eps)));
  return q * inv.asDiagonal() * q.transpose();
}

Polytope::Polytope(std::vector<Vec2> vertices) : vertices_(std::move(vertices)) {
  const int n = static_cast<int>(vertices_.size());
  require(n >= 3, ErrorCode::InvalidArgument, "polytope needs at least three vertices");
  for (const Vec2& v : vertices_) require(v.allFinite(), ErrorCode::NonFinite, "non-finite polytope vertex");

  double area2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec2& a = vertices_[i];
    const Vec2& b = vertices_[(i + 1) % n];
    area2 += a(0) * b(1) - a(1) * b(0);
  }
  require(std::abs(area2) > 1e-12, ErrorCode::InvalidArgument, "polytope has zero area");
  if (area2 < 0.0) std::reverse(vertices_.begin(), vertices_.end());

  centroid_ = Vec2::Zero();
  for (const Vec2& v : vertices_) centroid_ += v;
  centroid_ /= n;

  for (int i = 0; i < n; ++i) {
    const Vec2& a = vertices_[i];
    const Vec2& b = vertices_[(i + 1) % n];
    const Vec2 e = b - a;
    require(e.norm() > 1e-12, ErrorCode::InvalidArgument, "polytope has a repeated vertex");
    Vec2 nrm(e(1), -e(0));
    nrm.normalize();
    // Orient away from the vertex mean.
    if (nrm.dot(centroid_ - a) > 0.0) nrm = -nrm;
    normals_.push_back(nrm);
    offsets_.push_back(nrm.dot(a));
  }
  for (int i = 0; i < n; ++i) {
    for (const Vec2& v : vertices_) {
      require(normals_[i].dot(v) <= offsets_[i] + 1e-9 * (1.0 + std::abs(offsets_[i])),
              ErrorCode::InvalidArgument, "polytope vertices are not in convex position");
    }
  }
}

Polytope Polytope::regular(const Vec2& center, double circumradius, int sides, double first_angle) {
  require(sides >= 3 && circumradius > 0.0, ErrorCode::InvalidArgument, "regular polygon needs >= 3 sides and radius > 0");
  std::vector<Vec2> v;
  for (int k = 0; k < sides; ++k) {
    const double a = first_angle + 2.0 * M_PI * k / sides;
    v.emplace_back(center + circumradius * Vec2(std::cos(a), std::sin(a)));
  }
  return Polytope(std::move(v));
}

Eigen::Matrix2d Spectrahedron::rotation() const {
  Eigen::Matrix2d r;
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return r;
}

Vec2 Spectrahedron::to_local(const Vec2& p) const { return rotation() * (p - center); }

Vec2 Spectrahedron::to_world(const Vec2& z) const { return center + rotation().transpose() * z; }

SymmetricMatrix Spectrahedron::pencil(const Vec2& z) const {
  return SymmetricMatrix(Matrix(a0.matrix() + z(0) * a1.matrix() + z(1) * a2.matrix()));
}

const char* to_string(ObstacleKind kind) {
  switch (kind) {
    case ObstacleKind::Circle: return "circle";
    case ObstacleKind::Ellipse: return "ellipse";
    case ObstacleKind::Polytope: return "polytope";
    case ObstacleKind::Spectrahedron: return "spectrahedron";
  }
  return "unknown";
}

namespace {

struct Validate {
  void operator()(Circle& c) const {
    require(c.center.allFinite() && std::isfinite(c.radius), ErrorCode::NonFinite, "non-finite circle");
    require(c.radius > 0.0, ErrorCode::InvalidArgument, "circle radius must be positive");
  }
  void operator()(Ellipse& e) const {
    require(e.center.allFinite() && e.axis.allFinite() && std::isfinite(e.major) && std::isfinite(e.minor),
            ErrorCode::NonFinite, "non-finite ellipse");
    require(e.major > 0.0 && e.minor > 0.0, ErrorCode::InvalidArgument, "ellipse semi-axes must be positive");
    require(e.major >= e.minor, ErrorCode::InvalidArgument, "ellipse major semi-axis is shorter than the minor");
    require(std::abs(e.axis.norm() - 1.0) <= 1e-12, ErrorCode::InvalidArgument, "ellipse axis must be a unit vector");
    e.axis.normalize();
  }
  void operator()(Polytope&) const {}
  void operator()(Spectrahedron& s) const {
    require(s.center.allFinite() && std::isfinite(s.angle), ErrorCode::NonFinite, "non-finite spectrahedron");
    require(s.a0.dim() > 0 && s.a0.dim() == s.a1.dim() && s.a0.dim() == s.a2.dim(), ErrorCode::DimMismatch,
            "spectrahedron matrices differ in size");
    require(min_eigenvalue(s.a0) > 0.0, ErrorCode::InvalidArgument,
            "spectrahedron A0 must be positive definite");
    // Bounded iff every direction leaves the set: d1 A1 + d2 A2 has a
    // negative eigenvalue for all unit d. Checked on a fine angle grid.
    for (int k = 0; k < 720; ++k) {
      const double a = M_PI * k / 360.0;
      require(min_eigenvalue(std::cos(a) * s.a1 + std::sin(a) * s.a2) < 0.0, ErrorCode::InvalidArgument,
              "spectrahedron is unbounded");
    }
  }
};

}  // namespace

Obstacle::Obstacle(Shape shape, std::string name) : shape_(std::move(shape)), name_(std::move(name)) {
  std::visit(Validate{}, shape_);
}

ObstacleKind Obstacle::kind() const { return static_cast<ObstacleKind>(shape_.index()); }

}  // namespace shield
