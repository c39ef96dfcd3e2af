#pragma once

#include <string>
#include <variant>
#include <vector>

#include "shield/conic_solvers.hpp"
#include "shield/plants.hpp"

namespace shield {

struct Circle {
  Vec2 center;
  double radius;
};

// Semi-axis `major` along unit direction `axis`, `minor` along its left normal.
struct Ellipse {
  Vec2 center;
  Vec2 axis;
  double major;
  double minor;

  Eigen::Matrix2d rotation() const;  // columns: axis, left normal
  // Q diag(1/major^2, 1/minor^2) Q^T with both semi-axes grown by eps.
  Eigen::Matrix2d shape(double eps = 0.0) const;
};

// Convex polygon with outward unit face normals n_i and offsets o_i, so the
// polygon is {p : n_i^T p <= o_i}. Face i joins vertex i and vertex i+1.
class Polytope {
 public:
  explicit Polytope(std::vector<Vec2> vertices);
  static Polytope regular(const Vec2& center, double circumradius, int sides, double first_angle);

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<Vec2>& normals() const { return normals_; }
  const std::vector<double>& offsets() const { return offsets_; }
  int face_count() const { return static_cast<int>(normals_.size()); }
  const Vec2& centroid() const { return centroid_; }

  // Face rows in the unsafe-set form -A_i p - b_i <= 0, i.e. A_i = -n_i^T and b_i = o_i.
  Vec2 row_a(int i) const { return -normals_[static_cast<std::size_t>(i)]; }
  double row_b(int i) const { return offsets_[static_cast<std::size_t>(i)]; }

 private:
  std::vector<Vec2> vertices_;
  std::vector<Vec2> normals_;
  std::vector<double> offsets_;
  Vec2 centroid_;
};

// {p : A0 + z1 A1 + z2 A2 >= 0} with z = R(angle) (p - center). A0 must be
// positive definite, so the center is an interior point.
struct Spectrahedron {
  Vec2 center;
  double angle;
  SymmetricMatrix a0;
  SymmetricMatrix a1;
  SymmetricMatrix a2;

  Eigen::Matrix2d rotation() const;
  Vec2 to_local(const Vec2& p) const;
  Vec2 to_world(const Vec2& z) const;
  SymmetricMatrix pencil(const Vec2& z) const;
};

enum class ObstacleKind { Circle, Ellipse, Polytope, Spectrahedron };

const char* to_string(ObstacleKind kind);

class Obstacle {
 public:
  using Shape = std::variant<Circle, Ellipse, Polytope, Spectrahedron>;

  // Validates the shape (positive sizes, unit axis, convexity, A0 > 0).
  explicit Obstacle(Shape shape, std::string name = {});

  ObstacleKind kind() const;
  const Shape& shape() const { return shape_; }
  const std::string& name() const { return name_; }

  template <class T>
  const T& as() const { return std::get<T>(shape_); }

 private:
  Shape shape_;
  std::string name_;
};

enum class Location { Exterior, Boundary, Interior };

struct ProjectionResult {
  Vec2 point;
  double distance = 0.0;  // ||p - point||, zero when p is in the obstacle
  SolveStatus status = SolveStatus::Optimal;
  int iterations = 0;
};

bool contains(const Obstacle& obs, const Vec2& p, double tol = 1e-10);

// Closest obstacle point; p itself when p is inside.
ProjectionResult project(const Obstacle& obs, const Vec2& p);

// Radius of the largest disk centered at p inside the obstacle; 0 outside.
double depth(const Obstacle& obs, const Vec2& p);

// Distance to the obstacle outside, minus the depth inside.
double signed_distance(const Obstacle& obs, const Vec2& p);

// Outward unit normal at a boundary-adjacent point p, and the boundary point
// it supports. Polytope vertices average the adjacent face normals.
struct SupportingNormal {
  Vec2 normal;
  double offset;  // every obstacle point z satisfies normal^T z <= offset
};
SupportingNormal boundary_normal(const Obstacle& obs, const Vec2& p, double band = 1e-6);

// Support function max_{z in obstacle} n^T z and its maximizer.
Vec2 support_point(const Obstacle& obs, const Vec2& direction);

// Points along the obstacle boundary, counterclockwise.
std::vector<Vec2> outline(const Obstacle& obs, int samples = 256);

// ---- Barrier builders ------------------------------------------------------

// h(x) = x^T P x + 2 q^T x + r.
struct QuadraticForm {
  Matrix P;
  Vector q;
  double r = 0.0;
  double value(const Vector& x) const { return x.dot(P * x) + 2.0 * q.dot(x) + r; }
};

// (r + eps)^2 - ||C x - c||^2: positive inside the inflated disk.
QuadraticForm cbf_circle(const Circle& c, const Matrix& c_pos, double eps);

// 1 - (C x - c)^T M_eps (C x - c): positive inside the inflated ellipse.
QuadraticForm cbf_ellipse(const Ellipse& e, const Matrix& c_pos, double eps);

// Per-face barrier h_i(x) = n_i^T C x - o_i - eps, nonnegative on the outer side
// of face i shifted outward by eps.
Vector polytope_face_values(const Polytope& poly, const Vector& x, const Matrix& c_pos, double eps);

// Rows h_i(A x + B u) >= h_i(x) - gamma (h_max + |h_i - h_max|).
LinearConstraintSet polytope_combinatorial_rows(const Polytope& poly, const Vector& x,
                                                const AffineDynamics& dyn, const Matrix& c_pos,
                                                double eps, double gamma);

// H(x) = -(A0 + (1 - ratio) (z1 A1 + z2 A2)), z = R (C x - center);
// lambda_max(H) >= 0 outside the shrunk-pencil set.
SymmetricMatrix spectrahedron_safe_matrix(const Spectrahedron& s, const Vector& x,
                                          const Matrix& c_pos, double ratio);

struct LmiPair {
  SymmetricMatrix f0;
  std::vector<SymmetricMatrix> f;
  double lambda_max = 0.0;  // of H(x)
};

// F(u) = H(A x + B u) - (1 + c_perp) H(x) + (gamma + c_perp) lambda_max(H(x)) I.
LmiPair spectrahedron_indefinite_pair(const Spectrahedron& s, const Vector& x,
                                      const AffineDynamics& dyn, const Matrix& c_pos,
                                      double ratio, double gamma, double c_perp);

}  // namespace shield
