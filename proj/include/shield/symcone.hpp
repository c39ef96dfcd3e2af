#pragma once

#include <cstdint>
#include <functional>
#include <variant>

#include <Eigen/Dense>

#include "shield/error.hpp"

namespace shield {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Vec2 = Eigen::Vector2d;

// Relative tolerance used by PSD tests: M is accepted when
// lambda_min(M) >= -tol * (1 + ||M||_F).
inline constexpr double kPsdTolerance = 1e-8;

// Real symmetric p x p matrix. The input is symmetrized on construction;
// asymmetry above 1e-10 * (1 + ||M||_F) is rejected. Non-finite entries are
// stored as given and rejected by the spectral routines.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(const Matrix& m);

  static SymmetricMatrix zero(int p);
  static SymmetricMatrix identity(int p);
  static SymmetricMatrix diagonal(const Vector& d);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }
  double frobenius_norm() const { return m_.norm(); }
  bool is_finite() const { return m_.allFinite(); }

  SymmetricMatrix operator+(const SymmetricMatrix& o) const;
  SymmetricMatrix operator-(const SymmetricMatrix& o) const;
  SymmetricMatrix operator-() const;
  SymmetricMatrix operator*(double s) const;
  friend SymmetricMatrix operator*(double s, const SymmetricMatrix& m) { return m * s; }

 private:
  Matrix m_;
};

// Eigenvalues ascending; column i of `vectors` belongs to values(i).
struct EigenSystem {
  Vector values;
  Matrix vectors;
};

// Cyclic Jacobi rotations. Stops once the off-diagonal Frobenius norm is at
// most 1e-12 * ||M||_F, or after 64 sweeps.
EigenSystem eigendecompose(const SymmetricMatrix& m);

// j-th smallest eigenvalue, 1-based.
double eigenvalue(const SymmetricMatrix& m, int j);
double min_eigenvalue(const SymmetricMatrix& m);
double max_eigenvalue(const SymmetricMatrix& m);

// A >= B in the Loewner order, up to tol * (1 + ||A - B||_F).
bool loewner_geq(const SymmetricMatrix& a, const SymmetricMatrix& b, double tol = kPsdTolerance);
bool is_psd(const SymmetricMatrix& m, double tol = kPsdTolerance);

// Weyl: lambda_{i-j+1}(A) + lambda_j(B) <= lambda_i(A + B), 1 <= j <= i <= p.
bool check_weyl_bound(const SymmetricMatrix& a, const SymmetricMatrix& b, int i, int j);

struct Box {
  Vector lower;
  Vector upper;
};

struct PassedSampling {
  int samples = 0;
};

struct CounterexampleFound {
  Vector x;
  Vector y;
  double theta = 0.0;
  // lambda_min of theta H(x) + (1-theta) H(y) - H(theta x + (1-theta) y)
  double min_gap = 0.0;
};

using ConvexityVerdict = std::variant<PassedSampling, CounterexampleFound>;

using MatrixField = std::function<SymmetricMatrix(const Vector&)>;

// Randomized check of matrix convexity over a box: draws x, y, theta and
// tests theta H(x) + (1-theta) H(y) >= H(theta x + (1-theta) y).
ConvexityVerdict sample_matrix_convexity(const MatrixField& h, const Box& box, int samples,
                                         double tol = kPsdTolerance, std::uint64_t seed = 1);

}  // namespace shield
