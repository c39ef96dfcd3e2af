#include "shield/symcone.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace shield {

SymmetricMatrix::SymmetricMatrix(const Matrix& m) {
  require(m.rows() == m.cols(), ErrorCode::DimMismatch, "symmetric matrix must be square");
  if (m.allFinite()) {
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    const double scale = 1.0 + m.norm();
    require(m.size() == 0 || asym <= 1e-10 * scale, ErrorCode::Asymmetric,
            "asymmetry " + std::to_string(asym) + " exceeds tolerance");
  }
  m_ = 0.5 * (m + m.transpose());
}

SymmetricMatrix SymmetricMatrix::zero(int p) { return SymmetricMatrix(Matrix::Zero(p, p)); }

SymmetricMatrix SymmetricMatrix::identity(int p) {
  return SymmetricMatrix(Matrix::Identity(p, p));
}

SymmetricMatrix SymmetricMatrix::diagonal(const Vector& d) {
  return SymmetricMatrix(Matrix(d.asDiagonal()));
}

SymmetricMatrix SymmetricMatrix::operator+(const SymmetricMatrix& o) const {
  require(dim() == o.dim(), ErrorCode::DimMismatch, "matrix sum dimension mismatch");
  return SymmetricMatrix(Matrix(m_ + o.m_));
}

SymmetricMatrix SymmetricMatrix::operator-(const SymmetricMatrix& o) const {
  require(dim() == o.dim(), ErrorCode::DimMismatch, "matrix difference dimension mismatch");
  return SymmetricMatrix(Matrix(m_ - o.m_));
}

SymmetricMatrix SymmetricMatrix::operator-() const { return SymmetricMatrix(Matrix(-m_)); }

SymmetricMatrix SymmetricMatrix::operator*(double s) const {
  return SymmetricMatrix(Matrix(s * m_));
}

EigenSystem eigendecompose(const SymmetricMatrix& sym) {
  require(sym.is_finite(), ErrorCode::NonFinite, "eigendecomposition of non-finite matrix");
  const int p = sym.dim();
  Matrix a = sym.matrix();
  Matrix v = Matrix::Identity(p, p);
  const double threshold = 1e-12 * a.norm();

  auto off_norm = [&]() {
    double s = 0.0;
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j)
        if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  for (int sweep = 0; sweep < 64 && off_norm() > threshold; ++sweep) {
    for (int r = 0; r < p - 1; ++r) {
      for (int q = r + 1; q < p; ++q) {
        const double arq = a(r, q);
        if (arq == 0.0) continue;
        const double theta = (a(q, q) - a(r, r)) / (2.0 * arq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::hypot(theta, 1.0));
        const double c = 1.0 / std::hypot(t, 1.0);
        const double s = t * c;
        for (int k = 0; k < p; ++k) {
          const double akr = a(k, r), akq = a(k, q);
          a(k, r) = c * akr - s * akq;
          a(k, q) = s * akr + c * akq;
        }
        for (int k = 0; k < p; ++k) {
          const double ark = a(r, k), aqk = a(q, k);
          a(r, k) = c * ark - s * aqk;
          a(q, k) = s * ark + c * aqk;
        }
        a(r, q) = a(q, r) = 0.0;
        for (int k = 0; k < p; ++k) {
          const double vkr = v(k, r), vkq = v(k, q);
          v(k, r) = c * vkr - s * vkq;
          v(k, q) = s * vkr + c * vkq;
        }
      }
    }
  }

  std::vector<int> order(p);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) < a(j, j); });

  EigenSystem out{Vector(p), Matrix(p, p)};
  for (int k = 0; k < p; ++k) {
    out.values(k) = a(order[k], order[k]);
    Vector col = v.col(order[k]);
    // Fix the sign so the largest-magnitude entry is positive.
    Eigen::Index imax = 0;
    col.cwiseAbs().maxCoeff(&imax);
    if (col(imax) < 0.0) col = -col;
    out.vectors.col(k) = col;
  }
  return out;
}

double eigenvalue(const SymmetricMatrix& m, int j) {
  require(j >= 1 && j <= m.dim(), ErrorCode::IndexOutOfRange,
          "eigenvalue index " + std::to_string(j) + " outside 1.." + std::to_string(m.dim()));
  return eigendecompose(m).values(j - 1);
}

double min_eigenvalue(const SymmetricMatrix& m) { return eigenvalue(m, 1); }

double max_eigenvalue(const SymmetricMatrix& m) { return eigenvalue(m, m.dim()); }

bool loewner_geq(const SymmetricMatrix& a, const SymmetricMatrix& b, double tol) {
  require(a.dim() == b.dim(), ErrorCode::DimMismatch, "loewner comparison dimension mismatch");
  const SymmetricMatrix d = a - b;
  return min_eigenvalue(d) >= -tol * (1.0 + d.frobenius_norm());
}

bool is_psd(const SymmetricMatrix& m, double tol) {
  return min_eigenvalue(m) >= -tol * (1.0 + m.frobenius_norm());
}

bool check_weyl_bound(const SymmetricMatrix& a, const SymmetricMatrix& b, int i, int j) {
  require(a.dim() == b.dim(), ErrorCode::DimMismatch, "weyl check dimension mismatch");
  const int p = a.dim();
  require(j >= 1 && j <= i && i <= p, ErrorCode::IndexOutOfRange,
          "weyl indices must satisfy 1 <= j <= i <= p");
  const Vector la = eigendecompose(a).values;
  const Vector lb = eigendecompose(b).values;
  const Vector lab = eigendecompose(a + b).values;
  const double scale = 1.0 + a.frobenius_norm() + b.frobenius_norm();
  return la(i - j) + lb(j - 1) <= lab(i - 1) + 1e-9 * scale;
}

ConvexityVerdict sample_matrix_convexity(const MatrixField& h, const Box& box, int samples,
                                         double tol, std::uint64_t seed) {
  require(box.lower.size() == box.upper.size(), ErrorCode::DimMismatch, "box bounds differ in size");
  require((box.upper.array() >= box.lower.array()).all(), ErrorCode::InvalidArgument,
          "box upper bound below lower bound");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Eigen::Index n = box.lower.size();

  auto draw = [&]() {
    Vector x(n);
    for (Eigen::Index i = 0; i < n; ++i)
      x(i) = box.lower(i) + unit(rng) * (box.upper(i) - box.lower(i));
    return x;
  };

  for (int s = 0; s < samples; ++s) {
    const Vector x = draw();
    const Vector y = draw();
    const double theta = unit(rng);
    const SymmetricMatrix hx = h(x), hy = h(y), hm = h(theta * x + (1.0 - theta) * y);
    for (const auto* m : {&hx, &hy, &hm})
      require(m->is_finite(), ErrorCode::NonFinite, "matrix field returned non-finite entries");
    const SymmetricMatrix gap = theta * hx + (1.0 - theta) * hy - hm;
    const double lmin = min_eigenvalue(gap);
    if (lmin < -tol * (1.0 + gap.frobenius_norm())) return CounterexampleFound{x, y, theta, lmin};
  }
  return PassedSampling{samples};
}

}  // namespace shield
