#pragma once

#include <random>

#include <doctest.h>

#include "shield/symcone.hpp"

namespace shield::test {

inline double uniform(std::mt19937_64& rng, double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(rng);
}

inline Matrix random_matrix(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> n;
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = n(rng);
  return m;
}

inline SymmetricMatrix random_symmetric(std::mt19937_64& rng, int p) {
  const Matrix m = random_matrix(rng, p, p);
  return SymmetricMatrix(Matrix(0.5 * (m + m.transpose())));
}

inline Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

template <class F>
ErrorCode error_code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected shield::Error");
  return ErrorCode::InvalidArgument;
}

}  // namespace shield::test
