#pragma once

#include <random>

#include "pnn/linalg.hpp"

namespace pnn::testing {

inline Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = n(rng);
  return m;
}

inline SymMatrix random_sym(Index n, std::mt19937_64& rng, double scale = 1.0) {
  return SymMatrix(random_matrix(n, n, rng, scale));
}

/// Random positive definite matrix with eigenvalues in [lo, hi].
inline SymMatrix random_pd(Index n, std::mt19937_64& rng, double lo = 0.5, double hi = 3.0) {
  const Matrix q = Eigen::HouseholderQR<Matrix>(random_matrix(n, n, rng)).householderQ();
  std::uniform_real_distribution<double> u(lo, hi);
  Vector w(n);
  for (Index i = 0; i < n; ++i) w(i) = u(rng);
  return SymMatrix(Matrix(q * w.asDiagonal() * q.transpose()));
}

/// Determinant by cofactor expansion along the first row.
inline double cofactor_det(const Matrix& a) {
  const Index n = a.rows();
  if (n == 1) return a(0, 0);
  double det = 0.0;
  for (Index c = 0; c < n; ++c) {
    Matrix minor(n - 1, n - 1);
    for (Index i = 1; i < n; ++i) {
      Index cc = 0;
      for (Index j = 0; j < n; ++j) {
        if (j == c) continue;
        minor(i - 1, cc++) = a(i, j);
      }
    }
    det += ((c % 2 == 0) ? 1.0 : -1.0) * a(0, c) * cofactor_det(minor);
  }
  return det;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace pnn::testing
