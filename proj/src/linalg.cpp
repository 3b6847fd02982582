#include "pnn/linalg.hpp"

#include <cmath>
#include <sstream>

#include "pnn/error.hpp"

namespace pnn {

SymMatrix::SymMatrix(const Matrix& m) {
  if (m.rows() != m.cols()) {
    std::ostringstream os;
    os << "SymMatrix: expected a square matrix, got " << m.rows() << "x" << m.cols();
    throw ArgumentError(os.str());
  }
  if (m.rows() < 1) throw ArgumentError("SymMatrix: dimension must be at least 1");
  if (!m.allFinite()) throw ArgumentError("SymMatrix: non-finite entry");
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::identity(Index n) { return SymMatrix(Matrix::Identity(n, n)); }

SymMatrix SymMatrix::zero(Index n) { return SymMatrix(Matrix::Zero(n, n)); }

SymMatrix SymMatrix::diagonal(const Vector& d) { return SymMatrix(Matrix(d.asDiagonal())); }

static void require_same_dim(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim() != b.dim()) throw ArgumentError("SymMatrix: dimension mismatch");
}

SymMatrix operator+(const SymMatrix& a, const SymMatrix& b) {
  require_same_dim(a, b);
  return SymMatrix(Matrix(a.m_ + b.m_));
}

SymMatrix operator-(const SymMatrix& a, const SymMatrix& b) {
  require_same_dim(a, b);
  return SymMatrix(Matrix(a.m_ - b.m_));
}

SymMatrix operator*(double s, const SymMatrix& a) { return SymMatrix(Matrix(s * a.m_)); }

EigPair sym_eig(const SymMatrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.matrix(), Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("sym_eig: eigensolver did not converge");
  }
  EigPair out{solver.eigenvalues(), solver.eigenvectors()};
  const Index n = a.dim();
  for (Index c = 0; c < n; ++c) {
    Index best = 0;
    double best_abs = -1.0;
    for (Index r = 0; r < n; ++r) {
      const double v = std::abs(out.vectors(r, c));
      if (v > best_abs) {
        best_abs = v;
        best = r;
      }
    }
    if (out.vectors(best, c) < 0.0) out.vectors.col(c) *= -1.0;
  }
  return out;
}

Vector sym_eigenvalues(const SymMatrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.matrix(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("sym_eigenvalues: eigensolver did not converge");
  }
  return solver.eigenvalues();
}

SymMatrix from_spectrum(const Vector& values, const Matrix& vectors) {
  return SymMatrix(Matrix(vectors * values.asDiagonal() * vectors.transpose()));
}

SymMatrix psd_project(const SymMatrix& a) {
  const EigPair e = sym_eig(a);
  if (e.values(0) >= 0.0) return a;  // keeps exact zeros of an already-PSD input
  return from_spectrum(e.values.cwiseMax(0.0), e.vectors);
}

SymMatrix soft_threshold_offdiag(const SymMatrix& a, double tau) {
  if (!(tau >= 0.0)) throw ArgumentError("soft_threshold_offdiag: tau must be non-negative");
  Matrix out = a.matrix();
  const Index n = a.dim();
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      if (i == j) continue;
      const double v = out(i, j);
      const double mag = std::abs(v) - tau;
      out(i, j) = mag > 0.0 ? std::copysign(mag, v) : 0.0;
    }
  }
  return SymMatrix(out);
}

SymMatrix spectral_norm_clip(const SymMatrix& a, double m) {
  if (!(m > 0.0)) throw ArgumentError("spectral_norm_clip: bound must be positive");
  const Vector w = sym_eigenvalues(a);
  const double norm = std::max(std::abs(w(0)), std::abs(w(w.size() - 1)));
  if (norm <= m) return a;
  return (m / norm) * a;
}

double logdet_reg(const SymMatrix& a, double eps) {
  const Vector w = sym_eigenvalues(a);
  double sum = 0.0;
  for (Index i = 0; i < w.size(); ++i) {
    const double shifted = w(i) + eps;
    if (!(shifted > 0.0)) {
      std::ostringstream os;
      os << "logdet_reg: eigenvalue " << i << " = " << w(i) << " plus eps " << eps
         << " is not positive";
      throw DomainError(os.str());
    }
    sum += std::log(shifted);
  }
  return sum;
}

MatrixNorms matrix_norms(const SymMatrix& a) {
  MatrixNorms out;
  const Matrix& m = a.matrix();
  out.frobenius = m.norm();
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i)
      if (i != j) out.l1_offdiag += std::abs(m(i, j));
  const Vector w = sym_eigenvalues(a);
  out.nuclear = w.cwiseAbs().sum();
  out.spectral = w.cwiseAbs().maxCoeff();
  return out;
}

double frobenius_distance(const SymMatrix& a, const SymMatrix& b) {
  require_same_dim(a, b);
  return (a.matrix() - b.matrix()).norm();
}

}  // namespace pnn
