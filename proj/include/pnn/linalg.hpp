#pragma once

#include <Eigen/Dense>

namespace pnn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Dense real symmetric matrix. Construction symmetrizes as (A + A^T)/2, which
/// leaves an already-symmetric input bit-identical, and rejects non-finite
/// entries.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const Matrix& m);

  static SymMatrix identity(Index n);
  static SymMatrix zero(Index n);
  static SymMatrix diagonal(const Vector& d);

  Index dim() const noexcept { return m_.rows(); }
  bool empty() const noexcept { return m_.size() == 0; }
  const Matrix& matrix() const noexcept { return m_; }
  double operator()(Index i, Index j) const { return m_(i, j); }

  friend SymMatrix operator+(const SymMatrix& a, const SymMatrix& b);
  friend SymMatrix operator-(const SymMatrix& a, const SymMatrix& b);
  friend SymMatrix operator*(double s, const SymMatrix& a);

  bool operator==(const SymMatrix& other) const {
    return dim() == other.dim() && m_ == other.m_;
  }

 private:
  Matrix m_;
};

/// Eigenvalues ascending, eigenvector i in column i.
struct EigPair {
  Vector values;
  Matrix vectors;
};

struct MatrixNorms {
  double frobenius = 0.0;
  double l1_offdiag = 0.0;
  double nuclear = 0.0;
  double spectral = 0.0;
};

/// Symmetric eigendecomposition. Each eigenvector is signed so that its
/// largest-magnitude entry (lowest index on ties) is positive.
/// Throws ConvergenceError if the QR iteration does not converge.
EigPair sym_eig(const SymMatrix& a);

/// Eigenvalues only, ascending.
Vector sym_eigenvalues(const SymMatrix& a);

/// V diag(values) V^T
SymMatrix from_spectrum(const Vector& values, const Matrix& vectors);

/// Clamp negative eigenvalues to exactly zero and reconstruct.
SymMatrix psd_project(const SymMatrix& a);

/// sign(a) max(|a| - tau, 0) on off-diagonal entries; diagonal untouched.
SymMatrix soft_threshold_offdiag(const SymMatrix& a, double tau);

/// Scale by m / max(m, ||a||_2).
SymMatrix spectral_norm_clip(const SymMatrix& a, double m);

/// sum_i log(w_i + eps). Throws DomainError when some w_i + eps <= 0.
double logdet_reg(const SymMatrix& a, double eps);

MatrixNorms matrix_norms(const SymMatrix& a);

double frobenius_distance(const SymMatrix& a, const SymMatrix& b);

}  // namespace pnn
