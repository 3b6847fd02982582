#pragma once

#include <vector>

#include "pnn/linalg.hpp"

namespace pnn {

/// Observations as columns of an n x t matrix with one regression target per
/// column. `centered` records whether each feature row has zero mean.
struct Dataset {
  Matrix x;
  Vector y;
  bool centered = false;

  Dataset() = default;
  Dataset(Matrix features, Vector targets, bool is_centered = false);

  Index features() const noexcept { return x.rows(); }
  Index samples() const noexcept { return x.cols(); }

  /// Columns selected by `idx`, in that order. The subset is not centered.
  Dataset subset(const std::vector<Index>& idx) const;
};

/// Per-feature affine map fitted on a training split and reused everywhere
/// else, so held-out data never informs it.
struct FeatureTransform {
  Vector mean;
  Vector scale;  // all ones unless standardizing

  static FeatureTransform fit(const Matrix& x, bool standardize);
  Matrix apply(const Matrix& x) const;
  Dataset apply(const Dataset& d) const;
};

/// X X^T / T over the columns of `x`; rows are mean-centered first when
/// `center` is set. Needs t >= 2 when centering, t >= 1 otherwise.
SymMatrix sample_covariance(const Matrix& x, bool center);

/// Sample covariance of a dataset, centering it first unless already centered.
SymMatrix sample_covariance(const Dataset& d);

/// (c + ridge I)^{-1} through the eigendecomposition of c.
SymMatrix sample_precision(const SymMatrix& c, double ridge = 0.0);

/// overshoot / max(lambda_min(c), 1e-6)
double default_spectral_bound(const SymMatrix& c, double overshoot = 2.0);

inline constexpr double kSpectralBoundFloor = 1e-6;

}  // namespace pnn
