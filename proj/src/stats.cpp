#include "pnn/stats.hpp"

#include <cmath>
#include <sstream>

#include "pnn/error.hpp"

namespace pnn {

Dataset::Dataset(Matrix features, Vector targets, bool is_centered)
    : x(std::move(features)), y(std::move(targets)), centered(is_centered) {
  if (x.cols() != y.size()) {
    std::ostringstream os;
    os << "Dataset: " << x.cols() << " samples but " << y.size() << " targets";
    throw ArgumentError(os.str());
  }
  if (x.rows() < 1) throw ArgumentError("Dataset: need at least one feature");
  if (!x.allFinite() || !y.allFinite()) throw ArgumentError("Dataset: non-finite value");
}

Dataset Dataset::subset(const std::vector<Index>& idx) const {
  Matrix xs(x.rows(), static_cast<Index>(idx.size()));
  Vector ys(static_cast<Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const Index c = idx[k];
    if (c < 0 || c >= x.cols()) throw ArgumentError("Dataset::subset: index out of range");
    xs.col(static_cast<Index>(k)) = x.col(c);
    ys(static_cast<Index>(k)) = y(c);
  }
  Dataset out;
  out.x = std::move(xs);
  out.y = std::move(ys);
  return out;
}

FeatureTransform FeatureTransform::fit(const Matrix& x, bool standardize) {
  if (x.cols() < 1) throw ArgumentError("FeatureTransform: no samples");
  FeatureTransform t;
  t.mean = x.rowwise().mean();
  t.scale = Vector::Ones(x.rows());
  if (standardize) {
    if (x.cols() < 2) throw ArgumentError("FeatureTransform: standardizing needs t >= 2");
    const Matrix centered = x.colwise() - t.mean;
    for (Index i = 0; i < x.rows(); ++i) {
      const double sd = std::sqrt(centered.row(i).squaredNorm() / static_cast<double>(x.cols() - 1));
      t.scale(i) = sd > 0.0 ? sd : 1.0;
    }
  }
  return t;
}

Matrix FeatureTransform::apply(const Matrix& x) const {
  if (x.rows() != mean.size()) throw ArgumentError("FeatureTransform: feature count mismatch");
  return (x.colwise() - mean).array().colwise() / scale.array();
}

Dataset FeatureTransform::apply(const Dataset& d) const {
  Dataset out;
  out.x = apply(d.x);
  out.y = d.y;
  out.centered = false;
  return out;
}

SymMatrix sample_covariance(const Matrix& x, bool center) {
  const Index t = x.cols();
  if (center && t < 2) throw ArgumentError("sample_covariance: need at least 2 samples");
  if (t < 1) throw ArgumentError("sample_covariance: no samples");
  if (center) {
    const Matrix xc = x.colwise() - x.rowwise().mean();
    return SymMatrix(Matrix(xc * xc.transpose() / static_cast<double>(t)));
  }
  return SymMatrix(Matrix(x * x.transpose() / static_cast<double>(t)));
}

SymMatrix sample_covariance(const Dataset& d) {
  if (d.samples() < 2) throw ArgumentError("sample_covariance: need at least 2 samples");
  return sample_covariance(d.x, !d.centered);
}

SymMatrix sample_precision(const SymMatrix& c, double ridge) {
  if (!(ridge >= 0.0)) throw ArgumentError("sample_precision: ridge must be non-negative");
  const EigPair e = sym_eig(c);
  Vector inv(e.values.size());
  for (Index i = 0; i < inv.size(); ++i) {
    const double w = e.values(i) + ridge;
    if (w <= 1e-12) {
      std::ostringstream os;
      os << "sample_precision: covariance is singular (eigenvalue " << e.values(i)
         << " with ridge " << ridge << "); use a larger ridge";
      throw NumericalError(os.str());
    }
    inv(i) = 1.0 / w;
  }
  return from_spectrum(inv, e.vectors);
}

double default_spectral_bound(const SymMatrix& c, double overshoot) {
  if (!(overshoot >= 1.0)) throw ArgumentError("default_spectral_bound: overshoot must be >= 1");
  const Vector w = sym_eigenvalues(c);
  return overshoot / std::max(w(0), kSpectralBoundFloor);
}

}  // namespace pnn
