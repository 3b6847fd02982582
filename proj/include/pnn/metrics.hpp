#pragma once

#include <cstdint>
#include <vector>

#include "pnn/datagen.hpp"
#include "pnn/linalg.hpp"

namespace pnn {

struct RegressionMetrics {
  double mae = 0.0;
  double mse = 0.0;
};

RegressionMetrics regression_metrics(const Vector& y, const Vector& yhat);

struct PrecisionErrors {
  double l1 = 0.0;  // sum of absolute entrywise differences
  double frobenius = 0.0;
};

PrecisionErrors precision_errors(const SymMatrix& theta, const SymMatrix& theta0);

/// Entries with |value| <= tol, diagonal included.
Index count_zeros(const SymMatrix& theta, double tol = 0.0);

/// Nonzero off-diagonal entries, counted over both triangles.
Index count_offdiag_nonzeros(const SymMatrix& theta);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Least-squares line through (log x, log y). Needs at least two points and
/// strictly positive values.
LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

/// Estimator used by rate_check: tethered Step-1 solves with the tether at
/// the true precision (or at zero when `tether_truth` is false).
struct RateCheckConfig {
  double lambda0 = 1.0;
  double eps = 1e-3;
  double alpha = 0.5;
  double gamma = 10.0;
  double eta = 0.01;
  int iters = 500;
  double m_overshoot = 2.0;
  bool tether_truth = true;
};

struct RateCheckReport {
  std::vector<Index> sample_sizes;
  std::vector<double> errors;  // mean ||theta_hat - theta0||_F per sample size
  double slope = 0.0;
  Index s_nonzero = 0;
  std::vector<double> theoretical_rate;  // sqrt((n + s) log n / t)
};

/// Precision error as a function of sample size for one fixed theta0 drawn
/// from `spec` (spec.t is ignored).
RateCheckReport rate_check(const SyntheticSpec& spec, const std::vector<Index>& t_grid, int repeats,
                           const RateCheckConfig& cfg = {});

}  // namespace pnn
