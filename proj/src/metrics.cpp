#include "pnn/metrics.hpp"

#include <cmath>
#include <string>

#include "pnn/error.hpp"
#include "pnn/glasso.hpp"
#include "pnn/stats.hpp"

namespace pnn {

RegressionMetrics regression_metrics(const Vector& y, const Vector& yhat) {
  if (y.size() == 0) throw ArgumentError("regression_metrics: empty input");
  if (y.size() != yhat.size()) throw ArgumentError("regression_metrics: length mismatch");
  const Vector r = y - yhat;
  const double n = static_cast<double>(y.size());
  return {r.cwiseAbs().sum() / n, r.squaredNorm() / n};
}

PrecisionErrors precision_errors(const SymMatrix& theta, const SymMatrix& theta0) {
  if (theta.dim() != theta0.dim()) throw ArgumentError("precision_errors: dimension mismatch");
  const Matrix d = theta.matrix() - theta0.matrix();
  return {d.cwiseAbs().sum(), d.norm()};
}

Index count_zeros(const SymMatrix& theta, double tol) {
  if (!(tol >= 0.0)) throw ArgumentError("count_zeros: tol must be >= 0");
  return (theta.matrix().array().abs() <= tol).count();
}

Index count_offdiag_nonzeros(const SymMatrix& theta) {
  Index s = 0;
  for (Index j = 0; j < theta.dim(); ++j)
    for (Index i = 0; i < theta.dim(); ++i)
      if (i != j && theta(i, j) != 0.0) ++s;
  return s;
}

LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ArgumentError("fit_loglog: length mismatch");
  if (x.size() < 2) throw ArgumentError("fit_loglog: need at least two points");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("fit_loglog: values must be positive");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw DomainError("fit_loglog: all x values are equal");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

RateCheckReport rate_check(const SyntheticSpec& spec, const std::vector<Index>& t_grid, int repeats,
                           const RateCheckConfig& cfg) {
  spec.validate();
  if (t_grid.size() < 3) throw ArgumentError("rate_check: need at least three sample sizes");
  if (repeats < 3) throw ArgumentError("rate_check: need at least three repeats");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (t_grid[i] < 2) throw ArgumentError("rate_check: sample sizes must be >= 2");
    if (i > 0 && t_grid[i] <= t_grid[i - 1])
      throw ArgumentError("rate_check: sample sizes must be strictly increasing");
  }

  const SymMatrix theta0 = gen_sparse_precision(spec);
  const Index n = theta0.dim();
  RateCheckReport rep;
  rep.sample_sizes = t_grid;
  rep.s_nonzero = count_offdiag_nonzeros(theta0);

  for (std::size_t g = 0; g < t_grid.size(); ++g) {
    const Index t = t_grid[g];
    double total = 0.0;
    for (int r = 0; r < repeats; ++r) {
      const std::uint64_t stream = 1000 + 100 * static_cast<std::uint64_t>(g) + static_cast<std::uint64_t>(r);
      const Matrix x = sample_gaussian(theta0, t, derive_seed(spec.seed, stream));
      GlassoProblem p;
      p.c = sample_covariance(x, true);
      p.lambda = scaled_lambda(cfg.lambda0, n, t);
      p.eps = cfg.eps;
      p.alpha = cfg.alpha;
      p.gamma = cfg.gamma;
      p.tether = cfg.tether_truth ? theta0 : SymMatrix::zero(n);
      p.m_bound = default_spectral_bound(p.c, cfg.m_overshoot);
      const SymMatrix init = spectral_norm_clip(psd_project(sample_precision(p.c)), p.m_bound);
      try {
        total += frobenius_distance(solve_step1(p, init, cfg.eta, cfg.iters).theta, theta0);
      } catch (const Error& e) {
        rethrow_with_context(e, "rate_check at t=" + std::to_string(t));
      }
    }
    rep.errors.push_back(total / repeats);
    rep.theoretical_rate.push_back(std::sqrt(static_cast<double>(n + rep.s_nonzero) *
                                             std::log(static_cast<double>(n)) / static_cast<double>(t)));
  }
  std::vector<double> ts(t_grid.begin(), t_grid.end());
  rep.slope = fit_loglog(ts, rep.errors).slope;
  return rep;
}

}  // namespace pnn
