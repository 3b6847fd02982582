#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "pnn/linalg.hpp"

namespace pnn {

/// Tethered, penalized graphical lasso
///
///   (1 - alpha) [tr(C T) - logdet(T + eps I) + lambda ||T_offdiag||_1]
///     + gamma/2 ||T - tether||_F^2
///   s.t. T >= 0, ||T||_2 <= m_bound.
///
/// gamma = alpha = 0 gives the plain graphical lasso. An empty tether is
/// read as the zero matrix.
struct GlassoProblem {
  SymMatrix c;
  double lambda = 0.0;
  double eps = 1e-3;
  double gamma = 0.0;
  double alpha = 0.0;
  SymMatrix tether;
  double m_bound = 1.0;

  /// Throws ArgumentError when a field is out of range.
  void validate() const;
};

struct GlassoSolution {
  SymMatrix theta;
  std::vector<double> objective_trace;
  int iterations = 0;
};

/// One completed proximal step. `killed` lists the off-diagonal positions
/// (i > j) that soft thresholding set to zero in this step; `projected` is
/// true when the PSD projection had to clamp an eigenvalue.
struct Step1Iterate {
  int iteration;
  const SymMatrix& theta;
  const std::vector<std::pair<Index, Index>>& killed;
  bool projected;
  bool clipped;
};

using IterateObserver = std::function<void(const Step1Iterate&)>;

/// lambda0 sqrt(log n / t)
double scaled_lambda(double lambda0, Index n, Index t);

double gl_objective(const SymMatrix& theta, const GlassoProblem& p);
double penalized_objective(const SymMatrix& theta, const GlassoProblem& p);

/// Gradient of the smooth part of penalized_objective:
/// (1 - alpha)(C - (theta + eps I)^{-1}) + gamma (theta - tether).
SymMatrix smooth_gradient(const SymMatrix& theta, const GlassoProblem& p);

/// Proximal gradient: gradient step, off-diagonal soft threshold at
/// eta (1 - alpha) lambda, PSD projection, spectral-norm clip. Throws
/// DivergenceError with the iteration index once the objective is non-finite.
GlassoSolution solve_step1(const GlassoProblem& p, const SymMatrix& init, double eta, int iters,
                           const IterateObserver& observer = {});

}  // namespace pnn
