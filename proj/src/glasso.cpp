#include "pnn/glasso.hpp"

#include <cmath>
#include <sstream>

#include "pnn/error.hpp"

namespace pnn {

namespace {

Matrix tether_or_zero(const GlassoProblem& p) {
  return p.tether.empty() ? Matrix::Zero(p.c.dim(), p.c.dim()) : p.tether.matrix();
}

double l1_offdiag(const Matrix& m) {
  double s = 0.0;
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i)
      if (i != j) s += std::abs(m(i, j));
  return s;
}

// Objective evaluated from a known spectrum of theta.
double objective_from_spectrum(const Matrix& theta, const Vector& w, const GlassoProblem& p,
                               const Matrix& tether) {
  double logdet = 0.0;
  for (Index i = 0; i < w.size(); ++i) logdet += std::log(w(i) + p.eps);
  const double gl = (p.c.matrix().cwiseProduct(theta)).sum() - logdet + p.lambda * l1_offdiag(theta);
  return (1.0 - p.alpha) * gl + 0.5 * p.gamma * (theta - tether).squaredNorm();
}

}  // namespace

void GlassoProblem::validate() const {
  if (c.empty()) throw ArgumentError("GlassoProblem: empty covariance");
  if (!(lambda >= 0.0)) throw ArgumentError("GlassoProblem: lambda must be >= 0");
  if (!(eps > 0.0)) throw ArgumentError("GlassoProblem: eps must be > 0");
  if (!(gamma >= 0.0)) throw ArgumentError("GlassoProblem: gamma must be >= 0");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ArgumentError("GlassoProblem: alpha must lie in [0, 1]");
  if (!(m_bound > 0.0)) throw ArgumentError("GlassoProblem: m_bound must be > 0");
  if (!tether.empty() && tether.dim() != c.dim())
    throw ArgumentError("GlassoProblem: tether dimension differs from covariance");
}

double scaled_lambda(double lambda0, Index n, Index t) {
  if (n < 1 || t < 1) throw ArgumentError("scaled_lambda: n and t must be positive");
  return lambda0 * std::sqrt(std::log(static_cast<double>(n)) / static_cast<double>(t));
}

double gl_objective(const SymMatrix& theta, const GlassoProblem& p) {
  if (theta.dim() != p.c.dim()) throw ArgumentError("gl_objective: dimension mismatch");
  const double trace = (p.c.matrix().cwiseProduct(theta.matrix())).sum();
  return trace - logdet_reg(theta, p.eps) + p.lambda * l1_offdiag(theta.matrix());
}

double penalized_objective(const SymMatrix& theta, const GlassoProblem& p) {
  const double tether_term = 0.5 * p.gamma * (theta.matrix() - tether_or_zero(p)).squaredNorm();
  return (1.0 - p.alpha) * gl_objective(theta, p) + tether_term;
}

SymMatrix smooth_gradient(const SymMatrix& theta, const GlassoProblem& p) {
  if (theta.dim() != p.c.dim()) throw ArgumentError("smooth_gradient: dimension mismatch");
  const EigPair e = sym_eig(theta);
  Vector inv(e.values.size());
  for (Index i = 0; i < inv.size(); ++i) {
    const double w = e.values(i) + p.eps;
    if (!(w > 0.0)) throw DomainError("smooth_gradient: theta + eps I is not positive definite");
    inv(i) = 1.0 / w;
  }
  const Matrix shifted_inverse = e.vectors * inv.asDiagonal() * e.vectors.transpose();
  const Matrix g = (1.0 - p.alpha) * (p.c.matrix() - shifted_inverse) +
                   p.gamma * (theta.matrix() - tether_or_zero(p));
  return SymMatrix(g);
}

GlassoSolution solve_step1(const GlassoProblem& p, const SymMatrix& init, double eta, int iters,
                           const IterateObserver& observer) {
  p.validate();
  if (init.dim() != p.c.dim()) throw ArgumentError("solve_step1: init dimension mismatch");
  if (!(eta > 0.0)) throw ArgumentError("solve_step1: eta must be > 0");
  if (iters < 1) throw ArgumentError("solve_step1: iters must be >= 1");

  const Matrix tether = tether_or_zero(p);
  const double threshold = eta * (1.0 - p.alpha) * p.lambda;

  SymMatrix theta = init;
  EigPair spectrum = sym_eig(theta);
  if (!(spectrum.values(0) + p.eps > 0.0))
    throw DomainError("solve_step1: init + eps I is not positive definite");

  std::vector<std::pair<Index, Index>> killed;
  GlassoSolution out;
  out.objective_trace.reserve(static_cast<std::size_t>(iters));
  for (int it = 0; it < iters; ++it) {
    const Vector inv = (spectrum.values.array() + p.eps).inverse().matrix();
    const Matrix shifted_inverse = spectrum.vectors * inv.asDiagonal() * spectrum.vectors.transpose();
    const Matrix grad = (1.0 - p.alpha) * (p.c.matrix() - shifted_inverse) +
                        p.gamma * (theta.matrix() - tether);
    const Matrix stepped = theta.matrix() - eta * grad;
    if (!stepped.allFinite()) {
      std::ostringstream os;
      os << "solve_step1: iterate became non-finite at iteration " << it << " (eta too large?)";
      throw DivergenceError(os.str(), it);
    }

    Matrix shrunk = 0.5 * (stepped + stepped.transpose());
    killed.clear();
    for (Index j = 0; j < shrunk.cols(); ++j) {
      for (Index i = j + 1; i < shrunk.rows(); ++i) {
        const double v = shrunk(i, j);
        const double mag = std::abs(v) - threshold;
        const double out = mag > 0.0 ? std::copysign(mag, v) : 0.0;
        if (out == 0.0) killed.emplace_back(i, j);
        shrunk(i, j) = out;
        shrunk(j, i) = out;
      }
    }
    SymMatrix next(shrunk);
    spectrum = sym_eig(next);
    const bool projected = spectrum.values(0) < 0.0;
    if (projected) {
      spectrum.values = spectrum.values.cwiseMax(0.0);
      next = from_spectrum(spectrum.values, spectrum.vectors);
    }
    const double norm = std::max(std::abs(spectrum.values(0)),
                                 std::abs(spectrum.values(spectrum.values.size() - 1)));
    const bool clipped = norm > p.m_bound;
    if (clipped) {
      const double scale = p.m_bound / norm;
      next = scale * next;
      spectrum.values *= scale;
    }
    theta = std::move(next);

    const double obj = objective_from_spectrum(theta.matrix(), spectrum.values, p, tether);
    if (!std::isfinite(obj)) {
      std::ostringstream os;
      os << "solve_step1: objective became non-finite at iteration " << it << " (eta too large?)";
      throw DivergenceError(os.str(), it);
    }
    out.objective_trace.push_back(obj);
    if (observer) observer(Step1Iterate{it, theta, killed, projected, clipped});
  }
  out.theta = std::move(theta);
  out.iterations = iters;
  return out;
}

}  // namespace pnn
