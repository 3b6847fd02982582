#include "pnn/datagen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <utility>
#include <vector>

#include "pnn/error.hpp"

namespace pnn {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the pair
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void SyntheticSpec::validate() const {
  if (n < 1) throw ArgumentError("SyntheticSpec: n must be >= 1");
  if (t < 2) throw ArgumentError("SyntheticSpec: t must be >= 2");
  const double diag_only = 1.0 / static_cast<double>(n);
  if (!(sparsity <= 1.0) || sparsity < diag_only - 1e-12) {
    std::ostringstream os;
    os << "SyntheticSpec: sparsity " << sparsity << " outside [" << diag_only
       << ", 1] (the diagonal is always nonzero)";
    throw ArgumentError(os.str());
  }
  if (!(snr > 0.0) && !snr_in_db) throw ArgumentError("SyntheticSpec: snr must be > 0");
}

double SyntheticSpec::linear_snr() const { return snr_in_db ? std::pow(10.0, snr / 10.0) : snr; }

SymMatrix gen_sparse_precision(const SyntheticSpec& spec) {
  spec.validate();
  const Index n = spec.n;
  std::mt19937_64 rng(derive_seed(spec.seed, 0));

  std::vector<std::pair<Index, Index>> pairs;
  for (Index j = 0; j < n; ++j)
    for (Index i = j + 1; i < n; ++i) pairs.emplace_back(i, j);
  const double target = spec.sparsity * static_cast<double>(n * n);
  const auto wanted = std::llround((target - static_cast<double>(n)) / 2.0);
  const auto count = static_cast<std::size_t>(
      std::clamp<long long>(wanted, 0, static_cast<long long>(pairs.size())));
  std::shuffle(pairs.begin(), pairs.end(), rng);

  std::uniform_real_distribution<double> magnitude(0.5, 1.0);
  std::bernoulli_distribution negative(0.5);
  Matrix theta = Matrix::Zero(n, n);
  for (std::size_t p = 0; p < count; ++p) {
    const auto [i, j] = pairs[p];
    const double m = magnitude(rng);
    const double v = negative(rng) ? -m : m;
    theta(i, j) = v;
    theta(j, i) = v;
  }
  for (Index i = 0; i < n; ++i) theta(i, i) = theta.row(i).cwiseAbs().sum() + 0.5;

  SymMatrix out(theta);
  if (!(sym_eigenvalues(out)(0) > 0.0))
    throw NumericalError("gen_sparse_precision: generated matrix is not positive definite");
  return out;
}

Matrix sample_gaussian(const SymMatrix& theta0, Index t, std::uint64_t seed) {
  if (t < 1) throw ArgumentError("sample_gaussian: t must be >= 1");
  const Eigen::LLT<Matrix> llt(theta0.matrix());
  if (llt.info() != Eigen::Success)
    throw DomainError("sample_gaussian: precision matrix is not positive definite");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Index n = theta0.dim();
  Matrix z(n, t);
  for (Index c = 0; c < t; ++c)
    for (Index r = 0; r < n; ++r) z(r, c) = normal(rng);
  // theta0 = L L^T, so x = L^{-T} z has covariance theta0^{-1}
  return llt.matrixU().solve(z);
}

Targets gen_targets(const Matrix& x, double snr, std::uint64_t seed) {
  if (!(snr > 0.0)) throw ArgumentError("gen_targets: snr must be > 0");
  if (x.cols() < 1) throw ArgumentError("gen_targets: no samples");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Targets out;
  out.w.resize(x.rows());
  for (Index i = 0; i < x.rows(); ++i) out.w(i) = normal(rng);
  const Vector signal = x.transpose() * out.w;
  const double var = (signal.array() - signal.mean()).square().mean();
  if (!(var > 0.0)) throw DomainError("gen_targets: signal w^T x has zero variance");
  out.y = signal;
  if (std::isinf(snr)) return out;
  out.sigma = std::sqrt(var / snr);
  for (Index c = 0; c < out.y.size(); ++c) out.y(c) += out.sigma * normal(rng);
  return out;
}

SyntheticInstance generate_instance(const SyntheticSpec& spec) {
  SyntheticInstance inst;
  inst.theta0 = gen_sparse_precision(spec);
  inst.x = sample_gaussian(inst.theta0, spec.t, derive_seed(spec.seed, 1));
  Targets tg = gen_targets(inst.x, spec.linear_snr(), derive_seed(spec.seed, 2));
  inst.y = std::move(tg.y);
  inst.w = std::move(tg.w);
  inst.sigma = tg.sigma;
  return inst;
}

namespace {

void put_double(std::ostream& os, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  os.write(buf, res.ptr - buf);
}

}  // namespace

void write_instance_csv(const SyntheticInstance& inst, const std::string& features_path,
                        const std::string& targets_path) {
  std::ofstream fx(features_path);
  if (!fx) throw IoError("cannot write '" + features_path + "'");
  for (Index r = 0; r < inst.x.rows(); ++r) {
    for (Index c = 0; c < inst.x.cols(); ++c) {
      if (c) fx << ',';
      put_double(fx, inst.x(r, c));
    }
    fx << '\n';
  }
  std::ofstream fy(targets_path);
  if (!fy) throw IoError("cannot write '" + targets_path + "'");
  for (Index c = 0; c < inst.y.size(); ++c) {
    put_double(fy, inst.y(c));
    fy << '\n';
  }
  if (!fx || !fy) throw IoError("write failed for '" + features_path + "' or '" + targets_path + "'");
}

}  // namespace pnn
