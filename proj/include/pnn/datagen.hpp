#pragma once

#include <cstdint>
#include <string>

#include "pnn/linalg.hpp"
#include "pnn/stats.hpp"

namespace pnn {

/// Splits one user seed into independent, reproducible sub-streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Sparse Gaussian graphical model with a linear regression target.
/// `sparsity` is the fraction of nonzero entries of the precision matrix,
/// diagonal included.
struct SyntheticSpec {
  Index n = 20;
  Index t = 100;
  double sparsity = 0.2;
  double snr = 10.0;
  bool snr_in_db = false;
  std::uint64_t seed = 0;

  void validate() const;
  double linear_snr() const;
};

struct SyntheticInstance {
  SymMatrix theta0;
  Matrix x;
  Vector y;
  Vector w;
  double sigma = 0.0;

  Dataset dataset() const { return Dataset(x, y, false); }
};

/// Random symmetric support hitting the target nonzero count, off-diagonal
/// weights uniform in +-[0.5, 1], diagonal set to absolute row sum + 0.5.
SymMatrix gen_sparse_precision(const SyntheticSpec& spec);

/// t columns drawn from N(0, theta0^{-1}) via the Cholesky factor of theta0.
Matrix sample_gaussian(const SymMatrix& theta0, Index t, std::uint64_t seed);

struct Targets {
  Vector y;
  Vector w;
  double sigma = 0.0;
};

/// y = w^T x + z with w ~ N(0, I) and noise variance var(w^T x) / snr.
/// An infinite snr yields the noiseless signal.
Targets gen_targets(const Matrix& x, double snr, std::uint64_t seed);

/// Full instance; the three generators use sub-streams of spec.seed.
SyntheticInstance generate_instance(const SyntheticSpec& spec);

/// Writes features (n rows x t columns) and targets (one per line) in the
/// CSV layout read by load_csv_dataset.
void write_instance_csv(const SyntheticInstance& inst, const std::string& features_path,
                        const std::string& targets_path);

}  // namespace pnn
