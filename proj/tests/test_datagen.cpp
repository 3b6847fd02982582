#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "pnn/datagen.hpp"
#include "pnn/error.hpp"
#include "test_util.hpp"

using namespace pnn;

namespace {
Index nonzeros(const SymMatrix& a) {
  return (a.matrix().array() != 0.0).count();
}
}  // namespace

TEST_CASE("gen_sparse_precision: diagonal-only sparsity") {
  SyntheticSpec spec;
  spec.n = 6;
  spec.sparsity = 1.0 / 6.0;
  const SymMatrix t = gen_sparse_precision(spec);
  CHECK(t == SymMatrix::diagonal(Vector::Constant(6, 0.5)));

  spec.sparsity = 0.1;
  CHECK_THROWS_AS(gen_sparse_precision(spec), ArgumentError);
  spec.sparsity = 1.5;
  CHECK_THROWS_AS(gen_sparse_precision(spec), ArgumentError);
}

TEST_CASE("gen_sparse_precision hits the target count and is diagonally dominant") {
  for (double s : {0.1, 0.2, 0.4, 0.6, 1.0}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      SyntheticSpec spec;
      spec.sparsity = s;
      spec.seed = seed;
      const SymMatrix t = gen_sparse_precision(spec);
      CHECK(std::abs(nonzeros(t) - std::llround(s * 400)) <= 2);
      CHECK(t.matrix() == t.matrix().transpose());
      for (Index i = 0; i < 20; ++i) {
        const double off = t.matrix().row(i).cwiseAbs().sum() - std::abs(t(i, i));
        CHECK(t(i, i) > off);
      }
      CHECK(sym_eigenvalues(t)(0) > 0.0);
    }
  }
}

TEST_CASE("sample_gaussian moments and reproducibility") {
  const Matrix x = sample_gaussian(SymMatrix::diagonal(Vector::Constant(1, 4.0)), 200000, 5);
  CHECK(x.squaredNorm() / 200000.0 == doctest::Approx(0.25).epsilon(0.02));

  const Matrix id = sample_gaussian(SymMatrix::identity(3), 100000, 6);
  CHECK((id * id.transpose() / 100000.0 - Matrix::Identity(3, 3)).norm() < 0.03);

  SyntheticSpec spec;
  spec.n = 5;
  spec.sparsity = 0.6;
  spec.seed = 3;
  const SymMatrix theta0 = gen_sparse_precision(spec);
  const Matrix big = sample_gaussian(theta0, 1000000, 12);
  const Matrix emp = big * big.transpose() / 1e6;
  CHECK((emp - sample_precision(theta0).matrix()).norm() < 0.02);

  CHECK(sample_gaussian(theta0, 50, 99) == sample_gaussian(theta0, 50, 99));
  CHECK_THROWS_AS(sample_gaussian(SymMatrix::zero(2), 5, 1), DomainError);
}

TEST_CASE("gen_targets noise calibration") {
  std::mt19937_64 rng(1);
  const Matrix x = pnn::testing::random_matrix(4, 30, rng);
  const Targets clean = gen_targets(x, std::numeric_limits<double>::infinity(), 8);
  CHECK(pnn::testing::max_abs_diff(clean.y, x.transpose() * clean.w) == 0.0);
  CHECK(clean.sigma == 0.0);

  CHECK_THROWS_AS(gen_targets(Matrix::Zero(3, 10), 10.0, 1), DomainError);

  SyntheticSpec spec;
  spec.seed = 21;
  const Matrix big = sample_gaussian(gen_sparse_precision(spec), 100000, 4);
  const Targets tg = gen_targets(big, 10.0, 5);
  const Vector s = big.transpose() * tg.w;
  const Vector z = tg.y - s;
  const double vs = (s.array() - s.mean()).square().mean();
  const double vz = (z.array() - z.mean()).square().mean();
  CHECK(vs / vz >= 9.0);
  CHECK(vs / vz <= 11.0);
}

TEST_CASE("snr in decibels") {
  SyntheticSpec spec;
  spec.snr = 10.0;
  spec.snr_in_db = true;
  CHECK(spec.linear_snr() == doctest::Approx(10.0));
  spec.snr = 20.0;
  CHECK(spec.linear_snr() == doctest::Approx(100.0));
}

TEST_CASE("generate_instance is seed-deterministic and writes CSV") {
  SyntheticSpec spec;
  spec.n = 4;
  spec.t = 6;
  spec.sparsity = 0.5;
  spec.seed = 42;
  const SyntheticInstance a = generate_instance(spec);
  const SyntheticInstance b = generate_instance(spec);
  CHECK(a.x == b.x);
  CHECK(a.y == b.y);
  CHECK(a.theta0 == b.theta0);

  const auto dir = std::filesystem::temp_directory_path() / "pnn_datagen_test";
  std::filesystem::create_directories(dir);
  write_instance_csv(a, (dir / "x.csv").string(), (dir / "y.csv").string());
  std::ifstream fx(dir / "x.csv");
  std::string line;
  int rows = 0;
  while (std::getline(fx, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 5);
  }
  CHECK(rows == 4);
}
