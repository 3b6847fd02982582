#include <doctest.h>

#include <cmath>

#include "pnn/error.hpp"
#include "pnn/linalg.hpp"
#include "test_util.hpp"

using namespace pnn;
using pnn::testing::max_abs_diff;

namespace {
SymMatrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return SymMatrix(m);
}
}  // namespace

TEST_CASE("SymMatrix construction enforces symmetry and finiteness") {
  Matrix m(2, 2);
  m << 1, 2, 4, 3;
  const SymMatrix s(m);
  CHECK(s(0, 1) == s(1, 0));
  CHECK(s(0, 1) == doctest::Approx(3.0));

  CHECK_THROWS_AS(SymMatrix(Matrix(2, 3)), ArgumentError);
  m(0, 0) = std::nan("");
  CHECK_THROWS_AS(SymMatrix{m}, ArgumentError);

  // already symmetric input is kept bit for bit
  std::mt19937_64 rng(3);
  const SymMatrix r = pnn::testing::random_sym(5, rng);
  CHECK(SymMatrix(r.matrix()) == r);
}

TEST_CASE("sym_eig on the diagonal and 2x2 swap cases") {
  const EigPair d = sym_eig(SymMatrix::diagonal(Vector::Map(std::vector<double>{3, 1}.data(), 2)));
  CHECK(d.values(0) == doctest::Approx(1.0));
  CHECK(d.values(1) == doctest::Approx(3.0));
  Matrix perm(2, 2);
  perm << 0, 1, 1, 0;
  CHECK(max_abs_diff(d.vectors, perm) < 1e-12);

  const EigPair s = sym_eig(mat2(0, 1, 1, 0));
  CHECK(s.values(0) == doctest::Approx(-1.0));
  CHECK(s.values(1) == doctest::Approx(1.0));
  const double r = 1.0 / std::sqrt(2.0);
  Matrix expected(2, 2);
  expected << r, r, -r, r;
  CHECK(max_abs_diff(s.vectors, expected) < 1e-12);
}

TEST_CASE("sym_eig reconstructs and is orthonormal on random input") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const SymMatrix a = pnn::testing::random_sym(6, rng);
    const EigPair e = sym_eig(a);
    const Matrix recon = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
    CHECK((recon - a.matrix()).norm() < 1e-8);
    CHECK(max_abs_diff(e.vectors.transpose() * e.vectors, Matrix::Identity(6, 6)) < 1e-10);
    for (Index i = 1; i < 6; ++i) CHECK(e.values(i) >= e.values(i - 1));
    for (Index c = 0; c < 6; ++c) {
      Index arg = 0;
      e.vectors.col(c).cwiseAbs().maxCoeff(&arg);
      CHECK(e.vectors(arg, c) > 0.0);
    }
  }
}

TEST_CASE("psd_project examples") {
  const SymMatrix d = mat2(1, 0, 0, 2);
  CHECK(psd_project(d) == d);

  const SymMatrix p = psd_project(mat2(0, 1, 1, 0));
  CHECK(max_abs_diff(p.matrix(), Matrix::Constant(2, 2, 0.5)) < 1e-12);

  const SymMatrix z = psd_project(-1.0 * SymMatrix::identity(3));
  CHECK(z.matrix().cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("psd_project is idempotent and PSD") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const SymMatrix a = pnn::testing::random_sym(7, rng);
    const SymMatrix p = psd_project(a);
    CHECK(sym_eigenvalues(p)(0) >= -1e-10);
    CHECK((psd_project(p).matrix() - p.matrix()).norm() < 1e-10);
  }
}

TEST_CASE("soft_threshold_offdiag examples") {
  const SymMatrix a = mat2(2, 0.5, 0.5, 3);
  const SymMatrix t = soft_threshold_offdiag(a, 0.2);
  CHECK(t(0, 0) == 2.0);
  CHECK(t(1, 1) == 3.0);
  CHECK(t(0, 1) == doctest::Approx(0.3));
  CHECK(t(1, 0) == t(0, 1));

  CHECK(soft_threshold_offdiag(a, 0.0) == a);
  const SymMatrix killed = soft_threshold_offdiag(mat2(1, 0.1, 0.1, 1), 0.5);
  CHECK(killed == SymMatrix::identity(2));
  CHECK(killed(0, 1) == 0.0);
  CHECK_FALSE(std::signbit(soft_threshold_offdiag(mat2(1, -0.1, -0.1, 1), 0.5)(0, 1)));

  CHECK_THROWS_AS(soft_threshold_offdiag(a, -0.1), ArgumentError);
}

TEST_CASE("soft_threshold_offdiag is non-expansive in Frobenius norm") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> tau(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const SymMatrix a = pnn::testing::random_sym(5, rng);
    const SymMatrix b = pnn::testing::random_sym(5, rng);
    const double t = tau(rng);
    CHECK(frobenius_distance(soft_threshold_offdiag(a, t), soft_threshold_offdiag(b, t)) <=
          frobenius_distance(a, b) + 1e-15);
  }
}

TEST_CASE("spectral_norm_clip examples and bound") {
  const SymMatrix d12 = mat2(1, 0, 0, 2);
  CHECK(spectral_norm_clip(d12, 3.0) == d12);
  const SymMatrix c = spectral_norm_clip(mat2(3, 0, 0, 1), 2.0);
  CHECK(c(0, 0) == doctest::Approx(2.0));
  CHECK(c(1, 1) == doctest::Approx(2.0 / 3.0));
  Matrix four(1, 1);
  four << 4;
  CHECK(spectral_norm_clip(SymMatrix(four), 2.0)(0, 0) == doctest::Approx(2.0));
  CHECK_THROWS_AS(spectral_norm_clip(d12, 0.0), ArgumentError);

  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const SymMatrix a = pnn::testing::random_sym(6, rng, 3.0);
    CHECK(matrix_norms(spectral_norm_clip(a, 1.5)).spectral <= 1.5 + 1e-10);
  }
}

TEST_CASE("logdet_reg closed forms and domain errors") {
  CHECK(logdet_reg(SymMatrix::identity(3), 0.0) == doctest::Approx(0.0));
  CHECK(logdet_reg(mat2(2, 0, 0, 2), 0.0) == doctest::Approx(1.386294).epsilon(1e-6));
  CHECK(logdet_reg(SymMatrix::zero(2), 0.1) == doctest::Approx(-4.605170).epsilon(1e-6));
  CHECK_THROWS_AS(logdet_reg(SymMatrix::zero(2), 0.0), DomainError);
  CHECK_THROWS_AS(logdet_reg(mat2(0, 1, 1, 0), 0.5), DomainError);
}

TEST_CASE("logdet_reg agrees with cofactor expansion for n <= 4") {
  std::mt19937_64 rng(13);
  for (Index n = 1; n <= 4; ++n) {
    for (int trial = 0; trial < 10; ++trial) {
      const SymMatrix a = pnn::testing::random_pd(n, rng, 0.2, 4.0);
      const double eps = 0.01 * trial;
      const double oracle = std::log(pnn::testing::cofactor_det(a.matrix() + eps * Matrix::Identity(n, n)));
      CHECK(std::abs(logdet_reg(a, eps) - oracle) < 1e-8);
    }
  }
}

TEST_CASE("matrix_norms") {
  const MatrixNorms id = matrix_norms(SymMatrix::identity(2));
  CHECK(id.frobenius == doctest::Approx(std::sqrt(2.0)));
  CHECK(id.l1_offdiag == 0.0);
  CHECK(id.nuclear == doctest::Approx(2.0));
  CHECK(id.spectral == doctest::Approx(1.0));

  const MatrixNorms sw = matrix_norms(mat2(0, 1, 1, 0));
  CHECK(sw.frobenius == doctest::Approx(std::sqrt(2.0)));
  CHECK(sw.l1_offdiag == doctest::Approx(2.0));
  CHECK(sw.nuclear == doctest::Approx(2.0));
  CHECK(sw.spectral == doctest::Approx(1.0));

  std::mt19937_64 rng(2);
  const SymMatrix a = pnn::testing::random_sym(5, rng);
  CHECK(std::abs(matrix_norms(a).nuclear - sym_eig(a).values.cwiseAbs().sum()) < 1e-10);
}
