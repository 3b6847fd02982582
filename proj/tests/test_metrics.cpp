#include <doctest.h>

#include <cmath>

#include "pnn/error.hpp"
#include "pnn/linalg.hpp"
#include "pnn/metrics.hpp"
#include "test_util.hpp"

using namespace pnn;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST_CASE("regression_metrics examples") {
  const Vector y = vec({1.0, -2.0, 3.5});
  CHECK(regression_metrics(y, y).mae == 0.0);
  CHECK(regression_metrics(y, y).mse == 0.0);

  auto r = regression_metrics(vec({0, 2}), vec({1, 1}));
  CHECK(r.mae == doctest::Approx(1.0));
  CHECK(r.mse == doctest::Approx(1.0));

  r = regression_metrics(vec({0, 0, 3}), vec({1, 1, 1}));
  CHECK(r.mae == doctest::Approx(4.0 / 3.0));
  CHECK(r.mse == doctest::Approx(2.0));

  CHECK_THROWS_AS(regression_metrics(Vector(), Vector()), ArgumentError);
  CHECK_THROWS_AS(regression_metrics(vec({1}), vec({1, 2})), ArgumentError);
}

TEST_CASE("precision_errors examples and brute force") {
  std::mt19937_64 rng(1);
  const SymMatrix a = pnn::testing::random_sym(5, rng);
  CHECK(precision_errors(a, a).l1 == 0.0);
  CHECK(precision_errors(a, a).frobenius == 0.0);

  const auto e = precision_errors(SymMatrix::identity(2), SymMatrix::zero(2));
  CHECK(e.l1 == doctest::Approx(2.0));
  CHECK(e.frobenius == doctest::Approx(std::sqrt(2.0)));

  for (int trial = 0; trial < 20; ++trial) {
    const SymMatrix x = pnn::testing::random_sym(6, rng);
    const SymMatrix y = pnn::testing::random_sym(6, rng);
    const SymMatrix z = pnn::testing::random_sym(6, rng);
    double l1 = 0.0, sq = 0.0;
    for (Index i = 0; i < 6; ++i)
      for (Index j = 0; j < 6; ++j) {
        const double diff = x(i, j) - y(i, j);
        l1 += std::abs(diff);
        sq += diff * diff;
      }
    const auto xy = precision_errors(x, y);
    CHECK(std::abs(xy.l1 - l1) <= 1e-12);
    CHECK(std::abs(xy.frobenius - std::sqrt(sq)) <= 1e-12);
    const auto yx = precision_errors(y, x);
    CHECK(xy.l1 == yx.l1);
    CHECK(xy.frobenius == yx.frobenius);
    const auto xz = precision_errors(x, z);
    const auto zy = precision_errors(z, y);
    CHECK(xy.l1 <= xz.l1 + zy.l1 + 1e-12);
    CHECK(xy.frobenius <= xz.frobenius + zy.frobenius + 1e-12);
  }
  CHECK_THROWS_AS(precision_errors(SymMatrix::identity(2), SymMatrix::identity(3)), ArgumentError);
}

TEST_CASE("count_zeros") {
  CHECK(count_zeros(SymMatrix::identity(3)) == 6);
  std::mt19937_64 rng(2);
  const SymMatrix dense = pnn::testing::random_sym(5, rng);
  CHECK(count_zeros(dense) == 0);
  CHECK(count_zeros(soft_threshold_offdiag(dense, 1e9)) == 20);
  CHECK(count_zeros(dense, 1e9) == 25);
  CHECK_THROWS_AS(count_zeros(dense, -1.0), ArgumentError);
  CHECK(count_offdiag_nonzeros(SymMatrix::identity(3)) == 0);
  CHECK(count_offdiag_nonzeros(dense) == 20);
}

TEST_CASE("fit_loglog on exact power laws") {
  const std::vector<double> t{200, 800, 3200, 12800};
  std::vector<double> err;
  for (double v : t) err.push_back(3.7 * std::pow(v, -0.5));
  const LineFit f = fit_loglog(t, err);
  CHECK(std::abs(f.slope + 0.5) < 1e-12);
  CHECK(std::abs(f.intercept - std::log(3.7)) < 1e-10);

  CHECK(std::abs(fit_loglog(t, {2, 2, 2, 2}).slope) < 1e-12);
  CHECK_THROWS_AS(fit_loglog({1}, {1}), ArgumentError);
  CHECK_THROWS_AS(fit_loglog({1, 2}, {1, 0}), DomainError);
  CHECK_THROWS_AS(fit_loglog({2, 2}, {1, 3}), DomainError);
}

TEST_CASE("rate_check on a small instance") {
  SyntheticSpec spec;
  spec.n = 10;
  spec.sparsity = 0.3;
  spec.seed = 3;
  const RateCheckReport r = rate_check(spec, {200, 800, 3200}, 3);
  REQUIRE(r.errors.size() == 3u);
  for (double e : r.errors) CHECK(e > 0.0);
  CHECK(r.errors[2] < r.errors[0]);
  CHECK(r.slope < -0.2);
  CHECK(r.s_nonzero == count_offdiag_nonzeros(gen_sparse_precision(spec)));
  CHECK(r.theoretical_rate[0] ==
        doctest::Approx(std::sqrt((10.0 + static_cast<double>(r.s_nonzero)) * std::log(10.0) / 200.0)));

  CHECK_THROWS_AS(rate_check(spec, {200, 800}, 3), ArgumentError);
  CHECK_THROWS_AS(rate_check(spec, {200, 800, 3200}, 2), ArgumentError);
  CHECK_THROWS_AS(rate_check(spec, {800, 200, 3200}, 3), ArgumentError);
}
