#include "deconvband/errors.hpp"
#include "deconvband/estimator.hpp"
#include "deconvband/rng.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace deconvband;

namespace {

ObservedSample laplace_sample(std::size_t n, double sd_x, std::uint64_t seed)
{
  CounterStream s(seed, 0);
  std::vector<double> y1(n), y2(n);
  auto laplace = [&] {
    const double u = s.uniform() - 0.5;
    return -std::copysign(std::log1p(-2.0 * std::abs(u)), u);
  };
  for (std::size_t j = 0; j < n; ++j) {
    const double x = sd_x * s.normal();
    y1[j] = x + laplace();
    y2[j] = x + laplace();
  }
  return from_repeated_measurements(y1, y2);
}

} // namespace

TEST_CASE("repeated-measurement construction")
{
  auto a = from_repeated_measurements(std::vector<double>{ 1, 5 }, std::vector<double>{ 3, 1 });
  CHECK(a.y == std::vector<double>{ 2, 3 });
  CHECK(a.eta == std::vector<double>{ -1, 2 });

  const std::vector<double> same{ 0.5, -1.0, 2.0 };
  const auto b = from_repeated_measurements(same, same);
  CHECK(b.y == same);
  for (double e : b.eta)
    CHECK(e == 0.0);

  CHECK_THROWS_AS(from_repeated_measurements(std::vector<double>{ 1, 2 }, std::vector<double>{ 1 }), DomainError);
  const auto single = from_repeated_measurements(std::vector<double>{ 2 }, std::vector<double>{ 4 });
  CHECK(single.y == std::vector<double>{ 3 });
  CHECK(single.eta == std::vector<double>{ -1 });
}

TEST_CASE("sample validation")
{
  ObservedSample s{ { 1.0 }, { 0.0 } };
  CHECK_THROWS_AS(s.validate(), DomainError);
  s = ObservedSample{ { 1.0, 2.0 }, {} };
  CHECK_THROWS_AS(s.validate(), DomainError);
  s = ObservedSample{ { 1.0, INFINITY }, { 0.0 } };
  CHECK_THROWS_AS(s.validate(), DomainError);
  s = ObservedSample{ { 1.0, 2.0 }, { 0.0 } };
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("error-free estimate reduces to the ordinary KDE")
{
  CounterStream s(8, 0);
  ObservedSample sample;
  for (int j = 0; j < 60; ++j)
    sample.y.push_back(1.5 * s.normal());
  sample.eta.assign(60, 0.0);
  const double h = 0.6;
  const auto x = linspace(-3.0, 3.0, 21);
  const auto est = estimate_density(sample, h, x);
  for (std::size_t l = 0; l < x.size(); ++l)
    CHECK(std::abs(est.f_hat[l] - oracle::kde(sample.y, h, x[l])) < 1e-7);
}

TEST_CASE("estimate integrates to one")
{
  const auto sample = laplace_sample(300, 2.0, 4);
  const double h = 0.5;
  const auto [lo, hi] = std::minmax_element(sample.y.begin(), sample.y.end());
  const auto x = linspace(*lo - 10.0 * h, *hi + 10.0 * h, 2001);
  const auto f = estimate_density_values(sample, h, x);
  double integral = 0.0;
  for (std::size_t l = 1; l < x.size(); ++l)
    integral += 0.5 * (f[l] + f[l - 1]) * (x[l] - x[l - 1]);
  CHECK(std::abs(integral - 1.0) < 0.01);
}

TEST_CASE("three-point sample matches brute-force quadrature")
{
  const ObservedSample sample{ { -0.4, 0.1, 1.3 }, { -0.2, 0.05, 0.3, -0.1 } };
  const double h = 0.7;
  const std::vector<double> x{ 0.25 };
  const auto est = estimate_density(sample, h, x);
  const auto ev = regularized_ecf(sample.eta, FrequencyGrid::symmetric(1.0 / h, 4097));
  std::vector<double> u;
  for (double y : sample.y)
    u.push_back((x[0] - y) / h);
  const auto k = deconv_kernel_at(ev, FlatTopKernel{}, h, u);
  double brute = 0.0;
  for (double v : k)
    brute += v;
  brute /= 3.0 * h;
  CHECK(std::abs(est.f_hat[0] - brute) < 1e-6);
}

TEST_CASE("variance is non-negative and the floor holds")
{
  const auto sample = laplace_sample(200, 1.0, 9);
  const auto x = linspace(-2.0, 2.0, 41);
  for (double h : { 0.1, 0.3, 0.9 }) {
    const auto est = estimate_density(sample, h, x);
    for (std::size_t l = 0; l < x.size(); ++l) {
      CHECK(est.sigma2_raw[l] >= -1e-10);
      CHECK(est.sigma_hat[l] >= std::sqrt(h));
      CHECK(std::isfinite(est.f_hat[l]));
    }
    const auto raw = estimate_density(sample, h, x, FlatTopKernel{}, QuadratureConfig{}, false);
    CHECK_FALSE(raw.sigma_floored);
    for (std::size_t l = 0; l < x.size(); ++l)
      CHECK(raw.sigma_hat[l] == std::sqrt(std::max(raw.sigma2_raw[l], 0.0)));
    CHECK(raw.f_hat == est.f_hat);
  }
}

TEST_CASE("location equivariance")
{
  const auto sample = laplace_sample(150, 1.0, 21);
  const double shift = 3.25;
  auto moved = sample;
  for (double& y : moved.y)
    y += shift;
  const auto x = linspace(-1.5, 1.5, 31);
  auto x_moved = x;
  for (double& v : x_moved)
    v += shift;
  const auto a = estimate_density(sample, 0.4, x);
  const auto b = estimate_density(moved, 0.4, x_moved);
  for (std::size_t l = 0; l < x.size(); ++l) {
    CHECK(std::abs(a.f_hat[l] - b.f_hat[l]) < 1e-9);
    CHECK(std::abs(a.sigma_hat[l] - b.sigma_hat[l]) < 1e-9);
  }
}

TEST_CASE("permutation invariance is exact")
{
  const auto sample = laplace_sample(120, 1.0, 33);
  auto shuffled = sample;
  std::reverse(shuffled.y.begin(), shuffled.y.end());
  std::rotate(shuffled.eta.begin(), shuffled.eta.begin() + 17, shuffled.eta.end());
  const auto x = linspace(-2.0, 2.0, 25);
  const auto a = estimate_density(sample, 0.35, x);
  const auto b = estimate_density(shuffled, 0.35, x);
  CHECK(a.f_hat == b.f_hat);
  CHECK(a.sigma_hat == b.sigma_hat);
  CHECK(a.kernel_matrix_digest == b.kernel_matrix_digest);
}

TEST_CASE("identical observations have zero variance")
{
  ObservedSample sample{ std::vector<double>(40, 0.7), {} };
  CounterStream s(2, 2);
  for (int j = 0; j < 40; ++j)
    sample.eta.push_back(0.3 * s.normal());
  const auto est = estimate_density(sample, 0.5, linspace(-1.0, 2.0, 13), FlatTopKernel{}, QuadratureConfig{}, false);
  for (double v : est.sigma2_raw)
    CHECK(std::abs(v) < 1e-10);
}

TEST_CASE("kernel matrix is stored with a digest")
{
  const auto sample = laplace_sample(50, 1.0, 5);
  const auto x = linspace(-1.0, 1.0, 7);
  const auto est = estimate_density(sample, 0.5, x);
  REQUIRE(est.kernel_matrix);
  CHECK(est.kernel_matrix->rows == 50);
  CHECK(est.kernel_matrix->cols == 7);
  CHECK(est.kernel_matrix->digest() == est.kernel_matrix_digest);
  for (std::size_t l = 0; l < x.size(); ++l) {
    double sum = 0.0;
    for (std::size_t j = 0; j < 50; ++j)
      sum += (*est.kernel_matrix)(j, l);
    CHECK(est.f_hat[l] == doctest::Approx(sum / (50 * 0.5)).epsilon(1e-13));
  }
}

TEST_CASE("invalid bandwidth")
{
  const auto sample = laplace_sample(20, 1.0, 1);
  CHECK_THROWS_AS(estimate_density(sample, 0.0, std::vector<double>{ 0.0 }), DomainError);
  CHECK_THROWS_AS(estimate_density(sample, -0.1, std::vector<double>{ 0.0 }), DomainError);
}
