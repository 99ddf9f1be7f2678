#include "deconvband/errors.hpp"
#include "deconvband/fourier.hpp"
#include "deconvband/rng.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace deconvband;

namespace {

std::vector<double> normal_sample(std::size_t n, double sd, std::uint64_t seed)
{
  CounterStream s(seed, 0);
  std::vector<double> out(n);
  for (double& v : out)
    v = sd * s.normal();
  return out;
}

EcfEvaluation unit_ecf(double h, std::size_t nodes = 4097)
{
  const std::vector<double> zeros(5, 0.0);
  return regularized_ecf(zeros, FrequencyGrid::symmetric(1.0 / h, nodes));
}

} // namespace

TEST_CASE("frequency grid is symmetric with an exact zero")
{
  const auto g = FrequencyGrid::symmetric(3.7, 1025);
  REQUIRE(g.size() == 1025);
  CHECK(g[g.centre()] == 0.0);
  for (std::size_t k = 0; k < g.size(); ++k)
    CHECK(g[k] == -g[g.size() - 1 - k]);
  for (std::size_t k = 1; k < g.size(); ++k) {
    CHECK(g[k] > g[k - 1]);
    CHECK(std::abs((g[k] - g[k - 1]) - g.spacing()) <= 1e-12 * g.spacing());
  }
  CHECK_THROWS_AS(FrequencyGrid::symmetric(1.0, 1024), DomainError);
  CHECK_THROWS_AS(FrequencyGrid::symmetric(-1.0, 11), DomainError);
}

TEST_CASE("flat-top kernel branches")
{
  const FlatTopKernel k;
  CHECK(k(0.03) == 1.0);
  CHECK(k(-0.05) == 1.0);
  CHECK(k(1.2) == 0.0);
  CHECK(k(1.0) == 0.0);
  CHECK(k(0.5) == doctest::Approx(static_cast<double>(oracle::flat_top(0.5L))).epsilon(1e-14));
  CHECK(k(0.5) == doctest::Approx(0.9717).epsilon(1e-4));
  for (double t = -1.5; t <= 1.5; t += 0.01) {
    CHECK(k(t) == k(-t));
    CHECK(k(t) >= 0.0);
    CHECK(k(t) <= 1.0);
  }
  CHECK_THROWS_AS(FlatTopKernel(0.0, 0.05), DomainError);
  CHECK_THROWS_AS(FlatTopKernel(1.0, 1.0), DomainError);
}

TEST_CASE("empirical characteristic function examples")
{
  const auto grid = FrequencyGrid::symmetric(2.0, 5);
  const std::vector<double> zeros{ 0.0, 0.0, 0.0 };
  for (const auto& v : ecf(zeros, grid).values)
    CHECK(v == std::complex<double>(1.0, 0.0));

  const std::vector<double> pair{ -1.0, 1.0 };
  const auto ev = ecf(pair, grid);
  CHECK(ev.values[3].real() == doctest::Approx(std::cos(1.0)).epsilon(1e-14));
  CHECK(std::abs(ev.values[3].imag()) < 1e-15);

  const std::vector<double> three{ 1.0, 2.0, 3.0 };
  const auto expected = (std::polar(1.0, 1.0) + std::polar(1.0, 2.0) + std::polar(1.0, 3.0)) / 3.0;
  const auto got = ecf_at(three, 1.0);
  CHECK(std::abs(got - expected) < 1e-14);
  CHECK(std::abs(ecf(three, grid).values[3] - expected) < 1e-14);

  CHECK_THROWS_AS(ecf(std::vector<double>{}, grid), DomainError);
  CHECK_THROWS_AS(ecf(std::vector<double>{ 1.0, NAN }, grid), DomainError);
}

TEST_CASE("ECF invariants on random samples")
{
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto sample = normal_sample(257, 1.0 + seed, seed);
    const auto grid = FrequencyGrid::symmetric(25.0, 2001);
    const auto ev = regularized_ecf(sample, grid);
    CHECK(ev.values[grid.centre()] == std::complex<double>(1.0, 0.0));
    CHECK(ev.threshold == doctest::Approx(1.0 / std::sqrt(257.0)));
    for (std::size_t k = 0; k < grid.size(); ++k) {
      CHECK(std::abs(ev.values[k]) <= 1.0 + 1e-12);
      CHECK(ev.values[k] == std::conj(ev.values[grid.size() - 1 - k]));
      CHECK(ev.mask[k] == (std::abs(ev.values[k]) >= ev.threshold));
    }
    for (std::size_t k : { 1000u, 1100u, 1500u, 1999u })
      CHECK(std::abs(ev.values[k] - oracle::ecf(sample, grid[k])) < 1e-11);
  }
}

TEST_CASE("ECF does not depend on sample order")
{
  auto sample = normal_sample(300, 2.0, 11);
  const auto grid = FrequencyGrid::symmetric(10.0, 401);
  const auto a = ecf(sample, grid);
  std::reverse(sample.begin(), sample.end());
  const auto b = ecf(sample, grid);
  CHECK(a.values == b.values);
}

TEST_CASE("error-free deconvolution kernel equals the inverse transform of phi_K")
{
  const FlatTopKernel k;
  for (double h : { 0.2, 1.0 }) {
    const auto ev = unit_ecf(h);
    const std::vector<double> u{ 0.0, 0.37, 1.0, 2.5, -4.0, 7.3, 15.0 };
    double imag = 0.0;
    const auto direct = deconv_kernel_at(ev, k, h, u, &imag);
    for (std::size_t i = 0; i < u.size(); ++i)
      CHECK(std::abs(direct[i] - oracle::kernel(u[i])) < 2e-9);
    CHECK(imag < 1e-8);
  }
  const auto table = deconv_kernel(unit_ecf(0.5), k, 0.5, 10.0, QuadratureConfig{});
  CHECK(std::abs(table(0.0) - oracle::kernel(0.0)) < 2e-9);
}

TEST_CASE("symmetric error sample gives an even real kernel")
{
  const std::vector<double> eta{ -0.3, 0.3 };
  const FlatTopKernel k;
  const double h = 0.4;
  const auto ev = regularized_ecf(eta, FrequencyGrid::symmetric(1.0 / h, 4097));
  const auto table = deconv_kernel(ev, k, h, 12.0, QuadratureConfig{});
  for (double u : { 0.1, 0.9, 3.3, 8.0, 11.5 })
    CHECK(std::abs(table(u) - table(-u)) < 1e-10);
  CHECK(table.max_imag_residual() < 1e-8 * (1.0 + std::abs(table(0.0))));
}

TEST_CASE("imaginary residual is negligible for skewed samples")
{
  CounterStream s(3, 1);
  std::vector<double> eta(200);
  for (double& v : eta)
    v = -std::log(s.uniform());
  const FlatTopKernel k;
  for (double h : { 0.1, 0.3, 1.0 }) {
    const auto ev = regularized_ecf(eta, FrequencyGrid::symmetric(1.0 / h, 4097));
    const auto table = deconv_kernel(ev, k, h, 20.0, QuadratureConfig{});
    const double peak = *std::max_element(table.values().begin(), table.values().end(),
                                          [](double a, double b) { return std::abs(a) < std::abs(b); });
    CHECK(table.max_imag_residual() < 1e-8 * (1.0 + std::abs(peak)));
    for (double v : table.values())
      REQUIRE(std::isfinite(v));
  }
}

TEST_CASE("kernel table interpolation matches direct quadrature")
{
  CounterStream s(17, 0);
  std::vector<double> eta(400);
  for (double& v : eta)
    v = 0.5 * (s.uniform() < 0.5 ? -1.0 : 1.0) * std::log(s.uniform());
  const FlatTopKernel k;
  const double h = 0.25;
  const auto ev = regularized_ecf(eta, FrequencyGrid::symmetric(1.0 / h, 4097));
  const auto table = deconv_kernel(ev, k, h, 30.0, QuadratureConfig{});
  std::vector<double> u(64);
  for (double& v : u)
    v = -30.0 + 60.0 * s.uniform();
  const auto direct = deconv_kernel_at(ev, k, h, u);
  const double peak = std::abs(table(0.0));
  for (std::size_t i = 0; i < u.size(); ++i)
    CHECK(std::abs(table(u[i]) - direct[i]) < 1e-6 * peak);
  CHECK_THROWS_AS(table(table.u_max() + 1.0), DomainError);
}

TEST_CASE("plancherel identity in the error-free case")
{
  const FlatTopKernel k;
  const auto ev = unit_ecf(1.0);
  const double freq = plancherel_l2(ev, k, 1.0);
  // u-space trapezoid of K^2 on a range where K has decayed.
  const double du = 0.01;
  const auto table = deconv_kernel(ev, k, 1.0, -400.0, du, 80001);
  double space = 0.0;
  for (double v : table.values())
    space += v * v * du;
  CHECK(std::abs(space - freq) <= 1e-6 * freq);

  long double direct = 0.0L;
  const int steps = 1 << 16;
  for (int i = 0; i <= steps; ++i) {
    const long double t = -1.0L + 2.0L * i / steps;
    const long double w = (i == 0 || i == steps) ? 0.5L : 1.0L;
    direct += w * oracle::flat_top(t) * oracle::flat_top(t);
  }
  direct *= 2.0L / steps / (2.0L * std::numbers::pi_v<long double>);
  CHECK(std::abs(freq - static_cast<double>(direct)) < 1e-9);

  const double halved = plancherel_l2(unit_ecf(0.5), k, 0.5);
  CHECK(halved == doctest::Approx(freq).epsilon(1e-9));
}

TEST_CASE("degenerate inputs are rejected")
{
  const FlatTopKernel k;
  auto ev = unit_ecf(1.0, 101);
  CHECK_THROWS_AS(deconv_kernel_at(ev, k, 0.0, std::vector<double>{ 0.0 }), DomainError);
  CHECK_THROWS_AS(deconv_kernel_at(ev, k, -1.0, std::vector<double>{ 0.0 }), DomainError);
  // Grid covers [-1, 1] only, so h = 0.5 would need [-2, 2].
  CHECK_THROWS_AS(deconv_kernel_at(ev, k, 0.5, std::vector<double>{ 0.0 }), DomainError);
  const auto masked = with_threshold(ev, 2.0);
  CHECK(masked.retained() == 0);
  CHECK_THROWS_AS(deconv_kernel_at(masked, k, 1.0, std::vector<double>{ 0.0 }), DegenerateEcfError);
  CHECK_THROWS_AS(plancherel_l2(masked, k, 1.0), DegenerateEcfError);
  CHECK_THROWS_AS(deconv_kernel(masked, k, 1.0, 5.0, QuadratureConfig{}), DegenerateEcfError);
}

TEST_CASE("ECF derivative matches a central difference")
{
  const auto sample = normal_sample(80, 1.3, 21);
  const auto grid = FrequencyGrid::symmetric(4.0, 201);
  const auto ev = ecf(sample, grid);
  REQUIRE(ev.derivatives.size() == grid.size());
  const double step = 1e-5;
  for (std::size_t k : { std::size_t{ 0 }, std::size_t{ 37 }, grid.centre(), std::size_t{ 150 }, grid.size() - 1 }) {
    const auto numeric = (ecf_at(sample, grid[k] + step) - ecf_at(sample, grid[k] - step)) / (2.0 * step);
    CHECK(std::abs(ev.derivatives[k] - numeric) < 1e-8);
  }
}

TEST_CASE("masked kernel converges when the frequency grid is refined")
{
  // A heavy-tailed error sample with a small bandwidth puts threshold
  // crossings inside the kernel support.
  CounterStream s(31, 0);
  std::vector<double> eta(500);
  for (double& v : eta)
    v = (s.uniform() < 0.5 ? -1.0 : 1.0) * std::log(s.uniform()) / std::sqrt(2.0);
  const FlatTopKernel kernel;
  for (const double h : { 0.05, 0.08 }) {
    const auto coarse_ev = regularized_ecf(eta, FrequencyGrid::symmetric(1.0 / h, 4097));
    REQUIRE(coarse_ev.retained() < coarse_ev.values.size());
    const auto fine_ev = regularized_ecf(eta, FrequencyGrid::symmetric(1.0 / h, 8193));
    std::vector<double> u;
    for (int l = 0; l < 40; ++l)
      u.push_back(-15.0 + 0.75 * l);
    const auto coarse = deconv_kernel_at(coarse_ev, kernel, h, u);
    const auto fine = deconv_kernel_at(fine_ev, kernel, h, u);
    for (std::size_t l = 0; l < u.size(); ++l)
      CHECK(std::abs(coarse[l] - fine[l]) < 1e-6);
    const double l2_coarse = plancherel_l2(coarse_ev, kernel, h);
    CHECK(std::abs(l2_coarse - plancherel_l2(fine_ev, kernel, h)) < 1e-6 * l2_coarse);
  }
}

TEST_CASE("node-only masks are used when derivatives are missing")
{
  const auto sample = normal_sample(300, 1.0, 5);
  auto ev = regularized_ecf(sample, FrequencyGrid::symmetric(10.0, 1025));
  const FlatTopKernel kernel;
  const double with_edges = plancherel_l2(ev, kernel, 0.1);
  ev.derivatives.clear();
  const double node_only = plancherel_l2(ev, kernel, 0.1);
  CHECK(node_only > 0.0);
  CHECK(std::abs(node_only - with_edges) < 0.05 * with_edges);
}
