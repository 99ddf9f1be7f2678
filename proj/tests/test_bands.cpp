#include "deconvband/bands.hpp"
#include "deconvband/errors.hpp"
#include "deconvband/pipeline.hpp"
#include "deconvband/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace deconvband;

namespace {

ObservedSample laplace_sample(std::size_t n, std::uint64_t seed)
{
  CounterStream s(seed, 0);
  std::vector<double> y1(n), y2(n);
  auto laplace = [&] {
    const double u = s.uniform() - 0.5;
    return -std::copysign(std::log1p(-2.0 * std::abs(u)), u);
  };
  for (std::size_t j = 0; j < n; ++j) {
    const double x = 2.0 * s.normal();
    y1[j] = x + laplace();
    y2[j] = x + laplace();
  }
  return from_repeated_measurements(y1, y2);
}

struct Toy
{
  DensityEstimate est;
  KernelMatrix matrix;
};

Toy two_point()
{
  Toy t;
  t.matrix = KernelMatrix{ 2, 1, { 1.0, -1.0 } };
  t.est.x_nodes = { 0.0 };
  t.est.f_hat = { 0.0 };
  t.est.sigma_hat = { 1.0 };
  t.est.n = 2;
  t.est.h = 1.0;
  t.est.kernel_matrix_digest = t.matrix.digest();
  return t;
}

} // namespace

TEST_CASE("zero multipliers give zero sups")
{
  const auto t = two_point();
  const auto draws =
    multiplier_sups(t.est, t.matrix, 50, 1, [](std::size_t, std::span<double> xi) {
      for (double& v : xi)
        v = 0.0;
    });
  for (double s : draws.sups)
    CHECK(s == 0.0);
}

TEST_CASE("two-point process has unit variance")
{
  const auto t = two_point();
  const std::size_t B = 10000;
  const auto draws = multiplier_sups(t.est, t.matrix, B, 77);
  double m2 = 0.0;
  for (double s : draws.sups)
    m2 += s * s;
  m2 /= static_cast<double>(B);
  // |Z|^2 with Z = (xi_1 - xi_2)/sqrt(2) ~ N(0, 1); Var(Z^2) = 2.
  CHECK(std::abs(m2 - 1.0) < 5.0 * std::sqrt(2.0 / B));
}

TEST_CASE("multiplier process is centred at every node")
{
  const auto sample = laplace_sample(100, 3);
  const auto x = linspace(-2.0, 2.0, 9);
  const auto est = estimate_density(sample, 0.5, x);
  const auto& m = *est.kernel_matrix;
  const std::size_t B = 10000;
  const auto source = gaussian_multipliers(5);
  std::vector<double> mean_col(x.size(), 0.0);
  for (std::size_t j = 0; j < m.rows; ++j)
    for (std::size_t l = 0; l < m.cols; ++l)
      mean_col[l] += m(j, l) / static_cast<double>(m.rows);
  std::vector<double> avg(x.size(), 0.0);
  std::vector<double> xi(m.rows);
  for (std::size_t b = 0; b < B; ++b) {
    source(b, xi);
    for (std::size_t l = 0; l < m.cols; ++l) {
      double z = 0.0;
      for (std::size_t j = 0; j < m.rows; ++j)
        z += xi[j] * (m(j, l) - mean_col[l]);
      avg[l] += z / (est.sigma_hat[l] * std::sqrt(100.0)) / static_cast<double>(B);
    }
  }
  for (double a : avg)
    CHECK(std::abs(a) < 4.0 / std::sqrt(static_cast<double>(B)));
}

TEST_CASE("multiplier sups match a direct recomputation")
{
  const auto sample = laplace_sample(80, 4);
  const auto x = linspace(-1.0, 1.0, 5);
  const auto est = estimate_density(sample, 0.6, x);
  const auto& m = *est.kernel_matrix;
  const auto draws = multiplier_sups(est, m, 40, 9);
  const auto source = gaussian_multipliers(9);
  std::vector<double> xi(m.rows);
  for (std::size_t b = 0; b < 40; ++b) {
    source(b, xi);
    double sup = 0.0;
    for (std::size_t l = 0; l < m.cols; ++l) {
      double mean = 0.0;
      for (std::size_t j = 0; j < m.rows; ++j)
        mean += m(j, l);
      mean /= static_cast<double>(m.rows);
      double z = 0.0;
      for (std::size_t j = 0; j < m.rows; ++j)
        z += xi[j] * (m(j, l) - mean);
      sup = std::max(sup, std::abs(z) / (est.sigma_hat[l] * std::sqrt(80.0)));
    }
    CHECK(draws.sups[b] == doctest::Approx(sup).epsilon(1e-12));
  }
}

TEST_CASE("bootstrap argument checks")
{
  auto t = two_point();
  CHECK_THROWS_AS(multiplier_sups(t.est, t.matrix, 0, 1), DomainError);
  KernelMatrix other{ 2, 1, { 1.0, -2.0 } };
  CHECK_THROWS_AS(multiplier_sups(t.est, other, 10, 1), DomainError);
  KernelMatrix wide{ 2, 2, { 1.0, 0.0, -1.0, 0.0 } };
  CHECK_THROWS_AS(multiplier_sups(t.est, wide, 10, 1), DomainError);
}

TEST_CASE("order-statistic quantile")
{
  MultiplierDraws d;
  for (int i = 1; i <= 10; ++i)
    d.sups.push_back(11 - i);
  d.B = 10;
  CHECK(quantile(d, 0.1) == 9.0);
  CHECK(quantile(d, 0.5) == 5.0);
  MultiplierDraws flat{ { 5, 5, 5, 5 }, 4, 0 };
  for (double tau : { 0.01, 0.3, 0.99 })
    CHECK(quantile(flat, tau) == 5.0);
  CHECK_THROWS_AS(quantile(d, 0.0), DomainError);
  CHECK_THROWS_AS(quantile(d, 1.0), DomainError);

  CounterStream s(1, 1);
  MultiplierDraws r;
  for (int i = 0; i < 333; ++i)
    r.sups.push_back(std::abs(s.normal()));
  r.B = 333;
  double prev = INFINITY;
  for (double tau = 0.01; tau < 1.0; tau += 0.01) {
    const double q = quantile(r, tau);
    CHECK(q <= prev);
    prev = q;
  }
}

TEST_CASE("band arithmetic")
{
  DensityEstimate est;
  est.x_nodes = { 0.0 };
  est.f_hat = { 0.5 };
  est.sigma_hat = { 2.0 };
  est.n = 100;
  est.h = 0.5;
  const auto band = build_band(est, 3.0, 0.1);
  CHECK(band.lower[0] == doctest::Approx(-0.7).epsilon(1e-15));
  CHECK(band.upper[0] == doctest::Approx(1.7).epsilon(1e-15));
  CHECK(band.sup_width == doctest::Approx(2.4).epsilon(1e-15));

  const auto collapsed = build_band(est, 0.0, 0.1);
  CHECK(collapsed.lower == collapsed.center);
  CHECK(collapsed.upper == collapsed.center);
}

TEST_CASE("coverage equivalence and width recomputation")
{
  const auto sample = laplace_sample(200, 6);
  const auto x = linspace(-3.0, 3.0, 31);
  const auto est = estimate_density(sample, 0.45, x);
  const auto draws = multiplier_sups(est, *est.kernel_matrix, 300, 2);
  const double c = quantile(draws, 0.1);
  const auto band = build_band(est, c, 0.1);
  const double denom = std::sqrt(200.0) * 0.45;
  double widest = 0.0;
  for (double s : est.sigma_hat)
    widest = std::max(widest, s);
  CHECK(band.sup_width == 2.0 * widest * c / denom);
  for (std::size_t l = 0; l < x.size(); ++l) {
    CHECK(band.lower[l] <= band.center[l]);
    CHECK(band.center[l] <= band.upper[l]);
  }

  CounterStream s(10, 0);
  int inside = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const double scale = 0.5 * s.uniform();
    std::vector<double> g(x.size());
    double stat = 0.0;
    for (std::size_t l = 0; l < x.size(); ++l) {
      const double half = band.upper[l] - band.center[l];
      g[l] = band.center[l] + (2.0 * s.uniform() - 1.0) * half * (0.8 + scale);
      stat = std::max(stat, std::abs(denom * (est.f_hat[l] - g[l]) / est.sigma_hat[l]));
    }
    const bool by_stat = stat <= c;
    CHECK(band.contains(g) == by_stat);
    inside += by_stat;
  }
  CHECK(inside > 0);
  CHECK(inside < 200);
}

TEST_CASE("pipeline is reproducible and bands nest")
{
  const auto sample = laplace_sample(250, 12);
  const auto x = linspace(-3.0, 3.0, 41);
  BandConfig cfg;
  cfg.B = 400;
  cfg.seed = 44;
  const std::vector<double> taus{ 0.2, 0.1, 0.05 };
  const auto a = run_band_pipeline(sample, x, cfg, taus);
  const auto b = run_band_pipeline(sample, x, cfg, taus);
  REQUIRE(a.bands.size() == 3);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(a.bands[i].c_hat == b.bands[i].c_hat);
  CHECK(a.draws.sups == b.draws.sups);
  for (std::size_t l = 0; l < x.size(); ++l) {
    CHECK(a.bands[2].lower[l] <= a.bands[1].lower[l]);
    CHECK(a.bands[1].lower[l] <= a.bands[0].lower[l]);
    CHECK(a.bands[0].upper[l] <= a.bands[1].upper[l]);
    CHECK(a.bands[1].upper[l] <= a.bands[2].upper[l]);
  }
  CHECK_THROWS_AS(run_band_pipeline(sample, x, cfg, std::vector<double>{ 1.5 }), DomainError);
}
