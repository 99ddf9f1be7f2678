#include "deconvband/bandwidth.hpp"
#include "deconvband/errors.hpp"
#include "deconvband/rng.hpp"

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

TEST_CASE("selection rule on injected distances")
{
  const auto sel = select_bandwidth(1.4, 7, 3.0, { 10, 8, 6, 1, 1, 1 });
  CHECK_FALSE(sel.fallback_used);
  REQUIRE(sel.candidates.size() == 7);
  // distances[2] compares candidates 3 and 4; the larger of the pair wins.
  CHECK(sel.chosen == sel.candidates[3]);
  CHECK(sel.chosen == doctest::Approx(4.0 / 7.0 * 1.4));

  const auto flat = select_bandwidth(2.0, 5, 3.0, { 1, 1, 1, 1 });
  CHECK(flat.fallback_used);
  CHECK(flat.chosen == 1.0);

  const auto last = select_bandwidth(1.0, 4, 3.0, { 0, 0, 0 });
  CHECK(last.fallback_used);

  for (std::size_t i = 1; i < sel.candidates.size(); ++i)
    CHECK(sel.candidates[i] > sel.candidates[i - 1]);
  CHECK(sel.candidates.back() == 1.4);
  CHECK_THROWS_AS(select_bandwidth(1.0, 5, 3.0, { 1, 2 }), DomainError);
}

TEST_CASE("pilot matches a fine-grid minimization of the same objective")
{
  CounterStream s(4, 4);
  ObservedSample sample;
  for (int j = 0; j < 3000; ++j)
    sample.y.push_back(s.normal());
  sample.eta.assign(3000, 0.0);
  const auto coarse = pilot_grid(sample);
  const double pilot = pilot_bandwidth(sample);
  const PilotObjective objective(sample, FlatTopKernel{}, coarse.front(), coarse.back());
  const std::size_t fine_n = 10 * (coarse.size() - 1) + 1;
  const double ratio = coarse[1] / coarse[0];
  double best = INFINITY, best_h = 0.0;
  for (std::size_t i = 0; i < fine_n; ++i) {
    const double h = coarse.front() * std::pow(coarse.back() / coarse.front(), double(i) / double(fine_n - 1));
    const double v = objective(h);
    if (v < best) {
      best = v;
      best_h = h;
    }
  }
  CHECK(pilot / best_h <= ratio * (1.0 + 1e-12));
  CHECK(best_h / pilot <= ratio * (1.0 + 1e-12));
}

TEST_CASE("pilot is scale equivariant")
{
  const auto sample = laplace_sample(500, 2.0, 7);
  const double h = pilot_bandwidth(sample);
  auto scaled = sample;
  for (double& v : scaled.y)
    v *= 3.0;
  for (double& v : scaled.eta)
    v *= 3.0;
  const double hs = pilot_bandwidth(scaled);
  const auto g = pilot_grid(sample);
  const double ratio = g[1] / g[0];
  CHECK(hs / (3.0 * h) <= ratio * (1.0 + 1e-9));
  CHECK(3.0 * h / hs <= ratio * (1.0 + 1e-9));
}

TEST_CASE("reference variance floor")
{
  ObservedSample sample{ { -1.0, 0.0, 1.0 }, { -5.0, 0.0, 5.0 } };
  CHECK(reference_variance(sample) == doctest::Approx(0.05 * 1.0));
  CHECK_NOTHROW(pilot_bandwidth(sample));
  ObservedSample flat{ { 2.0, 2.0, 2.0 }, { 0.0, 0.1 } };
  CHECK_THROWS_AS(pilot_bandwidth(flat), DomainError);
}

TEST_CASE("two-step rule invariants")
{
  const auto sample = laplace_sample(400, 2.0, 13);
  const auto x = linspace(-4.0, 4.0, 41);
  const auto a = two_step_bandwidth(sample, x);
  const auto b = two_step_bandwidth(sample, x);
  CHECK(a.J == 20);
  CHECK(a.rho == 3.0);
  CHECK(a.chosen <= a.h_pilot);
  CHECK(a.chosen == b.chosen);
  CHECK(a.distances == b.distances);
  REQUIRE(a.distances.size() == 19);
  CHECK(a.distances == adjacent_distances(a.candidate_estimates));
  for (double d : a.distances)
    CHECK(d >= 0.0);
  const bool in_list = std::find(a.candidates.begin(), a.candidates.end(), a.chosen) != a.candidates.end();
  CHECK((in_list || (a.fallback_used && a.chosen == a.h_pilot / 2.0)));
  for (std::size_t j = 0; j < a.candidates.size(); ++j)
    CHECK(a.candidates[j] == doctest::Approx((j + 1) / 20.0 * a.h_pilot).epsilon(1e-15));
}
