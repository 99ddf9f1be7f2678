#include "deconvband/stats.hpp"

#include "deconvband/errors.hpp"

#include <algorithm>
#include <cmath>

namespace deconvband {

double sample_mean(std::span<const double> values)
{
  if (values.empty())
    throw DomainError("mean of an empty sample");
  double sum = 0.0;
  for (const double v : values)
    sum += v;
  return sum / static_cast<double>(values.size());
}

double sample_variance(std::span<const double> values)
{
  if (values.size() < 2)
    throw DomainError("variance needs at least two values");
  const double mean = sample_mean(values);
  double sum = 0.0;
  for (const double v : values)
    sum += (v - mean) * (v - mean);
  return sum / static_cast<double>(values.size() - 1);
}

double sample_quantile(std::span<const double> values, double p)
{
  if (values.empty())
    throw DomainError("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0))
    throw DomainError("quantile level must lie in [0, 1]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double position = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(position));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = position - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double ols_slope(std::span<const double> x, std::span<const double> y)
{
  if (x.size() != y.size() || x.size() < 2)
    throw DomainError("slope needs two equally long vectors of length >= 2");
  const double mx = sample_mean(x);
  const double my = sample_mean(y);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0)
    throw DomainError("slope undefined for constant regressor");
  return sxy / sxx;
}

} // namespace deconvband
