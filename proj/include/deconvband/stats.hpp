#pragma once

#include <span>
#include <vector>

namespace deconvband {

double sample_mean(std::span<const double> values);

//! Unbiased (n - 1) sample variance.
double sample_variance(std::span<const double> values);

//! Linear-interpolation quantile of the sorted sample, p in [0, 1].
double sample_quantile(std::span<const double> values, double p);

//! Least-squares slope of y on x.
double ols_slope(std::span<const double> x, std::span<const double> y);

} // namespace deconvband
