#include "deconvband/bandwidth.hpp"

#include "deconvband/errors.hpp"
#include "deconvband/parallel.hpp"
#include "deconvband/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace deconvband {

namespace {

constexpr std::size_t kPilotGridSize = 64;
constexpr double kPilotGridLow = 0.05;
constexpr double kPilotGridHigh = 5.0;
constexpr std::size_t kMinNodesPerPilotIntegral = 64;
constexpr std::size_t kBiasSimpsonIntervals = 512;

// |phi_hat(t)|^2 for t = k * spacing, k = 0..count-1, summed in sorted order.
std::vector<double> ecf_modulus2(std::span<const double> sample, double spacing, std::size_t count)
{
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> re(count, 0.0);
  std::vector<double> im(count, 0.0);
  constexpr std::size_t stride = 64;
  for (const double eta : sorted) {
    const double rot_re = std::cos(spacing * eta);
    const double rot_im = std::sin(spacing * eta);
    for (std::size_t start = 0; start < count; start += stride) {
      const double phase = static_cast<double>(start) * spacing * eta;
      double z_re = std::cos(phase);
      double z_im = std::sin(phase);
      const std::size_t stop = std::min(count, start + stride);
      for (std::size_t k = start; k < stop; ++k) {
        re[k] += z_re;
        im[k] += z_im;
        const double next = z_re * rot_re - z_im * rot_im;
        z_im = z_re * rot_im + z_im * rot_re;
        z_re = next;
      }
    }
  }
  const double m = static_cast<double>(sample.size());
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k)
    out[k] = (re[k] * re[k] + im[k] * im[k]) / (m * m);
  out[0] = 1.0;
  return out;
}

} // namespace

double reference_variance(const ObservedSample& sample)
{
  const double var_y = sample_variance(sample.y);
  if (!(var_y > 0.0))
    throw DomainError("observations have zero variance");
  const double var_eta = sample.eta.size() >= 2 ? sample_variance(sample.eta) : 0.0;
  return std::max(var_y - var_eta, 0.05 * var_y);
}

std::vector<double> pilot_grid(const ObservedSample& sample)
{
  sample.validate();
  double spread = sample_quantile(sample.y, 0.75) - sample_quantile(sample.y, 0.25);
  if (!(spread > 0.0))
    spread = 1.349 * std::sqrt(sample_variance(sample.y));
  if (!(spread > 0.0))
    throw DomainError("observations have zero variance");
  const double scale = spread / std::pow(static_cast<double>(sample.y.size()), 0.2);
  std::vector<double> grid(kPilotGridSize);
  const double log_lo = std::log(kPilotGridLow);
  const double log_hi = std::log(kPilotGridHigh);
  for (std::size_t i = 0; i < kPilotGridSize; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(kPilotGridSize - 1);
    grid[i] = scale * std::exp(log_lo + f * (log_hi - log_lo));
  }
  return grid;
}

PilotObjective::PilotObjective(const ObservedSample& sample,
                               const FlatTopKernel& kernel,
                               double h_min,
                               double h_max,
                               const QuadratureConfig& quad)
  : kernel_(kernel)
  , n_(sample.y.size())
  , reference_variance_(deconvband::reference_variance(sample))
  , h_min_(h_min)
{
  sample.validate();
  if (!(h_min > 0.0 && h_max >= h_min) || !std::isfinite(h_max))
    throw DomainError("pilot objective needs 0 < h_min <= h_max");
  const double t_max = 1.0 / h_min;
  spacing_ = std::min(t_max / static_cast<double>(quad.nodes / 2),
                      (1.0 / h_max) / static_cast<double>(kMinNodesPerPilotIntegral));
  const auto count = static_cast<std::size_t>(std::ceil(t_max / spacing_)) + 1;
  const auto modulus2 = ecf_modulus2(sample.eta, spacing_, count);
  inverse_modulus2_.resize(count);
  for (std::size_t k = 0; k < count; ++k)
    inverse_modulus2_[k] =
      modulus2[k] > 0.0 ? 1.0 / modulus2[k] : std::numeric_limits<double>::infinity();
}

double PilotObjective::variance_term(double h) const
{
  if (!(h >= h_min_ * (1.0 - 1e-12)))
    throw DomainError("pilot objective evaluated below its h_min");
  // Even integrand vanishing smoothly at t = 1/h: trapezoid on [0, 1/h].
  double sum = 0.0;
  for (std::size_t k = 0; k < inverse_modulus2_.size(); ++k) {
    const double t = static_cast<double>(k) * spacing_;
    const double phi = kernel_(t * h);
    if (phi == 0.0)
      break;
    const double weight = k == 0 ? 0.5 : 1.0;
    sum += weight * phi * phi * inverse_modulus2_[k];
  }
  return sum * spacing_ / (std::numbers::pi * static_cast<double>(n_));
}

double PilotObjective::bias_term(double h) const
{
  const double s2 = reference_variance_;
  const double lo = kernel_.c() / h;
  const double hi = 1.0 / h;
  const double step = (hi - lo) / static_cast<double>(kBiasSimpsonIntervals);
  auto integrand = [&](double t) {
    const double gap = 1.0 - kernel_(t * h);
    return gap * gap * std::exp(-s2 * t * t);
  };
  double sum = integrand(lo) + integrand(hi);
  for (std::size_t i = 1; i < kBiasSimpsonIntervals; ++i)
    sum += (i % 2 == 1 ? 4.0 : 2.0) * integrand(lo + step * static_cast<double>(i));
  const double body = sum * step / 3.0;
  const double sigma = std::sqrt(s2);
  const double tail = std::sqrt(std::numbers::pi) / (2.0 * sigma) * std::erfc(sigma * hi);
  return (body + tail) / std::numbers::pi;
}

double PilotObjective::operator()(double h) const
{
  return variance_term(h) + bias_term(h);
}

double pilot_bandwidth(const ObservedSample& sample, const FlatTopKernel& kernel, const QuadratureConfig& quad)
{
  const auto grid = pilot_grid(sample);
  const PilotObjective objective(sample, kernel, grid.front(), grid.back(), quad);
  double best_h = 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (const double h : grid) {
    const double value = objective(h);
    if (value < best) {
      best = value;
      best_h = h;
    }
  }
  if (!(best_h > 0.0))
    throw DomainError("pilot objective is infinite on the whole bandwidth grid");
  return best_h;
}

std::vector<double> adjacent_distances(const std::vector<std::vector<double>>& estimates)
{
  std::vector<double> distances;
  for (std::size_t i = 0; i + 1 < estimates.size(); ++i) {
    const auto& a = estimates[i];
    const auto& b = estimates[i + 1];
    if (a.size() != b.size())
      throw DomainError("candidate estimates differ in length");
    double sup = 0.0;
    for (std::size_t l = 0; l < a.size(); ++l)
      sup = std::max(sup, std::abs(a[l] - b[l]));
    distances.push_back(sup);
  }
  return distances;
}

BandwidthSelection select_bandwidth(double h_pilot, std::size_t J, double rho, std::vector<double> distances)
{
  if (!(h_pilot > 0.0) || !std::isfinite(h_pilot))
    throw DomainError("pilot bandwidth must be positive and finite");
  if (J < 3)
    throw DomainError("need J >= 3 candidate bandwidths, got " + std::to_string(J));
  if (!(rho > 1.0))
    throw DomainError("rho must exceed 1, got " + std::to_string(rho));
  if (distances.size() != J - 1)
    throw DomainError("expected " + std::to_string(J - 1) + " adjacent distances, got " +
                      std::to_string(distances.size()));

  BandwidthSelection selection;
  selection.h_pilot = h_pilot;
  selection.J = J;
  selection.rho = rho;
  selection.candidates.resize(J);
  for (std::size_t j = 1; j <= J; ++j)
    selection.candidates[j - 1] = static_cast<double>(j) / static_cast<double>(J) * h_pilot;
  selection.distances = std::move(distances);

  const double benchmark = rho * selection.distances.back();
  selection.fallback_used = true;
  selection.chosen = 0.5 * h_pilot;
  for (std::size_t i = selection.distances.size(); i-- > 0;) {
    if (selection.distances[i] > benchmark) {
      // distances[i] compares candidates i and i + 1; the larger one is chosen.
      selection.chosen = selection.candidates[i + 1];
      selection.fallback_used = false;
      break;
    }
  }
  return selection;
}

BandwidthSelection two_step_bandwidth(const ObservedSample& sample,
                                      std::span<const double> x_nodes,
                                      const FlatTopKernel& kernel,
                                      std::size_t J,
                                      double rho,
                                      const QuadratureConfig& quad)
{
  const double h_pilot = pilot_bandwidth(sample, kernel, quad);
  return two_step_bandwidth(sample, x_nodes, h_pilot, kernel, J, rho, quad);
}

BandwidthSelection two_step_bandwidth(const ObservedSample& sample,
                                      std::span<const double> x_nodes,
                                      double h_pilot,
                                      const FlatTopKernel& kernel,
                                      std::size_t J,
                                      double rho,
                                      const QuadratureConfig& quad)
{
  if (J < 3)
    throw DomainError("need J >= 3 candidate bandwidths, got " + std::to_string(J));
  if (!(rho > 1.0))
    throw DomainError("rho must exceed 1, got " + std::to_string(rho));
  if (!(h_pilot > 0.0) || !std::isfinite(h_pilot))
    throw DomainError("pilot bandwidth must be positive and finite");

  std::vector<std::vector<double>> estimates(J);
  parallel_for(J, [&](std::size_t i) {
    const double h = static_cast<double>(i + 1) / static_cast<double>(J) * h_pilot;
    estimates[i] = estimate_density_values(sample, h, x_nodes, kernel, quad);
  });
  auto selection = select_bandwidth(h_pilot, J, rho, adjacent_distances(estimates));
  selection.candidate_estimates = std::move(estimates);
  return selection;
}

} // namespace deconvband
