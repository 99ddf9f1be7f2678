#pragma once

#include "deconvband/estimator.hpp"

#include <span>
#include <vector>

namespace deconvband {

//! Normal-reference MISE proxy for the deconvolution estimator:
//!   V(h) = 1/(2 pi n) int_{|t|<=1/h} phi_K(th)^2 / |phi_eps(t)|^2 dt
//!   B(h) = 1/(2 pi)   int (1 - phi_K(th))^2 exp(-s2 t^2) dt
//! where s2 = max(var(y) - var(eta), 0.05 var(y)). The error ECF is
//! evaluated once on a grid shared by every h >= h_min.
class PilotObjective
{
public:
  PilotObjective(const ObservedSample& sample,
                 const FlatTopKernel& kernel,
                 double h_min,
                 double h_max,
                 const QuadratureConfig& quad = QuadratureConfig{});

  double operator()(double h) const;
  double variance_term(double h) const;
  double bias_term(double h) const;
  double reference_variance() const { return reference_variance_; }

private:
  FlatTopKernel kernel_;
  std::size_t n_;
  double reference_variance_;
  double spacing_;
  double h_min_;
  std::vector<double> inverse_modulus2_;
};

//! Reference variance max(var(y) - var(eta), 0.05 var(y)); throws
//! DomainError when var(y) = 0.
double reference_variance(const ObservedSample& sample);

//! 64 log-spaced bandwidths on [0.05, 5] * IQR(y) / n^{1/5}.
std::vector<double> pilot_grid(const ObservedSample& sample);

//! Minimizer of the MISE proxy over pilot_grid(sample).
double pilot_bandwidth(const ObservedSample& sample,
                       const FlatTopKernel& kernel = FlatTopKernel{},
                       const QuadratureConfig& quad = QuadratureConfig{});

struct BandwidthSelection
{
  double h_pilot = 0.0;
  std::size_t J = 0;
  double rho = 0.0;
  //! h_j = (j / J) h_pilot, j = 1..J.
  std::vector<double> candidates;
  //! distances[i] = sup_I |f_{i} - f_{i+1}| over consecutive candidates.
  std::vector<double> distances;
  //! f_hat for every candidate, on the caller's nodes.
  std::vector<std::vector<double>> candidate_estimates;
  double chosen = 0.0;
  bool fallback_used = false;
};

//! Sup-norm distances between consecutive candidate estimates.
std::vector<double> adjacent_distances(const std::vector<std::vector<double>>& estimates);

//! Applies the selection rule to precomputed distances: the largest h_j
//! whose distance ||f_{j-1} - f_j|| exceeds rho times the last distance,
//! otherwise h_pilot / 2 with fallback_used set.
BandwidthSelection select_bandwidth(double h_pilot, std::size_t J, double rho, std::vector<double> distances);

//! Two-step undersmoothing rule starting from the pilot bandwidth.
BandwidthSelection two_step_bandwidth(const ObservedSample& sample,
                                      std::span<const double> x_nodes,
                                      const FlatTopKernel& kernel = FlatTopKernel{},
                                      std::size_t J = 20,
                                      double rho = 3.0,
                                      const QuadratureConfig& quad = QuadratureConfig{});

//! Same, with the pilot supplied by the caller.
BandwidthSelection two_step_bandwidth(const ObservedSample& sample,
                                      std::span<const double> x_nodes,
                                      double h_pilot,
                                      const FlatTopKernel& kernel,
                                      std::size_t J,
                                      double rho,
                                      const QuadratureConfig& quad);

} // namespace deconvband
