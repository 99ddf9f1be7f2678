#pragma once

#include "deconvband/bands.hpp"
#include "deconvband/bandwidth.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace deconvband {

struct BandConfig
{
  //! Bootstrap replications.
  std::size_t B = 2500;
  std::uint64_t seed = 0;
  //! Fixed bandwidth; the two-step rule is used when empty.
  std::optional<double> h;
  std::size_t J = 20;
  double rho = 3.0;
  //! Use max(sigma_hat, sqrt(h)) in the bootstrap and the band.
  bool floor_sigma = true;
  FlatTopKernel kernel{};
  QuadratureConfig quad{};
};

struct BandRun
{
  DensityEstimate estimate;
  std::optional<BandwidthSelection> selection;
  MultiplierDraws draws;
  //! One band per requested tau, in request order.
  std::vector<ConfidenceBand> bands;
};

//! Bandwidth selection, estimation, multiplier bootstrap and one band per
//! tau; every band shares the same bootstrap draws.
BandRun run_band_pipeline(const ObservedSample& sample,
                          std::span<const double> x_nodes,
                          const BandConfig& config,
                          std::span<const double> taus);

} // namespace deconvband
