#pragma once

#include "deconvband/estimator.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace deconvband {

//! Bootstrap realizations of sup_x |Z^xi(x)|.
struct MultiplierDraws
{
  std::vector<double> sups;
  std::size_t B = 0;
  std::uint64_t seed = 0;
};

//! Fills xi (length n) with the multipliers of one replication.
using MultiplierSource = std::function<void(std::size_t replication, std::span<double> xi)>;

//! Standard normal multipliers from the counter stream (seed, replication).
MultiplierSource gaussian_multipliers(std::uint64_t seed);

//! For each replication b, draws xi_1..xi_n and records
//!   max_l | sum_j xi_j (M[j,l] - mean_l) | / (sigma_hat_l sqrt(n)).
MultiplierDraws multiplier_sups(const DensityEstimate& est,
                                const KernelMatrix& matrix,
                                std::size_t B,
                                std::uint64_t seed);

//! Same, with a caller-supplied multiplier source.
MultiplierDraws multiplier_sups(const DensityEstimate& est,
                                const KernelMatrix& matrix,
                                std::size_t B,
                                std::uint64_t seed,
                                const MultiplierSource& source);

//! ceil((1 - tau) B)-th smallest sup.
double quantile(const MultiplierDraws& draws, double tau);

struct ConfidenceBand
{
  std::vector<double> x_nodes;
  std::vector<double> center;
  std::vector<double> sigma_hat;
  std::vector<double> lower;
  std::vector<double> upper;
  double c_hat = 0.0;
  double tau = 0.0;
  double h = 0.0;
  std::size_t n = 0;
  //! 2 max_l sigma_hat_l c_hat / (sqrt(n) h).
  double sup_width = 0.0;

  //! True when g(x_l) lies in [lower_l, upper_l] for every node.
  bool contains(std::span<const double> g) const;
};

ConfidenceBand build_band(const DensityEstimate& est, double c_hat, double tau);

} // namespace deconvband
