#include "deconvband/bands.hpp"

#include "deconvband/errors.hpp"
#include "deconvband/parallel.hpp"
#include "deconvband/rng.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace deconvband {

namespace {

constexpr std::size_t kReplicationBlock = 32;

} // namespace

MultiplierSource gaussian_multipliers(std::uint64_t seed)
{
  return [seed](std::size_t replication, std::span<double> xi) {
    CounterStream stream(seed, replication);
    for (double& value : xi)
      value = stream.normal();
  };
}

MultiplierDraws multiplier_sups(const DensityEstimate& est,
                                const KernelMatrix& matrix,
                                std::size_t B,
                                std::uint64_t seed)
{
  return multiplier_sups(est, matrix, B, seed, gaussian_multipliers(seed));
}

MultiplierDraws multiplier_sups(const DensityEstimate& est,
                                const KernelMatrix& matrix,
                                std::size_t B,
                                std::uint64_t seed,
                                const MultiplierSource& source)
{
  if (B < 1)
    throw DomainError("number of bootstrap replications B must be >= 1");
  const std::size_t n = matrix.rows;
  const std::size_t nx = matrix.cols;
  if (n != est.n || nx != est.x_nodes.size() || est.sigma_hat.size() != nx)
    throw DomainError("kernel matrix is " + std::to_string(n) + " x " + std::to_string(nx) +
                      ", estimate expects " + std::to_string(est.n) + " x " +
                      std::to_string(est.x_nodes.size()));
  if (est.kernel_matrix_digest != 0 && matrix.digest() != est.kernel_matrix_digest)
    throw DomainError("kernel matrix does not match the one used for the estimate");

  // Centred columns, pre-divided by sigma_hat sqrt(n).
  std::vector<double> mean(nx, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const auto row = matrix.row(j);
    for (std::size_t l = 0; l < nx; ++l)
      mean[l] += row[l];
  }
  for (double& value : mean)
    value /= static_cast<double>(n);
  const double root_n = std::sqrt(static_cast<double>(n));
  std::vector<double> scaled(n * nx);
  for (std::size_t j = 0; j < n; ++j) {
    const auto row = matrix.row(j);
    for (std::size_t l = 0; l < nx; ++l) {
      // A zero variance means a constant column, which contributes nothing.
      const double sigma = est.sigma_hat[l];
      scaled[j * nx + l] = sigma > 0.0 ? (row[l] - mean[l]) / (sigma * root_n) : 0.0;
    }
  }

  MultiplierDraws draws;
  draws.B = B;
  draws.seed = seed;
  draws.sups.assign(B, 0.0);
  const std::size_t blocks = (B + kReplicationBlock - 1) / kReplicationBlock;
  parallel_for(blocks, [&](std::size_t block) {
    std::vector<double> xi(n);
    std::vector<double> z(nx);
    const std::size_t stop = std::min(B, (block + 1) * kReplicationBlock);
    for (std::size_t b = block * kReplicationBlock; b < stop; ++b) {
      source(b, xi);
      std::fill(z.begin(), z.end(), 0.0);
      for (std::size_t j = 0; j < n; ++j) {
        const double weight = xi[j];
        const double* row = scaled.data() + j * nx;
        for (std::size_t l = 0; l < nx; ++l)
          z[l] += weight * row[l];
      }
      double sup = 0.0;
      for (const double value : z)
        sup = std::max(sup, std::abs(value));
      draws.sups[b] = sup;
    }
  });
  return draws;
}

double quantile(const MultiplierDraws& draws, double tau)
{
  if (!(tau > 0.0 && tau < 1.0))
    throw DomainError("tau must lie in (0, 1), got " + std::to_string(tau));
  if (draws.sups.empty())
    throw DomainError("no bootstrap draws");
  const double B = static_cast<double>(draws.sups.size());
  // The slack absorbs rounding in (1 - tau) * B when it is an integer.
  const double target = (1.0 - tau) * B;
  auto rank = static_cast<std::size_t>(std::ceil(target - 1e-9 * std::max(1.0, target)));
  rank = std::clamp<std::size_t>(rank, 1, draws.sups.size());
  std::vector<double> sorted = draws.sups;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank - 1), sorted.end());
  return sorted[rank - 1];
}

ConfidenceBand build_band(const DensityEstimate& est, double c_hat, double tau)
{
  if (!(c_hat >= 0.0) || !std::isfinite(c_hat))
    throw DomainError("critical value must be finite and non-negative");
  const std::size_t nx = est.x_nodes.size();
  ConfidenceBand band;
  band.x_nodes = est.x_nodes;
  band.center = est.f_hat;
  band.sigma_hat = est.sigma_hat;
  band.lower.resize(nx);
  band.upper.resize(nx);
  band.c_hat = c_hat;
  band.tau = tau;
  band.h = est.h;
  band.n = est.n;
  const double denom = std::sqrt(static_cast<double>(est.n)) * est.h;
  double widest = 0.0;
  for (std::size_t l = 0; l < nx; ++l) {
    const double half = est.sigma_hat[l] * c_hat / denom;
    band.lower[l] = est.f_hat[l] - half;
    band.upper[l] = est.f_hat[l] + half;
    widest = std::max(widest, est.sigma_hat[l]);
  }
  band.sup_width = 2.0 * widest * c_hat / denom;
  return band;
}

bool ConfidenceBand::contains(std::span<const double> g) const
{
  if (g.size() != x_nodes.size())
    throw DomainError("target function has " + std::to_string(g.size()) + " values, band has " +
                      std::to_string(x_nodes.size()) + " nodes");
  for (std::size_t l = 0; l < g.size(); ++l) {
    if (!(g[l] >= lower[l] && g[l] <= upper[l]))
      return false;
  }
  return true;
}

} // namespace deconvband
