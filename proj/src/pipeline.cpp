#include "deconvband/pipeline.hpp"

#include "deconvband/errors.hpp"

namespace deconvband {

BandRun run_band_pipeline(const ObservedSample& sample,
                          std::span<const double> x_nodes,
                          const BandConfig& config,
                          std::span<const double> taus)
{
  if (taus.empty())
    throw DomainError("no band level requested");
  for (const double tau : taus) {
    if (!(tau > 0.0 && tau < 1.0))
      throw DomainError("tau must lie in (0, 1), got " + std::to_string(tau));
  }
  sample.validate();

  BandRun run;
  double h = 0.0;
  if (config.h) {
    h = *config.h;
  } else {
    run.selection = two_step_bandwidth(sample, x_nodes, config.kernel, config.J, config.rho, config.quad);
    h = run.selection->chosen;
  }
  run.estimate = estimate_density(sample, h, x_nodes, config.kernel, config.quad, config.floor_sigma);
  run.draws = multiplier_sups(run.estimate, *run.estimate.kernel_matrix, config.B, config.seed);
  for (const double tau : taus)
    run.bands.push_back(build_band(run.estimate, quantile(run.draws, tau), tau));
  return run;
}

} // namespace deconvband
