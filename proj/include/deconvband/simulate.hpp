#pragma once

#include "deconvband/pipeline.hpp"
#include "deconvband/rng.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace deconvband {

enum class Model
{
  //! X ~ N(0, s^2), errors Laplace(0, 1).
  normal_laplace,
  //! X ~ chi^2(df) with df = s^2, errors Laplace(0, sqrt 2).
  chisq_laplace,
  //! X ~ N(0, s^2), errors N(0, 2): super-smooth error.
  normal_normal
};

std::string to_string(Model model);
Model model_from_string(const std::string& name);

struct SimScenario
{
  Model model = Model::normal_laplace;
  std::size_t n = 500;
  //! sigma_X for the normal models, sqrt(df) for the chi-squared model.
  double signal_noise = 2.0;
  //! Nominal coverage levels 1 - tau.
  std::vector<double> levels{ 0.80, 0.90, 0.95 };
  std::size_t reps = 300;
  std::size_t bootstrap_B = 500;
  std::uint64_t seed = 1;
  std::size_t grid_n = 64;
  std::size_t J = 20;
  double rho = 3.0;
  //! Off by default: the coverage tables use the unmodified variance.
  bool floor_sigma = false;
  QuadratureConfig quad{ 2049 };

  //! Throws DomainError on an invalid scenario.
  void validate() const;
  //! Full-scale variant: 2000 replications, 2500 bootstrap draws.
  SimScenario full_scale() const;
};

//! Interval I: [-2 sigma, 2 sigma] for the normal models,
//! [mu/2, mu + 2 sigma] with (mu, sigma) = (df, sqrt(2 df)) for chi-squared.
std::pair<double, double> interval(const SimScenario& scenario);

//! Closed-form density of X.
double true_density(const SimScenario& scenario, double x);

//! Inverse-CDF Laplace draws.
std::vector<double> sample_laplace(std::size_t n, double location, double scale, CounterStream& stream);

//! Repeated-measurement sample for replication rep; deterministic in
//! (scenario.seed, rep).
ObservedSample generate(const SimScenario& scenario, std::size_t rep);

struct CoverageReport
{
  SimScenario scenario;
  std::map<double, std::size_t> hits;
  std::map<double, double> coverage;
  std::map<double, double> mc_stderr;
  //! Replications that completed; failures are excluded from coverage.
  std::size_t completed = 0;
  std::size_t failures = 0;
  //! Replications where a higher-level band failed to contain a lower one.
  std::size_t nesting_violations = 0;
  //! Replications where the bandwidth rule fell back to h_pilot / 2.
  std::size_t bandwidth_fallbacks = 0;
  double mean_bandwidth = 0.0;
  double wall_time = 0.0;
};

CoverageReport coverage_study(const SimScenario& scenario);

enum class PowerFamily
{
  //! Normal densities N(mu, s^2), parameter mu.
  mean,
  //! Normal densities N(0, sigma^2), parameter sigma.
  scale
};

struct PowerPoint
{
  double parameter = 0.0;
  std::size_t hits = 0;
  double coverage = 0.0;
  double mc_stderr = 0.0;
};

struct PowerReport
{
  SimScenario scenario;
  PowerFamily family = PowerFamily::mean;
  double level = 0.90;
  std::vector<PowerPoint> points;
  std::size_t completed = 0;
  std::size_t failures = 0;
  double wall_time = 0.0;
};

//! Fraction of replications whose band at `level` contains each
//! alternative specification. Requires a normal-X scenario; every
//! alternative is checked against the same band of a replication.
PowerReport power_study(const SimScenario& scenario,
                        PowerFamily family,
                        std::span<const double> parameters,
                        double level = 0.90);

enum class ErrorLaw
{
  laplace,
  normal
};

struct EcfRateRow
{
  std::size_t n = 0;
  double mean_sup_error = 0.0;
  double sd_sup_error = 0.0;
};

struct EcfRateReport
{
  ErrorLaw law = ErrorLaw::laplace;
  double T = 0.0;
  std::size_t reps = 0;
  std::vector<EcfRateRow> rows;
  //! Log-log slope of mean sup-error against n.
  double slope = 0.0;
};

//! Mean over reps of sup_{|t| <= T} |phi_n(t) - phi(t)| for standard
//! Laplace or normal samples, on a uniform grid of grid_nodes frequencies.
EcfRateReport ecf_rate_diagnostic(ErrorLaw law,
                                  std::span<const std::size_t> n_list,
                                  double T,
                                  std::size_t reps,
                                  std::uint64_t seed,
                                  std::size_t grid_nodes = 2001);

//! Sup-error of a single sample against the true CF of the law.
double ecf_sup_error(ErrorLaw law, std::span<const double> sample, double T, std::size_t grid_nodes);

} // namespace deconvband
