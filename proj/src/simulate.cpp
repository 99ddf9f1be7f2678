#include "deconvband/simulate.hpp"

#include "deconvband/errors.hpp"
#include "deconvband/parallel.hpp"
#include "deconvband/stats.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

namespace deconvband {

namespace {

constexpr std::uint64_t kDataTag = 0x64617461;      // "data"
constexpr std::uint64_t kBootstrapTag = 0x626f6f74; // "boot"

double normal_pdf(double x, double mean, double sd)
{
  const double z = (x - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

double chisq_pdf(double x, double df)
{
  if (x <= 0.0)
    return 0.0;
  const double k = 0.5 * df;
  return std::exp((k - 1.0) * std::log(x) - 0.5 * x - k * std::log(2.0) - std::lgamma(k));
}

std::uint64_t bootstrap_seed(const SimScenario& scenario, std::size_t rep)
{
  return derive_seed(derive_seed(scenario.seed, kBootstrapTag), rep);
}

BandConfig band_config(const SimScenario& scenario, std::size_t rep)
{
  BandConfig config;
  config.B = scenario.bootstrap_B;
  config.seed = bootstrap_seed(scenario, rep);
  config.J = scenario.J;
  config.rho = scenario.rho;
  config.floor_sigma = scenario.floor_sigma;
  config.quad = scenario.quad;
  return config;
}

bool nested(const ConfidenceBand& inner, const ConfidenceBand& outer)
{
  for (std::size_t l = 0; l < inner.x_nodes.size(); ++l) {
    if (outer.lower[l] > inner.lower[l] || outer.upper[l] < inner.upper[l])
      return false;
  }
  return true;
}

double elapsed_seconds(std::chrono::steady_clock::time_point start)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double binomial_stderr(double p, std::size_t reps)
{
  return reps > 0 ? std::sqrt(p * (1.0 - p) / static_cast<double>(reps)) : 0.0;
}

} // namespace

std::string to_string(Model model)
{
  switch (model) {
    case Model::normal_laplace:
      return "normal-laplace";
    case Model::chisq_laplace:
      return "chisq-laplace";
    case Model::normal_normal:
      return "normal-normal";
  }
  return "unknown";
}

Model model_from_string(const std::string& name)
{
  if (name == "1" || name == "normal-laplace")
    return Model::normal_laplace;
  if (name == "2" || name == "chisq-laplace")
    return Model::chisq_laplace;
  if (name == "3" || name == "supersmooth" || name == "normal-normal")
    return Model::normal_normal;
  throw DomainError("unknown model '" + name + "' (expected 1, 2 or supersmooth)");
}

void SimScenario::validate() const
{
  if (n < 2)
    throw DomainError("scenario needs n >= 2");
  if (reps < 1)
    throw DomainError("scenario needs reps >= 1");
  if (bootstrap_B < 1)
    throw DomainError("scenario needs bootstrap_B >= 1");
  if (!(signal_noise > 0.0) || !std::isfinite(signal_noise))
    throw DomainError("signal-to-noise ratio must be positive");
  if (grid_n < 1)
    throw DomainError("scenario needs at least one grid node");
  if (levels.empty())
    throw DomainError("scenario needs at least one coverage level");
  for (const double level : levels) {
    if (!(level > 0.0 && level < 1.0))
      throw DomainError("coverage levels must lie in (0, 1)");
  }
  if (model == Model::chisq_laplace) {
    const double df = signal_noise * signal_noise;
    if (std::abs(df - std::round(df)) > 1e-9 || std::round(df) < 1.0)
      throw DomainError("chi-squared model needs an integer df = signal_noise^2, got " + std::to_string(df));
  }
}

SimScenario SimScenario::full_scale() const
{
  SimScenario out = *this;
  out.reps = 2000;
  out.bootstrap_B = 2500;
  return out;
}

std::pair<double, double> interval(const SimScenario& scenario)
{
  const double s = scenario.signal_noise;
  if (scenario.model == Model::chisq_laplace) {
    const double df = std::round(s * s);
    const double mu = df;
    const double sigma = std::sqrt(2.0 * df);
    return { mu / 2.0, mu + 2.0 * sigma };
  }
  return { -2.0 * s, 2.0 * s };
}

double true_density(const SimScenario& scenario, double x)
{
  if (scenario.model == Model::chisq_laplace)
    return chisq_pdf(x, std::round(scenario.signal_noise * scenario.signal_noise));
  return normal_pdf(x, 0.0, scenario.signal_noise);
}

std::vector<double> sample_laplace(std::size_t n, double location, double scale, CounterStream& stream)
{
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw DomainError("Laplace scale must be positive, got " + std::to_string(scale));
  std::vector<double> out(n);
  for (double& value : out) {
    const double centred = stream.uniform() - 0.5;
    const double magnitude = -scale * std::log1p(-2.0 * std::abs(centred));
    value = location + (centred < 0.0 ? -magnitude : magnitude);
  }
  return out;
}

ObservedSample generate(const SimScenario& scenario, std::size_t rep)
{
  scenario.validate();
  CounterStream stream(derive_seed(scenario.seed, kDataTag), rep);
  const std::size_t n = scenario.n;
  std::vector<double> x(n);
  std::vector<double> e1;
  std::vector<double> e2;
  switch (scenario.model) {
    case Model::normal_laplace:
      for (double& value : x)
        value = scenario.signal_noise * stream.normal();
      e1 = sample_laplace(n, 0.0, 1.0, stream);
      e2 = sample_laplace(n, 0.0, 1.0, stream);
      break;
    case Model::chisq_laplace: {
      const auto df = static_cast<std::size_t>(std::round(scenario.signal_noise * scenario.signal_noise));
      for (double& value : x) {
        double sum = 0.0;
        for (std::size_t k = 0; k < df; ++k) {
          const double z = stream.normal();
          sum += z * z;
        }
        value = sum;
      }
      e1 = sample_laplace(n, 0.0, std::numbers::sqrt2, stream);
      e2 = sample_laplace(n, 0.0, std::numbers::sqrt2, stream);
      break;
    }
    case Model::normal_normal:
      for (double& value : x)
        value = scenario.signal_noise * stream.normal();
      e1.resize(n);
      e2.resize(n);
      for (double& value : e1)
        value = std::numbers::sqrt2 * stream.normal();
      for (double& value : e2)
        value = std::numbers::sqrt2 * stream.normal();
      break;
  }
  std::vector<double> y1(n);
  std::vector<double> y2(n);
  for (std::size_t j = 0; j < n; ++j) {
    y1[j] = x[j] + e1[j];
    y2[j] = x[j] + e2[j];
  }
  return from_repeated_measurements(y1, y2);
}

CoverageReport coverage_study(const SimScenario& scenario)
{
  scenario.validate();
  const auto start = std::chrono::steady_clock::now();
  std::vector<double> levels = scenario.levels;
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  std::vector<double> taus;
  for (const double level : levels)
    taus.push_back(1.0 - level);

  const auto [lo, hi] = interval(scenario);
  const auto x_nodes = linspace(lo, hi, scenario.grid_n);
  std::vector<double> truth(x_nodes.size());
  for (std::size_t l = 0; l < x_nodes.size(); ++l)
    truth[l] = true_density(scenario, x_nodes[l]);

  struct Outcome
  {
    bool ok = false;
    std::vector<bool> hit;
    bool nested = true;
    bool fallback = false;
    double h = 0.0;
  };
  std::vector<Outcome> outcomes(scenario.reps);

  parallel_for(scenario.reps, [&](std::size_t rep) {
    Outcome& outcome = outcomes[rep];
    try {
      const auto sample = generate(scenario, rep);
      const auto run = run_band_pipeline(sample, x_nodes, band_config(scenario, rep), taus);
      outcome.hit.resize(levels.size());
      for (std::size_t i = 0; i < levels.size(); ++i)
        outcome.hit[i] = run.bands[i].contains(truth);
      for (std::size_t i = 0; i + 1 < levels.size(); ++i)
        outcome.nested = outcome.nested && nested(run.bands[i], run.bands[i + 1]);
      outcome.fallback = run.selection && run.selection->fallback_used;
      outcome.h = run.estimate.h;
      outcome.ok = true;
    } catch (const Error&) {
      outcome.ok = false;
    }
  });

  CoverageReport report;
  report.scenario = scenario;
  std::vector<std::size_t> hits(levels.size(), 0);
  double h_sum = 0.0;
  for (const auto& outcome : outcomes) {
    if (!outcome.ok) {
      ++report.failures;
      continue;
    }
    ++report.completed;
    for (std::size_t i = 0; i < levels.size(); ++i)
      hits[i] += outcome.hit[i] ? 1 : 0;
    report.nesting_violations += outcome.nested ? 0 : 1;
    report.bandwidth_fallbacks += outcome.fallback ? 1 : 0;
    h_sum += outcome.h;
  }
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const double coverage =
      report.completed > 0 ? static_cast<double>(hits[i]) / static_cast<double>(report.completed) : 0.0;
    report.hits[levels[i]] = hits[i];
    report.coverage[levels[i]] = coverage;
    report.mc_stderr[levels[i]] = binomial_stderr(coverage, report.completed);
  }
  report.mean_bandwidth = report.completed > 0 ? h_sum / static_cast<double>(report.completed) : 0.0;
  report.wall_time = elapsed_seconds(start);
  return report;
}

PowerReport power_study(const SimScenario& scenario,
                        PowerFamily family,
                        std::span<const double> parameters,
                        double level)
{
  scenario.validate();
  if (scenario.model == Model::chisq_laplace)
    throw DomainError("power study needs a normal-X scenario");
  if (!(level > 0.0 && level < 1.0))
    throw DomainError("coverage level must lie in (0, 1)");
  if (parameters.empty())
    throw DomainError("power study needs at least one alternative");
  const auto start = std::chrono::steady_clock::now();

  const auto [lo, hi] = interval(scenario);
  const auto x_nodes = linspace(lo, hi, scenario.grid_n);
  std::vector<std::vector<double>> alternatives(parameters.size(), std::vector<double>(x_nodes.size()));
  for (std::size_t p = 0; p < parameters.size(); ++p) {
    const double parameter = parameters[p];
    if (family == PowerFamily::scale && !(parameter > 0.0))
      throw DomainError("scale alternatives must be positive");
    for (std::size_t l = 0; l < x_nodes.size(); ++l) {
      alternatives[p][l] = family == PowerFamily::mean
                             ? normal_pdf(x_nodes[l], parameter, scenario.signal_noise)
                             : normal_pdf(x_nodes[l], 0.0, parameter);
    }
  }

  const double taus[] = { 1.0 - level };
  std::vector<std::vector<bool>> hits(scenario.reps);
  std::vector<char> ok(scenario.reps, 0);
  parallel_for(scenario.reps, [&](std::size_t rep) {
    try {
      const auto sample = generate(scenario, rep);
      const auto run = run_band_pipeline(sample, x_nodes, band_config(scenario, rep), taus);
      std::vector<bool> row(parameters.size());
      for (std::size_t p = 0; p < parameters.size(); ++p)
        row[p] = run.bands.front().contains(alternatives[p]);
      hits[rep] = std::move(row);
      ok[rep] = 1;
    } catch (const Error&) {
    }
  });

  PowerReport report;
  report.scenario = scenario;
  report.family = family;
  report.level = level;
  for (std::size_t rep = 0; rep < scenario.reps; ++rep)
    ++(ok[rep] ? report.completed : report.failures);
  for (std::size_t p = 0; p < parameters.size(); ++p) {
    PowerPoint point;
    point.parameter = parameters[p];
    for (std::size_t rep = 0; rep < scenario.reps; ++rep)
      point.hits += ok[rep] && hits[rep][p] ? 1 : 0;
    point.coverage =
      report.completed > 0 ? static_cast<double>(point.hits) / static_cast<double>(report.completed) : 0.0;
    point.mc_stderr = binomial_stderr(point.coverage, report.completed);
    report.points.push_back(point);
  }
  report.wall_time = elapsed_seconds(start);
  return report;
}

double ecf_sup_error(ErrorLaw law, std::span<const double> sample, double T, std::size_t grid_nodes)
{
  const auto grid = FrequencyGrid::symmetric(T, grid_nodes);
  const auto evaluation = ecf(sample, grid);
  double sup = 0.0;
  for (std::size_t k = grid.centre(); k < grid.size(); ++k) {
    const double t = grid[k];
    const double truth = law == ErrorLaw::laplace ? 1.0 / (1.0 + t * t) : std::exp(-0.5 * t * t);
    sup = std::max(sup, std::abs(evaluation.values[k] - std::complex<double>(truth, 0.0)));
  }
  return sup;
}

EcfRateReport ecf_rate_diagnostic(ErrorLaw law,
                                  std::span<const std::size_t> n_list,
                                  double T,
                                  std::size_t reps,
                                  std::uint64_t seed,
                                  std::size_t grid_nodes)
{
  if (n_list.empty() || reps < 1)
    throw DomainError("ECF rate diagnostic needs sample sizes and reps >= 1");
  if (!(T > 0.0) || !std::isfinite(T))
    throw DomainError("frequency bound T must be positive");

  EcfRateReport report;
  report.law = law;
  report.T = T;
  report.reps = reps;
  std::vector<double> log_n;
  std::vector<double> log_err;
  for (const std::size_t n : n_list) {
    if (n < 1)
      throw DomainError("sample sizes must be positive");
    std::vector<double> errors(reps);
    parallel_for(reps, [&](std::size_t rep) {
      CounterStream stream(derive_seed(seed, n), rep);
      std::vector<double> sample;
      if (law == ErrorLaw::laplace) {
        sample = sample_laplace(n, 0.0, 1.0, stream);
      } else {
        sample.resize(n);
        for (double& value : sample)
          value = stream.normal();
      }
      errors[rep] = ecf_sup_error(law, sample, T, grid_nodes);
    });
    EcfRateRow row;
    row.n = n;
    row.mean_sup_error = sample_mean(errors);
    row.sd_sup_error = reps > 1 ? std::sqrt(sample_variance(errors)) : 0.0;
    report.rows.push_back(row);
    log_n.push_back(std::log(static_cast<double>(n)));
    log_err.push_back(std::log(row.mean_sup_error));
  }
  report.slope = n_list.size() >= 2 ? ols_slope(log_n, log_err) : 0.0;
  return report;
}

} // namespace deconvband
