#include "deconvband/cli.hpp"

#include "deconvband/errors.hpp"
#include "deconvband/io.hpp"
#include "deconvband/parallel.hpp"
#include "deconvband/stats.hpp"
#include "deconvband/version.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <ostream>

namespace deconvband::cli {

namespace {

//! Invalid option values detected after parsing; exit code 2.
class UsageError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class ThreadCap
{
public:
  explicit ThreadCap(std::size_t threads)
    : previous_(threads > 0 ? set_max_threads(threads) : 0)
    , active_(threads > 0)
  {
  }
  ~ThreadCap()
  {
    if (active_)
      set_max_threads(previous_);
  }
  ThreadCap(const ThreadCap&) = delete;
  ThreadCap& operator=(const ThreadCap&) = delete;

private:
  std::size_t previous_;
  bool active_;
};

bool is_band_command(const std::string& command)
{
  return command == "band" || command == "panel-band";
}

bool is_study_command(const std::string& command)
{
  return command == "simulate" || command == "power";
}

std::optional<double> parse_bandwidth(const std::string& text)
{
  if (text == "auto")
    return std::nullopt;
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || !std::isfinite(value) || value <= 0.0)
    throw UsageError("--h must be 'auto' or a positive number, got '" + text + "'");
  return value;
}

void check_options(const RunConfig& cfg)
{
  if (!(cfg.tau > 0.0 && cfg.tau < 1.0))
    throw UsageError("--tau must lie in (0, 1), got " + io::format_double(cfg.tau));
  if (is_band_command(cfg.command) && cfg.B && *cfg.B < 100)
    throw UsageError("--B must be at least 100 for band commands, got " + std::to_string(*cfg.B));
  if (cfg.B && *cfg.B < 1)
    throw UsageError("--B must be positive");
  parse_bandwidth(cfg.h);
  if (cfg.grid_min && cfg.grid_max && !(*cfg.grid_min < *cfg.grid_max))
    throw UsageError("--grid-min must be below --grid-max");
  if (cfg.grid_n && *cfg.grid_n < 2)
    throw UsageError("--grid-n must be at least 2");
  if (cfg.J < 2)
    throw UsageError("--J must be at least 2");
  if (!(cfg.rho > 0.0))
    throw UsageError("--rho must be positive");
  for (double level : cfg.levels)
    if (!(level > 0.0 && level < 1.0))
      throw UsageError("--levels entries must lie in (0, 1)");
  if (!(cfg.level > 0.0 && cfg.level < 1.0))
    throw UsageError("--level must lie in (0, 1)");
  if (cfg.reps < 1)
    throw UsageError("--reps must be positive");
  if (is_study_command(cfg.command)) {
    try {
      model_from_string(cfg.model);
    } catch (const DomainError& e) {
      throw UsageError(e.what());
    }
  }
  const bool needs_input = !is_study_command(cfg.command) && cfg.command != "ecf-rate";
  if (needs_input && cfg.input_path.empty())
    throw UsageError("--input is required for '" + cfg.command + "'");
  if (!cfg.plot_path.empty() && !is_band_command(cfg.command))
    throw UsageError("--emit-plot-data applies to band commands only");
}

std::string resolved_format(const RunConfig& cfg)
{
  if (!cfg.format.empty())
    return cfg.format;
  const auto& path = cfg.output_path;
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0)
    return "csv";
  return "json";
}

struct LoadedData
{
  ObservedSample sample;
  std::optional<Eigen::VectorXd> theta;
};

LoadedData load(const RunConfig& cfg)
{
  LoadedData data;
  if (cfg.mode == "repeated") {
    data.sample = io::read_repeated(cfg.input_path);
  } else if (cfg.mode == "direct") {
    data.sample = io::read_direct(cfg.input_path, cfg.eta_path.empty() ? cfg.input_path : cfg.eta_path);
  } else {
    std::optional<std::string> theta_path;
    if (!cfg.theta_path.empty())
      theta_path = cfg.theta_path;
    const auto panel = io::read_panel(cfg.input_path, theta_path);
    data.theta = panel.theta_hat ? *panel.theta_hat : fd_ols(panel);
    data.sample = panel_transform(panel, *data.theta);
  }
  data.sample.validate();
  return data;
}

std::vector<double> resolve_grid(const RunConfig& cfg, const std::vector<double>& y)
{
  const double lo = cfg.grid_min ? *cfg.grid_min : sample_quantile(y, 0.05);
  const double hi = cfg.grid_max ? *cfg.grid_max : sample_quantile(y, 0.95);
  if (!(lo < hi))
    throw DataError("evaluation grid is empty: [" + io::format_double(lo) + ", " + io::format_double(hi) + "]");
  return linspace(lo, hi, cfg.grid_n.value_or(101));
}

QuadratureConfig quadrature(const RunConfig& cfg)
{
  QuadratureConfig quad;
  quad.nodes = cfg.quad_nodes;
  return quad;
}

nlohmann::json data_config(const RunConfig& cfg, const std::vector<double>& grid)
{
  nlohmann::json c = {
    { "command", cfg.command },
    { "input", cfg.input_path },
    { "mode", cfg.mode },
    { "h", cfg.h },
    { "grid", { { "min", grid.front() }, { "max", grid.back() }, { "n", grid.size() } } },
    { "J", cfg.J },
    { "rho", cfg.rho },
    { "quadrature_nodes", cfg.quad_nodes },
    { "sigma_floor", cfg.sigma_floor.value_or(true) },
  };
  if (!cfg.eta_path.empty())
    c["eta_input"] = cfg.eta_path;
  if (!cfg.theta_path.empty())
    c["theta_input"] = cfg.theta_path;
  if (is_band_command(cfg.command)) {
    c["tau"] = cfg.tau;
    c["B"] = cfg.B.value_or(2500);
    c["seed"] = cfg.seed;
  }
  return c;
}

nlohmann::json document(const nlohmann::json& config)
{
  return { { "version", kVersion }, { "config", config } };
}

void emit(const RunConfig& cfg, const std::string& text, std::ostream& out)
{
  if (cfg.output_path.empty())
    out << text;
  else
    io::write_text(cfg.output_path, text);
}

void emit_json(const RunConfig& cfg, const nlohmann::json& doc, std::ostream& out)
{
  emit(cfg, doc.dump(2) + "\n", out);
}

void run_estimate(const RunConfig& cfg, std::ostream& out)
{
  const auto data = load(cfg);
  const auto grid = resolve_grid(cfg, data.sample.y);
  const FlatTopKernel kernel;
  const auto quad = quadrature(cfg);
  std::optional<BandwidthSelection> selection;
  double h = 0.0;
  if (auto fixed = parse_bandwidth(cfg.h)) {
    h = *fixed;
  } else {
    selection = two_step_bandwidth(data.sample, grid, kernel, cfg.J, cfg.rho, quad);
    h = selection->chosen;
  }
  const auto est = estimate_density(data.sample, h, grid, kernel, quad, cfg.sigma_floor.value_or(true));
  auto doc = document(data_config(cfg, grid));
  if (resolved_format(cfg) == "csv")
    return emit(cfg, io::estimate_csv(est, doc), out);
  doc["estimate"] = io::to_json(est);
  if (selection)
    doc["bandwidth"] = io::to_json(*selection);
  if (data.theta)
    doc["theta"] = std::vector<double>(data.theta->data(), data.theta->data() + data.theta->size());
  emit_json(cfg, doc, out);
}

void run_band(const RunConfig& cfg, std::ostream& out)
{
  const auto data = load(cfg);
  const auto grid = resolve_grid(cfg, data.sample.y);
  BandConfig config;
  config.B = cfg.B.value_or(2500);
  config.seed = cfg.seed;
  config.h = parse_bandwidth(cfg.h);
  config.J = cfg.J;
  config.rho = cfg.rho;
  config.floor_sigma = cfg.sigma_floor.value_or(true);
  config.quad = quadrature(cfg);
  const double taus[] = { cfg.tau };
  const auto run = run_band_pipeline(data.sample, grid, config, taus);
  const auto& band = run.bands.front();
  auto doc = document(data_config(cfg, grid));
  if (!cfg.plot_path.empty())
    io::write_text(cfg.plot_path, io::band_plot_data(band));
  if (resolved_format(cfg) == "csv")
    return emit(cfg, io::band_csv(band, doc), out);
  doc["band"] = io::to_json(band);
  if (run.selection)
    doc["bandwidth"] = io::to_json(*run.selection);
  if (data.theta)
    doc["theta"] = std::vector<double>(data.theta->data(), data.theta->data() + data.theta->size());
  emit_json(cfg, doc, out);
}

void run_bandwidth(const RunConfig& cfg, std::ostream& out)
{
  const auto data = load(cfg);
  const auto grid = resolve_grid(cfg, data.sample.y);
  const FlatTopKernel kernel;
  const auto quad = quadrature(cfg);
  const auto pilot = parse_bandwidth(cfg.h);
  const auto selection = pilot ? two_step_bandwidth(data.sample, grid, *pilot, kernel, cfg.J, cfg.rho, quad)
                               : two_step_bandwidth(data.sample, grid, kernel, cfg.J, cfg.rho, quad);
  auto doc = document(data_config(cfg, grid));
  if (resolved_format(cfg) == "csv")
    return emit(cfg, io::selection_csv(selection, doc), out);
  doc["bandwidth"] = io::to_json(selection);
  emit_json(cfg, doc, out);
}

double signal_noise(const RunConfig& cfg)
{
  return cfg.snr.value_or(cfg.command == "power" ? 1.0 : 2.0);
}

SimScenario scenario_from(const RunConfig& cfg)
{
  SimScenario s;
  s.model = model_from_string(cfg.model);
  s.n = cfg.n;
  s.signal_noise = signal_noise(cfg);
  s.levels = cfg.levels;
  s.reps = cfg.reps;
  if (cfg.B)
    s.bootstrap_B = *cfg.B;
  s.seed = cfg.seed;
  if (cfg.grid_n)
    s.grid_n = *cfg.grid_n;
  s.J = cfg.J;
  s.rho = cfg.rho;
  s.floor_sigma = cfg.sigma_floor.value_or(false);
  if (cfg.full_scale)
    s = s.full_scale();
  s.validate();
  return s;
}

nlohmann::json study_config(const RunConfig& cfg)
{
  nlohmann::json c = {
    { "command", cfg.command },
    { "model", cfg.model },
    { "n", cfg.n },
    { "snr", signal_noise(cfg) },
    { "reps", cfg.reps },
    { "B", cfg.B.value_or(500) },
    { "seed", cfg.seed },
    { "grid_n", cfg.grid_n.value_or(64) },
    { "J", cfg.J },
    { "rho", cfg.rho },
    { "sigma_floor", cfg.sigma_floor.value_or(false) },
    { "full_scale", cfg.full_scale },
  };
  if (cfg.command == "simulate")
    c["levels"] = cfg.levels;
  else {
    c["family"] = cfg.family;
    c["level"] = cfg.level;
  }
  return c;
}

void run_simulate(const RunConfig& cfg, std::ostream& out)
{
  const auto report = coverage_study(scenario_from(cfg));
  auto doc = document(study_config(cfg));
  if (resolved_format(cfg) == "csv")
    return emit(cfg, io::coverage_csv(report, doc), out);
  doc["report"] = io::to_json(report, cfg.include_timing);
  emit_json(cfg, doc, out);
}

void run_power(const RunConfig& cfg, std::ostream& out)
{
  const auto scenario = scenario_from(cfg);
  const auto family = cfg.family == "mean" ? PowerFamily::mean : PowerFamily::scale;
  std::vector<double> params = cfg.params;
  if (params.empty()) {
    for (int k = 0; k <= 5; ++k)
      params.push_back(family == PowerFamily::mean ? 0.1 * k : scenario.signal_noise * (1.0 + 0.1 * k));
  }
  const auto report = power_study(scenario, family, params, cfg.level);
  auto c = study_config(cfg);
  c["params"] = params;
  auto doc = document(c);
  if (resolved_format(cfg) == "csv")
    return emit(cfg, io::power_csv(report, doc), out);
  doc["report"] = io::to_json(report, cfg.include_timing);
  emit_json(cfg, doc, out);
}

void run_ecf_rate(const RunConfig& cfg, std::ostream& out)
{
  const auto law = cfg.law == "laplace" ? ErrorLaw::laplace : ErrorLaw::normal;
  const auto report = ecf_rate_diagnostic(law, cfg.n_list, cfg.T, cfg.reps, cfg.seed, cfg.grid_nodes);
  nlohmann::json c = {
    { "command", cfg.command }, { "law", cfg.law }, { "n_list", cfg.n_list }, { "T", cfg.T },
    { "reps", cfg.reps },       { "seed", cfg.seed }, { "grid_nodes", cfg.grid_nodes },
  };
  auto doc = document(c);
  if (resolved_format(cfg) == "csv")
    return emit(cfg, io::ecf_rate_csv(report, doc), out);
  doc["report"] = io::to_json(report);
  emit_json(cfg, doc, out);
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
  RunConfig cfg;
  std::vector<CLI::Option*> floor_flags;
  bool floor_flag = false;

  CLI::App app{ "Deconvolution density estimation with uniform confidence bands", "deconvband" };
  app.set_help_flag("--help", "Print this help message and exit");
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1, 1);

  auto add_output = [&](CLI::App* sub) {
    sub->add_option("--output,-o", cfg.output_path, "Output file (default: standard output)");
    sub->add_option("--format", cfg.format, "Output format (default: from --output extension, else json)")
      ->check(CLI::IsMember({ "csv", "json" }));
    sub->add_option("--threads", cfg.threads, "Worker thread cap (0: DECONVBAND_THREADS or all cores)");
  };
  auto add_data = [&](CLI::App* sub) {
    sub->add_option("--input,-i", cfg.input_path, "Input CSV");
    sub->add_option("--mode", cfg.mode, "Input schema")
      ->check(CLI::IsMember({ "repeated", "direct", "panel" }))
      ->capture_default_str();
    sub->add_option("--eta-input", cfg.eta_path, "CSV with column eta (direct mode; default: --input)");
    sub->add_option("--theta", cfg.theta_path, "CSV with column theta (panel mode; default: first-difference OLS)");
    sub->add_option("--h", cfg.h, "Bandwidth: 'auto' or a positive number")->capture_default_str();
    sub->add_option("--grid-min", cfg.grid_min, "Left end of the evaluation grid (default: 5% quantile of y)");
    sub->add_option("--grid-max", cfg.grid_max, "Right end of the evaluation grid (default: 95% quantile of y)");
    sub->add_option("--grid-n", cfg.grid_n, "Number of grid nodes (default: 101)");
    sub->add_option("--J", cfg.J, "Candidate bandwidths in the two-step rule")->capture_default_str();
    sub->add_option("--rho", cfg.rho, "Threshold ratio in the two-step rule")->capture_default_str();
    sub->add_option("--quad-nodes", cfg.quad_nodes, "Frequency nodes of the kernel quadrature")
      ->capture_default_str();
    floor_flags.push_back(
      sub->add_flag("--sigma-floor,!--no-sigma-floor", floor_flag, "Floor sigma_hat at sqrt(h) (default: on)"));
    add_output(sub);
  };
  auto add_band = [&](CLI::App* sub) {
    sub->add_option("--tau", cfg.tau, "Band level is 1 - tau")->capture_default_str();
    sub->add_option("--B", cfg.B, "Bootstrap replications (default: 2500, at least 100)");
    sub->add_option("--seed", cfg.seed, "Bootstrap seed")->capture_default_str();
    sub->add_option("--emit-plot-data", cfg.plot_path, "Also write a tidy series,x,value CSV to this path");
  };
  auto add_study = [&](CLI::App* sub) {
    sub->add_option("--model", cfg.model, "1, 2 or supersmooth")->capture_default_str();
    sub->add_option("--n", cfg.n, "Sample size")->capture_default_str();
    sub->add_option("--snr", cfg.snr, "sigma_X (normal models) or sqrt(df) (chi-squared model); default 2, or 1 for power");
    sub->add_option("--reps", cfg.reps, "Monte Carlo replications")->capture_default_str();
    sub->add_option("--B", cfg.B, "Bootstrap replications (default: 500)");
    sub->add_option("--seed", cfg.seed, "Master seed")->capture_default_str();
    sub->add_option("--grid-n", cfg.grid_n, "Nodes on the coverage interval (default: 64)");
    sub->add_option("--J", cfg.J, "Candidate bandwidths in the two-step rule")->capture_default_str();
    sub->add_option("--rho", cfg.rho, "Threshold ratio in the two-step rule")->capture_default_str();
    sub->add_flag("--full-scale", cfg.full_scale, "2000 replications with 2500 bootstrap draws");
    sub->add_flag("--include-timing", cfg.include_timing, "Record wall time in the JSON report");
    floor_flags.push_back(
      sub->add_flag("--sigma-floor,!--no-sigma-floor", floor_flag, "Floor sigma_hat at sqrt(h) (default: off)"));
    add_output(sub);
  };

  auto* estimate = app.add_subcommand("estimate", "Deconvolution density estimate on a grid");
  add_data(estimate);
  auto* band = app.add_subcommand("band", "Uniform confidence band");
  add_data(band);
  add_band(band);
  auto* panel = app.add_subcommand("panel-band", "Band for the fixed-effect density of a two-period panel");
  add_data(panel);
  add_band(panel);
  auto* bandwidth = app.add_subcommand("bandwidth", "Two-step bandwidth diagnostics ('--h' sets the pilot)");
  add_data(bandwidth);
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo coverage study");
  add_study(simulate);
  simulate->add_option("--levels", cfg.levels, "Nominal coverage levels")->delimiter(',')->capture_default_str();
  auto* power = app.add_subcommand("power", "Coverage of alternative densities by the band");
  add_study(power);
  power->add_option("--family", cfg.family, "Alternative family")
    ->check(CLI::IsMember({ "mean", "scale" }))
    ->capture_default_str();
  power->add_option("--params", cfg.params, "Alternative parameters (default: 0, 0.1, ..., 0.5 or scaled sigma)")
    ->delimiter(',');
  power->add_option("--level", cfg.level, "Nominal level of the band")->capture_default_str();
  auto* ecf_rate = app.add_subcommand("ecf-rate", "Sup-error of the empirical characteristic function against n");
  ecf_rate->add_option("--law", cfg.law, "Error law")
    ->check(CLI::IsMember({ "laplace", "normal" }))
    ->capture_default_str();
  ecf_rate->add_option("--n-list", cfg.n_list, "Sample sizes")->delimiter(',')->capture_default_str();
  ecf_rate->add_option("--T", cfg.T, "Frequency cut-off")->capture_default_str();
  ecf_rate->add_option("--reps", cfg.reps, "Replications per sample size");
  ecf_rate->add_option("--seed", cfg.seed, "Seed")->capture_default_str();
  ecf_rate->add_option("--grid-nodes", cfg.grid_nodes, "Frequencies on [-T, T]")->capture_default_str();
  add_output(ecf_rate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  cfg.command = app.get_subcommands().front()->get_name();
  if (cfg.command == "panel-band")
    cfg.mode = "panel";
  if (cfg.command == "ecf-rate" && ecf_rate->get_option("--reps")->count() == 0)
    cfg.reps = 50;
  for (auto* flag : floor_flags)
    if (flag->count() > 0)
      cfg.sigma_floor = floor_flag;

  try {
    check_options(cfg);
    ThreadCap cap(cfg.threads);
    if (cfg.command == "estimate")
      run_estimate(cfg, out);
    else if (cfg.command == "band" || cfg.command == "panel-band")
      run_band(cfg, out);
    else if (cfg.command == "bandwidth")
      run_bandwidth(cfg, out);
    else if (cfg.command == "simulate")
      run_simulate(cfg, out);
    else if (cfg.command == "power")
      run_power(cfg, out);
    else
      run_ecf_rate(cfg, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

} // namespace deconvband::cli
