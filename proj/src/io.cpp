#include "deconvband/io.hpp"

#include "deconvband/errors.hpp"
#include "deconvband/version.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace deconvband::io {

namespace {

std::string trim(std::string_view text)
{
  std::size_t first = 0;
  std::size_t last = text.size();
  while (first < last && (text[first] == ' ' || text[first] == '\t'))
    ++first;
  while (last > first && (text[last - 1] == ' ' || text[last - 1] == '\t' || text[last - 1] == '\r'))
    --last;
  std::string out(text.substr(first, last - first));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"')
    out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split(std::string_view line)
{
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      return fields;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

bool blank(std::string_view line)
{
  for (char c : line)
    if (c != ' ' && c != '\t' && c != '\r')
      return false;
  return true;
}

std::string where(const std::string& source, std::size_t row, std::size_t line, const std::string& column)
{
  return source + ": row " + std::to_string(row) + " (line " + std::to_string(line) + "), column '" + column + "'";
}

std::optional<double> parse_cell(const std::string& cell, const std::string& context)
{
  if (cell.empty())
    return std::nullopt;
  std::string_view text = cell;
  if (text.front() == '+')
    text.remove_prefix(1);
  double value = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size())
    throw DataError(context + ": malformed number '" + cell + "'");
  if (!std::isfinite(value))
    throw DataError(context + ": non-finite value '" + cell + "'");
  return value;
}

nlohmann::json level_map(const std::map<double, double>& values)
{
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [level, value] : values)
    out[nlohmann::json(level).dump()] = value;
  return out;
}

void write_comments(std::ostringstream& os, const nlohmann::json& metadata)
{
  os << "# deconvband " << metadata.value("version", std::string(kVersion)) << '\n';
  if (metadata.contains("config"))
    os << "# config: " << metadata["config"].dump() << '\n';
}

} // namespace

CsvTable CsvTable::parse(const std::string& text, const std::string& source)
{
  CsvTable table;
  table.source_ = source;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line) || trim(line).front() == '#')
      continue;
    auto fields = split(line);
    if (table.header_.empty()) {
      for (const auto& name : fields)
        if (name.empty())
          throw DataError(source + ": empty column name in header (line " + std::to_string(line_no) + ")");
      table.header_ = std::move(fields);
      table.cells_.resize(table.header_.size());
      continue;
    }
    const std::size_t row = table.rows_ + 1;
    if (fields.size() > table.header_.size())
      throw DataError(source + ": row " + std::to_string(row) + " (line " + std::to_string(line_no) + ") has " +
                      std::to_string(fields.size()) + " fields, header has " +
                      std::to_string(table.header_.size()));
    fields.resize(table.header_.size());
    for (std::size_t c = 0; c < fields.size(); ++c)
      table.cells_[c].push_back(parse_cell(fields[c], where(source, row, line_no, table.header_[c])));
    ++table.rows_;
  }
  if (table.header_.empty())
    throw DataError(source + ": missing header row");
  return table;
}

CsvTable CsvTable::read(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw DataError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), path);
}

bool CsvTable::has(const std::string& name) const
{
  for (const auto& h : header_)
    if (h == name)
      return true;
  return false;
}

std::vector<double> CsvTable::column(const std::string& name) const
{
  for (std::size_t c = 0; c < header_.size(); ++c) {
    if (header_[c] != name)
      continue;
    std::vector<double> values;
    bool ended = false;
    for (std::size_t r = 0; r < rows_; ++r) {
      const auto& cell = cells_[c][r];
      if (!cell) {
        ended = true;
        continue;
      }
      if (ended)
        throw DataError(source_ + ": row " + std::to_string(r + 1) + ", column '" + name +
                        "': value after an empty cell");
      values.push_back(*cell);
    }
    if (values.empty())
      throw DataError(source_ + ": column '" + name + "' is empty");
    return values;
  }
  throw DataError(source_ + ": missing column '" + name + "'");
}

ObservedSample read_repeated(const std::string& path)
{
  const auto table = CsvTable::read(path);
  const auto y1 = table.column("y1");
  const auto y2 = table.column("y2");
  if (y1.size() != y2.size())
    throw DataError(path + ": columns y1 and y2 differ in length (" + std::to_string(y1.size()) + " vs " +
                    std::to_string(y2.size()) + ")");
  return from_repeated_measurements(y1, y2);
}

ObservedSample read_direct(const std::string& y_path, const std::string& eta_path)
{
  ObservedSample sample;
  sample.y = CsvTable::read(y_path).column("y");
  sample.eta = CsvTable::read(eta_path).column("eta");
  return sample;
}

PanelDataset read_panel(const std::string& path, const std::optional<std::string>& theta_path)
{
  const auto table = CsvTable::read(path);
  const auto y1 = table.column("y1");
  const auto y2 = table.column("y2");
  const std::size_t n = y1.size();
  if (y2.size() != n)
    throw DataError(path + ": columns y1 and y2 differ in length");
  std::size_t d = 0;
  while (table.has("w1_" + std::to_string(d + 1)))
    ++d;
  PanelDataset data;
  data.y1 = Eigen::Map<const Eigen::VectorXd>(y1.data(), static_cast<Eigen::Index>(n));
  data.y2 = Eigen::Map<const Eigen::VectorXd>(y2.data(), static_cast<Eigen::Index>(n));
  data.w1.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  data.w2.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t k = 0; k < d; ++k) {
    const std::string suffix = std::to_string(k + 1);
    const auto a = table.column("w1_" + suffix);
    const auto b = table.column("w2_" + suffix);
    if (a.size() != n || b.size() != n)
      throw DataError(path + ": regressor " + suffix + " does not cover every unit");
    for (std::size_t j = 0; j < n; ++j) {
      data.w1(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = a[j];
      data.w2(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = b[j];
    }
  }
  if (table.has("w2_" + std::to_string(d + 1)))
    throw DataError(path + ": column w2_" + std::to_string(d + 1) + " has no matching w1_" + std::to_string(d + 1));
  if (theta_path) {
    const auto theta = CsvTable::read(*theta_path).column("theta");
    if (theta.size() != d)
      throw DataError(*theta_path + ": " + std::to_string(theta.size()) + " theta values for " +
                      std::to_string(d) + " regressors");
    data.theta_hat = Eigen::Map<const Eigen::VectorXd>(theta.data(), static_cast<Eigen::Index>(d));
  }
  return data;
}

std::string format_double(double value)
{
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", value);
  return std::string(buf, static_cast<std::size_t>(len));
}

nlohmann::json to_json(const ConfidenceBand& band)
{
  return {
    { "tau", band.tau },
    { "level", 1.0 - band.tau },
    { "c_hat", band.c_hat },
    { "h", band.h },
    { "n", band.n },
    { "sup_width", band.sup_width },
    { "x", band.x_nodes },
    { "f_hat", band.center },
    { "sigma_hat", band.sigma_hat },
    { "lower", band.lower },
    { "upper", band.upper },
  };
}

nlohmann::json to_json(const DensityEstimate& est)
{
  return {
    { "h", est.h },
    { "n", est.n },
    { "m", est.m },
    { "sigma_floored", est.sigma_floored },
    { "x", est.x_nodes },
    { "f_hat", est.f_hat },
    { "sigma_hat", est.sigma_hat },
  };
}

nlohmann::json to_json(const BandwidthSelection& selection)
{
  return {
    { "h_pilot", selection.h_pilot },
    { "J", selection.J },
    { "rho", selection.rho },
    { "candidates", selection.candidates },
    { "distances", selection.distances },
    { "chosen", selection.chosen },
    { "fallback_used", selection.fallback_used },
  };
}

nlohmann::json to_json(const SimScenario& scenario)
{
  return {
    { "model", to_string(scenario.model) },
    { "n", scenario.n },
    { "signal_noise", scenario.signal_noise },
    { "levels", scenario.levels },
    { "reps", scenario.reps },
    { "bootstrap_B", scenario.bootstrap_B },
    { "seed", scenario.seed },
    { "grid_n", scenario.grid_n },
    { "J", scenario.J },
    { "rho", scenario.rho },
    { "floor_sigma", scenario.floor_sigma },
    { "quadrature_nodes", scenario.quad.nodes },
  };
}

nlohmann::json to_json(const CoverageReport& report, bool include_timing)
{
  nlohmann::json hits = nlohmann::json::object();
  for (const auto& [level, count] : report.hits)
    hits[nlohmann::json(level).dump()] = count;
  nlohmann::json out = {
    { "scenario", to_json(report.scenario) },
    { "hits", hits },
    { "coverage", level_map(report.coverage) },
    { "mc_stderr", level_map(report.mc_stderr) },
    { "completed", report.completed },
    { "failures", report.failures },
    { "nesting_violations", report.nesting_violations },
    { "bandwidth_fallbacks", report.bandwidth_fallbacks },
    { "mean_bandwidth", report.mean_bandwidth },
  };
  if (include_timing)
    out["wall_time"] = report.wall_time;
  return out;
}

nlohmann::json to_json(const PowerReport& report, bool include_timing)
{
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : report.points)
    points.push_back(
      { { "parameter", p.parameter }, { "hits", p.hits }, { "coverage", p.coverage }, { "mc_stderr", p.mc_stderr } });
  nlohmann::json out = {
    { "scenario", to_json(report.scenario) },
    { "family", report.family == PowerFamily::mean ? "mean" : "scale" },
    { "level", report.level },
    { "points", points },
    { "completed", report.completed },
    { "failures", report.failures },
  };
  if (include_timing)
    out["wall_time"] = report.wall_time;
  return out;
}

nlohmann::json to_json(const EcfRateReport& report)
{
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows)
    rows.push_back({ { "n", r.n }, { "mean_sup_error", r.mean_sup_error }, { "sd_sup_error", r.sd_sup_error } });
  return {
    { "law", report.law == ErrorLaw::laplace ? "laplace" : "normal" },
    { "T", report.T },
    { "reps", report.reps },
    { "rows", rows },
    { "slope", report.slope },
  };
}

std::string band_csv(const ConfidenceBand& band, const nlohmann::json& metadata)
{
  std::ostringstream os;
  write_comments(os, metadata);
  os << "# tau=" << format_double(band.tau) << " c_hat=" << format_double(band.c_hat)
     << " h=" << format_double(band.h) << " n=" << band.n << " sup_width=" << format_double(band.sup_width) << '\n';
  os << "x,f_hat,sigma_hat,lower,upper\n";
  for (std::size_t l = 0; l < band.x_nodes.size(); ++l)
    os << format_double(band.x_nodes[l]) << ',' << format_double(band.center[l]) << ','
       << format_double(band.sigma_hat[l]) << ',' << format_double(band.lower[l]) << ','
       << format_double(band.upper[l]) << '\n';
  return os.str();
}

std::string estimate_csv(const DensityEstimate& est, const nlohmann::json& metadata)
{
  std::ostringstream os;
  write_comments(os, metadata);
  os << "# h=" << format_double(est.h) << " n=" << est.n << " m=" << est.m << '\n';
  os << "x,f_hat,sigma_hat\n";
  for (std::size_t l = 0; l < est.x_nodes.size(); ++l)
    os << format_double(est.x_nodes[l]) << ',' << format_double(est.f_hat[l]) << ','
       << format_double(est.sigma_hat[l]) << '\n';
  return os.str();
}

std::string selection_csv(const BandwidthSelection& selection, const nlohmann::json& metadata)
{
  std::ostringstream os;
  write_comments(os, metadata);
  os << "# h_pilot=" << format_double(selection.h_pilot) << " chosen=" << format_double(selection.chosen)
     << " fallback_used=" << (selection.fallback_used ? "true" : "false") << '\n';
  os << "j,h,distance_to_next\n";
  for (std::size_t i = 0; i < selection.candidates.size(); ++i) {
    os << (i + 1) << ',' << format_double(selection.candidates[i]) << ',';
    if (i < selection.distances.size())
      os << format_double(selection.distances[i]);
    os << '\n';
  }
  return os.str();
}

std::string coverage_csv(const CoverageReport& report, const nlohmann::json& metadata)
{
  std::ostringstream os;
  write_comments(os, metadata);
  os << "model,n,signal_noise,level,hits,completed,coverage,mc_stderr\n";
  for (const auto& [level, cov] : report.coverage)
    os << to_string(report.scenario.model) << ',' << report.scenario.n << ','
       << format_double(report.scenario.signal_noise) << ',' << format_double(level) << ','
       << report.hits.at(level) << ',' << report.completed << ',' << format_double(cov) << ','
       << format_double(report.mc_stderr.at(level)) << '\n';
  return os.str();
}

std::string power_csv(const PowerReport& report, const nlohmann::json& metadata)
{
  std::ostringstream os;
  write_comments(os, metadata);
  os << "parameter,coverage,stderr\n";
  for (const auto& p : report.points)
    os << format_double(p.parameter) << ',' << format_double(p.coverage) << ',' << format_double(p.mc_stderr)
       << '\n';
  return os.str();
}

std::string ecf_rate_csv(const EcfRateReport& report, const nlohmann::json& metadata)
{
  std::ostringstream os;
  write_comments(os, metadata);
  os << "# slope=" << format_double(report.slope) << '\n';
  os << "n,mean_sup_error,sd_sup_error\n";
  for (const auto& r : report.rows)
    os << r.n << ',' << format_double(r.mean_sup_error) << ',' << format_double(r.sd_sup_error) << '\n';
  return os.str();
}

std::string band_plot_data(const ConfidenceBand& band)
{
  std::ostringstream os;
  os << "series,x,value\n";
  const std::pair<const char*, const std::vector<double>*> series[] = {
    { "f_hat", &band.center },
    { "lower", &band.lower },
    { "upper", &band.upper },
  };
  for (const auto& [name, values] : series)
    for (std::size_t l = 0; l < band.x_nodes.size(); ++l)
      os << name << ',' << format_double(band.x_nodes[l]) << ',' << format_double((*values)[l]) << '\n';
  return os.str();
}

std::map<std::string, std::vector<double>> read_band_csv(const std::string& text)
{
  const auto table = CsvTable::parse(text, "<band>");
  std::map<std::string, std::vector<double>> out;
  for (const auto& name : table.header())
    out[name] = table.column(name);
  return out;
}

void write_text(const std::string& path, const std::string& text)
{
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os)
    throw DataError("cannot open '" + path + "' for writing");
  os << text;
  if (!os)
    throw DataError("write to '" + path + "' failed");
}

} // namespace deconvband::io
