#pragma once

#include "deconvband/bandwidth.hpp"
#include "deconvband/panel.hpp"
#include "deconvband/simulate.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace deconvband::io {

//! Numeric CSV with a mandatory header row. Lines starting with '#' are
//! comments. Empty cells are allowed only as a ragged tail of a column.
class CsvTable
{
public:
  static CsvTable parse(const std::string& text, const std::string& source = "<memory>");
  static CsvTable read(const std::string& path);

  bool has(const std::string& name) const;
  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return rows_; }

  //! Values of a column; throws DataError if it is missing or has gaps.
  std::vector<double> column(const std::string& name) const;

private:
  std::string source_;
  std::vector<std::string> header_;
  std::size_t rows_ = 0;
  std::vector<std::vector<std::optional<double>>> cells_;
};

//! y1,y2 columns through the repeated-measurement construction.
ObservedSample read_repeated(const std::string& path);

//! Column y from one file and column eta from the same or another file;
//! the two samples may differ in length.
ObservedSample read_direct(const std::string& y_path, const std::string& eta_path);

//! Columns y1, y2, w1_1..w1_d, w2_1..w2_d; theta optionally from a file
//! with a single column named theta (or one value per line).
PanelDataset read_panel(const std::string& path, const std::optional<std::string>& theta_path);

//! Shortest exact text for a double (17 significant digits).
std::string format_double(double value);

nlohmann::json to_json(const ConfidenceBand& band);
nlohmann::json to_json(const DensityEstimate& est);
nlohmann::json to_json(const BandwidthSelection& selection);
nlohmann::json to_json(const SimScenario& scenario);
//! wall_time is included only when requested, so that reports from
//! identical inputs are byte-identical.
nlohmann::json to_json(const CoverageReport& report, bool include_timing = false);
nlohmann::json to_json(const PowerReport& report, bool include_timing = false);
nlohmann::json to_json(const EcfRateReport& report);

//! CSV text with '#' comment lines carrying the metadata.
std::string band_csv(const ConfidenceBand& band, const nlohmann::json& metadata);
std::string estimate_csv(const DensityEstimate& est, const nlohmann::json& metadata);
std::string selection_csv(const BandwidthSelection& selection, const nlohmann::json& metadata);
std::string coverage_csv(const CoverageReport& report, const nlohmann::json& metadata);
std::string power_csv(const PowerReport& report, const nlohmann::json& metadata);
std::string ecf_rate_csv(const EcfRateReport& report, const nlohmann::json& metadata);

//! Tidy long-format rows: series,x,value.
std::string band_plot_data(const ConfidenceBand& band);

//! Parses a band CSV written by band_csv back into its columns.
std::map<std::string, std::vector<double>> read_band_csv(const std::string& text);

void write_text(const std::string& path, const std::string& text);

} // namespace deconvband::io
