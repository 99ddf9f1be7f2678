#include "deconvband/errors.hpp"
#include "deconvband/io.hpp"
#include "deconvband/pipeline.hpp"

#include <doctest.h>

#include <string>

using namespace deconvband;

TEST_CASE("CSV parsing")
{
  const auto t = io::CsvTable::parse("# comment\ny, eta\n1.5,2\n-3e-1,\n\n4,\n", "mem");
  CHECK(t.rows() == 3);
  CHECK(t.column("y") == std::vector<double>{ 1.5, -0.3, 4.0 });
  CHECK(t.column("eta") == std::vector<double>{ 2.0 });
  CHECK_THROWS_AS(t.column("x"), DataError);
}

TEST_CASE("CSV diagnostics name the row and column")
{
  try {
    io::CsvTable::parse("y1,y2\n1,2\n3,nan\n", "data.csv");
    FAIL("expected a DataError");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("row 2") != std::string::npos);
    CHECK(msg.find("'y2'") != std::string::npos);
  }
  try {
    io::CsvTable::parse("y1,y2\n1,abc\n", "data.csv");
    FAIL("expected a DataError");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("row 1") != std::string::npos);
    CHECK(msg.find("abc") != std::string::npos);
  }
  CHECK_THROWS_AS(io::CsvTable::parse("y\n1,2\n"), DataError);
  CHECK_THROWS_AS(io::CsvTable::parse(""), DataError);
  CHECK_THROWS_AS(io::CsvTable::parse("y,eta\n1,\n2,3\n").column("eta"), DataError);
}

TEST_CASE("band CSV and JSON carry identical values")
{
  std::vector<double> y1, y2;
  for (int j = 0; j < 120; ++j) {
    const double x = std::sin(0.37 * j) * 2.0;
    y1.push_back(x + 0.3 * std::cos(1.7 * j));
    y2.push_back(x - 0.4 * std::sin(2.3 * j));
  }
  const auto sample = from_repeated_measurements(y1, y2);
  BandConfig cfg;
  cfg.B = 200;
  cfg.seed = 3;
  cfg.h = 0.5;
  const std::vector<double> taus{ 0.1 };
  const auto run = run_band_pipeline(sample, linspace(-1.5, 1.5, 17), cfg, taus);
  const auto& band = run.bands.front();
  const nlohmann::json meta = { { "version", "test" }, { "config", { { "seed", 3 } } } };
  const auto csv = io::read_band_csv(io::band_csv(band, meta));
  const auto json = nlohmann::json::parse(io::to_json(band).dump());
  for (const char* key : { "x", "f_hat", "sigma_hat", "lower", "upper" })
    CHECK(csv.at(key) == json.at(key).get<std::vector<double>>());
  CHECK(csv.at("x") == band.x_nodes);
  CHECK(csv.at("upper") == band.upper);
}

TEST_CASE("seventeen significant digits round-trip")
{
  for (double v : { 0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 1e-5 })
    CHECK(std::stod(io::format_double(v)) == v);
}
