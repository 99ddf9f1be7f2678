#pragma once

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace deconvband::cli {

//! Fully resolved options of one invocation.
struct RunConfig
{
  std::string command;
  std::string input_path;
  std::string eta_path;
  std::string theta_path;
  std::string output_path;
  std::string plot_path;
  std::string mode = "repeated";
  std::string format;
  double tau = 0.10;
  std::optional<std::size_t> B;
  std::uint64_t seed = 0;
  //! "auto" or a positive real.
  std::string h = "auto";
  std::optional<double> grid_min;
  std::optional<double> grid_max;
  std::optional<std::size_t> grid_n;
  std::size_t threads = 0;
  std::size_t J = 20;
  double rho = 3.0;
  //! Defaults to on for the band commands and off for simulations.
  std::optional<bool> sigma_floor;
  std::size_t quad_nodes = 4097;

  std::string model = "1";
  std::size_t n = 500;
  //! Defaults to 2 for simulate and 1 for power.
  std::optional<double> snr;
  std::size_t reps = 300;
  std::vector<double> levels{ 0.80, 0.90, 0.95 };
  bool full_scale = false;
  bool include_timing = false;

  std::string family = "mean";
  std::vector<double> params;
  double level = 0.90;

  std::string law = "laplace";
  std::vector<std::size_t> n_list{ 250, 1000, 4000, 16000 };
  double T = 10.0;
  std::size_t grid_nodes = 2001;
};

//! Parses argv and runs the selected command. Returns 0 on success, 2 on
//! usage errors and 1 on data or numerical errors.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace deconvband::cli
