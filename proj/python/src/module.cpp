#include "deconvband/errors.hpp"
#include "deconvband/estimator.hpp"
#include "deconvband/fourier.hpp"
#include "deconvband/io.hpp"
#include "deconvband/panel.hpp"
#include "deconvband/parallel.hpp"
#include "deconvband/pipeline.hpp"
#include "deconvband/simulate.hpp"
#include "deconvband/version.hpp"

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace deconvband;

namespace {

using Vector = std::vector<double>;
//! Row-major: one inner vector per unit.
using Matrix = std::vector<std::vector<double>>;

Eigen::VectorXd to_eigen(const Vector& v)
{
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::MatrixXd to_eigen(const Matrix& rows)
{
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols)
      throw DomainError("regressor row " + std::to_string(i) + " has " + std::to_string(rows[i].size()) +
                        " entries, expected " + std::to_string(cols));
    for (std::size_t j = 0; j < cols; ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return out;
}

ObservedSample make_sample(Vector y, Vector eta)
{
  ObservedSample sample{ std::move(y), std::move(eta) };
  sample.validate();
  return sample;
}

BandConfig band_config(std::size_t B,
                       std::uint64_t seed,
                       std::optional<double> h,
                       std::size_t J,
                       double rho,
                       bool floor_sigma,
                       std::size_t quad_nodes)
{
  BandConfig config;
  config.B = B;
  config.seed = seed;
  config.h = h;
  config.J = J;
  config.rho = rho;
  config.floor_sigma = floor_sigma;
  config.quad.nodes = quad_nodes;
  return config;
}

// Reports cross the boundary as JSON text; the Python layer decodes them.
std::string band_run_json(const BandRun& run)
{
  nlohmann::json doc;
  doc["estimate"] = io::to_json(run.estimate);
  doc["bandwidth"] = run.selection ? io::to_json(*run.selection) : nlohmann::json(nullptr);
  doc["bands"] = nlohmann::json::array();
  for (const auto& band : run.bands)
    doc["bands"].push_back(io::to_json(band));
  return doc.dump();
}

SimScenario scenario(const std::string& model,
                     std::size_t n,
                     double signal_noise,
                     Vector levels,
                     std::size_t reps,
                     std::size_t B,
                     std::uint64_t seed,
                     std::size_t grid_n,
                     bool floor_sigma)
{
  SimScenario s;
  s.model = model_from_string(model);
  s.n = n;
  s.signal_noise = signal_noise;
  s.levels = std::move(levels);
  s.reps = reps;
  s.bootstrap_B = B;
  s.seed = seed;
  s.grid_n = grid_n;
  s.floor_sigma = floor_sigma;
  s.validate();
  return s;
}

} // namespace

PYBIND11_MODULE(_deconvband, m)
{
  m.doc() = "Deconvolution density estimation with multiplier-bootstrap uniform bands.";
  m.attr("__version__") = kVersion;

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<DegenerateEcfError>(m, "DegenerateEcfError", base.ptr());
  py::register_exception<SingularityError>(m, "SingularityError", base.ptr());
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);

  m.def("set_max_threads", &set_max_threads, py::arg("threads"),
        "Caps worker threads (0 restores the default); returns the previous cap.");

  m.def(
    "from_repeated",
    [](const Vector& y1, const Vector& y2) {
      const auto s = from_repeated_measurements(y1, y2);
      return py::make_tuple(s.y, s.eta);
    },
    py::arg("y1"), py::arg("y2"), "Averages and half-differences of two noisy measurements.");

  m.def(
    "ecf",
    [](const Vector& sample, const Vector& t) {
      std::vector<std::complex<double>> out;
      out.reserve(t.size());
      for (const double v : t)
        out.push_back(ecf_at(sample, v));
      return out;
    },
    py::arg("sample"), py::arg("t"));

  m.def(
    "deconv_kernel",
    [](const Vector& eta, double h, const Vector& u, std::size_t quad_nodes) {
      const auto ev = regularized_ecf(eta, FrequencyGrid::symmetric(1.0 / h, quad_nodes));
      return deconv_kernel_at(ev, FlatTopKernel{}, h, u);
    },
    py::arg("eta"), py::arg("h"), py::arg("u"), py::arg("quad_nodes") = 4097,
    "Estimated deconvolution kernel at the points u.");

  m.def(
    "_estimate",
    [](Vector y, Vector eta, double h, const Vector& x, bool floor_sigma, std::size_t quad_nodes) {
      const auto sample = make_sample(std::move(y), std::move(eta));
      QuadratureConfig quad;
      quad.nodes = quad_nodes;
      py::gil_scoped_release release;
      return io::to_json(estimate_density(sample, h, x, FlatTopKernel{}, quad, floor_sigma)).dump();
    },
    py::arg("y"), py::arg("eta"), py::arg("h"), py::arg("x"), py::arg("floor_sigma") = true,
    py::arg("quad_nodes") = 4097);

  m.def(
    "_bandwidth",
    [](Vector y, Vector eta, const Vector& x, std::optional<double> h_pilot, std::size_t J, double rho) {
      const auto sample = make_sample(std::move(y), std::move(eta));
      py::gil_scoped_release release;
      const auto selection = h_pilot
                               ? two_step_bandwidth(sample, x, *h_pilot, FlatTopKernel{}, J, rho, QuadratureConfig{})
                               : two_step_bandwidth(sample, x, FlatTopKernel{}, J, rho);
      return io::to_json(selection).dump();
    },
    py::arg("y"), py::arg("eta"), py::arg("x"), py::arg("h_pilot") = std::nullopt, py::arg("J") = 20,
    py::arg("rho") = 3.0);

  m.def(
    "_band",
    [](Vector y, Vector eta, const Vector& x, const Vector& taus, std::size_t B, std::uint64_t seed,
       std::optional<double> h, std::size_t J, double rho, bool floor_sigma, std::size_t quad_nodes) {
      const auto sample = make_sample(std::move(y), std::move(eta));
      const auto config = band_config(B, seed, h, J, rho, floor_sigma, quad_nodes);
      py::gil_scoped_release release;
      return band_run_json(run_band_pipeline(sample, x, config, taus));
    },
    py::arg("y"), py::arg("eta"), py::arg("x"), py::arg("taus"), py::arg("B") = 2500, py::arg("seed") = 0,
    py::arg("h") = std::nullopt, py::arg("J") = 20, py::arg("rho") = 3.0, py::arg("floor_sigma") = true,
    py::arg("quad_nodes") = 4097);

  m.def(
    "_panel_band",
    [](const Vector& y1, const Vector& y2, const Matrix& w1, const Matrix& w2, std::optional<Vector> theta,
       const Vector& x, const Vector& taus, std::size_t B, std::uint64_t seed, std::optional<double> h,
       bool floor_sigma) {
      PanelDataset data{ to_eigen(y1), to_eigen(y2), to_eigen(w1), to_eigen(w2), std::nullopt };
      if (theta)
        data.theta_hat = to_eigen(*theta);
      const auto config = band_config(B, seed, h, 20, 3.0, floor_sigma, 4097);
      py::gil_scoped_release release;
      const auto result = panel_band(data, x, config, taus);
      auto doc = nlohmann::json::parse(band_run_json(result.run));
      doc["theta"] = std::vector<double>(result.theta.data(), result.theta.data() + result.theta.size());
      return doc.dump();
    },
    py::arg("y1"), py::arg("y2"), py::arg("w1"), py::arg("w2"), py::arg("theta"), py::arg("x"),
    py::arg("taus"), py::arg("B") = 2500, py::arg("seed") = 0, py::arg("h") = std::nullopt,
    py::arg("floor_sigma") = true);

  m.def(
    "_coverage_study",
    [](const std::string& model, std::size_t n, double signal_noise, Vector levels, std::size_t reps,
       std::size_t B, std::uint64_t seed, std::size_t grid_n, bool floor_sigma) {
      const auto s = scenario(model, n, signal_noise, std::move(levels), reps, B, seed, grid_n, floor_sigma);
      py::gil_scoped_release release;
      return io::to_json(coverage_study(s)).dump();
    },
    py::arg("model"), py::arg("n"), py::arg("signal_noise"), py::arg("levels"), py::arg("reps"), py::arg("B"),
    py::arg("seed"), py::arg("grid_n") = 64, py::arg("floor_sigma") = false);

  m.def(
    "_power_study",
    [](const std::string& model, std::size_t n, double signal_noise, const std::string& family,
       const Vector& params, double level, std::size_t reps, std::size_t B, std::uint64_t seed) {
      const auto s = scenario(model, n, signal_noise, { level }, reps, B, seed, 64, false);
      if (family != "mean" && family != "scale")
        throw DomainError("power family must be 'mean' or 'scale', got '" + family + "'");
      const auto f = family == "mean" ? PowerFamily::mean : PowerFamily::scale;
      py::gil_scoped_release release;
      return io::to_json(power_study(s, f, params, level)).dump();
    },
    py::arg("model"), py::arg("n"), py::arg("signal_noise"), py::arg("family"), py::arg("params"),
    py::arg("level"), py::arg("reps"), py::arg("B"), py::arg("seed"));

  m.def(
    "_ecf_rate",
    [](const std::string& law, const std::vector<std::size_t>& n_list, double T, std::size_t reps,
       std::uint64_t seed, std::size_t grid_nodes) {
      if (law != "laplace" && law != "normal")
        throw DomainError("law must be 'laplace' or 'normal', got '" + law + "'");
      const auto l = law == "laplace" ? ErrorLaw::laplace : ErrorLaw::normal;
      py::gil_scoped_release release;
      return io::to_json(ecf_rate_diagnostic(l, n_list, T, reps, seed, grid_nodes)).dump();
    },
    py::arg("law"), py::arg("n_list"), py::arg("T"), py::arg("reps"), py::arg("seed"),
    py::arg("grid_nodes") = 2001);
}
