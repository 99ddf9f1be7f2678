#include "deconvband/estimator.hpp"

#include "deconvband/errors.hpp"
#include "deconvband/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

namespace deconvband {

namespace {

void check_finite(std::span<const double> values, const char* name)
{
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (!std::isfinite(values[j]))
      throw DomainError(std::string("non-finite value in ") + name + " at index " + std::to_string(j));
  }
}

void check_nodes(std::span<const double> x_nodes)
{
  if (x_nodes.empty())
    throw DomainError("evaluation grid is empty");
  check_finite(x_nodes, "x_nodes");
  if (!std::is_sorted(x_nodes.begin(), x_nodes.end()))
    throw DomainError("evaluation grid must be sorted");
}

std::vector<double> sorted_copy(std::span<const double> values)
{
  std::vector<double> out(values.begin(), values.end());
  std::sort(out.begin(), out.end());
  return out;
}

KernelMatrix build_matrix(const std::vector<double>& y_sorted,
                          double h,
                          std::span<const double> x_nodes,
                          const DeconvKernelTable& table)
{
  KernelMatrix matrix;
  matrix.rows = y_sorted.size();
  matrix.cols = x_nodes.size();
  matrix.data.resize(matrix.rows * matrix.cols);
  parallel_for(matrix.rows, [&](std::size_t j) {
    double* row = matrix.data.data() + j * matrix.cols;
    for (std::size_t l = 0; l < matrix.cols; ++l)
      row[l] = table((x_nodes[l] - y_sorted[j]) / h);
  });
  return matrix;
}

} // namespace

void ObservedSample::validate() const
{
  if (y.size() < 2)
    throw DomainError("need at least two observations, got " + std::to_string(y.size()));
  if (eta.empty())
    throw DomainError("auxiliary error sample is empty");
  check_finite(y, "y");
  check_finite(eta, "eta");
}

ObservedSample from_repeated_measurements(std::span<const double> y1, std::span<const double> y2)
{
  if (y1.size() != y2.size())
    throw DomainError("repeated measurements differ in length: " + std::to_string(y1.size()) + " vs " +
                      std::to_string(y2.size()));
  check_finite(y1, "y1");
  check_finite(y2, "y2");
  ObservedSample sample;
  sample.y.resize(y1.size());
  sample.eta.resize(y1.size());
  for (std::size_t j = 0; j < y1.size(); ++j) {
    sample.y[j] = 0.5 * (y1[j] + y2[j]);
    sample.eta[j] = 0.5 * (y1[j] - y2[j]);
  }
  return sample;
}

std::uint64_t KernelMatrix::digest() const
{
  std::uint64_t hash = 0xcbf29ce484222325ull;
  auto feed = [&hash](const void* bytes, std::size_t size) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    for (std::size_t i = 0; i < size; ++i) {
      hash ^= p[i];
      hash *= 0x100000001b3ull;
    }
  };
  const std::uint64_t dims[2] = { rows, cols };
  feed(dims, sizeof dims);
  feed(data.data(), data.size() * sizeof(double));
  return hash;
}

std::vector<double> linspace(double lo, double hi, std::size_t count)
{
  if (count == 0)
    return {};
  if (count == 1)
    return { lo };
  std::vector<double> out(count);
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = lo + step * static_cast<double>(i);
  out.back() = hi;
  return out;
}

DeconvKernelTable kernel_table_for(const ObservedSample& sample,
                                   double h,
                                   std::span<const double> x_nodes,
                                   const FlatTopKernel& kernel,
                                   const QuadratureConfig& quad)
{
  if (!(h > 0.0) || !std::isfinite(h))
    throw DomainError("bandwidth h must be positive and finite, got " + std::to_string(h));
  const auto [y_lo, y_hi] = std::minmax_element(sample.y.begin(), sample.y.end());
  const double reach = std::max(std::abs(x_nodes.back() - *y_lo), std::abs(x_nodes.front() - *y_hi));
  const auto grid = FrequencyGrid::symmetric(1.0 / h, quad.nodes);
  const auto ecf_err = regularized_ecf(sample.eta, grid);
  return deconv_kernel(ecf_err, kernel, h, reach / h, quad);
}

DensityEstimate estimate_density(const ObservedSample& sample,
                                 double h,
                                 std::span<const double> x_nodes,
                                 const FlatTopKernel& kernel,
                                 const QuadratureConfig& quad,
                                 bool floor_sigma)
{
  sample.validate();
  check_nodes(x_nodes);
  const auto table = kernel_table_for(sample, h, x_nodes, kernel, quad);
  const auto y_sorted = sorted_copy(sample.y);
  auto matrix = std::make_shared<KernelMatrix>(build_matrix(y_sorted, h, x_nodes, table));

  const std::size_t n = matrix->rows;
  const std::size_t nx = matrix->cols;
  const double inv_n = 1.0 / static_cast<double>(n);

  DensityEstimate est;
  est.x_nodes.assign(x_nodes.begin(), x_nodes.end());
  est.f_hat.assign(nx, 0.0);
  est.sigma_hat.assign(nx, 0.0);
  est.sigma2_raw.assign(nx, 0.0);
  est.sigma_floored = floor_sigma;
  est.h = h;
  est.n = n;
  est.m = sample.eta.size();

  std::vector<double> mean(nx, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const auto row = matrix->row(j);
    for (std::size_t l = 0; l < nx; ++l)
      mean[l] += row[l];
  }
  for (std::size_t l = 0; l < nx; ++l)
    mean[l] *= inv_n;

  std::vector<double> variance(nx, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const auto row = matrix->row(j);
    for (std::size_t l = 0; l < nx; ++l) {
      const double centred = row[l] - mean[l];
      variance[l] += centred * centred;
    }
  }

  const double floor = floor_sigma ? std::sqrt(h) : 0.0;
  for (std::size_t l = 0; l < nx; ++l) {
    est.f_hat[l] = mean[l] / h;
    est.sigma2_raw[l] = variance[l] * inv_n;
    est.sigma_hat[l] = std::max(std::sqrt(est.sigma2_raw[l]), floor);
  }
  est.kernel_matrix_digest = matrix->digest();
  est.kernel_matrix = std::move(matrix);
  return est;
}

std::vector<double> estimate_density_values(const ObservedSample& sample,
                                            double h,
                                            std::span<const double> x_nodes,
                                            const FlatTopKernel& kernel,
                                            const QuadratureConfig& quad)
{
  sample.validate();
  check_nodes(x_nodes);
  const auto table = kernel_table_for(sample, h, x_nodes, kernel, quad);
  const auto y_sorted = sorted_copy(sample.y);
  std::vector<double> f_hat(x_nodes.size(), 0.0);
  for (const double y : y_sorted) {
    for (std::size_t l = 0; l < x_nodes.size(); ++l)
      f_hat[l] += table((x_nodes[l] - y) / h);
  }
  const double inv_n = 1.0 / static_cast<double>(y_sorted.size());
  for (double& value : f_hat)
    value = value * inv_n / h;
  return f_hat;
}

} // namespace deconvband
