#pragma once

#include "deconvband/fourier.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace deconvband {

//! Contaminated observations y = x + eps and an auxiliary sample eta
//! drawn from the error distribution.
struct ObservedSample
{
  std::vector<double> y;
  std::vector<double> eta;

  //! Throws DomainError unless n >= 2, m >= 1 and every entry is finite.
  void validate() const;
};

//! Repeated measurements y1 = x + e1, y2 = x + e2 with e2 | e1 symmetric:
//! y = (y1 + y2) / 2 and eta = (y1 - y2) / 2 share the error distribution.
ObservedSample from_repeated_measurements(std::span<const double> y1, std::span<const double> y2);

//! Row-major n x Nx matrix of K((x_l - Y_j) / h); rows follow the
//! ascending order of the observations.
struct KernelMatrix
{
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  double operator()(std::size_t j, std::size_t l) const { return data[j * cols + l]; }
  std::span<const double> row(std::size_t j) const { return { data.data() + j * cols, cols }; }

  //! FNV-1a over the raw bytes of the matrix.
  std::uint64_t digest() const;
};

struct DensityEstimate
{
  std::vector<double> x_nodes;
  std::vector<double> f_hat;
  //! Standard deviation of K((x - Y)/h), floored at sqrt(h) when
  //! sigma_floored is set.
  std::vector<double> sigma_hat;
  //! Variance before flooring.
  std::vector<double> sigma2_raw;
  bool sigma_floored = true;
  double h = 0.0;
  std::size_t n = 0;
  std::size_t m = 0;
  std::uint64_t kernel_matrix_digest = 0;
  std::shared_ptr<const KernelMatrix> kernel_matrix;
};

//! Deconvolution kernel density estimate
//!   f(x) = 1/(n h) sum_j K((x - Y_j) / h)
//! with the kernel built from the regularized ECF of eta, plus the
//! pointwise variance of K((x - Y)/h). With floor_sigma the standard
//! deviation is replaced by max(sigma, sqrt(h)).
DensityEstimate estimate_density(const ObservedSample& sample,
                                 double h,
                                 std::span<const double> x_nodes,
                                 const FlatTopKernel& kernel = FlatTopKernel{},
                                 const QuadratureConfig& quad = QuadratureConfig{},
                                 bool floor_sigma = true);

//! Only f_hat, skipping the variance and the stored matrix.
std::vector<double> estimate_density_values(const ObservedSample& sample,
                                            double h,
                                            std::span<const double> x_nodes,
                                            const FlatTopKernel& kernel = FlatTopKernel{},
                                            const QuadratureConfig& quad = QuadratureConfig{});

//! Kernel table covering every (x - Y_j)/h needed for the given nodes.
DeconvKernelTable kernel_table_for(const ObservedSample& sample,
                                   double h,
                                   std::span<const double> x_nodes,
                                   const FlatTopKernel& kernel,
                                   const QuadratureConfig& quad);

//! Evenly spaced nodes on [lo, hi].
std::vector<double> linspace(double lo, double hi, std::size_t count);

} // namespace deconvband
