#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace deconvband {

//! Discretization of the Fourier inversion integral.
struct QuadratureConfig
{
  //! Frequency nodes over [-1/h, 1/h]; must be odd.
  std::size_t nodes = 4097;
  //! Kernel-table interpolation error bound, relative to |K(0)|.
  double interpolation_tolerance = 1e-9;
  //! Relative padding added to the u-range requested from a kernel table.
  double u_padding = 0.1;
};

//! Uniform frequency grid, symmetric about zero with an odd node count.
class FrequencyGrid
{
public:
  static FrequencyGrid symmetric(double half_width, std::size_t count);

  std::span<const double> nodes() const { return nodes_; }
  double operator[](std::size_t k) const { return nodes_[k]; }
  std::size_t size() const { return nodes_.size(); }
  std::size_t centre() const { return nodes_.size() / 2; }
  double spacing() const { return spacing_; }
  double half_width() const { return nodes_.back(); }

private:
  FrequencyGrid() = default;

  std::vector<double> nodes_;
  double spacing_ = 0.0;
};

//! Kernel with compactly supported, infinitely differentiable Fourier
//! transform: 1 on |t| <= c, 0 on |t| >= 1, smooth in between.
class FlatTopKernel
{
public:
  explicit FlatTopKernel(double b = 1.0, double c = 0.05);

  //! Fourier transform phi_K(t).
  double operator()(double t) const;

  double b() const { return b_; }
  double c() const { return c_; }

private:
  double b_;
  double c_;
};

//! Empirical characteristic function on a frequency grid, with the
//! regularization mask {|phi| >= threshold}.
struct EcfEvaluation
{
  FrequencyGrid grid;
  std::vector<std::complex<double>> values;
  std::size_t sample_size = 0;
  double threshold = 0.0;
  std::vector<bool> mask;
  //! d/dt of the ECF on the same nodes; locates mask edges between nodes.
  //! When empty, the retained set is resolved to whole nodes only.
  std::vector<std::complex<double>> derivatives;

  std::size_t retained() const;
};

//! (1/m) sum_j exp(i t eta_j) on every grid node, threshold 0. Only the
//! non-negative half is summed; the other half is the exact conjugate.
EcfEvaluation ecf(std::span<const double> sample, const FrequencyGrid& grid);

//! Direct evaluation at a single frequency.
std::complex<double> ecf_at(std::span<const double> sample, double t);

//! Recomputes the mask for a new threshold.
EcfEvaluation with_threshold(EcfEvaluation evaluation, double threshold);

//! ECF with the default threshold m^{-1/2}.
EcfEvaluation regularized_ecf(std::span<const double> sample, const FrequencyGrid& grid);

//! Estimated deconvolution kernel
//!   K(u) = (1/2pi) int exp(-isu) phi_K(s) / phi_eps(s/h) ds
//! tabulated on a uniform u-grid together with K'(u), so that
//! intermediate values come from cubic Hermite interpolation.
class DeconvKernelTable
{
public:
  DeconvKernelTable(double u_min,
                    double spacing,
                    std::vector<double> values,
                    std::vector<double> derivatives,
                    double bandwidth,
                    double max_imag_residual);

  //! Interpolated K(u); throws DomainError outside the tabulated range.
  double operator()(double u) const;

  std::vector<double> u_nodes() const;
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& derivatives() const { return derivatives_; }
  double u_min() const { return u_min_; }
  double u_max() const { return u_min_ + spacing_ * static_cast<double>(values_.size() - 1); }
  double spacing() const { return spacing_; }
  std::size_t size() const { return values_.size(); }
  double bandwidth() const { return bandwidth_; }
  double max_imag_residual() const { return max_imag_residual_; }

private:
  double u_min_;
  double spacing_;
  std::vector<double> values_;
  std::vector<double> derivatives_;
  double bandwidth_;
  double max_imag_residual_;
};

//! Tabulates the kernel on u_min + k * spacing, k < count.
DeconvKernelTable deconv_kernel(const EcfEvaluation& ecf_err,
                                const FlatTopKernel& kernel,
                                double h,
                                double u_min,
                                double spacing,
                                std::size_t count);

//! Tabulates the kernel on [-u_max, u_max] (padded by quad.u_padding) with
//! a spacing that bounds the Hermite interpolation error by
//! quad.interpolation_tolerance * |K(0)|.
DeconvKernelTable deconv_kernel(const EcfEvaluation& ecf_err,
                                const FlatTopKernel& kernel,
                                double h,
                                double u_max,
                                const QuadratureConfig& quad);

//! Direct quadrature at arbitrary points, without tabulation.
std::vector<double> deconv_kernel_at(const EcfEvaluation& ecf_err,
                                     const FlatTopKernel& kernel,
                                     double h,
                                     std::span<const double> u,
                                     double* max_imag_residual = nullptr);

//! Frequency-domain value of int K(u)^2 du, i.e.
//! (1/2pi) int |phi_K(s) / phi_eps(s/h)|^2 ds over retained frequencies.
double plancherel_l2(const EcfEvaluation& ecf_err, const FlatTopKernel& kernel, double h);

} // namespace deconvband
