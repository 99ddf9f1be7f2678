#pragma once

#include "deconvband/pipeline.hpp"

#include <Eigen/Dense>

#include <optional>

namespace deconvband {

//! Two-period panel Y_{j,t} = W_{j,t}' theta + U_j + V_{j,t}, t = 1, 2.
struct PanelDataset
{
  Eigen::VectorXd y1;
  Eigen::VectorXd y2;
  //! n x d regressors for each period.
  Eigen::MatrixXd w1;
  Eigen::MatrixXd w2;
  std::optional<Eigen::VectorXd> theta_hat;

  std::size_t units() const { return static_cast<std::size_t>(y1.size()); }
  std::size_t regressors() const { return static_cast<std::size_t>(w1.cols()); }

  //! Throws DomainError on inconsistent dimensions or non-finite entries.
  void validate() const;
};

//! Fixed-effect deconvolution data:
//!   y   = (y1 + y2)/2 - theta'(w1 + w2)/2
//!   eta = (y1 - y2)/2 - theta'(w1 - w2)/2
ObservedSample panel_transform(const PanelDataset& data, const Eigen::VectorXd& theta);

//! First-difference OLS of (y1 - y2) on (w1 - w2) without intercept.
//! Throws SingularityError when the differenced regressors are rank deficient.
Eigen::VectorXd fd_ols(const PanelDataset& data);

struct PanelBandRun
{
  Eigen::VectorXd theta;
  ObservedSample transformed;
  BandRun run;
};

//! Band for the fixed-effect density, with theta_hat taken from the data or
//! estimated by fd_ols.
PanelBandRun panel_band(const PanelDataset& data,
                        std::span<const double> x_nodes,
                        const BandConfig& config,
                        std::span<const double> taus);

} // namespace deconvband
