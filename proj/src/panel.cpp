#include "deconvband/panel.hpp"

#include "deconvband/errors.hpp"

#include <string>

namespace deconvband {

void PanelDataset::validate() const
{
  const Eigen::Index n = y1.size();
  if (y2.size() != n || w1.rows() != n || w2.rows() != n)
    throw DomainError("panel columns disagree on the number of units");
  if (w1.cols() != w2.cols())
    throw DomainError("period regressor matrices differ in width: " + std::to_string(w1.cols()) + " vs " +
                      std::to_string(w2.cols()));
  if (theta_hat && theta_hat->size() != w1.cols())
    throw DomainError("theta has " + std::to_string(theta_hat->size()) + " entries for " +
                      std::to_string(w1.cols()) + " regressors");
  if (!y1.allFinite() || !y2.allFinite() || !w1.allFinite() || !w2.allFinite())
    throw DomainError("panel data contain non-finite entries");
}

ObservedSample panel_transform(const PanelDataset& data, const Eigen::VectorXd& theta)
{
  data.validate();
  if (theta.size() != data.w1.cols())
    throw DomainError("theta has " + std::to_string(theta.size()) + " entries for " +
                      std::to_string(data.w1.cols()) + " regressors");
  const Eigen::VectorXd level = 0.5 * (data.y1 + data.y2) - 0.5 * (data.w1 + data.w2) * theta;
  const Eigen::VectorXd diff = 0.5 * (data.y1 - data.y2) - 0.5 * (data.w1 - data.w2) * theta;
  ObservedSample sample;
  sample.y.assign(level.data(), level.data() + level.size());
  sample.eta.assign(diff.data(), diff.data() + diff.size());
  return sample;
}

Eigen::VectorXd fd_ols(const PanelDataset& data)
{
  data.validate();
  const Eigen::MatrixXd dw = data.w1 - data.w2;
  const Eigen::VectorXd dy = data.y1 - data.y2;
  if (dw.rows() <= dw.cols())
    throw SingularityError("first-difference OLS needs more units than regressors");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(dw);
  if (qr.rank() < dw.cols())
    throw SingularityError("differenced regressors have rank " + std::to_string(qr.rank()) + " < " +
                           std::to_string(dw.cols()));
  return qr.solve(dy);
}

PanelBandRun panel_band(const PanelDataset& data,
                        std::span<const double> x_nodes,
                        const BandConfig& config,
                        std::span<const double> taus)
{
  PanelBandRun out;
  out.theta = data.theta_hat ? *data.theta_hat : fd_ols(data);
  out.transformed = panel_transform(data, out.theta);
  out.run = run_band_pipeline(out.transformed, x_nodes, config, taus);
  return out;
}

} // namespace deconvband
