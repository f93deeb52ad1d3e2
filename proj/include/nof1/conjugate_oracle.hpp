#pragma once

#include <span>
#include <stdexcept>

#include <Eigen/Dense>

#include "nof1/action.hpp"
#include "nof1/model.hpp"

namespace nof1 {

/// Exact Gaussian posterior over (alpha, beta, gamma, delta, eta, kappa,
/// tau_0..tau_{K-1}) when sigma is known. With sigma fixed the reward model
/// is linear regression with a standard-normal prior, so the posterior has
/// closed form. Serves as an independent reference for validating the MCMC
/// sampler; the feature expansion is spelled out here on purpose instead of
/// reusing linear_mean.
struct GaussianPosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

inline GaussianPosterior conjugate_posterior_oracle(std::span<const HistoryRecord> history,
                                                    const ActionSet& actions,
                                                    double sigma_fixed) {
  if (!(sigma_fixed > 0.0))
    throw std::invalid_argument("conjugate_posterior_oracle: sigma must be positive");
  const int dim = 6 + actions.n_types();
  Eigen::MatrixXd precision = Eigen::MatrixXd::Identity(dim, dim);  // prior N(0, I)
  Eigen::VectorXd moment = Eigen::VectorXd::Zero(dim);
  const double inv_var = 1.0 / (sigma_fixed * sigma_fixed);
  Eigen::VectorXd x(dim);
  for (const auto& rec : history) {
    if (!rec.fed_back) continue;
    const ExerciseAction& a = actions[rec.action_index];
    x.setZero();
    x(0) = a.intensity;
    x(1) = rec.context.mean_intensity_3 * a.intensity;
    x(2) = a.duration_norm;
    x(3) = rec.context.mean_duration_3 * a.duration_norm;
    x(4) = a.intensity * a.duration_norm;
    x(5) = rec.context.pain * a.intensity * a.duration_norm;
    x(6 + a.type_id) = 1.0;
    precision.noalias() += inv_var * x * x.transpose();
    moment.noalias() += (inv_var * rec.delta_pain) * x;
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(precision);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("conjugate_posterior_oracle: singular precision matrix");
  GaussianPosterior posterior;
  posterior.mean = ldlt.solve(moment);
  posterior.covariance = ldlt.solve(Eigen::MatrixXd::Identity(dim, dim));
  return posterior;
}

}  // namespace nof1
