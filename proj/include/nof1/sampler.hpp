#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nof1/action.hpp"
#include "nof1/model.hpp"
#include "nof1/rng.hpp"

namespace nof1 {

/// Settings for the posterior sampler. Defaults are sized for the trial's
/// small-data regime (at most a few dozen observations, ~11 parameters);
/// kept_draws is per chain, so the defaults yield 2000 posterior draws.
struct SamplerConfig {
  int warmup_draws = 500;
  int kept_draws = 1000;
  int chains = 2;
  std::uint64_t rng_seed = 0;
  double initial_scale = 0.5;  // random-walk proposal scale before adaptation
};

struct SamplerDiagnostics {
  int kept = 0;
  int chains = 0;
  // Post-warmup acceptance rate per update block: (alpha,beta),
  // (gamma,delta), (eta,kappa), tau, sigma, and the joint
  // covariance-adapted move.
  std::array<double, 6> block_acceptance{};
  bool joint_move_active = false;
};

/// Posterior samples of the reward-model coefficients for one patient.
struct PosteriorDraws {
  std::vector<PatientParams> draws;
  SamplerDiagnostics meta;
};

/// Raised when sampler diagnostics exceed thresholds. The caller may retry
/// with a fresh seed.
class SamplerFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

// Precomputed regressors for one fed-back observation.
struct FeatureRow {
  double intensity;
  double mi_x_intensity;
  double duration;
  double md_x_duration;
  double burden_v;
  double pain_x_burden;
  int type;
  double y;
};

inline std::vector<FeatureRow> feature_rows(std::span<const HistoryRecord> history,
                                            const ActionSet& actions) {
  std::vector<FeatureRow> rows;
  rows.reserve(history.size());
  for (const auto& rec : history) {
    if (!rec.fed_back) continue;
    const ExerciseAction& a = actions[rec.action_index];
    const double b = burden(a);
    rows.push_back({a.intensity, rec.context.mean_intensity_3 * a.intensity,
                    a.duration_norm, rec.context.mean_duration_3 * a.duration_norm,
                    b, rec.context.pain * b, a.type_id, rec.delta_pain});
  }
  return rows;
}

// Sampler state: six interaction coefficients, per-type intercepts, and
// log(sigma); sigma lives on the log scale to respect positivity.
struct ParamState {
  std::array<double, 6> coef{};
  std::vector<double> tau;
  double log_sigma = 0.0;
};

// Unnormalized log posterior: standard-normal priors on all coefficients,
// Exponential(1) prior on sigma (log-scale change of variables included),
// Gaussian likelihood for the observed pain reductions.
inline double log_posterior(const ParamState& s, const std::vector<FeatureRow>& rows) {
  double lp = 0.0;
  for (double c : s.coef) lp -= 0.5 * c * c;
  for (double t : s.tau) lp -= 0.5 * t * t;
  lp += s.log_sigma - std::exp(s.log_sigma);
  double ssr = 0.0;
  for (const auto& r : rows) {
    const double mu = s.tau[r.type] + s.coef[0] * r.intensity + s.coef[1] * r.mi_x_intensity +
                      s.coef[2] * r.duration + s.coef[3] * r.md_x_duration +
                      s.coef[4] * r.burden_v + s.coef[5] * r.pain_x_burden;
    const double e = r.y - mu;
    ssr += e * e;
  }
  lp -= static_cast<double>(rows.size()) * s.log_sigma +
        0.5 * ssr * std::exp(-2.0 * s.log_sigma);
  return lp;
}

// In-place Cholesky of a dense symmetric matrix (row-major, lower triangle
// written). Returns false when the matrix is not positive definite.
inline bool cholesky_lower(std::vector<double>& a, int n) {
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double sum = a[i * n + j];
      for (int k = 0; k < j; ++k) sum -= a[i * n + k] * a[j * n + k];
      if (i == j) {
        if (sum <= 0.0) return false;
        a[i * n + i] = std::sqrt(sum);
      } else {
        a[i * n + j] = sum / a[j * n + j];
      }
    }
    for (int j = i + 1; j < n; ++j) a[i * n + j] = 0.0;
  }
  return true;
}

// Running mean / covariance of the chain during warmup, feeding a jointly
// adapted random-walk proposal (classic adaptive Metropolis). The posterior
// couples coefficients across the Gibbs blocks (burden is intensity times
// duration), and the learned covariance lets one move travel along those
// ridges instead of random-walking across them.
class JointProposalAdapter {
 public:
  explicit JointProposalAdapter(int dim)
      : dim_(dim), mean_(dim, 0.0), moments_(dim * dim, 0.0), chol_(dim * dim, 0.0) {}

  void accumulate(const std::vector<double>& theta) {
    ++count_;
    for (int i = 0; i < dim_; ++i) mean_[i] += theta[i];
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j <= i; ++j) moments_[i * dim_ + j] += theta[i] * theta[j];
  }

  // Rebuilds the proposal factor from the accumulated moments; keeps the
  // previous factor when the estimate is not yet positive definite.
  void refresh() {
    if (count_ < 5 * dim_) return;
    const double n = static_cast<double>(count_);
    std::vector<double> cov(dim_ * dim_, 0.0);
    for (int i = 0; i < dim_; ++i) {
      for (int j = 0; j <= i; ++j) {
        const double value =
            moments_[i * dim_ + j] / n - (mean_[i] / n) * (mean_[j] / n);
        cov[i * dim_ + j] = value;
        cov[j * dim_ + i] = value;
      }
      cov[i * dim_ + i] += 1e-8;
    }
    if (cholesky_lower(cov, dim_)) {
      chol_ = std::move(cov);
      ready_ = true;
    }
  }

  bool ready() const { return ready_; }

  // theta' = theta + scale * L z
  void propose(const std::vector<double>& theta, double scale, Rng& rng,
               std::vector<double>& out) const {
    std::vector<double> z(dim_);
    for (auto& v : z) v = rng.normal();
    for (int i = 0; i < dim_; ++i) {
      double step = 0.0;
      for (int j = 0; j <= i; ++j) step += chol_[i * dim_ + j] * z[j];
      out[i] = theta[i] + scale * step;
    }
  }

 private:
  int dim_;
  long count_ = 0;
  std::vector<double> mean_;
  std::vector<double> moments_;
  std::vector<double> chol_;
  bool ready_ = false;
};

inline void pack_state(const ParamState& s, std::vector<double>& theta) {
  int i = 0;
  for (double c : s.coef) theta[i++] = c;
  for (double t : s.tau) theta[i++] = t;
  theta[i] = s.log_sigma;
}

inline void unpack_state(const std::vector<double>& theta, ParamState& s) {
  int i = 0;
  for (auto& c : s.coef) c = theta[i++];
  for (auto& t : s.tau) t = theta[i++];
  s.log_sigma = theta[i];
}

}  // namespace detail

/// Samples the posterior of the reward model conditioned on the fed-back
/// records of `history` (records with fed_back == false are ignored). With
/// an empty history the draws follow the prior.
///
/// Kernel: random-walk Metropolis over five blocks -- the three coefficient
/// pairs, the tau vector, and log(sigma) -- plus one jointly adapted move
/// whose proposal covariance is learned from the chain during warmup.
/// Per-block proposal scales adapt toward target acceptance rates during
/// warmup and everything is frozen for the kept draws, so the post-warmup
/// chain is a valid Metropolis sampler. Deterministic given (history, cfg)
/// including the seed.
inline PosteriorDraws fit_posterior(std::span<const HistoryRecord> history,
                                    const ActionSet& actions, const SamplerConfig& cfg) {
  if (cfg.warmup_draws < 1 || cfg.kept_draws < 1 || cfg.chains < 1)
    throw std::invalid_argument("fit_posterior: draw and chain counts must be positive");
  const std::vector<detail::FeatureRow> rows = detail::feature_rows(history, actions);
  const int n_types = actions.n_types();
  const int dim = 7 + n_types;  // six coefficients, tau vector, log sigma

  constexpr int kGibbsBlocks = 5;
  constexpr int kJointBlock = 5;
  constexpr std::array<double, 6> kTargetAcceptance = {0.35, 0.35, 0.35, 0.30, 0.44, 0.25};
  constexpr int kAdaptBatch = 25;

  PosteriorDraws out;
  out.meta.chains = cfg.chains;
  out.draws.reserve(static_cast<std::size_t>(cfg.kept_draws) * cfg.chains);
  std::array<long, 6> accepted{};
  bool joint_active_any_chain = false;

  for (int chain = 0; chain < cfg.chains; ++chain) {
    Rng rng(derive_seed(cfg.rng_seed, {0x9c5aULL, static_cast<std::uint64_t>(chain)}));
    detail::ParamState state;
    state.tau.assign(n_types, 0.0);
    for (auto& c : state.coef) c = 0.5 * rng.normal();
    for (auto& t : state.tau) t = 0.5 * rng.normal();
    state.log_sigma = 0.25 * rng.normal();
    double lp = detail::log_posterior(state, rows);

    std::array<double, 6> scale;
    scale.fill(cfg.initial_scale);
    scale[kJointBlock] = 2.38 / std::sqrt(static_cast<double>(dim));
    std::array<int, 6> batch_accepts{};
    int batch_fill = 0;
    int batch_index = 0;

    detail::JointProposalAdapter adapter(dim);
    const int accumulate_from = std::min(50, cfg.warmup_draws / 4);
    std::vector<double> theta(dim);
    std::vector<double> theta_prop(dim);

    detail::ParamState proposal = state;
    const int total_iters = cfg.warmup_draws + cfg.kept_draws;
    for (int iter = 0; iter < total_iters; ++iter) {
      const bool warming = iter < cfg.warmup_draws;
      for (int b = 0; b < kGibbsBlocks; ++b) {
        proposal = state;
        switch (b) {
          case 0:
            proposal.coef[0] += scale[0] * rng.normal();
            proposal.coef[1] += scale[0] * rng.normal();
            break;
          case 1:
            proposal.coef[2] += scale[1] * rng.normal();
            proposal.coef[3] += scale[1] * rng.normal();
            break;
          case 2:
            proposal.coef[4] += scale[2] * rng.normal();
            proposal.coef[5] += scale[2] * rng.normal();
            break;
          case 3:
            for (auto& t : proposal.tau) t += scale[3] * rng.normal();
            break;
          case 4:
            proposal.log_sigma += scale[4] * rng.normal();
            break;
        }
        const double lp_proposal = detail::log_posterior(proposal, rows);
        bool accept = false;
        if (std::isfinite(lp_proposal))
          accept = lp_proposal >= lp || std::log(rng.uniform()) < lp_proposal - lp;
        if (accept) {
          state = proposal;
          lp = lp_proposal;
        }
        if (warming)
          batch_accepts[b] += accept ? 1 : 0;
        else
          accepted[b] += accept ? 1 : 0;
      }

      if (adapter.ready()) {
        detail::pack_state(state, theta);
        adapter.propose(theta, scale[kJointBlock], rng, theta_prop);
        proposal = state;
        detail::unpack_state(theta_prop, proposal);
        const double lp_proposal = detail::log_posterior(proposal, rows);
        bool accept = false;
        if (std::isfinite(lp_proposal))
          accept = lp_proposal >= lp || std::log(rng.uniform()) < lp_proposal - lp;
        if (accept) {
          state = proposal;
          lp = lp_proposal;
        }
        if (warming)
          batch_accepts[kJointBlock] += accept ? 1 : 0;
        else
          accepted[kJointBlock] += accept ? 1 : 0;
      }

      if (warming) {
        if (iter >= accumulate_from) {
          detail::pack_state(state, theta);
          adapter.accumulate(theta);
        }
        if (++batch_fill == kAdaptBatch) {
          ++batch_index;
          const double step = std::min(0.25, 1.0 / std::sqrt(static_cast<double>(batch_index)));
          for (int b = 0; b < kGibbsBlocks; ++b) {
            const double rate = static_cast<double>(batch_accepts[b]) / kAdaptBatch;
            scale[b] *= std::exp(rate > kTargetAcceptance[b] ? step : -step);
            batch_accepts[b] = 0;
          }
          if (adapter.ready()) {
            const double rate = static_cast<double>(batch_accepts[kJointBlock]) / kAdaptBatch;
            scale[kJointBlock] *= std::exp(rate > kTargetAcceptance[kJointBlock] ? step : -step);
          }
          batch_accepts[kJointBlock] = 0;
          adapter.refresh();
          batch_fill = 0;
        }
      } else {
        PatientParams p;
        p.alpha = state.coef[0];
        p.beta = state.coef[1];
        p.gamma = state.coef[2];
        p.delta = state.coef[3];
        p.eta = state.coef[4];
        p.kappa = state.coef[5];
        p.tau = state.tau;
        p.sigma = std::exp(state.log_sigma);
        out.draws.push_back(std::move(p));
      }
    }
    joint_active_any_chain = joint_active_any_chain || adapter.ready();
  }

  out.meta.kept = static_cast<int>(out.draws.size());
  out.meta.joint_move_active = joint_active_any_chain;
  const double denom = static_cast<double>(cfg.kept_draws) * cfg.chains;
  for (int b = 0; b < 6; ++b)
    out.meta.block_acceptance[b] = static_cast<double>(accepted[b]) / denom;
  const int checked_blocks = joint_active_any_chain ? 6 : kGibbsBlocks;
  for (int b = 0; b < checked_blocks; ++b) {
    const double rate = out.meta.block_acceptance[b];
    if (rate < 0.1 || rate > 0.9) {
      std::ostringstream msg;
      msg << "fit_posterior: block " << b << " acceptance rate " << rate
          << " outside [0.1, 0.9] after adaptation";
      throw SamplerFailure(msg.str());
    }
  }
  return out;
}

/// Writes draws as whitespace-separated columns (one row per draw) for
/// external audit.
inline void dump_draws(const PosteriorDraws& draws, std::ostream& os) {
  if (draws.draws.empty()) throw std::invalid_argument("dump_draws: no draws");
  const std::size_t n_types = draws.draws.front().tau.size();
  os << "alpha beta gamma delta eta kappa";
  for (std::size_t k = 0; k < n_types; ++k) os << " tau" << k;
  os << " sigma\n";
  os << std::setprecision(12);
  for (const auto& d : draws.draws) {
    os << d.alpha << ' ' << d.beta << ' ' << d.gamma << ' ' << d.delta << ' ' << d.eta << ' '
       << d.kappa;
    for (double tau_k : d.tau) os << ' ' << tau_k;
    os << ' ' << d.sigma << '\n';
  }
}

}  // namespace nof1
