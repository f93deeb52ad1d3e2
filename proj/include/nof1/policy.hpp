#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "nof1/action.hpp"
#include "nof1/model.hpp"
#include "nof1/rng.hpp"
#include "nof1/sampler.hpp"

namespace nof1 {

/// One Thompson-sampling decision: per-action probabilities of being best,
/// the sampled choice, and the seed that produced it.
struct PolicyDecision {
  std::vector<double> selection_probs;
  int chosen_index = -1;
  std::uint64_t rng_seed_used = 0;
};

/// One posterior-predictive pain-reduction sample per posterior draw, for a
/// single action in a fixed context.
inline std::vector<double> predictive_delta_pain(const PosteriorDraws& draws,
                                                 const Context& context,
                                                 const ExerciseAction& action, Rng& rng) {
  if (draws.draws.empty())
    throw std::invalid_argument("predictive_delta_pain: no posterior draws");
  std::vector<double> out;
  out.reserve(draws.draws.size());
  for (const auto& d : draws.draws)
    out.push_back(linear_mean(d, context, action) + d.sigma * rng.normal());
  return out;
}

/// Fraction of draws in which each action attains the maximum sample.
/// `samples_by_action[j][d]` is action j's predictive value under draw d.
/// Exact ties are broken uniformly at random among the maximizers; the rng
/// is consumed only when a tie occurs, so tie-free inputs are mapped
/// exactly equivariantly under permutation of the actions.
inline std::vector<double> argmax_frequencies(
    std::span<const std::vector<double>> samples_by_action, Rng& rng) {
  const std::size_t n_actions = samples_by_action.size();
  if (n_actions == 0) throw std::invalid_argument("argmax_frequencies: no actions");
  const std::size_t n_draws = samples_by_action.front().size();
  if (n_draws == 0) throw std::invalid_argument("argmax_frequencies: no draws");
  for (const auto& column : samples_by_action)
    if (column.size() != n_draws)
      throw std::invalid_argument("argmax_frequencies: ragged sample matrix");

  std::vector<long> counts(n_actions, 0);
  std::vector<int> ties;
  ties.reserve(n_actions);
  for (std::size_t d = 0; d < n_draws; ++d) {
    ties.assign(1, 0);
    double best = samples_by_action[0][d];
    for (std::size_t j = 1; j < n_actions; ++j) {
      const double v = samples_by_action[j][d];
      if (v > best) {
        best = v;
        ties.assign(1, static_cast<int>(j));
      } else if (v == best) {
        ties.push_back(static_cast<int>(j));
      }
    }
    const int winner =
        ties.size() == 1 ? ties[0] : ties[rng.uniform_int(static_cast<int>(ties.size()))];
    ++counts[winner];
  }
  std::vector<double> probs(n_actions);
  for (std::size_t j = 0; j < n_actions; ++j)
    probs[j] = static_cast<double>(counts[j]) / static_cast<double>(n_draws);
  return probs;
}

/// Thompson selection probabilities: for every posterior draw, sample one
/// predictive outcome per action (the parameter draw is shared across
/// actions, the predictive noise is independent per action) and count which
/// action wins. Output sums to 1.
inline std::vector<double> selection_probabilities(const PosteriorDraws& draws,
                                                   const Context& context,
                                                   const ActionSet& actions, Rng& rng) {
  if (actions.size() == 0) throw std::invalid_argument("selection_probabilities: no actions");
  std::vector<std::vector<double>> samples;
  samples.reserve(actions.size());
  for (const auto& action : actions)
    samples.push_back(predictive_delta_pain(draws, context, action, rng));
  return argmax_frequencies(samples, rng);
}

/// Samples an action index from a selection distribution.
inline int thompson_select(std::span<const double> probs, Rng& rng) {
  if (probs.empty()) throw std::invalid_argument("thompson_select: empty distribution");
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p))
      throw std::invalid_argument("thompson_select: negative or non-finite probability");
    total += p;
  }
  if (total == 0.0) throw std::domain_error("thompson_select: degenerate distribution");
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("thompson_select: probabilities do not sum to 1");
  const double u = rng.uniform();
  double cum = 0.0;
  int last_positive = -1;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    if (probs[j] <= 0.0) continue;
    last_positive = static_cast<int>(j);
    cum += probs[j];
    if (u < cum) return last_positive;
  }
  return last_positive;  // u fell into the rounding tail
}

}  // namespace nof1
