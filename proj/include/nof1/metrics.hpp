#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "nof1/action.hpp"
#include "nof1/policy.hpp"
#include "nof1/trial.hpp"

namespace nof1 {

/// One evaluation-summary row for a (scenario, design) cell across its
/// simulated patients.
struct ScenarioSummary {
  Scenario scenario = Scenario::I;
  Design design = Design::AB;
  double mean_regret = 0.0;
  double regret_q75 = 0.0;  // 25%-worst-case cumulative regret
  double entropy_type = 0.0;
  double std_duration = 0.0;
  double std_intensity = 0.0;
  double mean_max_prob = 0.0;
  double mean_min_prob = 0.0;
  int n_patients = 0;
};

namespace detail {

// Sums after sorting so that aggregates do not depend on input order.
inline double order_invariant_sum(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double total = 0.0;
  for (double v : values) total += v;
  return total;
}

inline double order_invariant_mean(std::vector<double> values) {
  const auto n = static_cast<double>(values.size());
  return order_invariant_sum(std::move(values)) / n;
}

}  // namespace detail

/// Shannon entropy in nats of the empirical distribution given by counts,
/// with 0 * ln 0 taken as 0.
inline double shannon_entropy(std::span<const int> counts) {
  long total = 0;
  for (int c : counts) {
    if (c < 0) throw std::invalid_argument("shannon_entropy: negative count");
    total += c;
  }
  if (total == 0) throw std::invalid_argument("shannon_entropy: all counts zero");
  double entropy = 0.0;
  for (int c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    entropy -= p * std::log(p);
  }
  return entropy;
}

/// Population standard deviation (n in the denominator).
inline double dispersion(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("dispersion: empty input");
  const auto n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / n);
}

/// Quantile with linear interpolation between order statistics.
inline double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile: empty input");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile: q outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double position = q * static_cast<double>(values.size() - 1);
  const auto lower = static_cast<std::size_t>(position);
  const double fraction = position - static_cast<double>(lower);
  if (lower + 1 >= values.size()) return values.back();
  return values[lower] + fraction * (values[lower + 1] - values[lower]);
}

/// Mean of per-decision maximum and minimum selection probabilities.
inline std::pair<double, double> probability_extremes(
    std::span<const PolicyDecision> decisions) {
  if (decisions.empty()) throw std::invalid_argument("probability_extremes: no decisions");
  std::vector<double> maxima;
  std::vector<double> minima;
  maxima.reserve(decisions.size());
  minima.reserve(decisions.size());
  for (const auto& decision : decisions) {
    if (decision.selection_probs.empty())
      throw std::invalid_argument("probability_extremes: decision without probabilities");
    const auto [lo, hi] = std::minmax_element(decision.selection_probs.begin(),
                                              decision.selection_probs.end());
    minima.push_back(*lo);
    maxima.push_back(*hi);
  }
  return {detail::order_invariant_mean(std::move(maxima)),
          detail::order_invariant_mean(std::move(minima))};
}

/// Aggregates one (scenario, design) cell: regret statistics over the
/// per-patient final cumulative regrets, and intervention-diversity metrics
/// computed per patient over that patient's B-phase selections and then
/// averaged across patients. Permutation of the input leaves the output
/// unchanged.
inline ScenarioSummary summarize(std::span<const TrialResult> results,
                                 const ActionSet& actions) {
  if (results.empty()) throw std::invalid_argument("summarize: no results");
  for (const auto& r : results)
    if (r.scenario != results.front().scenario || r.design != results.front().design)
      throw std::invalid_argument("summarize: mixed scenario/design input");

  std::vector<double> final_regrets;
  std::vector<double> entropies;
  std::vector<double> intensity_sds;
  std::vector<double> duration_sds;
  std::vector<PolicyDecision> pooled_decisions;
  final_regrets.reserve(results.size());

  for (const auto& r : results) {
    if (r.regret_series.empty() || r.adaptive_records.empty())
      throw std::invalid_argument("summarize: result without adaptive phase");
    final_regrets.push_back(r.regret_series.back());
    std::vector<int> type_counts(actions.n_types(), 0);
    std::vector<double> intensities;
    std::vector<double> durations;
    intensities.reserve(r.adaptive_records.size());
    durations.reserve(r.adaptive_records.size());
    for (const auto& rec : r.adaptive_records) {
      const ExerciseAction& a = actions[rec.action_index];
      ++type_counts[a.type_id];
      intensities.push_back(a.intensity);
      durations.push_back(a.duration_norm);
    }
    entropies.push_back(shannon_entropy(type_counts));
    intensity_sds.push_back(dispersion(intensities));
    duration_sds.push_back(dispersion(durations));
    pooled_decisions.insert(pooled_decisions.end(), r.decisions.begin(), r.decisions.end());
  }

  ScenarioSummary summary;
  summary.scenario = results.front().scenario;
  summary.design = results.front().design;
  summary.n_patients = static_cast<int>(results.size());
  summary.mean_regret = detail::order_invariant_mean(final_regrets);
  summary.regret_q75 = quantile(std::move(final_regrets), 0.75);
  summary.entropy_type = detail::order_invariant_mean(std::move(entropies));
  summary.std_intensity = detail::order_invariant_mean(std::move(intensity_sds));
  summary.std_duration = detail::order_invariant_mean(std::move(duration_sds));
  const auto [mean_max, mean_min] = probability_extremes(pooled_decisions);
  summary.mean_max_prob = mean_max;
  summary.mean_min_prob = mean_min;
  return summary;
}

}  // namespace nof1
