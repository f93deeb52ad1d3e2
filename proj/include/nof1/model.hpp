#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "nof1/action.hpp"

namespace nof1 {

enum class Phase { Baseline, FixedA, AdaptiveB };

inline const char* to_string(Phase phase) {
  switch (phase) {
    case Phase::Baseline: return "baseline";
    case Phase::FixedA: return "A";
    case Phase::AdaptiveB: return "B";
  }
  return "?";
}

/// Per-decision-point covariates: current pre-exercise pain plus rolling
/// means over the last three performed exercises.
struct Context {
  double pain = 0.0;              // VAR scale, [0, 10]
  double mean_intensity_3 = 0.0;  // cold-start default 0
  double mean_duration_3 = 0.0;   // cold-start default 0
};

/// Coefficients of the linear reward model. Doubles as simulation ground
/// truth and as a single posterior draw.
struct PatientParams {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double delta = 0.0;
  double eta = 0.0;
  double kappa = 0.0;
  std::vector<double> tau;  // per-type intercepts, indexed by type_id
  double sigma = 1.0;       // outcome noise scale, > 0
};

/// One decision point of a trial.
struct HistoryRecord {
  int t = 0;  // 1-based decision index, global across phases
  Phase phase = Phase::Baseline;
  int action_index = 0;
  Context context;
  double delta_pain = 0.0;  // pre-exercise pain minus pain two hours after
  bool fed_back = true;     // false when dropped by informative non-adherence
};

/// Exercise load: normalized intensity times normalized duration, in [0, 1].
inline double burden(const ExerciseAction& action) {
  return action.intensity * action.duration_norm;
}

/// Expected pain reduction for taking `action` in `context`: a per-type
/// intercept plus intensity, duration and burden terms, each moderated by
/// the matching context variable.
inline double linear_mean(const PatientParams& params, const Context& context,
                          const ExerciseAction& action) {
  if (static_cast<std::size_t>(action.type_id) >= params.tau.size())
    throw std::out_of_range("linear_mean: tau does not cover action type");
  return params.tau[action.type_id] +
         (params.alpha + params.beta * context.mean_intensity_3) * action.intensity +
         (params.gamma + params.delta * context.mean_duration_3) * action.duration_norm +
         (params.eta + params.kappa * context.pain) * burden(action);
}

/// Context for the next decision: means of intensity / duration over the
/// most recent min(3, n) performed exercises. Records without feedback
/// still count -- the exercise happened, only the reward signal was lost.
/// Empty history yields the cold-start default (0, 0).
inline Context rolling_context(std::span<const HistoryRecord> history,
                               const ActionSet& actions, double current_pain) {
  if (!(current_pain >= 0.0 && current_pain <= 10.0))
    throw std::invalid_argument("rolling_context: pain outside [0, 10]");
  Context ctx;
  ctx.pain = current_pain;
  const std::size_t n = std::min<std::size_t>(3, history.size());
  if (n == 0) return ctx;
  double intensity_sum = 0.0;
  double duration_sum = 0.0;
  for (std::size_t i = history.size() - n; i < history.size(); ++i) {
    const ExerciseAction& action = actions[history[i].action_index];
    intensity_sum += action.intensity;
    duration_sum += action.duration_norm;
  }
  ctx.mean_intensity_3 = intensity_sum / static_cast<double>(n);
  ctx.mean_duration_3 = duration_sum / static_cast<double>(n);
  return ctx;
}

}  // namespace nof1
