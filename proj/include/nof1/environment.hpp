#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>

#include "nof1/model.hpp"
#include "nof1/rng.hpp"

namespace nof1 {

/// Ground-truth regimes for the simulation test bed.
///   I    pain reduction independent of everything (null scenario)
///   II   pain reduction follows the linear model exactly
///   III  like II with the type intercepts zeroed
///   IV   like II with the intensity coefficients zeroed
///   V    like II with the duration coefficients zeroed
///   VI   like II with intensity and duration coefficients zeroed
///   VII  like II plus informative non-adherence
enum class Scenario { I = 1, II, III, IV, V, VI, VII };

inline const char* to_string(Scenario scenario) {
  switch (scenario) {
    case Scenario::I: return "I";
    case Scenario::II: return "II";
    case Scenario::III: return "III";
    case Scenario::IV: return "IV";
    case Scenario::V: return "V";
    case Scenario::VI: return "VI";
    case Scenario::VII: return "VII";
  }
  return "?";
}

inline Scenario parse_scenario(const std::string& text) {
  for (int i = 1; i <= 7; ++i) {
    const auto scenario = static_cast<Scenario>(i);
    if (text == to_string(scenario)) return scenario;
  }
  throw std::invalid_argument("parse_scenario: expected I..VII, got '" + text + "'");
}

/// One simulated patient's fixed ground truth.
struct PatientTruth {
  PatientParams params;
  int patient_id = 0;
  double baseline_pain = 5.0;
};

/// Pre-exercise pain level, clamped to the VAR scale after every update.
struct PainState {
  double current_pain = 5.0;
};

/// Draws one patient's ground truth: every coefficient i.i.d. standard
/// normal, then the scenario's excluded group zeroed out and fixed for the
/// whole trial. Outcome noise scale is 1 in every scenario.
inline PatientTruth draw_patient(Scenario scenario, int patient_id, int n_types, Rng& rng) {
  if (n_types < 1) throw std::invalid_argument("draw_patient: n_types must be positive");
  PatientTruth truth;
  PatientParams& p = truth.params;
  p.alpha = rng.normal();
  p.beta = rng.normal();
  p.gamma = rng.normal();
  p.delta = rng.normal();
  p.eta = rng.normal();
  p.kappa = rng.normal();
  p.tau.resize(n_types);
  for (auto& tau_k : p.tau) tau_k = rng.normal();
  p.sigma = 1.0;
  switch (scenario) {
    case Scenario::III:
      std::fill(p.tau.begin(), p.tau.end(), 0.0);
      break;
    case Scenario::IV:
      p.alpha = p.beta = 0.0;
      break;
    case Scenario::V:
      p.gamma = p.delta = 0.0;
      break;
    case Scenario::VI:
      p.alpha = p.beta = p.gamma = p.delta = 0.0;
      break;
    default:
      break;
  }
  truth.baseline_pain = rng.uniform(3.0, 8.0);  // away from the clamp bounds
  truth.patient_id = patient_id;
  return truth;
}

/// Realized pain reduction. The standard-normal `noise` variate is supplied
/// by the caller so that paired arms can share it (common random numbers).
/// Scenario I ignores context and action entirely.
inline double true_delta_pain(Scenario scenario, const PatientTruth& truth,
                              const Context& context, const ExerciseAction& action,
                              double noise) {
  if (scenario == Scenario::I) return noise;
  return linear_mean(truth.params, context, action) + noise * truth.params.sigma;
}

/// Whether the realized outcome reaches the agent as feedback. Only
/// Scenario VII drops feedback: recommendations that would increase pain
/// under the true model are dropped in half of the cases.
inline bool adherent(Scenario scenario, const PatientTruth& truth, const Context& context,
                     const ExerciseAction& action, Rng& rng) {
  if (scenario != Scenario::VII) return true;
  if (linear_mean(truth.params, context, action) >= 0.0) return true;
  return rng.uniform() < 0.5;
}

/// Next-day pre-exercise pain: mean reversion toward the patient's baseline
/// with a mild carry-over from the day's realized pain reduction. Parameters
/// are deliberately mild so that scenario contrasts come from the reward
/// model, not from the pain process.
inline PainState next_pain(PainState state, double baseline_pain, double realized_delta,
                           Rng& rng) {
  constexpr double kPersistence = 0.5;
  constexpr double kDeltaCarry = 0.5;
  constexpr double kNoiseSd = 0.5;
  const double next = kPersistence * state.current_pain +
                      (1.0 - kPersistence) * baseline_pain -
                      kDeltaCarry * realized_delta + kNoiseSd * rng.normal();
  return PainState{std::clamp(next, 0.0, 10.0)};
}

}  // namespace nof1
