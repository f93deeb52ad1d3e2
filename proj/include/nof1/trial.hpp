#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nof1/action.hpp"
#include "nof1/environment.hpp"
#include "nof1/model.hpp"
#include "nof1/policy.hpp"
#include "nof1/rng.hpp"
#include "nof1/sampler.hpp"

namespace nof1 {

/// Randomized phase order: A-B runs the fixed arm before the adaptive arm,
/// B-A runs the adaptive arm directly after baseline.
enum class Design { AB, BA };

inline const char* to_string(Design design) { return design == Design::AB ? "AB" : "BA"; }

inline Design parse_design(const std::string& text) {
  if (text == "AB") return Design::AB;
  if (text == "BA") return Design::BA;
  throw std::invalid_argument("parse_design: expected AB or BA, got '" + text + "'");
}

struct TrialConfig {
  int baseline_days = 7;
  int phase_days = 14;
  int decisions_per_day = 1;
  SamplerConfig sampler;
  Scenario scenario = Scenario::II;
  Design design = Design::AB;
  std::uint64_t root_seed = 0;
  ActionSet actions = default_action_set();
};

struct TrialResult {
  int patient_id = 0;
  Scenario scenario = Scenario::I;
  Design design = Design::AB;
  std::vector<HistoryRecord> pre_b_records;         // baseline, plus A phase for A-B
  std::vector<HistoryRecord> adaptive_records;      // B phase
  std::vector<double> counterfactual_fixed_deltas;  // fixed-arm outcome per B decision
  std::vector<PolicyDecision> decisions;            // one per B decision
  std::vector<double> regret_series;                // cumulative sum of fixed - adaptive
};

/// Deterministic round-robin over the action set, in set order, indexed by
/// the 1-based global decision index.
inline int fixed_policy(int t, const ActionSet& actions) {
  if (t < 1) throw std::invalid_argument("fixed_policy: t must be >= 1");
  return static_cast<int>(static_cast<std::size_t>(t - 1) % actions.size());
}

/// Cumulative regret after the first t adaptive decisions; negative values
/// mean the adaptive arm achieved more pain reduction than the fixed arm.
inline double cumulative_regret(const TrialResult& result, int t) {
  if (t < 1 || static_cast<std::size_t>(t) > result.regret_series.size())
    throw std::out_of_range("cumulative_regret: t out of range");
  return result.regret_series[t - 1];
}

namespace seed_tag {
constexpr std::uint64_t kTruth = 1;
constexpr std::uint64_t kOutcome = 2;
constexpr std::uint64_t kPainProcess = 3;
constexpr std::uint64_t kAdherence = 4;
constexpr std::uint64_t kFit = 5;
constexpr std::uint64_t kPolicy = 6;
}  // namespace seed_tag

/// Stream id for one patient cell. All of a patient's randomness derives
/// from this, so patients reproduce independently of execution order.
inline std::uint64_t patient_seed(std::uint64_t root_seed, Scenario scenario, Design design,
                                  int patient_id) {
  return derive_seed(root_seed, {static_cast<std::uint64_t>(scenario),
                                 static_cast<std::uint64_t>(design),
                                 static_cast<std::uint64_t>(patient_id)});
}

/// Runs one patient through the full study timeline: baseline week under the
/// fixed round-robin policy, the A phase likewise when the design is A-B,
/// then the adaptive B phase. Every B-phase decision refits the posterior on
/// all fed-back records so far, draws selection probabilities, and samples
/// an action; the realized outcome is paired with the counterfactual
/// fixed-arm outcome under the same context and the same noise variate, so
/// the regret series isolates the decision effect.
///
/// Outcome and pain-process streams are tagged per phase (not per design),
/// which makes B-phase noise variates identical between A-B and B-A runs of
/// the same patient.
inline TrialResult run_trial(const PatientTruth& truth, const TrialConfig& cfg) {
  if (cfg.baseline_days < 1 || cfg.phase_days < 1 || cfg.decisions_per_day < 1)
    throw std::invalid_argument("run_trial: day counts must be positive");
  if (cfg.sampler.kept_draws < 200)
    throw std::invalid_argument("run_trial: policy calls need kept_draws >= 200");
  if (truth.params.tau.size() != static_cast<std::size_t>(cfg.actions.n_types()))
    throw std::invalid_argument("run_trial: truth tau length does not match action set");

  const ActionSet& actions = cfg.actions;
  // Stream seeds deliberately exclude the design: the design only shapes the
  // timeline, so a patient re-run under A-B vs B-A keeps identical B-phase
  // noise variates.
  const std::uint64_t ps =
      derive_seed(cfg.root_seed, {static_cast<std::uint64_t>(cfg.scenario),
                                  static_cast<std::uint64_t>(truth.patient_id)});

  TrialResult result;
  result.patient_id = truth.patient_id;
  result.scenario = cfg.scenario;
  result.design = cfg.design;

  std::vector<HistoryRecord> history;
  PainState pain{truth.baseline_pain};
  int t = 0;

  const auto run_fixed_phase = [&](Phase phase, int days) {
    const auto tag = static_cast<std::uint64_t>(phase);
    Rng outcome_rng(derive_seed(ps, {seed_tag::kOutcome, tag}));
    Rng pain_rng(derive_seed(ps, {seed_tag::kPainProcess, tag}));
    for (int d = 0; d < days * cfg.decisions_per_day; ++d) {
      ++t;
      const Context ctx = rolling_context(history, actions, pain.current_pain);
      const int index = fixed_policy(t, actions);
      const double noise = outcome_rng.normal();
      const double delta = true_delta_pain(cfg.scenario, truth, ctx, actions[index], noise);
      history.push_back({t, phase, index, ctx, delta, true});
      pain = next_pain(pain, truth.baseline_pain, delta, pain_rng);
    }
  };

  run_fixed_phase(Phase::Baseline, cfg.baseline_days);
  if (cfg.design == Design::AB) run_fixed_phase(Phase::FixedA, cfg.phase_days);
  result.pre_b_records = history;

  const auto fit_with_retries = [&](int decision) {
    constexpr int kMaxAttempts = 3;
    for (int attempt = 0;; ++attempt) {
      SamplerConfig sampler_cfg = cfg.sampler;
      sampler_cfg.rng_seed = derive_seed(
          ps, {seed_tag::kFit, static_cast<std::uint64_t>(decision),
               static_cast<std::uint64_t>(attempt)});
      try {
        return fit_posterior(history, actions, sampler_cfg);
      } catch (const SamplerFailure& failure) {
        if (attempt + 1 == kMaxAttempts)
          throw SamplerFailure("patient " + std::to_string(truth.patient_id) + ", decision " +
                               std::to_string(decision) + ": " + failure.what());
      }
    }
  };

  const auto b_tag = static_cast<std::uint64_t>(Phase::AdaptiveB);
  Rng outcome_rng(derive_seed(ps, {seed_tag::kOutcome, b_tag}));
  Rng pain_rng(derive_seed(ps, {seed_tag::kPainProcess, b_tag}));
  Rng adhere_rng(derive_seed(ps, {seed_tag::kAdherence}));

  const int b_decisions = cfg.phase_days * cfg.decisions_per_day;
  result.adaptive_records.reserve(b_decisions);
  result.counterfactual_fixed_deltas.reserve(b_decisions);
  result.decisions.reserve(b_decisions);
  result.regret_series.reserve(b_decisions);

  double cumulative = 0.0;
  for (int l = 1; l <= b_decisions; ++l) {
    ++t;
    const Context ctx = rolling_context(history, actions, pain.current_pain);
    const PosteriorDraws draws = fit_with_retries(l);

    const std::uint64_t policy_seed =
        derive_seed(ps, {seed_tag::kPolicy, static_cast<std::uint64_t>(l)});
    Rng policy_rng(policy_seed);
    PolicyDecision decision;
    decision.selection_probs = selection_probabilities(draws, ctx, actions, policy_rng);
    decision.chosen_index = thompson_select(decision.selection_probs, policy_rng);
    decision.rng_seed_used = policy_seed;

    const double noise = outcome_rng.normal();
    const double adaptive_delta =
        true_delta_pain(cfg.scenario, truth, ctx, actions[decision.chosen_index], noise);
    // Counterfactual fixed-arm outcome at the same decision point: same
    // context, same noise variate, only the action differs.
    const int fixed_index = fixed_policy(t, actions);
    const double fixed_delta =
        true_delta_pain(cfg.scenario, truth, ctx, actions[fixed_index], noise);

    const bool fed_back =
        adherent(cfg.scenario, truth, ctx, actions[decision.chosen_index], adhere_rng);

    history.push_back({t, Phase::AdaptiveB, decision.chosen_index, ctx, adaptive_delta, fed_back});
    result.adaptive_records.push_back(history.back());
    result.counterfactual_fixed_deltas.push_back(fixed_delta);
    result.decisions.push_back(std::move(decision));
    cumulative += fixed_delta - adaptive_delta;
    result.regret_series.push_back(cumulative);

    pain = next_pain(pain, truth.baseline_pain, adaptive_delta, pain_rng);
  }
  return result;
}

}  // namespace nof1
