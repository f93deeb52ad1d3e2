#include "nof1/trial.hpp"

#include <array>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "nof1/action.hpp"
#include "nof1/environment.hpp"
#include "nof1/rng.hpp"

namespace {

using nof1::ActionSet;
using nof1::Design;
using nof1::PatientTruth;
using nof1::Phase;
using nof1::Rng;
using nof1::Scenario;
using nof1::TrialConfig;
using nof1::TrialResult;

TrialConfig fast_config(Scenario scenario, Design design, std::uint64_t seed) {
  TrialConfig cfg;
  cfg.scenario = scenario;
  cfg.design = design;
  cfg.root_seed = seed;
  cfg.sampler.warmup_draws = 150;
  cfg.sampler.kept_draws = 200;
  cfg.sampler.chains = 1;
  return cfg;
}

PatientTruth drawn_truth(Scenario scenario, Design design, std::uint64_t seed, int patient_id) {
  Rng rng(nof1::derive_seed(nof1::patient_seed(seed, scenario, design, patient_id),
                            {nof1::seed_tag::kTruth}));
  return nof1::draw_patient(scenario, patient_id, 4, rng);
}

TEST(FixedPolicy, RoundRobinIndexing) {
  const ActionSet actions = nof1::default_action_set();
  EXPECT_EQ(nof1::fixed_policy(1, actions), 0);
  EXPECT_EQ(nof1::fixed_policy(8, actions), 7);
  EXPECT_EQ(nof1::fixed_policy(9, actions), 0);  // wraps
  EXPECT_THROW(nof1::fixed_policy(0, actions), std::invalid_argument);
}

// Enumerating the cycle for days 1..14 over the default set: indices
// 0..7,0..5, whose types (0,0,0,1,1,1,2,3, 0,0,0,1,1,1) count to (6,6,1,1).
TEST(FixedPolicy, FourteenDayCycleTypeCounts) {
  const ActionSet actions = nof1::default_action_set();
  std::array<int, 4> type_counts{};
  for (int t = 1; t <= 14; ++t) ++type_counts[actions[nof1::fixed_policy(t, actions)].type_id];
  EXPECT_EQ(type_counts[0], 6);
  EXPECT_EQ(type_counts[1], 6);
  EXPECT_EQ(type_counts[2], 1);
  EXPECT_EQ(type_counts[3], 1);
}

TEST(RunTrial, TimelineRecordCounts) {
  for (const Design design : {Design::AB, Design::BA}) {
    const TrialConfig cfg = fast_config(Scenario::II, design, 7001);
    const PatientTruth truth = drawn_truth(Scenario::II, design, 7001, 1);
    const TrialResult result = nof1::run_trial(truth, cfg);
    // A-B sees baseline + A = 21 pre-adaptive records; B-A only the baseline 7.
    EXPECT_EQ(result.pre_b_records.size(), design == Design::AB ? 21u : 7u);
    EXPECT_EQ(result.adaptive_records.size(), 14u);
    EXPECT_EQ(result.counterfactual_fixed_deltas.size(), 14u);
    EXPECT_EQ(result.decisions.size(), 14u);
    EXPECT_EQ(result.regret_series.size(), 14u);
    for (const auto& rec : result.pre_b_records) {
      EXPECT_TRUE(rec.fed_back);
      EXPECT_NE(rec.phase, Phase::AdaptiveB);
    }
    // Global decision indices are contiguous across phases.
    const int b_start = design == Design::AB ? 22 : 8;
    for (std::size_t i = 0; i < result.adaptive_records.size(); ++i)
      EXPECT_EQ(result.adaptive_records[i].t, b_start + static_cast<int>(i));
  }
}

TEST(RunTrial, DecisionsMatchRecordedActions) {
  const TrialConfig cfg = fast_config(Scenario::II, Design::AB, 7002);
  const PatientTruth truth = drawn_truth(Scenario::II, Design::AB, 7002, 2);
  const TrialResult result = nof1::run_trial(truth, cfg);
  for (std::size_t i = 0; i < result.adaptive_records.size(); ++i) {
    EXPECT_EQ(result.decisions[i].chosen_index, result.adaptive_records[i].action_index);
    EXPECT_GT(result.decisions[i].selection_probs[result.decisions[i].chosen_index], 0.0);
  }
}

// Shared noise makes Scenario I regret exactly zero at every step.
TEST(RunTrial, NullScenarioRegretIsExactlyZero) {
  for (const Design design : {Design::AB, Design::BA}) {
    for (int patient = 1; patient <= 3; ++patient) {
      const TrialConfig cfg = fast_config(Scenario::I, design, 7003);
      const PatientTruth truth = drawn_truth(Scenario::I, design, 7003, patient);
      const TrialResult result = nof1::run_trial(truth, cfg);
      for (double regret : result.regret_series) EXPECT_EQ(regret, 0.0);
    }
  }
}

TEST(RunTrial, RegretSeriesIsPrefixSum) {
  const TrialConfig cfg = fast_config(Scenario::II, Design::AB, 7004);
  const PatientTruth truth = drawn_truth(Scenario::II, Design::AB, 7004, 3);
  const TrialResult result = nof1::run_trial(truth, cfg);
  double cumulative = 0.0;
  for (std::size_t i = 0; i < result.adaptive_records.size(); ++i) {
    cumulative +=
        result.counterfactual_fixed_deltas[i] - result.adaptive_records[i].delta_pain;
    EXPECT_NEAR(result.regret_series[i], cumulative, 1e-12);
  }
  EXPECT_NEAR(nof1::cumulative_regret(result, 14), cumulative, 1e-12);
}

// B-phase outcome noise derives from a per-phase stream, so under the null
// scenario the adaptive deltas coincide between the two designs.
TEST(RunTrial, BPhaseNoiseAlignsAcrossDesigns) {
  const PatientTruth truth = drawn_truth(Scenario::I, Design::AB, 7005, 4);
  const TrialConfig cfg_ab = fast_config(Scenario::I, Design::AB, 7005);
  TrialConfig cfg_ba = fast_config(Scenario::I, Design::BA, 7005);
  PatientTruth truth_ba = drawn_truth(Scenario::I, Design::BA, 7005, 4);
  truth_ba = truth;  // same patient coefficients; only the design differs
  const TrialResult ab = nof1::run_trial(truth, cfg_ab);
  const TrialResult ba = nof1::run_trial(truth_ba, cfg_ba);
  ASSERT_EQ(ab.adaptive_records.size(), ba.adaptive_records.size());
  for (std::size_t i = 0; i < ab.adaptive_records.size(); ++i)
    EXPECT_EQ(ab.adaptive_records[i].delta_pain, ba.adaptive_records[i].delta_pain);
}

TEST(RunTrial, DeterministicGivenConfig) {
  const TrialConfig cfg = fast_config(Scenario::VII, Design::BA, 7006);
  const PatientTruth truth = drawn_truth(Scenario::VII, Design::BA, 7006, 5);
  const TrialResult a = nof1::run_trial(truth, cfg);
  const TrialResult b = nof1::run_trial(truth, cfg);
  ASSERT_EQ(a.adaptive_records.size(), b.adaptive_records.size());
  for (std::size_t i = 0; i < a.adaptive_records.size(); ++i) {
    EXPECT_EQ(a.adaptive_records[i].action_index, b.adaptive_records[i].action_index);
    EXPECT_EQ(a.adaptive_records[i].delta_pain, b.adaptive_records[i].delta_pain);
    EXPECT_EQ(a.adaptive_records[i].fed_back, b.adaptive_records[i].fed_back);
    EXPECT_EQ(a.regret_series[i], b.regret_series[i]);
  }
}

// With a dominant type intercept the agent must lock onto type-0 actions.
// The margin is kept inside the prior's plausible range: intercepts far
// outside N(0,1) would be rationally explained away as noise inflation.
TEST(RunTrial, AgentFindsDominantArm) {
  TrialConfig cfg = fast_config(Scenario::II, Design::AB, 7007);
  cfg.sampler.warmup_draws = 300;
  cfg.sampler.kept_draws = 300;
  PatientTruth truth;
  truth.patient_id = 6;
  truth.baseline_pain = 5.0;
  truth.params.tau = {2.0, -2.0, -2.0, -2.0};
  truth.params.sigma = 1.0;
  const TrialResult result = nof1::run_trial(truth, cfg);
  int type0 = 0;
  for (const auto& rec : result.adaptive_records)
    type0 += cfg.actions[rec.action_index].type_id == 0 ? 1 : 0;
  EXPECT_GE(type0, 12);
  EXPECT_LT(result.regret_series.back(), 0.0);
}

TEST(RunTrial, ScenarioVIIDropsFeedbackButKeepsSchedule) {
  TrialConfig cfg = fast_config(Scenario::VII, Design::AB, 7008);
  PatientTruth truth;
  truth.patient_id = 7;
  truth.baseline_pain = 5.0;
  truth.params.tau = {-5.0, -5.0, -5.0, -5.0};  // every recommendation harmful
  truth.params.sigma = 1.0;
  const TrialResult result = nof1::run_trial(truth, cfg);
  EXPECT_EQ(result.adaptive_records.size(), 14u);
  EXPECT_EQ(result.regret_series.size(), 14u);
  int dropped = 0;
  for (const auto& rec : result.adaptive_records) dropped += rec.fed_back ? 0 : 1;
  EXPECT_GT(dropped, 0);   // ~half drop out
  EXPECT_LT(dropped, 14);  // all 14 dropping has probability 2^-14
}

TEST(RunTrial, MultipleDecisionsPerDayScaleTheTimeline) {
  TrialConfig cfg = fast_config(Scenario::I, Design::BA, 7010);
  cfg.decisions_per_day = 2;
  const PatientTruth truth = drawn_truth(Scenario::I, Design::BA, 7010, 9);
  const TrialResult result = nof1::run_trial(truth, cfg);
  EXPECT_EQ(result.pre_b_records.size(), 14u);      // 7 days x 2
  EXPECT_EQ(result.adaptive_records.size(), 28u);   // 14 days x 2
  EXPECT_EQ(result.regret_series.size(), 28u);
}

TEST(CumulativeRegret, ManualSeriesArithmetic) {
  TrialResult result;
  result.regret_series = {0.0, 0.0};
  EXPECT_EQ(nof1::cumulative_regret(result, 1), 0.0);
  EXPECT_EQ(nof1::cumulative_regret(result, 2), 0.0);
  // fixed deltas (1, 1) against adaptive (2, 2)
  result.regret_series = {-1.0, -2.0};
  EXPECT_EQ(nof1::cumulative_regret(result, 2), -2.0);
  EXPECT_THROW(nof1::cumulative_regret(result, 0), std::out_of_range);
  EXPECT_THROW(nof1::cumulative_regret(result, 3), std::out_of_range);
}

// Persistent sampler failures surface with the patient and decision index
// attached after the retry budget is exhausted.
TEST(RunTrial, PropagatesSamplerFailureWithContext) {
  TrialConfig cfg = fast_config(Scenario::II, Design::BA, 7011);
  cfg.sampler.warmup_draws = 1;      // no adaptation batch completes
  cfg.sampler.initial_scale = 1e9;   // rejects every proposal
  const PatientTruth truth = drawn_truth(Scenario::II, Design::BA, 7011, 42);
  try {
    nof1::run_trial(truth, cfg);
    FAIL() << "expected SamplerFailure";
  } catch (const nof1::SamplerFailure& failure) {
    const std::string message = failure.what();
    EXPECT_NE(message.find("patient 42"), std::string::npos) << message;
    EXPECT_NE(message.find("decision 1"), std::string::npos) << message;
  }
}

TEST(RunTrial, ValidatesConfiguration) {
  const PatientTruth truth = drawn_truth(Scenario::II, Design::AB, 7009, 8);
  TrialConfig cfg = fast_config(Scenario::II, Design::AB, 7009);
  cfg.sampler.kept_draws = 100;  // below the production floor
  EXPECT_THROW(nof1::run_trial(truth, cfg), std::invalid_argument);
  cfg = fast_config(Scenario::II, Design::AB, 7009);
  cfg.baseline_days = 0;
  EXPECT_THROW(nof1::run_trial(truth, cfg), std::invalid_argument);
  cfg = fast_config(Scenario::II, Design::AB, 7009);
  PatientTruth short_truth = truth;
  short_truth.params.tau = {0.0};  // action set has 4 types
  EXPECT_THROW(nof1::run_trial(short_truth, cfg), std::invalid_argument);
}

}  // namespace
