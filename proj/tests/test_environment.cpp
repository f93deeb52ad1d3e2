#include "nof1/environment.hpp"

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "nof1/action.hpp"
#include "nof1/rng.hpp"

namespace {

using nof1::Context;
using nof1::ExerciseAction;
using nof1::PainState;
using nof1::PatientTruth;
using nof1::Rng;
using nof1::Scenario;

TEST(Scenario, RomanNumeralRoundTrip) {
  for (int i = 1; i <= 7; ++i) {
    const auto s = static_cast<Scenario>(i);
    EXPECT_EQ(nof1::parse_scenario(nof1::to_string(s)), s);
  }
  EXPECT_THROW(nof1::parse_scenario("VIII"), std::invalid_argument);
  EXPECT_THROW(nof1::parse_scenario("i"), std::invalid_argument);
}

TEST(DrawPatient, ScenarioZeroing) {
  for (int i = 1; i <= 7; ++i) {
    const auto scenario = static_cast<Scenario>(i);
    Rng rng(1234);
    const PatientTruth truth = nof1::draw_patient(scenario, 1, 4, rng);
    const auto& p = truth.params;
    EXPECT_EQ(p.tau.size(), 4u);
    EXPECT_EQ(p.sigma, 1.0);
    EXPECT_GE(truth.baseline_pain, 3.0);
    EXPECT_LE(truth.baseline_pain, 8.0);
    if (scenario == Scenario::III) {
      for (double tau_k : p.tau) EXPECT_EQ(tau_k, 0.0);
    }
    if (scenario == Scenario::IV || scenario == Scenario::VI) {
      EXPECT_EQ(p.alpha, 0.0);
      EXPECT_EQ(p.beta, 0.0);
    }
    if (scenario == Scenario::V || scenario == Scenario::VI) {
      EXPECT_EQ(p.gamma, 0.0);
      EXPECT_EQ(p.delta, 0.0);
    }
    if (scenario == Scenario::VI) {
      EXPECT_NE(p.eta, 0.0);  // eta/kappa stay free
      EXPECT_NE(p.kappa, 0.0);
    }
  }
}

TEST(DrawPatient, DeterministicGivenSeed) {
  Rng a(77);
  Rng b(77);
  const PatientTruth ta = nof1::draw_patient(Scenario::II, 3, 4, a);
  const PatientTruth tb = nof1::draw_patient(Scenario::II, 3, 4, b);
  EXPECT_EQ(ta.params.alpha, tb.params.alpha);
  EXPECT_EQ(ta.params.kappa, tb.params.kappa);
  EXPECT_EQ(ta.params.tau, tb.params.tau);
  EXPECT_EQ(ta.baseline_pain, tb.baseline_pain);
}

TEST(TrueDeltaPain, ScenarioIIsIdentityOnNoise) {
  Rng rng(9);
  const PatientTruth truth = nof1::draw_patient(Scenario::I, 1, 4, rng);
  const auto set = nof1::default_action_set();
  const Context ctx{5.0, 0.3, 0.3};
  EXPECT_EQ(nof1::true_delta_pain(Scenario::I, truth, ctx, set[0], 0.7), 0.7);
  EXPECT_EQ(nof1::true_delta_pain(Scenario::I, truth, ctx, set[5], 0.7), 0.7);
  EXPECT_EQ(nof1::true_delta_pain(Scenario::I, truth, ctx, set[0], -1.3), -1.3);
}

TEST(TrueDeltaPain, ScenarioIIFollowsLinearModel) {
  PatientTruth truth;
  truth.params.tau = {1.0, 0.0, 0.0, 0.0};
  truth.params.sigma = 1.0;
  const auto set = nof1::default_action_set();
  const Context zero_ctx{0.0, 0.0, 0.0};
  EXPECT_DOUBLE_EQ(nof1::true_delta_pain(Scenario::II, truth, zero_ctx, set[0], 0.0), 1.0);
  PatientTruth zeros;
  zeros.params.tau.assign(4, 0.0);
  EXPECT_DOUBLE_EQ(nof1::true_delta_pain(Scenario::II, truth, zero_ctx, set[7], 0.0), 0.0);
  EXPECT_DOUBLE_EQ(nof1::true_delta_pain(Scenario::II, zeros, zero_ctx, set[0], 0.0), 0.0);
  // Noise enters with unit scale.
  EXPECT_DOUBLE_EQ(nof1::true_delta_pain(Scenario::II, zeros, zero_ctx, set[0], 0.4), 0.4);
}

// Scenario III zeroes the type intercepts, so the outcome cannot depend on
// the action type at fixed intensity and duration.
TEST(TrueDeltaPain, ScenarioIIITypeInvariance) {
  Rng rng(31);
  for (int rep = 0; rep < 200; ++rep) {
    const PatientTruth truth = nof1::draw_patient(Scenario::III, 1, 4, rng);
    const Context ctx{rng.uniform(0.0, 10.0), rng.uniform(), rng.uniform()};
    const double intensity = rng.uniform();
    const double noise = rng.normal();
    ExerciseAction a{0, intensity, 0.5, 30, "a"};
    ExerciseAction b{3, intensity, 0.5, 30, "b"};
    EXPECT_DOUBLE_EQ(nof1::true_delta_pain(Scenario::III, truth, ctx, a, noise),
                     nof1::true_delta_pain(Scenario::III, truth, ctx, b, noise));
  }
}

// With intensity and duration coefficients zeroed, those attributes can
// only act through their product: actions sharing type and burden are
// indistinguishable in Scenario VI.
TEST(TrueDeltaPain, ScenarioVIBurdenPreservingInvariance) {
  Rng rng(32);
  for (int rep = 0; rep < 200; ++rep) {
    const PatientTruth truth = nof1::draw_patient(Scenario::VI, 1, 4, rng);
    const Context ctx{rng.uniform(0.0, 10.0), rng.uniform(), rng.uniform()};
    const double noise = rng.normal();
    ExerciseAction a{2, 0.8, 0.5, 30, "a"};
    ExerciseAction b{2, 0.4, 1.0, 60, "b"};  // same type, same burden 0.4
    EXPECT_DOUBLE_EQ(nof1::true_delta_pain(Scenario::VI, truth, ctx, a, noise),
                     nof1::true_delta_pain(Scenario::VI, truth, ctx, b, noise));
  }
}

TEST(Adherent, AlwaysTrueOutsideScenarioVII) {
  Rng rng(13);
  const PatientTruth truth = nof1::draw_patient(Scenario::II, 1, 4, rng);
  const auto set = nof1::default_action_set();
  const Context ctx{9.0, 1.0, 1.0};
  for (int i = 0; i < 100; ++i)
    EXPECT_TRUE(nof1::adherent(Scenario::II, truth, ctx, set[i % set.size()], rng));
}

TEST(Adherent, ScenarioVIIKeepsBeneficialRecommendations) {
  PatientTruth truth;
  truth.params.tau = {0.5, 0.5, 0.5, 0.5};  // linear mean positive everywhere
  Rng rng(21);
  const auto set = nof1::default_action_set();
  for (int i = 0; i < 1000; ++i)
    EXPECT_TRUE(nof1::adherent(Scenario::VII, truth, Context{5.0, 0.0, 0.0}, set[0], rng));
}

TEST(Adherent, ScenarioVIIDropsHalfOfHarmfulRecommendations) {
  PatientTruth truth;
  truth.params.tau = {-0.5, -0.5, -0.5, -0.5};  // linear mean negative everywhere
  Rng rng(22);
  const auto set = nof1::default_action_set();
  int kept = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i)
    kept += nof1::adherent(Scenario::VII, truth, Context{5.0, 0.0, 0.0}, set[0], rng) ? 1 : 0;
  EXPECT_NEAR(static_cast<double>(kept) / n, 0.5, 0.02);
}

TEST(NextPain, FixedPointWithoutNoise) {
  // With current == baseline and delta == 0 the update is mean +- noise;
  // average over many steps stays at the baseline.
  Rng rng(4);
  double sum = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i)
    sum += nof1::next_pain(PainState{6.0}, 6.0, 0.0, rng).current_pain;
  EXPECT_NEAR(sum / n, 6.0, 0.02);
}

TEST(NextPain, StaysClamped) {
  Rng rng(8);
  for (int i = 0; i < 1000; ++i) {
    const double p1 = nof1::next_pain(PainState{10.0}, 8.0, -50.0, rng).current_pain;
    const double p2 = nof1::next_pain(PainState{0.0}, 3.0, 50.0, rng).current_pain;
    EXPECT_LE(p1, 10.0);
    EXPECT_GE(p2, 0.0);
  }
}

TEST(NextPain, TrajectoryIsPositivelyAutocorrelated) {
  Rng rng(15);
  PainState state{5.0};
  std::vector<double> series;
  for (int day = 0; day < 1000; ++day) {
    state = nof1::next_pain(state, 5.0, 0.0, rng);
    series.push_back(state.current_pain);
  }
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(series.size());
  double lag0 = 0.0;
  double lag1 = 0.0;
  for (std::size_t i = 0; i + 1 < series.size(); ++i) {
    lag0 += (series[i] - mean) * (series[i] - mean);
    lag1 += (series[i] - mean) * (series[i + 1] - mean);
  }
  EXPECT_GT(lag1 / lag0, 0.3);  // theoretical value 0.5
}

TEST(NextPain, DeterministicGivenStream) {
  Rng a(99);
  Rng b(99);
  PainState sa{7.0};
  PainState sb{7.0};
  for (int i = 0; i < 50; ++i) {
    sa = nof1::next_pain(sa, 6.0, 0.3, a);
    sb = nof1::next_pain(sb, 6.0, 0.3, b);
    ASSERT_EQ(sa.current_pain, sb.current_pain);
  }
}

}  // namespace
