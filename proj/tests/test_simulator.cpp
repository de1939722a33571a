#include <gtest/gtest.h>

#include <cmath>

#include "mdbell/closed_form.hpp"
#include "mdbell/errors.hpp"
#include "mdbell/simulator.hpp"

using namespace mdbell;

namespace {

LhvEnsemble all_zero_outputs() {
  return LhvEnsemble({{1.0, InputConditional::uniform(), DeterministicStrategy{true, true, true, true}}});
}

LhvEnsemble general_third_attack() {
  return build_attack(ConditionFlags::general(), RandomnessBounds::make(1.0 / 3.0, 0.0));
}

}  // namespace

TEST(RunTrials, AllZeroOutputsDetectEverything) {
  const TrialCounts c = run_trials({10000, 17, all_zero_outputs()});
  EXPECT_EQ(c.n_total, 10000u);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(c.coincidences[i], c.n_setting[i]);
  EXPECT_EQ(c.singles_a, c.n_a0);
  EXPECT_EQ(c.singles_b, c.n_b0);
  EXPECT_NO_THROW(c.validate());
  const auto est = empirical_ch(c);
  EXPECT_NEAR(est.estimate, 0.0, 1e-15);
  EXPECT_EQ(est.std_error, 0.0);
}

TEST(RunTrials, ReproducibleAndSeedSensitive) {
  const auto e = general_third_attack();
  const TrialCounts a = run_trials({50000, 1, e});
  const TrialCounts b = run_trials({50000, 1, e});
  const TrialCounts c = run_trials({50000, 2, e});
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(RunTrials, SettingCountsMatchUniformAveraging) {
  const std::uint64_t n = 400000;
  for (std::uint64_t seed : {3u, 4u}) {
    const TrialCounts c = run_trials({n, seed, general_third_attack()});
    const double sigma = std::sqrt(n * 0.25 * 0.75);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(static_cast<double>(c.n_setting[i]), n / 4.0, 4 * sigma);
    EXPECT_NO_THROW(c.validate());
  }
}

TEST(RunTrials, RejectsBadConfig) {
  EXPECT_THROW(run_trials({0, 1, all_zero_outputs()}), ValidationError);
  LhvEnsemble skewed({{1.0, InputConditional({0.4, 0.2, 0.2, 0.2}), DeterministicStrategy{}}});
  EXPECT_THROW(run_trials({10, 1, skewed}), ValidationError);
}

TEST(Simulate, EstimateNearExactValue) {
  const SimReport r = simulate({1000000, 42, general_third_attack()});
  EXPECT_NEAR(r.j_exact, 5.0 / 6.0, 1e-12);
  EXPECT_GT(r.std_error, 0.0);
  EXPECT_LE(std::abs(r.j_estimate - r.j_exact), 4 * r.std_error);
  EXPECT_EQ(r.generator, std::string(kGeneratorId));
  EXPECT_EQ(r.seed, 42u);
}

TEST(Simulate, NoSignalingDeltaAttack) {
  const auto rb = RandomnessBounds::from_delta(0.104);
  const LhvEnsemble e = build_attack(ConditionFlags::ns(), rb);
  const SimReport r = simulate({1000000, 7, e});
  EXPECT_NEAR(r.j_exact, 0.208, 1e-12);
  EXPECT_LE(std::abs(r.j_estimate - 0.208), 4 * r.std_error);
}

TEST(Simulate, ConsistentAcrossSeedsForEveryFamily) {
  const auto rb = RandomnessBounds::make(0.32, 0.05);
  for (auto cond : {ConditionFlags::general(), ConditionFlags::factorized(), ConditionFlags::ns(),
                    ConditionFlags::ns_factorized()}) {
    const LhvEnsemble e = build_attack(cond, rb);
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t s = 0; s < 100; ++s) seeds.push_back(split_seed(99, s));
    const auto reports = simulate_batch(e, 100000, seeds);
    int inside = 0;
    for (const auto& r : reports) inside += std::abs(r.j_estimate - r.j_exact) <= 4 * r.std_error;
    EXPECT_GE(inside, 99) << cond.name();
  }
}

TEST(Simulate, BatchIndependentOfThreadCount) {
  const std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  const auto a = simulate_batch(general_third_attack(), 20000, seeds, 1);
  const auto b = simulate_batch(general_third_attack(), 20000, seeds, 4);
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    EXPECT_EQ(a[i].counts, b[i].counts);
    EXPECT_EQ(a[i].counts, simulate({20000, seeds[i], general_third_attack()}).counts);
  }
}

TEST(Simulate, StandardErrorScalesAsInverseSquareRoot) {
  const auto e = general_third_attack();
  const double small = simulate({10000, 5, e}).std_error;
  const double large = simulate({1000000, 5, e}).std_error;
  EXPECT_NEAR(small / large, 10.0, 2.0);
}

TEST(EmpiricalCh, SixRatioVariance) {
  TrialCounts c;
  c.n_total = 400;
  c.n_setting = {100, 100, 100, 100};
  c.coincidences = {50, 50, 50, 0};
  c.n_a0 = 200;
  c.n_b0 = 200;
  c.singles_a = 100;
  c.singles_b = 100;
  const auto est = empirical_ch(c);
  EXPECT_DOUBLE_EQ(est.estimate, 0.5);
  const double var = 3 * 0.25 / 100 + 2 * 0.25 / 200;
  EXPECT_DOUBLE_EQ(est.std_error, std::sqrt(var));
}
