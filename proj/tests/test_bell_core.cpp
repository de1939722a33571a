#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mdbell/bell_core.hpp"
#include "mdbell/errors.hpp"
#include "mdbell/lhv_model.hpp"

using namespace mdbell;

namespace {

JointConditional always_zero() {
  JointConditional::Table t{};
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) t[JointConditional::index(0, 0, x, y)] = 1.0;
  return JointConditional(t);
}

// Alice outputs 0 for x=0 when y=0 and is unbiased when y=1.
JointConditional signaling_example() {
  JointConditional::Table t{};
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      if (x == 0 && y == 0) {
        t[JointConditional::index(0, 0, x, y)] = 1.0;
      } else {
        for (int a = 0; a < 2; ++a) t[JointConditional::index(a, 0, x, y)] = 0.5;
      }
    }
  return JointConditional(t);
}

}  // namespace

TEST(JointConditional, RejectsBadNormalization) {
  JointConditional::Table t{};
  t.fill(0.25);
  t[0] = 0.3;
  EXPECT_THROW(JointConditional{t}, ValidationError);
  t.fill(0.25);
  t[0] = -0.1;
  EXPECT_THROW(JointConditional{t}, ValidationError);
}

TEST(JointConditional, BuildersAreNormalized) {
  for (const auto& d : {pr_box(), tsirelson_box(), uniform_noise()}) {
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y) {
        double s = 0.0;
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) s += d(a, b, x, y);
        EXPECT_NEAR(s, 1.0, 1e-15);
      }
  }
  EXPECT_DOUBLE_EQ(pr_box()(0, 0, 1, 1), 0.0);
  EXPECT_DOUBLE_EQ(pr_box()(0, 1, 1, 1), 0.5);
}

TEST(ChValue, KnownDistributions) {
  EXPECT_DOUBLE_EQ(ch_value(always_zero()), 0.0);
  EXPECT_NEAR(ch_value(pr_box()), 0.5, 1e-15);
  EXPECT_NEAR(ch_value(tsirelson_box()), (std::sqrt(2.0) - 1.0) / 2.0, 1e-15);
  EXPECT_NEAR(kQuantumChBound, 0.20711, 1e-5);
}

TEST(ChshValue, KnownDistributions) {
  EXPECT_DOUBLE_EQ(chsh_value(always_zero()), 2.0);
  EXPECT_NEAR(chsh_value(pr_box()), 4.0, 1e-15);
  EXPECT_NEAR(chsh_value(uniform_noise()), 0.0, 1e-15);
  EXPECT_NEAR(chsh_value(tsirelson_box()), 2.0 * std::sqrt(2.0), 1e-14);
}

TEST(ChshValue, CoefficientsFollowSignRule) {
  const BellFunctional f = chsh_functional();
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
          EXPECT_EQ(f.coefficients[JointConditional::index(a, b, x, y)], ((x * y + a + b) % 2) ? -1.0 : 1.0);
  EXPECT_EQ(f.classical_bound, 2.0);
  EXPECT_EQ(ch_functional().classical_bound, 0.0);
}

TEST(ChValue, AverageConventionIsMeanOfOneSidedOnes) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    JointConditional::Table t{};
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y) {
        double s = 0.0;
        std::array<double, 4> w{};
        for (auto& v : w) s += (v = u(rng));
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) t[JointConditional::index(a, b, x, y)] = w[2 * a + b] / s;
      }
    const JointConditional d(t);
    const double avg = ch_value(d, SingleCountConvention::AverageOverOtherSetting);
    const double zero = ch_value(d, SingleCountConvention::OtherSettingZero);
    const double one = ch_value(d, SingleCountConvention::OtherSettingOne);
    EXPECT_NEAR(avg, 0.5 * (zero + one), 1e-14);
  }
}

TEST(NoSignaling, Examples) {
  const auto pr = is_no_signaling(pr_box());
  EXPECT_TRUE(pr.no_signaling);
  EXPECT_EQ(pr.max_residual, 0.0);

  const auto sig = is_no_signaling(signaling_example());
  EXPECT_FALSE(sig.no_signaling);
  EXPECT_NEAR(sig.max_residual, 0.5, 1e-15);
}

TEST(NoSignaling, UniformInputEnsemblesInduceNoSignaling) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> pick(0, 15);
  std::exponential_distribution<double> e(1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<LhvAtom> atoms;
    std::vector<double> w(5);
    double s = 0.0;
    for (auto& v : w) s += (v = e(rng));
    for (double v : w) atoms.push_back({v / s, InputConditional::uniform(), DeterministicStrategy::from_index(pick(rng))});
    EXPECT_TRUE(is_no_signaling(induced_joint(LhvEnsemble(atoms))).no_signaling);
  }
}

TEST(ChChshResidual, Examples) {
  EXPECT_NEAR(ch_chsh_residual(pr_box()), 0.0, 1e-15);
  for (auto conv : kAllConventions) EXPECT_LE(ch_chsh_residual(tsirelson_box(), conv), 1e-12);
  EXPECT_NEAR(ch_chsh_residual(signaling_example()), 0.0, 1e-15);
  EXPECT_GT(ch_chsh_residual(signaling_example(), SingleCountConvention::OtherSettingZero), 0.2);
}

TEST(ClassicalBounds, DeterministicStrategiesAtFullRandomness) {
  double best_ch = -10.0;
  double best_chsh = -10.0;
  for (int i = 0; i < 16; ++i) {
    const JointConditional d = deterministic_joint(DeterministicStrategy::from_index(i));
    EXPECT_LE(ch_value(d), 0.0);
    EXPECT_LE(chsh_value(d), 2.0);
    best_ch = std::max(best_ch, ch_value(d));
    best_chsh = std::max(best_chsh, chsh_value(d));
  }
  EXPECT_EQ(best_ch, 0.0);
  EXPECT_EQ(best_chsh, 2.0);
}

TEST(ChFromCounts, AllDetect) {
  TrialCounts c;
  c.n_total = 1000;
  c.n_setting = {250, 250, 250, 250};
  c.coincidences = {250, 250, 250, 250};
  c.singles_a = 500;
  c.n_a0 = 500;
  c.singles_b = 500;
  c.n_b0 = 500;
  EXPECT_DOUBLE_EQ(ch_from_counts(c), 0.0);
}

TEST(ChFromCounts, ExactProportionsReproduceChValue) {
  for (const auto& d : {pr_box(), uniform_noise(), always_zero()}) {
    const std::uint64_t per = 1 << 20;
    TrialCounts c;
    c.n_total = 4 * per;
    c.n_setting = {per, per, per, per};
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y)
        c.coincidences[2 * x + y] = static_cast<std::uint64_t>(d(0, 0, x, y) * per);
    c.n_a0 = 2 * per;
    c.n_b0 = 2 * per;
    c.singles_a = static_cast<std::uint64_t>((d.alice_marginal(0, 0, 0) + d.alice_marginal(0, 0, 1)) * per);
    c.singles_b = static_cast<std::uint64_t>((d.bob_marginal(0, 0, 0) + d.bob_marginal(0, 1, 0)) * per);
    EXPECT_EQ(ch_from_counts(c), ch_value(d));
  }
}

TEST(ChFromCounts, ZeroDenominatorNamesSetting) {
  TrialCounts c;
  c.n_total = 3;
  c.n_setting = {1, 1, 1, 0};
  c.n_a0 = 2;
  c.n_b0 = 2;
  try {
    ch_from_counts(c);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("insufficient trials for setting (1,1)"), std::string::npos) << e.what();
  }
}

TEST(TrialCounts, InvariantsEnforced) {
  TrialCounts c;
  c.n_total = 4;
  c.n_setting = {1, 1, 1, 1};
  c.n_a0 = 2;
  c.n_b0 = 2;
  EXPECT_NO_THROW(c.validate());
  c.coincidences[0] = 2;
  EXPECT_THROW(c.validate(), ValidationError);
  c.coincidences[0] = 0;
  c.n_a0 = 3;
  EXPECT_THROW(c.validate(), ValidationError);
}
