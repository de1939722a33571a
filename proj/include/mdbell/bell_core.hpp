#pragma once

#include <array>
#include <cstdint>
#include <numbers>

namespace mdbell {

inline constexpr double kProbabilityTolerance = 1e-12;

/// Maximal quantum value of the CH functional, (sqrt(2) - 1) / 2.
inline constexpr double kQuantumChBound = (std::numbers::sqrt2 - 1.0) / 2.0;
inline constexpr double kQuantumChshBound = 2.0 * std::numbers::sqrt2;

enum class Functional { CH, CHSH };

/// How the single-party probabilities p_A(0), p_B(0) of the CH functional are
/// read off a joint table: averaged over the other party's setting, or taken
/// at a fixed other-party setting.
enum class SingleCountConvention { AverageOverOtherSetting, OtherSettingZero, OtherSettingOne };

inline constexpr std::array<SingleCountConvention, 3> kAllConventions = {
    SingleCountConvention::AverageOverOtherSetting, SingleCountConvention::OtherSettingZero,
    SingleCountConvention::OtherSettingOne};

/// Observed distribution p(a,b|x,y) over binary inputs and outputs.
///
/// Construction validates that every entry lies in [0,1] and that each of the
/// four conditional distributions sums to one within kProbabilityTolerance.
class JointConditional {
 public:
  using Table = std::array<double, 16>;

  static constexpr std::size_t index(int a, int b, int x, int y) {
    return static_cast<std::size_t>(((a * 2 + b) * 2 + x) * 2 + y);
  }

  explicit JointConditional(const Table& table);

  double operator()(int a, int b, int x, int y) const { return table_[index(a, b, x, y)]; }
  const Table& table() const { return table_; }

  /// sum_b p(a,b|x,y)
  double alice_marginal(int a, int x, int y) const;
  /// sum_a p(a,b|x,y)
  double bob_marginal(int b, int x, int y) const;

 private:
  Table table_;
};

/// Convex mixture weight * first + (1 - weight) * second.
JointConditional mix(const JointConditional& first, const JointConditional& second, double weight);

/// p(a,b|x,y) = 1/2 iff a xor b == x*y.
JointConditional pr_box();
/// Maximally entangled correlations at the CHSH-optimal settings:
/// p(a,b|x,y) = (1 + (-1)^(a+b+xy) / sqrt(2)) / 4.
JointConditional tsirelson_box();
/// p(a,b|x,y) = 1/4.
JointConditional uniform_noise();

/// Coefficients beta(a,b,x,y) of a linear Bell functional plus its classical
/// and quantum bounds.
struct BellFunctional {
  std::array<double, 16> coefficients{};
  double classical_bound = 0.0;
  double quantum_bound = 0.0;

  double evaluate(const JointConditional& dist) const;
};

/// The CH functional written as coefficients on the full table; the single
/// terms are spread according to `conv`.
BellFunctional ch_functional(SingleCountConvention conv = SingleCountConvention::AverageOverOtherSetting);
/// beta = (-1)^(xy + a + b).
BellFunctional chsh_functional();

double ch_value(const JointConditional& dist,
                SingleCountConvention conv = SingleCountConvention::AverageOverOtherSetting);
double chsh_value(const JointConditional& dist);

struct NoSignalingReport {
  bool no_signaling = false;
  double max_residual = 0.0;
};

/// Checks that Alice's marginal is independent of y and Bob's of x.
NoSignalingReport is_no_signaling(const JointConditional& dist, double tol = kProbabilityTolerance);

/// |J_CH - (J_CHSH - 2) / 4|; vanishes on no-signaling distributions.
double ch_chsh_residual(const JointConditional& dist,
                        SingleCountConvention conv = SingleCountConvention::AverageOverOtherSetting);

/// Raw tallies of a run of the CH experiment. Per-setting arrays are indexed
/// by 2x + y.
struct TrialCounts {
  std::uint64_t n_total = 0;
  std::array<std::uint64_t, 4> n_setting{};
  std::array<std::uint64_t, 4> coincidences{};
  std::uint64_t singles_a = 0;
  std::uint64_t singles_b = 0;
  std::uint64_t n_a0 = 0;
  std::uint64_t n_b0 = 0;

  /// Throws ValidationError if the counting invariants do not hold.
  void validate() const;

  friend bool operator==(const TrialCounts&, const TrialCounts&) = default;
};

/// Six-ratio count estimator of the CH value. Throws ValidationError naming
/// the setting when a denominator is zero.
double ch_from_counts(const TrialCounts& counts);

}  // namespace mdbell
