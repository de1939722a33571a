#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "mdbell/bell_core.hpp"
#include "mdbell/lhv_model.hpp"

namespace mdbell {

/// Which extra assumptions constrain the hidden-variable model.
struct ConditionFlags {
  bool no_signaling = false;
  bool factorizable = false;

  static constexpr ConditionFlags general() { return {false, false}; }
  static constexpr ConditionFlags factorized() { return {false, true}; }
  static constexpr ConditionFlags ns() { return {true, false}; }
  static constexpr ConditionFlags ns_factorized() { return {true, true}; }

  /// "general" | "factorizable" | "ns" | "ns-factorizable"
  std::string name() const;
  static ConditionFlags parse(std::string_view name);

  friend bool operator==(const ConditionFlags&, const ConditionFlags&) = default;
};

struct BoundResult {
  double value = 0.0;
  /// Active region, e.g. "3P+Q<=1"; "boundary" when the point lies on the
  /// common edge of two regions (their formulas agree there).
  std::string branch;
  RandomnessBounds bounds = RandomnessBounds::make(0.25, 0.25);
  ConditionFlags condition;
  Functional functional = Functional::CH;
};

/// Optimal CH value over all hidden-variable models at (P, Q).
BoundResult ch_bound(ConditionFlags cond, const RandomnessBounds& rb);

/// Optimal CHSH value; only the factorizable flag matters.
BoundResult chsh_bound(ConditionFlags cond, const RandomnessBounds& rb);

BoundResult bound(Functional functional, ConditionFlags cond, const RandomnessBounds& rb);

/// Optimal CH value at P = 1/4 + delta, Q = 1/4 - delta: 4 delta without
/// no-signaling, 2 delta with it.
double ch_bound_delta(ConditionFlags cond, double delta);

struct Rescaling {
  /// (P - Q) / (1 - 4Q): the upper bound of the shifted problem with Q = 0.
  double upper = 0.25;
  double lower = 0.0;
  double scale = 1.0;
  double offset = 0.0;
  /// Q = 1/4: the inputs are forced uniform and only the classical value remains.
  bool degenerate = false;

  /// Bell value at (P, Q) from the value of the shifted problem.
  double apply(double shifted_value) const { return scale * shifted_value + offset; }
  /// Maps a shifted input probability p' back to p = (1 - 4Q) p' + Q.
  double unshift(double shifted_p) const { return scale * shifted_p + lower; }
};

/// p' = (p - Q) / (1 - 4Q) reduces a problem with lower bound Q to one with
/// lower bound 0; J = (1 - 4Q) J' for CH and (1 - 4Q) J' + 8Q for CHSH.
Rescaling rescale_to_zero_q(const RandomnessBounds& rb, Functional functional);

enum class ThresholdKind { PAtSmallQ, QAtLargeP, Delta };

/// Inverts the relevant branch of the CH bound at `j_target`: the critical P
/// with Q = 0, the critical Q in the P-independent region, or the critical
/// delta. Throws ValidationError when the target is outside the branch range.
double critical_threshold(ConditionFlags cond, ThresholdKind which, double j_target);

enum class AttackMethod { Analytic, Numerical };

struct AttackOptions {
  AttackMethod method = AttackMethod::Analytic;
  std::uint64_t seed = 1;
};

/// An ensemble that is valid at `rb` and attains the optimal value for the
/// condition. No-signaling families are output-symmetrized so the induced
/// distribution is genuinely no-signaling; their CH value then equals the
/// CHSH optimum mapped through J_CH = (J_CHSH - 2) / 4.
///
/// AttackMethod::Numerical is available for the factorizable families: a
/// seeded search over (alpha, beta) atoms followed by an LP for the weights.
/// It throws ComputationError if it cannot reach the closed form within 1e-6.
LhvEnsemble build_attack(ConditionFlags cond, const RandomnessBounds& rb, const AttackOptions& options = {});

/// Optimal CH attack without no-signaling symmetrization.
LhvEnsemble build_ch_attack(bool factorizable, const RandomnessBounds& rb);

/// Optimal CHSH attack before output symmetrization: four atoms for the
/// general case, two factorized atoms for the factorizable case.
LhvEnsemble build_chsh_attack(bool factorizable, const RandomnessBounds& rb);

/// The value build_attack is expected to reach: the CH bound for every family
/// (the CHSH bound is reached as well by the no-signaling families).
double attack_target(ConditionFlags cond, const RandomnessBounds& rb);

}  // namespace mdbell
