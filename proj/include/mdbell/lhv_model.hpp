#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mdbell/bell_core.hpp"

namespace mdbell {

/// Tolerance on the averaging constraint sum_l q(l) p(x,y|l) = 1/4 and on the
/// box constraints. Looser than kProbabilityTolerance so that numerically
/// constructed ensembles validate.
inline constexpr double kConstraintTolerance = 1e-9;

/// p(x,y|lambda) stored as p[2x + y].
class InputConditional {
 public:
  /// Throws ValidationError unless every entry is in [0,1] and they sum to 1.
  explicit InputConditional(const std::array<double, 4>& p);

  static InputConditional uniform();

  double operator[](std::size_t i) const { return p_[i]; }
  double at(int x, int y) const { return p_[static_cast<std::size_t>(2 * x + y)]; }
  const std::array<double, 4>& values() const { return p_; }

  friend bool operator==(const InputConditional&, const InputConditional&) = default;

 private:
  std::array<double, 4> p_;
};

/// p(x,y|lambda) = p_A(x|lambda) p_B(y|lambda) with alpha = p_A(0), beta = p_B(0).
struct FactorizedInputConditional {
  double alpha = 0.5;
  double beta = 0.5;

  /// Throws ValidationError unless alpha, beta are in [0,1].
  void validate() const;
  InputConditional to_input_conditional() const;

  friend bool operator==(const FactorizedInputConditional&, const FactorizedInputConditional&) = default;
};

/// Deterministic local rule: a0 = p_A(0|x=0), a1 = p_A(0|x=1), b0 = p_B(0|y=0),
/// b1 = p_B(0|y=1), each 0 or 1.
struct DeterministicStrategy {
  bool a0 = false;
  bool a1 = false;
  bool b0 = false;
  bool b1 = false;

  /// Row-major position in the 4x4 table of all strategies: 8a0 + 4a1 + 2b0 + b1.
  int index() const { return 8 * a0 + 4 * a1 + 2 * b0 + b1; }
  static DeterministicStrategy from_index(int index);
  /// Both parties' outputs inverted.
  DeterministicStrategy flipped() const { return {!a0, !a1, !b0, !b1}; }

  bool alice_outputs_zero(int x) const { return x == 0 ? a0 : a1; }
  bool bob_outputs_zero(int y) const { return y == 0 ? b0 : b1; }

  friend bool operator==(const DeterministicStrategy&, const DeterministicStrategy&) = default;
};

/// All 16 deterministic strategies ordered by index().
std::array<DeterministicStrategy, 16> all_strategies();

/// Strategies that can be optimal for the CH J_lambda, in the order
/// (p2-p0)/2, (p1-p0)/2, (p1-p2)/2, (p2-p1)/2, (p1+p2)/2 - p3.
const std::array<DeterministicStrategy, 5>& reduced_ch_strategies();

/// Strategies that can be optimal for the CHSH J_lambda, in the order of the
/// negative entry: -p3, -p2, -p1, -p0.
const std::array<DeterministicStrategy, 4>& reduced_chsh_strategies();

/// The reduced strategy list for a functional.
std::span<const DeterministicStrategy> reduced_strategies(Functional functional);

/// Bounds on the input conditionals: Q <= p(x,y|lambda) <= P.
class RandomnessBounds {
 public:
  /// Throws ValidationError unless 0 <= Q <= 1/4 <= P <= 1.
  static RandomnessBounds make(double upper, double lower);
  /// P = 1/4 + delta, Q = 1/4 - delta with 0 <= delta <= 1/4.
  static RandomnessBounds from_delta(double delta);

  double upper() const { return upper_; }
  double lower() const { return lower_; }
  std::optional<double> delta() const { return delta_; }

  /// min(P, 1 - 3Q): the largest entry attainable while three others sit at Q.
  double effective_upper() const;
  /// True when P = Q = 1/4 and the only admissible input conditional is uniform.
  bool fully_random() const;

 private:
  RandomnessBounds(double upper, double lower, std::optional<double> delta)
      : upper_(upper), lower_(lower), delta_(delta) {}

  double upper_;
  double lower_;
  std::optional<double> delta_;
};

using AtomInputs = std::variant<InputConditional, FactorizedInputConditional>;

struct LhvAtom {
  double weight = 0.0;
  AtomInputs inputs = InputConditional::uniform();
  DeterministicStrategy outputs;

  InputConditional input_conditional() const;
  bool factorized() const { return std::holds_alternative<FactorizedInputConditional>(inputs); }
};

/// A complete hidden-variable attack: a weighted list of (inputs, outputs)
/// atoms. Constraint checking is left to validate_ensemble so that invalid
/// ensembles can still be inspected.
class LhvEnsemble {
 public:
  LhvEnsemble() = default;
  explicit LhvEnsemble(std::vector<LhvAtom> atoms, std::string label = {});

  const std::vector<LhvAtom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  /// Free-form provenance tag, e.g. "analytic" or "numerically constructed".
  const std::string& label() const { return label_; }

  /// sum_l q(l) p(x,y|l), indexed by 2x + y.
  std::array<double, 4> input_moments() const;
  double total_weight() const;

 private:
  std::vector<LhvAtom> atoms_;
  std::string label_;
};

/// J_lambda of one deterministic strategy for one input conditional:
/// per-lambda contribution to the Bell value (before the factor 4 that the
/// uniform input average introduces).
double j_lambda(const DeterministicStrategy& s, const InputConditional& ic);
double j_lambda_chsh(const DeterministicStrategy& s, const InputConditional& ic);
double j_lambda(Functional functional, const DeterministicStrategy& s, const InputConditional& ic);

struct LocalResponse {
  DeterministicStrategy strategy;
  double value = 0.0;
  /// Position of `strategy` in reduced_strategies(functional).
  int reduced_index = 0;
};

/// Best reduced strategy for given inputs; ties resolve to the lowest position
/// in the reduced list.
LocalResponse optimal_local_response(const InputConditional& ic, Functional functional = Functional::CH);

/// 4 * sum_l q(l) J_lambda. Throws ValidationError naming the setting index if
/// the averaging constraint is violated.
double ensemble_bell_value(const LhvEnsemble& e, Functional functional);

enum class ConstraintKind {
  NegativeWeight,
  WeightNormalization,
  InputNormalization,
  Averaging,
  UpperBound,
  LowerBound,
};

const char* to_string(ConstraintKind kind);

struct ConstraintViolation {
  ConstraintKind kind;
  /// Offending atom, if the constraint is per atom.
  std::optional<std::size_t> atom;
  /// Offending setting 2x + y, if the constraint is per setting.
  std::optional<int> setting;
  double magnitude = 0.0;

  std::string describe() const;
};

struct ValidationReport {
  std::vector<ConstraintViolation> violations;

  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

/// Checks weight sign and normalization, per-atom input normalization, the
/// averaging constraint and the box Q <= p <= min(P, 1-3Q).
ValidationReport validate_ensemble(const LhvEnsemble& e, const RandomnessBounds& rb);

/// Replaces atoms sharing a strategy with one atom carrying their total
/// weight and weight-averaged input conditional. Zero-weight groups are
/// dropped. Atom order follows first appearance of each strategy.
LhvEnsemble merge_equivalent_lambdas(const LhvEnsemble& e);

/// Splits every atom into two half-weight atoms with the original and the
/// output-flipped strategy. Leaves the CHSH value unchanged and makes every
/// output marginal 1/2, so the induced distribution is no-signaling.
LhvEnsemble symmetrize_outputs(const LhvEnsemble& e);

/// Observed p(a,b|x,y) produced by the ensemble. Throws ValidationError if
/// some setting has zero probability.
JointConditional induced_joint(const LhvEnsemble& e);

/// Distribution produced by one deterministic strategy.
JointConditional deterministic_joint(const DeterministicStrategy& s);

}  // namespace mdbell
