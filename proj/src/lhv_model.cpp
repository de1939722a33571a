#include "mdbell/lhv_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mdbell/errors.hpp"

namespace mdbell {

InputConditional::InputConditional(const std::array<double, 4>& p) : p_(p) {
  double total = 0.0;
  for (double v : p_) {
    if (!std::isfinite(v) || v < -kProbabilityTolerance || v > 1.0 + kProbabilityTolerance) {
      throw ValidationError("input conditional entry outside [0,1]");
    }
    total += v;
  }
  if (std::abs(total - 1.0) > kProbabilityTolerance) {
    throw ValidationError("input conditional does not sum to 1");
  }
}

InputConditional InputConditional::uniform() { return InputConditional({0.25, 0.25, 0.25, 0.25}); }

void FactorizedInputConditional::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0) || !(beta >= 0.0 && beta <= 1.0)) {
    throw ValidationError("factorized input marginals must lie in [0,1]");
  }
}

InputConditional FactorizedInputConditional::to_input_conditional() const {
  validate();
  return InputConditional({alpha * beta, alpha * (1.0 - beta), (1.0 - alpha) * beta,
                           (1.0 - alpha) * (1.0 - beta)});
}

DeterministicStrategy DeterministicStrategy::from_index(int index) {
  if (index < 0 || index > 15) throw ValidationError("strategy index outside 0..15");
  return {(index & 8) != 0, (index & 4) != 0, (index & 2) != 0, (index & 1) != 0};
}

std::array<DeterministicStrategy, 16> all_strategies() {
  std::array<DeterministicStrategy, 16> out{};
  for (int i = 0; i < 16; ++i) out[static_cast<std::size_t>(i)] = DeterministicStrategy::from_index(i);
  return out;
}

const std::array<DeterministicStrategy, 5>& reduced_ch_strategies() {
  static const std::array<DeterministicStrategy, 5> kStrategies = {{
      {false, true, true, false},  // (p2 - p0) / 2
      {true, false, false, true},  // (p1 - p0) / 2
      {true, false, true, true},   // (p1 - p2) / 2
      {true, true, true, false},   // (p2 - p1) / 2
      {true, true, true, true},    // (p1 + p2) / 2 - p3
  }};
  return kStrategies;
}

const std::array<DeterministicStrategy, 4>& reduced_chsh_strategies() {
  static const std::array<DeterministicStrategy, 4> kStrategies = {{
      {true, true, true, true},    // p0 + p1 + p2 - p3
      {true, false, true, true},   // p0 + p1 + p3 - p2
      {true, true, true, false},   // p0 + p2 + p3 - p1
      {false, true, true, false},  // p1 + p2 + p3 - p0
  }};
  return kStrategies;
}

std::span<const DeterministicStrategy> reduced_strategies(Functional functional) {
  if (functional == Functional::CH) return reduced_ch_strategies();
  return reduced_chsh_strategies();
}

RandomnessBounds RandomnessBounds::make(double upper, double lower) {
  if (!std::isfinite(upper) || !std::isfinite(lower)) throw ValidationError("P and Q must be finite");
  if (lower < 0.0) throw ValidationError("Q must be non-negative");
  if (lower > 0.25) throw ValidationError("Q exceeds 1/4");
  if (upper < 0.25) throw ValidationError("P is below 1/4");
  if (upper > 1.0) throw ValidationError("P exceeds 1");
  return RandomnessBounds(upper, lower, std::nullopt);
}

RandomnessBounds RandomnessBounds::from_delta(double delta) {
  if (!std::isfinite(delta) || delta < 0.0 || delta > 0.25) {
    throw ValidationError("delta must lie in [0, 1/4]");
  }
  return RandomnessBounds(0.25 + delta, 0.25 - delta, delta);
}

double RandomnessBounds::effective_upper() const { return std::min(upper_, 1.0 - 3.0 * lower_); }

bool RandomnessBounds::fully_random() const { return effective_upper() - lower_ <= kProbabilityTolerance; }

InputConditional LhvAtom::input_conditional() const {
  if (const auto* f = std::get_if<FactorizedInputConditional>(&inputs)) return f->to_input_conditional();
  return std::get<InputConditional>(inputs);
}

LhvEnsemble::LhvEnsemble(std::vector<LhvAtom> atoms, std::string label)
    : atoms_(std::move(atoms)), label_(std::move(label)) {
  for (const auto& atom : atoms_) {
    if (!std::isfinite(atom.weight)) throw ValidationError("atom weight must be finite");
    if (const auto* f = std::get_if<FactorizedInputConditional>(&atom.inputs)) f->validate();
  }
}

std::array<double, 4> LhvEnsemble::input_moments() const {
  std::array<double, 4> m{};
  for (const auto& atom : atoms_) {
    const InputConditional ic = atom.input_conditional();
    for (std::size_t i = 0; i < 4; ++i) m[i] += atom.weight * ic[i];
  }
  return m;
}

double LhvEnsemble::total_weight() const {
  double total = 0.0;
  for (const auto& atom : atoms_) total += atom.weight;
  return total;
}

double j_lambda(const DeterministicStrategy& s, const InputConditional& ic) {
  const double a0 = s.a0, a1 = s.a1, b0 = s.b0, b1 = s.b1;
  return a0 * b0 * ic[0] + a0 * b1 * ic[1] + a1 * b0 * ic[2] - a1 * b1 * ic[3] -
         a0 * (ic[0] + ic[1]) / 2.0 - b0 * (ic[0] + ic[2]) / 2.0;
}

double j_lambda_chsh(const DeterministicStrategy& s, const InputConditional& ic) {
  double total = 0.0;
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      const bool same_output = s.alice_outputs_zero(x) == s.bob_outputs_zero(y);
      const bool positive = same_output != (x == 1 && y == 1);
      total += (positive ? 1.0 : -1.0) * ic.at(x, y);
    }
  }
  return total;
}

double j_lambda(Functional functional, const DeterministicStrategy& s, const InputConditional& ic) {
  return functional == Functional::CH ? j_lambda(s, ic) : j_lambda_chsh(s, ic);
}

LocalResponse optimal_local_response(const InputConditional& ic, Functional functional) {
  const auto strategies = reduced_strategies(functional);
  LocalResponse best{strategies[0], j_lambda(functional, strategies[0], ic), 0};
  for (std::size_t k = 1; k < strategies.size(); ++k) {
    const double v = j_lambda(functional, strategies[k], ic);
    if (v > best.value) best = {strategies[k], v, static_cast<int>(k)};
  }
  return best;
}

namespace {

void require_averaging(const LhvEnsemble& e) {
  const auto m = e.input_moments();
  for (int i = 0; i < 4; ++i) {
    const double dev = m[static_cast<std::size_t>(i)] - 0.25;
    if (std::abs(dev) > kConstraintTolerance) {
      std::ostringstream msg;
      msg << "averaging constraint violated for setting index " << i << " (x=" << i / 2 << ",y=" << i % 2
          << "): sum_l q(l) p = " << m[static_cast<std::size_t>(i)] << ", expected 0.25";
      throw ValidationError(msg.str());
    }
  }
}

}  // namespace

double ensemble_bell_value(const LhvEnsemble& e, Functional functional) {
  require_averaging(e);
  double total = 0.0;
  for (const auto& atom : e.atoms()) {
    total += atom.weight * j_lambda(functional, atom.outputs, atom.input_conditional());
  }
  return 4.0 * total;
}

const char* to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::NegativeWeight:
      return "negative-weight";
    case ConstraintKind::WeightNormalization:
      return "weight-normalization";
    case ConstraintKind::InputNormalization:
      return "input-normalization";
    case ConstraintKind::Averaging:
      return "averaging";
    case ConstraintKind::UpperBound:
      return "upper-bound";
    case ConstraintKind::LowerBound:
      return "lower-bound";
  }
  return "unknown";
}

std::string ConstraintViolation::describe() const {
  std::ostringstream out;
  out << to_string(kind);
  if (atom) out << " atom=" << *atom;
  if (setting) out << " setting=" << *setting;
  out << " magnitude=" << magnitude;
  return out.str();
}

std::string ValidationReport::summary() const {
  if (ok()) return "valid";
  std::ostringstream out;
  out << violations.size() << " violation(s):";
  for (const auto& v : violations) out << " [" << v.describe() << "]";
  return out.str();
}

ValidationReport validate_ensemble(const LhvEnsemble& e, const RandomnessBounds& rb) {
  ValidationReport report;
  auto add = [&](ConstraintKind kind, std::optional<std::size_t> atom, std::optional<int> setting, double mag) {
    report.violations.push_back({kind, atom, setting, mag});
  };

  const double upper = rb.effective_upper();
  for (std::size_t j = 0; j < e.atoms().size(); ++j) {
    const auto& atom = e.atoms()[j];
    if (atom.weight < 0.0) add(ConstraintKind::NegativeWeight, j, std::nullopt, -atom.weight);
    const InputConditional ic = atom.input_conditional();
    double total = 0.0;
    for (int i = 0; i < 4; ++i) {
      const double p = ic[static_cast<std::size_t>(i)];
      total += p;
      if (p > upper + kConstraintTolerance) add(ConstraintKind::UpperBound, j, i, p - upper);
      if (p < rb.lower() - kConstraintTolerance) add(ConstraintKind::LowerBound, j, i, rb.lower() - p);
    }
    if (std::abs(total - 1.0) > kProbabilityTolerance) {
      add(ConstraintKind::InputNormalization, j, std::nullopt, std::abs(total - 1.0));
    }
  }

  const double weight_error = std::abs(e.total_weight() - 1.0);
  if (weight_error > kProbabilityTolerance) {
    add(ConstraintKind::WeightNormalization, std::nullopt, std::nullopt, weight_error);
  }

  const auto m = e.input_moments();
  for (int i = 0; i < 4; ++i) {
    const double dev = std::abs(m[static_cast<std::size_t>(i)] - 0.25);
    if (dev > kConstraintTolerance) add(ConstraintKind::Averaging, std::nullopt, i, dev);
  }
  return report;
}

LhvEnsemble merge_equivalent_lambdas(const LhvEnsemble& e) {
  struct Group {
    DeterministicStrategy strategy;
    double weight = 0.0;
    std::array<double, 4> weighted{};
    // Kept when the group has a single atom so factorized inputs survive.
    std::optional<AtomInputs> sole_inputs;
  };
  std::vector<Group> groups;
  for (const auto& atom : e.atoms()) {
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const Group& g) { return g.strategy == atom.outputs; });
    if (it == groups.end()) {
      groups.push_back({atom.outputs, 0.0, {}, atom.inputs});
      it = std::prev(groups.end());
    } else {
      it->sole_inputs.reset();
    }
    const InputConditional ic = atom.input_conditional();
    it->weight += atom.weight;
    for (std::size_t i = 0; i < 4; ++i) it->weighted[i] += atom.weight * ic[i];
  }

  std::vector<LhvAtom> merged;
  for (const auto& g : groups) {
    if (g.weight <= 0.0) continue;
    if (g.sole_inputs) {
      merged.push_back({g.weight, *g.sole_inputs, g.strategy});
      continue;
    }
    std::array<double, 4> p{};
    for (std::size_t i = 0; i < 4; ++i) p[i] = g.weighted[i] / g.weight;
    merged.push_back({g.weight, InputConditional(p), g.strategy});
  }
  return LhvEnsemble(std::move(merged), e.label());
}

LhvEnsemble symmetrize_outputs(const LhvEnsemble& e) {
  std::vector<LhvAtom> atoms;
  atoms.reserve(2 * e.size());
  for (const auto& atom : e.atoms()) {
    atoms.push_back({atom.weight / 2.0, atom.inputs, atom.outputs});
    atoms.push_back({atom.weight / 2.0, atom.inputs, atom.outputs.flipped()});
  }
  return LhvEnsemble(std::move(atoms), e.label());
}

JointConditional induced_joint(const LhvEnsemble& e) {
  const auto setting_prob = e.input_moments();
  JointConditional::Table t{};
  for (const auto& atom : e.atoms()) {
    const InputConditional ic = atom.input_conditional();
    for (int x = 0; x < 2; ++x) {
      for (int y = 0; y < 2; ++y) {
        const int a = atom.outputs.alice_outputs_zero(x) ? 0 : 1;
        const int b = atom.outputs.bob_outputs_zero(y) ? 0 : 1;
        t[JointConditional::index(a, b, x, y)] += atom.weight * ic.at(x, y);
      }
    }
  }
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      const double px = setting_prob[static_cast<std::size_t>(2 * x + y)];
      if (!(px > 0.0)) {
        throw ValidationError("setting (" + std::to_string(x) + "," + std::to_string(y) +
                              ") has zero probability under the ensemble");
      }
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) t[JointConditional::index(a, b, x, y)] /= px;
    }
  }
  return JointConditional(t);
}

JointConditional deterministic_joint(const DeterministicStrategy& s) {
  JointConditional::Table t{};
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      const int a = s.alice_outputs_zero(x) ? 0 : 1;
      const int b = s.bob_outputs_zero(y) ? 0 : 1;
      t[JointConditional::index(a, b, x, y)] = 1.0;
    }
  }
  return JointConditional(t);
}

}  // namespace mdbell
