#include "mdbell/closed_form.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mdbell/errors.hpp"
#include "mdbell/oracle.hpp"

namespace mdbell {

namespace {

constexpr double kBoundaryTolerance = 1e-12;

struct Region {
  const char* label;
  bool active;
  double value;
};

// First active region supplies the value; more than one active region means
// the point sits on a shared edge.
BoundResult pick(std::initializer_list<Region> regions, const RandomnessBounds& rb, ConditionFlags cond,
                 Functional functional) {
  const Region* first = nullptr;
  int active = 0;
  for (const auto& r : regions) {
    if (!r.active) continue;
    ++active;
    if (first == nullptr) first = &r;
  }
  if (first == nullptr) throw ComputationError("no bound region matched");
  return {first->value, active > 1 ? "boundary" : first->label, rb, cond, functional};
}

bool leq(double lhs, double rhs) { return lhs <= rhs + kBoundaryTolerance; }
bool geq(double lhs, double rhs) { return lhs >= rhs - kBoundaryTolerance; }

// Atom with every entry `high` except `low_slot`, which takes the remainder.
InputConditional spike_down(double high, int low_slot) {
  std::array<double, 4> p{};
  p.fill(high);
  p[static_cast<std::size_t>(low_slot)] = 1.0 - 3.0 * high;
  return InputConditional(p);
}

InputConditional unshift(const Rescaling& r, const InputConditional& shifted) {
  std::array<double, 4> p{};
  for (std::size_t i = 0; i < 4; ++i) p[i] = r.unshift(shifted[i]);
  return InputConditional(p);
}

// Optimal CH attack of the shifted problem (Q = 0, upper bound u).
std::vector<LhvAtom> shifted_ch_atoms(double u) {
  const auto& s = reduced_ch_strategies();
  if (u <= 1.0 / 3.0) {
    // Every entry at u except the one whose coefficient vanishes after
    // substituting the normalization constraints; the averaging equations
    // force q = (1/8, 1/8, 1/4, 1/4, 1/4).
    constexpr std::array<int, 5> kLowSlot = {0, 0, 2, 1, 3};
    constexpr std::array<double, 5> kWeight = {0.125, 0.125, 0.25, 0.25, 0.25};
    std::vector<LhvAtom> atoms;
    for (std::size_t k = 0; k < 5; ++k) atoms.push_back({kWeight[k], spike_down(u, kLowSlot[k]), s[k]});
    return atoms;
  }
  if (u <= 0.375) {
    const double r = 1.0 - 2.0 * u;
    const double a = 1.0 / (8.0 * r);
    const double b = 1.0 / (8.0 * u);
    const double q12 = 0.5 - a;
    const double q34 = a + b - 0.5;
    const double q5 = 1.0 - 1.0 / (4.0 * u);
    return {
        {q12, InputConditional({0.0, r, u, u}), s[0]},
        {q12, InputConditional({0.0, u, r, u}), s[1]},
        {q34, InputConditional({r, u, 0.0, u}), s[2]},
        {q34, InputConditional({r, 0.0, u, u}), s[3]},
        {q5, InputConditional({r, u, u, 0.0}), s[4]},
    };
  }
  // Algebraic maximum 1, reached with entries up to 3/8.
  constexpr double third = 1.0 / 3.0;
  return {
      {third, InputConditional({0.25, 0.375, 0.0, 0.375}), s[2]},
      {third, InputConditional({0.25, 0.0, 0.375, 0.375}), s[3]},
      {third, InputConditional({0.25, 0.375, 0.375, 0.0}), s[4]},
  };
}

LhvEnsemble rescaled(std::vector<LhvAtom> shifted, const Rescaling& r, std::string label) {
  for (auto& atom : shifted) atom.inputs = unshift(r, std::get<InputConditional>(atom.inputs));
  return LhvEnsemble(std::move(shifted), std::move(label));
}

LhvEnsemble uniform_attack(Functional functional) {
  const auto best = optimal_local_response(InputConditional::uniform(), functional);
  return LhvEnsemble({{1.0, FactorizedInputConditional{0.5, 0.5}, best.strategy}}, "analytic");
}

}  // namespace

std::string ConditionFlags::name() const {
  if (no_signaling && factorizable) return "ns-factorizable";
  if (no_signaling) return "ns";
  if (factorizable) return "factorizable";
  return "general";
}

ConditionFlags ConditionFlags::parse(std::string_view name) {
  if (name == "general") return general();
  if (name == "factorizable") return factorized();
  if (name == "ns") return ns();
  if (name == "ns-factorizable") return ns_factorized();
  throw ValidationError("unknown condition '" + std::string(name) +
                        "' (expected general, factorizable, ns or ns-factorizable)");
}

BoundResult ch_bound(ConditionFlags cond, const RandomnessBounds& rb) {
  const double p = rb.effective_upper();
  const double q = rb.lower();
  const auto f = Functional::CH;
  if (cond.no_signaling && cond.factorizable) {
    return pick({{"P+Q<=1/2", leq(p + q, 0.5), 2.0 * p - 0.5}, {"P+Q>1/2", geq(p + q, 0.5), 0.5 - 2.0 * q}},
                rb, cond, f);
  }
  if (cond.no_signaling) {
    return pick({{"3P+Q<=1", leq(3.0 * p + q, 1.0), 6.0 * p - 1.5}, {"3P+Q>=1", geq(3.0 * p + q, 1.0), 0.5 - 2.0 * q}},
                rb, cond, f);
  }
  if (cond.factorizable) {
    return pick({{"P+Q<=1/2", leq(p + q, 0.5), 4.0 * p - 1.0}, {"P+Q>1/2", geq(p + q, 0.5), 1.0 - 4.0 * q}},
                rb, cond, f);
  }
  return pick({{"3P+Q<=1", leq(3.0 * p + q, 1.0), 2.5 * (4.0 * p - 1.0)},
               {"2P+Q>=3/4", geq(2.0 * p + q, 0.75), 1.0 - 4.0 * q},
               {"3P+Q>=1,2P+Q<=3/4", geq(3.0 * p + q, 1.0) && leq(2.0 * p + q, 0.75), 4.0 * p - 2.0 * q - 0.5}},
              rb, cond, f);
}

BoundResult chsh_bound(ConditionFlags cond, const RandomnessBounds& rb) {
  const double p = rb.effective_upper();
  const double q = rb.lower();
  const auto f = Functional::CHSH;
  if (cond.factorizable) {
    return pick({{"P+Q<=1/2", leq(p + q, 0.5), 8.0 * p}, {"P+Q>1/2", geq(p + q, 0.5), 4.0 - 8.0 * q}}, rb, cond, f);
  }
  return pick({{"3P+Q<=1", leq(3.0 * p + q, 1.0), 24.0 * p - 4.0}, {"3P+Q>=1", geq(3.0 * p + q, 1.0), 4.0 - 8.0 * q}},
              rb, cond, f);
}

BoundResult bound(Functional functional, ConditionFlags cond, const RandomnessBounds& rb) {
  return functional == Functional::CH ? ch_bound(cond, rb) : chsh_bound(cond, rb);
}

double ch_bound_delta(ConditionFlags cond, double delta) {
  if (!std::isfinite(delta) || delta < 0.0 || delta > 0.25) throw ValidationError("delta must lie in [0, 1/4]");
  return cond.no_signaling ? 2.0 * delta : 4.0 * delta;
}

Rescaling rescale_to_zero_q(const RandomnessBounds& rb, Functional functional) {
  const double q = rb.lower();
  Rescaling r;
  r.lower = q;
  if (rb.fully_random() || 1.0 - 4.0 * q <= kBoundaryTolerance) {
    r.upper = 0.25;
    r.scale = 0.0;
    r.offset = functional == Functional::CH ? 0.0 : 2.0;
    r.degenerate = true;
    return r;
  }
  r.scale = 1.0 - 4.0 * q;
  r.upper = std::clamp((rb.effective_upper() - q) / r.scale, 0.25, 1.0);
  r.offset = functional == Functional::CH ? 0.0 : 8.0 * q;
  return r;
}

double critical_threshold(ConditionFlags cond, ThresholdKind which, double j) {
  if (!std::isfinite(j) || j <= 0.0 || j >= 1.0) throw ValidationError("target value must lie in (0, 1)");
  auto in_range = [&](double max_value, const char* branch) {
    if (j > max_value + kBoundaryTolerance) {
      throw ValidationError(std::string("target value not attainable on the ") + branch + " branch for condition " +
                            cond.name());
    }
  };
  switch (which) {
    case ThresholdKind::PAtSmallQ:
      if (cond.no_signaling && cond.factorizable) {
        in_range(0.5, "2P-1/2");
        return (j + 0.5) / 2.0;
      }
      if (cond.no_signaling) {
        in_range(0.5, "6P-3/2");
        return (j + 1.5) / 6.0;
      }
      if (cond.factorizable) {
        in_range(1.0, "4P-1");
        return (j + 1.0) / 4.0;
      }
      in_range(5.0 / 6.0, "5/2(4P-1)");
      return (j / 2.5 + 1.0) / 4.0;
    case ThresholdKind::QAtLargeP:
      if (cond.no_signaling) {
        in_range(0.5, "1/2-2Q");
        return (0.5 - j) / 2.0;
      }
      return (1.0 - j) / 4.0;
    case ThresholdKind::Delta:
      if (cond.no_signaling) {
        in_range(0.5, "2 delta");
        return j / 2.0;
      }
      return j / 4.0;
  }
  throw ValidationError("unknown threshold kind");
}

LhvEnsemble build_ch_attack(bool factorizable, const RandomnessBounds& rb) {
  if (rb.fully_random()) return uniform_attack(Functional::CH);
  if (factorizable) {
    // Two product atoms (2m, 1/2) and (1 - 2m, 1/2) with m = max(1/2 - P, Q):
    // inputs (m, m, 1/2-m, 1/2-m) and its mirror, each worth 1/4 - m.
    const double m = std::max(0.5 - rb.effective_upper(), rb.lower());
    const auto& s = reduced_ch_strategies();
    return LhvEnsemble({{0.5, FactorizedInputConditional{2.0 * m, 0.5}, s[0]},
                        {0.5, FactorizedInputConditional{1.0 - 2.0 * m, 0.5}, s[2]}},
                       "analytic");
  }
  const Rescaling r = rescale_to_zero_q(rb, Functional::CH);
  return rescaled(shifted_ch_atoms(r.upper), r, "analytic");
}

LhvEnsemble build_chsh_attack(bool factorizable, const RandomnessBounds& rb) {
  if (rb.fully_random()) return uniform_attack(Functional::CHSH);
  const auto& s = reduced_chsh_strategies();
  if (factorizable) {
    // Alice unbiased, Bob's bias pushed to the box edge: per-atom value 1 - v.
    const double v = std::max(1.0 - 2.0 * rb.effective_upper(), 2.0 * rb.lower());
    return LhvEnsemble({{0.5, FactorizedInputConditional{0.5, 1.0 - v}, s[0]},
                        {0.5, FactorizedInputConditional{0.5, v}, s[1]}},
                       "analytic");
  }
  const Rescaling r = rescale_to_zero_q(rb, Functional::CHSH);
  const double u = std::min(r.upper, 1.0 / 3.0);
  constexpr std::array<int, 4> kLowSlot = {3, 2, 1, 0};
  std::vector<LhvAtom> atoms;
  for (std::size_t k = 0; k < 4; ++k) atoms.push_back({0.25, spike_down(u, kLowSlot[k]), s[k]});
  return rescaled(std::move(atoms), r, "analytic");
}

LhvEnsemble build_attack(ConditionFlags cond, const RandomnessBounds& rb, const AttackOptions& options) {
  if (options.method == AttackMethod::Numerical) {
    if (!cond.factorizable) {
      throw ValidationError("numerical attack search is only available for factorizable conditions");
    }
    const Functional f = cond.no_signaling ? Functional::CHSH : Functional::CH;
    const double target = bound(f, cond, rb).value;
    LhvEnsemble found = search_factorizable_attack(f, rb, target, options.seed);
    return cond.no_signaling ? symmetrize_outputs(found) : found;
  }
  if (cond.no_signaling) return symmetrize_outputs(build_chsh_attack(cond.factorizable, rb));
  return build_ch_attack(cond.factorizable, rb);
}

double attack_target(ConditionFlags cond, const RandomnessBounds& rb) { return ch_bound(cond, rb).value; }

}  // namespace mdbell
