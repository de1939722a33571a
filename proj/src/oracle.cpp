#include "mdbell/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "lp_solver.hpp"
#include "mdbell/errors.hpp"

namespace mdbell {

namespace {

constexpr double kBoxTolerance = 1e-12;
constexpr double kWitnessCutoff = 1e-14;

double best_value(Functional f, std::span<const DeterministicStrategy> strategies, const InputConditional& ic,
                  DeterministicStrategy& chosen) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& s : strategies) {
    const double v = 4.0 * j_lambda(f, s, ic);
    if (v > best) {
      best = v;
      chosen = s;
    }
  }
  return best;
}

std::span<const DeterministicStrategy> strategy_set(Functional f, bool all) {
  static const std::array<DeterministicStrategy, 16> every = all_strategies();
  if (all) return every;
  return reduced_strategies(f);
}

bool inside_box(const std::array<double, 4>& p, double lower, double upper) {
  return std::all_of(p.begin(), p.end(),
                     [&](double v) { return v >= lower - kBoxTolerance && v <= upper + kBoxTolerance; });
}

std::array<double, 4> product_inputs(double alpha, double beta) {
  return {alpha * beta, alpha * (1.0 - beta), (1.0 - alpha) * beta, (1.0 - alpha) * (1.0 - beta)};
}

LhvEnsemble witness_from(std::span<const StrategyAtom> atoms, const std::vector<double>& weights,
                         std::string label) {
  double total = 0.0;
  for (std::size_t k = 0; k < atoms.size(); ++k)
    if (weights[k] > kWitnessCutoff) total += weights[k];
  std::vector<LhvAtom> out;
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    if (weights[k] <= kWitnessCutoff) continue;
    LhvAtom atom;
    atom.weight = weights[k] / total;
    atom.outputs = atoms[k].strategy;
    if (atoms[k].factors) {
      atom.inputs = *atoms[k].factors;
    } else {
      atom.inputs = atoms[k].inputs;
    }
    out.push_back(atom);
  }
  return LhvEnsemble(std::move(out), std::move(label));
}

detail::EqualityLp build_lp(std::span<const StrategyAtom> atoms, const std::array<double, 4>& targets) {
  detail::EqualityLp lp;
  lp.rows = 5;
  lp.cols = atoms.size();
  lp.a.reserve(lp.rows * lp.cols);
  for (const auto& atom : atoms) {
    for (std::size_t i = 0; i < 4; ++i) lp.a.push_back(atom.inputs[i]);
    lp.a.push_back(1.0);
    lp.c.push_back(atom.value);
  }
  lp.b = {targets[0], targets[1], targets[2], targets[3], 1.0};
  return lp;
}

OracleResult fully_random_result(Functional f) {
  const InputConditional uniform = InputConditional::uniform();
  const LocalResponse best = optimal_local_response(uniform, f);
  OracleResult result;
  result.value = 4.0 * best.value;
  result.witness = LhvEnsemble({LhvAtom{1.0, uniform, best.strategy}}, "oracle");
  return result;
}

}  // namespace

LpSolution lp_maximize(std::span<const StrategyAtom> atoms, const std::array<double, 4>& targets, LpMethod method) {
  const detail::EqualityLp lp = build_lp(atoms, targets);
  const detail::LpOutcome outcome =
      method == LpMethod::Simplex ? detail::solve_by_simplex(lp) : detail::solve_by_basis_enumeration(lp);
  if (!outcome.feasible) throw ComputationError("no ensemble meets the averaging constraint");
  return {outcome.value, outcome.x};
}

std::vector<InputConditional> box_simplex_vertices(const RandomnessBounds& rb) {
  const double lo = rb.lower();
  const double hi = rb.effective_upper();
  std::vector<std::array<double, 4>> found;
  for (int free_slot = 0; free_slot < 4; ++free_slot) {
    for (int mask = 0; mask < 8; ++mask) {
      std::array<double, 4> p{};
      double rest = 1.0;
      int bit = 0;
      for (int i = 0; i < 4; ++i) {
        if (i == free_slot) continue;
        p[i] = (mask >> bit++) & 1 ? hi : lo;
        rest -= p[i];
      }
      if (rest < lo - kBoxTolerance || rest > hi + kBoxTolerance) continue;
      p[free_slot] = std::clamp(rest, lo, hi);
      const bool seen = std::any_of(found.begin(), found.end(), [&](const auto& q) {
        for (int i = 0; i < 4; ++i)
          if (std::abs(q[i] - p[i]) > kBoxTolerance) return false;
        return true;
      });
      if (!seen) found.push_back(p);
    }
  }
  std::vector<InputConditional> out;
  for (auto p : found) {
    // Absorb rounding so the entries sum to exactly one.
    double sum = p[0] + p[1] + p[2] + p[3];
    p[3] += 1.0 - sum;
    out.emplace_back(p);
  }
  return out;
}

std::vector<StrategyAtom> vertex_atoms(Functional functional, const RandomnessBounds& rb, bool all) {
  std::vector<StrategyAtom> atoms;
  for (const auto& v : box_simplex_vertices(rb)) {
    StrategyAtom atom;
    atom.inputs = v;
    atom.value = best_value(functional, strategy_set(functional, all), v, atom.strategy);
    atoms.push_back(atom);
  }
  return atoms;
}

OracleResult optimize_general(Functional functional, const RandomnessBounds& rb, const GeneralOracleOptions& options) {
  if (rb.fully_random()) return fully_random_result(functional);
  const std::vector<StrategyAtom> atoms = vertex_atoms(functional, rb, options.all_strategies);
  const LpSolution sol = lp_maximize(atoms, {0.25, 0.25, 0.25, 0.25}, options.method);
  OracleResult result;
  result.value = sol.value;
  result.witness = witness_from(atoms, sol.weights, "oracle");
  result.certificate = {Certificate::Kind::Exact, 0, 0.0};
  return result;
}

OracleResult optimize_factorizable(Functional functional, const RandomnessBounds& rb, int grid_n) {
  if (grid_n < 64) throw ValidationError("grid resolution must be at least 64");
  const double lo = rb.lower();
  const double hi = rb.effective_upper();
  const auto strategies = reduced_strategies(functional);
  std::vector<StrategyAtom> atoms;
  for (int i = 0; i <= grid_n; ++i) {
    for (int j = 0; j <= grid_n; ++j) {
      const double alpha = static_cast<double>(i) / grid_n;
      const double beta = static_cast<double>(j) / grid_n;
      const auto p = product_inputs(alpha, beta);
      if (!inside_box(p, lo, hi)) continue;
      StrategyAtom atom;
      atom.factors = FactorizedInputConditional{alpha, beta};
      atom.inputs = atom.factors->to_input_conditional();
      atom.value = best_value(functional, strategies, atom.inputs, atom.strategy);
      atoms.push_back(atom);
    }
  }
  if (atoms.empty()) throw ValidationError("no factorized grid point satisfies the randomness bounds");
  const LpSolution sol = lp_maximize(atoms, {0.25, 0.25, 0.25, 0.25}, LpMethod::Simplex);
  OracleResult result;
  result.value = sol.value;
  result.witness = witness_from(atoms, sol.weights, "oracle");
  result.certificate = {Certificate::Kind::Grid, grid_n, kFactorizedLipschitz / grid_n};
  return result;
}

namespace {

/// Feasible beta interval for fixed alpha under lo <= p_i <= hi.
bool beta_interval(double alpha, double lo, double hi, double& b_min, double& b_max) {
  b_min = 0.0;
  b_max = 1.0;
  // alpha * beta and (1 - alpha) * beta bound beta directly; the other two
  // entries bound 1 - beta.
  for (double w : {alpha, 1.0 - alpha}) {
    if (w <= 0.0) {
      if (lo > 0.0) return false;
      continue;
    }
    b_min = std::max(b_min, lo / w);
    b_max = std::min(b_max, hi / w);
    b_min = std::max(b_min, 1.0 - hi / w);
    b_max = std::min(b_max, 1.0 - lo / w);
  }
  return b_min <= b_max + 1e-15;
}

struct Candidate {
  double score = -std::numeric_limits<double>::infinity();
  StrategyAtom atom;
};

class Pricer {
 public:
  Pricer(Functional f, const RandomnessBounds& rb, const std::vector<double>& duals)
      : f_(f), lo_(rb.lower()), hi_(rb.effective_upper()), duals_(duals) {}

  /// Best reduced cost over beta for this alpha and strategy.
  Candidate at(double alpha, const DeterministicStrategy& s) const {
    Candidate best;
    double b_min = 0.0;
    double b_max = 0.0;
    if (!beta_interval(alpha, lo_, hi_, b_min, b_max)) return best;
    b_max = std::max(b_min, b_max);
    for (double beta : {b_min, b_max}) {
      auto p = product_inputs(alpha, beta);
      for (auto& v : p) v = std::clamp(v, 0.0, 1.0);
      double sum = p[0] + p[1] + p[2] + p[3];
      p[3] += 1.0 - sum;
      if (p[3] < 0.0) continue;
      const InputConditional ic(p);
      const double value = 4.0 * j_lambda(f_, s, ic);
      double score = value - duals_[4];
      for (std::size_t i = 0; i < 4; ++i) score -= duals_[i] * ic[i];
      if (score > best.score) {
        best.score = score;
        best.atom = StrategyAtom{s, ic, value, FactorizedInputConditional{alpha, beta}};
      }
    }
    return best;
  }

 private:
  Functional f_;
  double lo_;
  double hi_;
  const std::vector<double>& duals_;
};

Candidate golden_refine(const Pricer& pricer, const DeterministicStrategy& s, double a, double b) {
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - ratio * (b - a);
  double x2 = a + ratio * (b - a);
  Candidate c1 = pricer.at(x1, s);
  Candidate c2 = pricer.at(x2, s);
  for (int it = 0; it < 80 && b - a > 1e-13; ++it) {
    if (c1.score >= c2.score) {
      b = x2;
      x2 = x1;
      c2 = c1;
      x1 = b - ratio * (b - a);
      c1 = pricer.at(x1, s);
    } else {
      a = x1;
      x1 = x2;
      c1 = c2;
      x2 = a + ratio * (b - a);
      c2 = pricer.at(x2, s);
    }
  }
  Candidate best = c1.score >= c2.score ? c1 : c2;
  for (double edge : {a, b}) {
    Candidate c = pricer.at(edge, s);
    if (c.score > best.score) best = c;
  }
  return best;
}

}  // namespace

LhvEnsemble search_factorizable_attack(Functional functional, const RandomnessBounds& rb, double target,
                                       std::uint64_t seed) {
  constexpr double kAcceptance = 1e-6;
  constexpr int kSweep = 256;
  constexpr int kRounds = 200;
  const auto strategies = reduced_strategies(functional);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(0.0, 1.0);

  // Seed columns: the uniform point plus the feasible points of a coarse grid.
  std::vector<StrategyAtom> columns;
  auto add_point = [&](double alpha, double beta) {
    const auto p = product_inputs(alpha, beta);
    if (!inside_box(p, rb.lower(), rb.effective_upper())) return;
    for (const auto& s : strategies) {
      StrategyAtom atom;
      atom.strategy = s;
      atom.factors = FactorizedInputConditional{alpha, beta};
      atom.inputs = atom.factors->to_input_conditional();
      atom.value = 4.0 * j_lambda(functional, s, atom.inputs);
      columns.push_back(atom);
    }
  };
  add_point(0.5, 0.5);
  for (int i = 0; i <= 16; ++i)
    for (int j = 0; j <= 16; ++j) add_point(i / 16.0, j / 16.0);

  const std::array<double, 4> targets = {0.25, 0.25, 0.25, 0.25};
  detail::LpOutcome outcome;
  for (int round = 0; round < kRounds; ++round) {
    outcome = detail::solve_by_simplex(build_lp(columns, targets));
    if (!outcome.feasible) throw ComputationError("no ensemble meets the averaging constraint");
    if (outcome.value >= target - kAcceptance * 1e-3) break;

    const Pricer pricer(functional, rb, outcome.duals);
    std::vector<Candidate> found;
    for (const auto& s : strategies) {
      std::vector<double> alphas(kSweep + 1);
      const double shift = jitter(rng);
      for (int k = 0; k <= kSweep; ++k) alphas[k] = std::clamp((k + shift - 0.5) / kSweep, 0.0, 1.0);
      alphas.front() = 0.0;
      alphas.back() = 1.0;
      std::vector<Candidate> sweep(alphas.size());
      for (std::size_t k = 0; k < alphas.size(); ++k) sweep[k] = pricer.at(alphas[k], s);
      for (std::size_t k = 0; k < alphas.size(); ++k) {
        const double left = k > 0 ? sweep[k - 1].score : -std::numeric_limits<double>::infinity();
        const double right = k + 1 < alphas.size() ? sweep[k + 1].score : -std::numeric_limits<double>::infinity();
        if (sweep[k].score == -std::numeric_limits<double>::infinity()) continue;
        if (sweep[k].score < left || sweep[k].score < right) continue;
        const double a = alphas[k > 0 ? k - 1 : k];
        const double b = alphas[k + 1 < alphas.size() ? k + 1 : k];
        Candidate refined = golden_refine(pricer, s, a, b);
        if (sweep[k].score > refined.score) refined = sweep[k];
        if (refined.score > 1e-12) found.push_back(refined);
      }
    }
    if (found.empty()) break;
    std::sort(found.begin(), found.end(), [](const Candidate& x, const Candidate& y) { return x.score > y.score; });
    if (found.size() > 16) found.resize(16);
    for (const auto& c : found) columns.push_back(c.atom);
  }
  if (!outcome.feasible || outcome.value < target - kAcceptance) {
    throw ComputationError("numerical attack search did not reach the target value");
  }
  return witness_from(columns, outcome.x, "numerically constructed");
}

}  // namespace mdbell
