#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mdbell/bell_core.hpp"
#include "mdbell/lhv_model.hpp"

namespace mdbell {

/// One candidate hidden-variable value for the inner LP: a strategy paired
/// with an input conditional, worth `value` = 4 J_lambda per unit weight.
struct StrategyAtom {
  DeterministicStrategy strategy;
  InputConditional inputs = InputConditional::uniform();
  double value = 0.0;
  /// Set when the inputs came from a factorized (alpha, beta) pair.
  std::optional<FactorizedInputConditional> factors;
};

struct Certificate {
  enum class Kind { Exact, Grid };
  Kind kind = Kind::Exact;
  int resolution = 0;
  double error_bound = 0.0;
};

struct OracleResult {
  double value = 0.0;
  LhvEnsemble witness;
  Certificate certificate;
};

enum class LpMethod { BasisEnumeration, Simplex };

struct LpSolution {
  double value = 0.0;
  /// One weight per atom, in input order; at most one per independent
  /// constraint is nonzero.
  std::vector<double> weights;
};

/// Maximizes sum_v w_v c_v subject to sum_v w_v inputs_v = targets,
/// sum_v w_v = 1, w >= 0. Throws ComputationError("no ensemble meets the
/// averaging constraint") when infeasible.
LpSolution lp_maximize(std::span<const StrategyAtom> atoms, const std::array<double, 4>& targets,
                       LpMethod method = LpMethod::BasisEnumeration);

/// Vertices of {p in simplex : Q <= p_i <= min(P, 1-3Q)}.
std::vector<InputConditional> box_simplex_vertices(const RandomnessBounds& rb);

/// One candidate atom per vertex, carrying the best strategy for that vertex.
/// The search covers all 16 strategies with `all_strategies`, otherwise the
/// reduced list for the functional.
std::vector<StrategyAtom> vertex_atoms(Functional functional, const RandomnessBounds& rb, bool all_strategies = false);

struct GeneralOracleOptions {
  bool all_strategies = false;
  LpMethod method = LpMethod::BasisEnumeration;
};

/// Exact optimum of the hidden-variable program without extra assumptions:
/// every feasible ensemble splits into atoms sitting at box-simplex vertices,
/// so an LP over vertex atoms is exact.
OracleResult optimize_general(Functional functional, const RandomnessBounds& rb,
                              const GeneralOracleOptions& options = {});

/// Grid certificate constant: error_bound = kFactorizedLipschitz / grid_n.
/// |dJ/dalpha| + |dJ/dbeta| <= 4 for either functional, so the atom value
/// 4 J moves by at most 16 * (1 / (2 grid_n)) to the nearest grid point.
inline constexpr double kFactorizedLipschitz = 8.0;

/// Optimum over product-input atoms on the grid alpha, beta in {i / grid_n}.
/// The certificate's error bound is kFactorizedLipschitz / grid_n.
OracleResult optimize_factorizable(Functional functional, const RandomnessBounds& rb, int grid_n);

/// Seeded search for a factorizable attack reaching `target` within 1e-6.
/// For each reduced strategy the best beta for fixed alpha lies at an end of
/// the feasible beta interval (J is affine in beta), so the search sweeps
/// alpha with seeded jitter, refines local maxima by golden-section search and
/// hands the refined atoms to the LP. Throws ComputationError if the target
/// is not reached.
LhvEnsemble search_factorizable_attack(Functional functional, const RandomnessBounds& rb, double target,
                                       std::uint64_t seed);

}  // namespace mdbell
