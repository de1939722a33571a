#pragma once

// Dense equality-form LP used by the oracle:
//   maximize c.x  subject to  A x = b,  x >= 0
// with a handful of rows and possibly many columns. Not part of the public API.

#include <cstddef>
#include <vector>

namespace mdbell::detail {

struct EqualityLp {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> a;  // column-major, a[j * rows + i]
  std::vector<double> b;
  std::vector<double> c;

  double at(std::size_t i, std::size_t j) const { return a[j * rows + i]; }
};

struct LpOutcome {
  bool feasible = false;
  double value = 0.0;
  std::vector<double> x;
  /// Dual prices on the original rows (simplex only).
  std::vector<double> duals;
};

/// Enumerates every basic solution; the reference method for small problems.
/// Throws ComputationError if the number of candidate bases exceeds `max_bases`.
LpOutcome solve_by_basis_enumeration(const EqualityLp& lp, double max_bases = 2e7);

/// Two-phase revised simplex with an explicit basis inverse; Dantzig pricing
/// with a switch to Bland's rule on long degenerate streaks.
LpOutcome solve_by_simplex(const EqualityLp& lp);

}  // namespace mdbell::detail
