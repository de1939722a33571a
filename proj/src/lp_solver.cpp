#include "lp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mdbell/errors.hpp"

namespace mdbell::detail {

namespace {

using Matrix = std::vector<std::vector<double>>;

// Equivalent system with linearly independent rows: A' = T A, b' = T b.
struct ReducedSystem {
  bool consistent = true;
  std::size_t rows = 0;
  std::vector<double> a;  // column-major, rows x cols
  std::vector<double> b;
  Matrix transform;       // rows x original rows
};

ReducedSystem reduce_rows(const EqualityLp& lp) {
  const std::size_t m = lp.rows;
  const std::size_t n = lp.cols;
  // Row-major working copy.
  Matrix work(m, std::vector<double>(n));
  double scale = 1.0;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < m; ++i) {
      work[i][j] = lp.at(i, j);
      scale = std::max(scale, std::abs(work[i][j]));
    }
  std::vector<double> b = lp.b;
  Matrix t(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i) t[i][i] = 1.0;

  const double tol = 1e-10 * scale;
  std::vector<bool> pivoted(m, false);
  std::vector<std::size_t> order;
  for (std::size_t j = 0; j < n && order.size() < m; ++j) {
    std::size_t p = m;
    double best = tol;
    for (std::size_t i = 0; i < m; ++i) {
      if (!pivoted[i] && std::abs(work[i][j]) > best) {
        best = std::abs(work[i][j]);
        p = i;
      }
    }
    if (p == m) continue;
    pivoted[p] = true;
    order.push_back(p);
    for (std::size_t i = 0; i < m; ++i) {
      if (pivoted[i]) continue;
      const double f = work[i][j] / work[p][j];
      if (f == 0.0) continue;
      for (std::size_t k = j; k < n; ++k) work[i][k] -= f * work[p][k];
      for (std::size_t k = 0; k < m; ++k) t[i][k] -= f * t[p][k];
      b[i] -= f * b[p];
    }
  }

  ReducedSystem out;
  for (std::size_t i = 0; i < m; ++i) {
    if (!pivoted[i] && std::abs(b[i]) > 1e-9 * std::max(1.0, scale)) out.consistent = false;
  }
  out.rows = order.size();
  out.a.resize(out.rows * n);
  for (std::size_t r = 0; r < out.rows; ++r) {
    // Pivot rows were never modified after being chosen except by earlier
    // pivots, so rebuild them from T to keep the system exact: A' = T A.
    const std::size_t src = order[r];
    out.transform.push_back(t[src]);
    double rhs = 0.0;
    for (std::size_t k = 0; k < m; ++k) rhs += t[src][k] * lp.b[k];
    out.b.push_back(rhs);
  }
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t r = 0; r < out.rows; ++r) {
      double v = 0.0;
      for (std::size_t k = 0; k < m; ++k) v += out.transform[r][k] * lp.at(k, j);
      out.a[j * out.rows + r] = v;
    }
  }
  return out;
}

// Solves the square system M x = rhs in place; false if (near) singular.
bool solve_square(Matrix m, std::vector<double> rhs, std::vector<double>& x) {
  const std::size_t n = rhs.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t p = col;
    for (std::size_t i = col + 1; i < n; ++i)
      if (std::abs(m[i][col]) > std::abs(m[p][col])) p = i;
    if (std::abs(m[p][col]) < 1e-12) return false;
    std::swap(m[p], m[col]);
    std::swap(rhs[p], rhs[col]);
    for (std::size_t i = col + 1; i < n; ++i) {
      const double f = m[i][col] / m[col][col];
      if (f == 0.0) continue;
      for (std::size_t k = col; k < n; ++k) m[i][k] -= f * m[col][k];
      rhs[i] -= f * rhs[col];
    }
  }
  x.assign(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double s = rhs[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= m[i][k] * x[k];
    x[i] = s / m[i][i];
  }
  return true;
}

bool invert(Matrix m, Matrix& inv) {
  const std::size_t n = m.size();
  inv.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t p = col;
    for (std::size_t i = col + 1; i < n; ++i)
      if (std::abs(m[i][col]) > std::abs(m[p][col])) p = i;
    if (std::abs(m[p][col]) < 1e-14) return false;
    std::swap(m[p], m[col]);
    std::swap(inv[p], inv[col]);
    const double d = m[col][col];
    for (std::size_t k = 0; k < n; ++k) {
      m[col][k] /= d;
      inv[col][k] /= d;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i == col) continue;
      const double f = m[i][col];
      if (f == 0.0) continue;
      for (std::size_t k = 0; k < n; ++k) {
        m[i][k] -= f * m[col][k];
        inv[i][k] -= f * inv[col][k];
      }
    }
  }
  return true;
}

double binomial(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

}  // namespace

LpOutcome solve_by_basis_enumeration(const EqualityLp& lp, double max_bases) {
  const ReducedSystem red = reduce_rows(lp);
  LpOutcome out;
  if (!red.consistent) return out;
  const std::size_t r = red.rows;
  const std::size_t n = lp.cols;
  if (r == 0) {
    out.feasible = true;
    out.x.assign(n, 0.0);
    return out;
  }
  if (n < r) return out;
  if (binomial(n, r) > max_bases) throw ComputationError("too many bases to enumerate; use the simplex method");

  std::vector<std::size_t> pick(r);
  for (std::size_t i = 0; i < r; ++i) pick[i] = i;
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> sol;
  Matrix m(r, std::vector<double>(r));
  while (true) {
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t k = 0; k < r; ++k) m[i][k] = red.a[pick[k] * r + i];
    if (solve_square(m, red.b, sol)) {
      bool feasible = std::all_of(sol.begin(), sol.end(), [](double v) { return v >= -1e-10; });
      if (feasible) {
        // Reject near-singular bases whose solution does not reproduce b.
        for (std::size_t i = 0; i < r && feasible; ++i) {
          double lhs = 0.0;
          for (std::size_t k = 0; k < r; ++k) lhs += m[i][k] * std::max(sol[k], 0.0);
          feasible = std::abs(lhs - red.b[i]) <= 1e-9;
        }
      }
      if (feasible) {
        double value = 0.0;
        for (std::size_t k = 0; k < r; ++k) value += lp.c[pick[k]] * std::max(sol[k], 0.0);
        if (value > best) {
          best = value;
          out.x.assign(n, 0.0);
          for (std::size_t k = 0; k < r; ++k) out.x[pick[k]] = std::max(sol[k], 0.0);
        }
      }
    }
    // Next combination in lexicographic order.
    std::size_t i = r;
    while (i > 0 && pick[i - 1] == n - r + (i - 1)) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t k = i; k < r; ++k) pick[k] = pick[k - 1] + 1;
  }
  if (best == -std::numeric_limits<double>::infinity()) return out;
  out.feasible = true;
  out.value = best;
  return out;
}

LpOutcome solve_by_simplex(const EqualityLp& lp) {
  ReducedSystem red = reduce_rows(lp);
  LpOutcome out;
  if (!red.consistent) return out;
  const std::size_t r = red.rows;
  const std::size_t n = lp.cols;
  if (r == 0) {
    out.feasible = true;
    out.x.assign(n, 0.0);
    out.duals.assign(lp.rows, 0.0);
    return out;
  }
  for (std::size_t i = 0; i < r; ++i) {
    if (red.b[i] >= 0.0) continue;
    red.b[i] = -red.b[i];
    for (auto& v : red.transform[i]) v = -v;
    for (std::size_t j = 0; j < n; ++j) red.a[j * r + i] = -red.a[j * r + i];
  }

  // Variables 0..n-1 are structural, n..n+r-1 artificial.
  std::vector<std::size_t> basis(r);
  std::vector<bool> in_basis(n + r, false);
  for (std::size_t i = 0; i < r; ++i) {
    basis[i] = n + i;
    in_basis[n + i] = true;
  }
  Matrix binv(r, std::vector<double>(r, 0.0));
  for (std::size_t i = 0; i < r; ++i) binv[i][i] = 1.0;
  std::vector<double> xb = red.b;

  auto column = [&](std::size_t j, std::vector<double>& col) {
    col.assign(r, 0.0);
    if (j >= n) {
      col[j - n] = 1.0;
    } else {
      for (std::size_t i = 0; i < r; ++i) col[i] = red.a[j * r + i];
    }
  };

  std::vector<double> col(r), dir(r), y(r);
  auto refactor = [&]() {
    Matrix bmat(r, std::vector<double>(r));
    for (std::size_t k = 0; k < r; ++k) {
      column(basis[k], col);
      for (std::size_t i = 0; i < r; ++i) bmat[i][k] = col[i];
    }
    if (!invert(bmat, binv)) throw ComputationError("simplex basis became singular");
    for (std::size_t i = 0; i < r; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < r; ++k) s += binv[i][k] * red.b[k];
      xb[i] = s;
    }
  };

  auto pivot = [&](std::size_t leave, std::size_t enter) {
    const double piv = dir[leave];
    for (std::size_t k = 0; k < r; ++k) binv[leave][k] /= piv;
    for (std::size_t i = 0; i < r; ++i) {
      if (i == leave || dir[i] == 0.0) continue;
      for (std::size_t k = 0; k < r; ++k) binv[i][k] -= dir[i] * binv[leave][k];
    }
    in_basis[basis[leave]] = false;
    basis[leave] = enter;
    in_basis[enter] = true;
  };

  auto run_phase = [&](auto cost, bool artificial_may_enter) {
    std::size_t degenerate_streak = 0;
    for (std::size_t iter = 0;; ++iter) {
      if (iter > 200000) throw ComputationError("simplex iteration limit reached");
      if (iter > 0 && iter % 64 == 0) refactor();
      for (std::size_t k = 0; k < r; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < r; ++i) s += cost(basis[i]) * binv[i][k];
        y[k] = s;
      }
      const bool bland = degenerate_streak > 50;
      std::size_t enter = n + r;
      double best = 1e-11;
      const std::size_t limit = artificial_may_enter ? n + r : n;
      for (std::size_t j = 0; j < limit; ++j) {
        if (in_basis[j]) continue;
        column(j, col);
        double d = cost(j);
        for (std::size_t k = 0; k < r; ++k) d -= y[k] * col[k];
        if (d > best) {
          best = d;
          enter = j;
          if (bland) break;
        }
      }
      if (enter == n + r) return;

      column(enter, col);
      for (std::size_t i = 0; i < r; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < r; ++k) s += binv[i][k] * col[k];
        dir[i] = s;
      }
      std::size_t leave = r;
      double ratio = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < r; ++i) {
        if (dir[i] <= 1e-12) continue;
        const double t = std::max(xb[i], 0.0) / dir[i];
        const bool better = t < ratio - 1e-13;
        const bool tie = !better && t <= ratio + 1e-13;
        if (better || (tie && (bland ? basis[i] < basis[leave] : dir[i] > dir[leave]))) {
          ratio = t;
          leave = i;
        }
      }
      if (leave == r) throw ComputationError("linear program is unbounded");
      degenerate_streak = ratio <= 1e-13 ? degenerate_streak + 1 : 0;
      for (std::size_t i = 0; i < r; ++i) xb[i] -= ratio * dir[i];
      xb[leave] = ratio;
      pivot(leave, enter);
    }
  };

  // Phase 1: drive the artificials to zero.
  run_phase([&](std::size_t j) { return j >= n ? -1.0 : 0.0; }, false);
  double infeasibility = 0.0;
  for (std::size_t i = 0; i < r; ++i)
    if (basis[i] >= n) infeasibility += std::max(xb[i], 0.0);
  if (infeasibility > 1e-9) return out;

  for (std::size_t i = 0; i < r; ++i) {
    if (basis[i] < n) continue;
    std::size_t enter = n;
    double best = 1e-9;
    for (std::size_t j = 0; j < n; ++j) {
      if (in_basis[j]) continue;
      double s = 0.0;
      for (std::size_t k = 0; k < r; ++k) s += binv[i][k] * red.a[j * r + k];
      if (std::abs(s) > best) {
        best = std::abs(s);
        enter = j;
      }
    }
    if (enter == n) continue;  // redundant row; the artificial stays at zero
    column(enter, col);
    for (std::size_t a = 0; a < r; ++a) {
      double s = 0.0;
      for (std::size_t k = 0; k < r; ++k) s += binv[a][k] * col[k];
      dir[a] = s;
    }
    xb[i] = 0.0;
    pivot(i, enter);
  }
  refactor();

  auto phase2_cost = [&](std::size_t j) { return j >= n ? 0.0 : lp.c[j]; };
  run_phase(phase2_cost, false);
  refactor();

  out.feasible = true;
  out.x.assign(n, 0.0);
  for (std::size_t i = 0; i < r; ++i) {
    if (basis[i] < n) out.x[basis[i]] = std::max(xb[i], 0.0);
  }
  for (std::size_t j = 0; j < n; ++j) out.value += lp.c[j] * out.x[j];

  for (std::size_t k = 0; k < r; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < r; ++i) s += phase2_cost(basis[i]) * binv[i][k];
    y[k] = s;
  }
  out.duals.assign(lp.rows, 0.0);
  for (std::size_t k = 0; k < r; ++k)
    for (std::size_t o = 0; o < lp.rows; ++o) out.duals[o] += y[k] * red.transform[k][o];
  return out;
}

}  // namespace mdbell::detail
