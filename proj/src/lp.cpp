#include "branchsim/lp.hpp"

#include <limits>

#include "branchsim/errors.hpp"

namespace branchsim {

namespace {

// Dense simplex tableau: `cols` variable columns plus the RHS.
struct Tableau {
  std::size_t rows, cols;
  std::vector<Rational> data;  // rows x (cols + 1)
  std::vector<std::size_t> basis;

  Tableau(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * (c + 1)), basis(r) {}
  Rational& at(std::size_t r, std::size_t c) { return data[r * (cols + 1) + c]; }
  Rational& rhs(std::size_t r) { return at(r, cols); }

  void pivot(std::size_t pr, std::size_t pc) {
    Rational p = at(pr, pc);
    for (std::size_t j = 0; j <= cols; ++j) at(pr, j) /= p;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == pr || at(i, pc) == 0) continue;
      Rational f = at(i, pc);
      for (std::size_t j = 0; j <= cols; ++j) at(i, j) -= f * at(pr, j);
    }
    basis[pr] = pc;
  }
};

// Minimizes cost.x over the current tableau. Bland's rule on both the
// entering and leaving choice, so cycling is impossible. `allowed` masks
// columns that may enter (used to freeze artificials in phase 2).
LpStatus run_simplex(Tableau& t, const std::vector<Rational>& cost,
                     const std::vector<bool>& allowed) {
  while (true) {
    // Reduced costs: c_j - c_B . B^{-1} A_j, computed from the tableau.
    std::size_t enter = t.cols;
    for (std::size_t j = 0; j < t.cols; ++j) {
      if (!allowed[j]) continue;
      Rational rc = cost[j];
      for (std::size_t i = 0; i < t.rows; ++i) {
        if (cost[t.basis[i]] != 0 && t.at(i, j) != 0) rc -= cost[t.basis[i]] * t.at(i, j);
      }
      if (rc < 0) {
        enter = j;
        break;  // Bland: first improving column
      }
    }
    if (enter == t.cols) return LpStatus::Optimal;

    std::size_t leave = t.rows;
    Rational best;
    for (std::size_t i = 0; i < t.rows; ++i) {
      if (t.at(i, enter) > 0) {
        Rational ratio = t.rhs(i) / t.at(i, enter);
        if (leave == t.rows || ratio < best ||
            (ratio == best && t.basis[i] < t.basis[leave])) {
          leave = i;
          best = ratio;
        }
      }
    }
    if (leave == t.rows) return LpStatus::Unbounded;
    t.pivot(leave, enter);
  }
}

}  // namespace

LpResult solve_lp(const RatMatrix& a, const std::vector<Rational>& b,
                  const std::vector<Rational>& c, bool maximize) {
  const std::size_t m = a.rows(), n = a.cols();
  if (b.size() != m || c.size() != n) {
    fail(ErrorCode::DimensionMismatch, "solve_lp: inconsistent system sizes");
  }

  // Phase 1: one artificial per row, minimize their sum.
  Tableau t(m, n + m);
  for (std::size_t i = 0; i < m; ++i) {
    int sign = b[i] < 0 ? -1 : 1;
    for (std::size_t j = 0; j < n; ++j) t.at(i, j) = sign * a.at(i, j);
    t.rhs(i) = sign * b[i];
    t.at(i, n + i) = 1;
    t.basis[i] = n + i;
  }
  std::vector<Rational> phase1_cost(n + m, Rational(0));
  for (std::size_t j = n; j < n + m; ++j) phase1_cost[j] = 1;
  std::vector<bool> all(n + m, true);
  run_simplex(t, phase1_cost, all);  // bounded below by 0, never Unbounded

  Rational infeas(0);
  for (std::size_t i = 0; i < m; ++i) {
    if (t.basis[i] >= n) infeas += t.rhs(i);
  }
  LpResult result;
  if (infeas != 0) {
    result.status = LpStatus::Infeasible;
    return result;
  }

  // Kick remaining zero-valued artificials out of the basis where possible;
  // rows with no original-column support are redundant and can stay (their
  // artificial is frozen at zero in phase 2).
  for (std::size_t i = 0; i < m; ++i) {
    if (t.basis[i] < n) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (t.at(i, j) != 0) {
        t.pivot(i, j);
        break;
      }
    }
  }

  std::vector<Rational> phase2_cost(n + m, Rational(0));
  for (std::size_t j = 0; j < n; ++j) phase2_cost[j] = maximize ? -c[j] : c[j];
  std::vector<bool> originals(n + m, false);
  for (std::size_t j = 0; j < n; ++j) originals[j] = true;
  LpStatus status = run_simplex(t, phase2_cost, originals);
  if (status == LpStatus::Unbounded) {
    result.status = LpStatus::Unbounded;
    return result;
  }

  result.status = LpStatus::Optimal;
  result.x.assign(n, Rational(0));
  for (std::size_t i = 0; i < m; ++i) {
    if (t.basis[i] < n) result.x[t.basis[i]] = t.rhs(i);
  }
  result.objective = 0;
  for (std::size_t j = 0; j < n; ++j) result.objective += c[j] * result.x[j];
  return result;
}

}  // namespace branchsim
