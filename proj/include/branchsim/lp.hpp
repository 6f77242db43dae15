#pragma once

#include <vector>

#include "branchsim/linalg.hpp"

namespace branchsim {

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Rational objective;
  std::vector<Rational> x;  // primal point, size = columns of A (when Optimal)
};

// Exact two-phase simplex with Bland's rule for
//     optimize c.x  subject to  A x = b, x >= 0.
// Everything rational, so feasibility answers are decisions, not estimates.
// Desk-scale problems only; no effort is spent on sparsity or scaling.
LpResult solve_lp(const RatMatrix& a, const std::vector<Rational>& b,
                  const std::vector<Rational>& c, bool maximize);

}  // namespace branchsim
