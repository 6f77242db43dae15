#include "branchsim/weights.hpp"

#include <cmath>

#include "branchsim/errors.hpp"
#include "branchsim/lp.hpp"

namespace branchsim {

RatMatrix boundary_to_rational(const BoundaryMatrix& d) {
  RatMatrix m(d.rows(), d.cols());
  for (std::size_t r = 0; r < d.rows(); ++r) {
    for (std::size_t c = 0; c < d.cols(); ++c) m.at(r, c) = Rational(d.entries[r][c]);
  }
  return m;
}

NullSpaceBasis null_space(const BoundaryMatrix& d) {
  RatMatrix m = boundary_to_rational(d);
  NullSpaceBasis out;
  out.basis_vectors = kernel_basis(m);
  out.rank = rank(m);
  out.nullity = out.basis_vectors.size();
  return out;
}

ConstraintSystem weight_constraints(const BranchedComplex& complex, const Rational& total) {
  BoundaryMatrix d = boundary_matrix(complex);
  const std::size_t cols = complex.simplices().size();
  const std::size_t steps = complex.step_count();
  ConstraintSystem sys;
  sys.a = RatMatrix(d.rows() + steps, cols);
  sys.b.assign(d.rows() + steps, Rational(0));
  for (std::size_t r = 0; r < d.rows(); ++r) {
    for (std::size_t c = 0; c < cols; ++c) sys.a.at(r, c) = Rational(d.entries[r][c]);
  }
  for (std::size_t s = 0; s < steps; ++s) {
    long t = complex.t_min() + static_cast<long>(s);
    for (std::size_t idx : complex.step_simplices(t)) sys.a.at(d.rows() + s, idx) = 1;
    sys.b[d.rows() + s] = total;
  }
  return sys;
}

namespace {

// Shifts w = L + u (u >= 0) through the equality system: A u = b - A.(L 1).
std::vector<Rational> shifted_rhs(const ConstraintSystem& sys, const Rational& lower_bound) {
  std::vector<Rational> ones(sys.a.cols(), lower_bound);
  std::vector<Rational> al = mat_vec(sys.a, ones);
  std::vector<Rational> r(sys.b.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = sys.b[i] - al[i];
  return r;
}

}  // namespace

FeasibilityReport feasible_region(const BranchedComplex& complex, const Rational& lower_bound,
                                  const Rational& total) {
  if (lower_bound <= 0) fail(ErrorCode::BadConfiguration, "lower bound must be positive");
  if (total <= 0) fail(ErrorCode::BadConfiguration, "total weight must be positive");

  FeasibilityReport report;
  ConstraintSystem sys = weight_constraints(complex, total);
  const std::size_t n = sys.a.cols();

  // Cheap necessary condition first, for a precise reason message: every
  // step must fit its branch count at the lower bound.
  for (std::size_t s = 0; s < complex.step_count(); ++s) {
    long t = complex.t_min() + static_cast<long>(s);
    std::size_t branches = complex.step_simplices(t).size();
    if (Rational(static_cast<long>(branches)) * lower_bound > total) {
      report.feasible = false;
      report.reason = "total weight " + Rational(total).get_str() + " is below " +
                      std::to_string(branches) + " branches times the lower bound in the step at layer " +
                      std::to_string(t);
      return report;
    }
  }

  std::vector<Rational> rhs = shifted_rhs(sys, lower_bound);
  std::vector<Rational> zero_cost(n, Rational(0));
  LpResult lp = solve_lp(sys.a, rhs, zero_cost, false);
  if (lp.status != LpStatus::Optimal) {
    report.feasible = false;
    report.reason = "conservation and per-step totals admit no assignment with every weight at or above the lower bound";
    return report;
  }

  report.feasible = true;
  report.witness.resize(n);
  for (std::size_t j = 0; j < n; ++j) report.witness[j] = lower_bound + lp.x[j];

  // Affine hull: coordinates whose maximum over the polytope is still L are
  // pinned; the hull is the equality system plus those pins.
  std::vector<std::size_t> pinned;
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<Rational> cost(n, Rational(0));
    cost[j] = 1;
    LpResult probe = solve_lp(sys.a, rhs, cost, true);
    // The polytope sits inside the per-step total, so probes are bounded.
    if (probe.status != LpStatus::Optimal) {
      fail(ErrorCode::BadConfiguration, "unbounded weight coordinate; is the complex layered?");
    }
    if (probe.objective == 0) pinned.push_back(j);
  }
  RatMatrix hull(sys.a.rows() + pinned.size(), n);
  for (std::size_t r = 0; r < sys.a.rows(); ++r) {
    for (std::size_t c = 0; c < n; ++c) hull.at(r, c) = sys.a.at(r, c);
  }
  for (std::size_t k = 0; k < pinned.size(); ++k) hull.at(sys.a.rows() + k, pinned[k]) = 1;
  report.polytope_dim = static_cast<long>(n - rank(hull));
  return report;
}

mpz_class count_lattice_configs(const BranchedComplex& complex, const Rational& lower_bound,
                                const Rational& total, const Rational& dw,
                                long long node_budget) {
  if (lower_bound <= 0) fail(ErrorCode::BadConfiguration, "lower bound must be positive");
  if (dw <= 0) fail(ErrorCode::BadConfiguration, "weight resolution must be positive");

  ConstraintSystem sys = weight_constraints(complex, total);
  const std::size_t n = sys.a.cols();
  std::vector<Rational> rhs = shifted_rhs(sys, lower_bound);

  // Lattice substitution w = L + dw.u with u a non-negative integer vector:
  // A u = rhs / dw.
  RatMatrix aug(sys.a.rows(), n + 1);
  for (std::size_t r = 0; r < sys.a.rows(); ++r) {
    for (std::size_t c = 0; c < n; ++c) aug.at(r, c) = sys.a.at(r, c);
    aug.at(r, n) = rhs[r] / dw;
  }
  RrefResult red = rref(aug);
  // A pivot in the RHS column means the equalities are inconsistent.
  if (!red.pivot_columns.empty() && red.pivot_columns.back() == n) return 0;

  std::vector<bool> is_pivot(n, false);
  for (std::size_t p : red.pivot_columns) is_pivot[p] = true;
  std::vector<std::size_t> free_cols;
  for (std::size_t j = 0; j < n; ++j) {
    if (!is_pivot[j]) free_cols.push_back(j);
  }

  // Per-column ceiling: the step total minus the other branches at L.
  std::vector<long> upper(n, 0);
  for (std::size_t s = 0; s < complex.step_count(); ++s) {
    long t = complex.t_min() + static_cast<long>(s);
    const auto& members = complex.step_simplices(t);
    Rational excess = total - Rational(static_cast<long>(members.size())) * lower_bound;
    if (excess < 0) return 0;
    Rational slots = excess / dw;
    // floor(slots) fits a long at desk scale.
    mpz_class fl = slots.get_num() / slots.get_den();
    for (std::size_t idx : members) upper[idx] = fl.get_si();
  }

  const std::size_t rank_rows = red.rank;
  std::vector<Rational> u(n, Rational(0));
  long long nodes = 0;
  mpz_class count = 0;

  // DFS over free-column assignments; pivots are then forced.
  auto accept = [&]() {
    for (std::size_t k = 0; k < rank_rows; ++k) {
      std::size_t p = red.pivot_columns[k];
      Rational val = red.reduced.at(k, n);
      for (std::size_t j : free_cols) {
        if (red.reduced.at(k, j) != 0) val -= red.reduced.at(k, j) * u[j];
      }
      if (val < 0 || val.get_den() != 1) return false;
      u[p] = val;
    }
    return true;
  };
  auto dfs = [&](auto&& self, std::size_t level) -> void {
    if (level == free_cols.size()) {
      if (accept()) ++count;
      return;
    }
    std::size_t j = free_cols[level];
    for (long v = 0; v <= upper[j]; ++v) {
      if (++nodes > node_budget) {
        fail(ErrorCode::BudgetExceeded,
             "lattice enumeration exceeded the node budget of " + std::to_string(node_budget));
      }
      u[j] = v;
      self(self, level + 1);
    }
  };
  dfs(dfs, 0);
  return count;
}

double weight_entropy(const mpz_class& count) {
  if (count < 0) fail(ErrorCode::BadConfiguration, "negative microstate count");
  if (count == 0) fail(ErrorCode::ZeroMicrostates, "no microstates: entropy undefined");
  long exp2 = 0;
  double mant = mpz_get_d_2exp(&exp2, count.get_mpz_t());
  return std::log(mant) + static_cast<double>(exp2) * std::log(2.0);
}

}  // namespace branchsim
