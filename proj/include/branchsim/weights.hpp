#pragma once

#include <string>
#include <vector>

#include "branchsim/complex.hpp"
#include "branchsim/linalg.hpp"

namespace branchsim {

struct NullSpaceBasis {
  std::vector<std::vector<Rational>> basis_vectors;  // one entry per simplex column
  std::size_t rank = 0;
  std::size_t nullity = 0;
};

// Exact kernel of the conservation matrix, canonical free-column form.
NullSpaceBasis null_space(const BoundaryMatrix& d);

struct FeasibilityReport {
  bool feasible = false;
  std::string reason;              // filled when infeasible
  std::vector<Rational> witness;   // canonical simplex order, when feasible
  long polytope_dim = -1;          // affine-hull dimension of the weight polytope
};

// Decides whether any weight assignment satisfies conservation, per-step
// totals w_T, and w >= L, all exactly. The polytope dimension is the
// dimension of the affine hull of the feasible set (0 for a unique point),
// found by exact LP probes for coordinates pinned at L.
FeasibilityReport feasible_region(const BranchedComplex& complex, const Rational& lower_bound,
                                  const Rational& total);

// Exact number of weight assignments on the lattice {L, L+dw, L+2dw, ...}
// satisfying all constraints. Enumerates assignments of the free columns of
// the constraint system; every partial assignment costs one node against
// `node_budget` (BudgetExceeded beyond it).
mpz_class count_lattice_configs(const BranchedComplex& complex, const Rational& lower_bound,
                                const Rational& total, const Rational& dw,
                                long long node_budget = 10000000);

// Entropy of the uniform ensemble over `count` microstates, in nats.
double weight_entropy(const mpz_class& count);

// The equality system {D w = 0, per-step totals = total} over the simplex
// columns; shared by feasibility, counting, and the tests.
struct ConstraintSystem {
  RatMatrix a;
  std::vector<Rational> b;
};
ConstraintSystem weight_constraints(const BranchedComplex& complex, const Rational& total);

RatMatrix boundary_to_rational(const BoundaryMatrix& d);

}  // namespace branchsim
