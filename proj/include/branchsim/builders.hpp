#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "branchsim/complex.hpp"
#include "branchsim/rng.hpp"

namespace branchsim::builders {

// One edge between two vertices, weight w.
BranchedComplex single_edge(const Rational& w = 1, const Rational& lower_bound = 1);

// A single branch of T steps carrying constant weight w.
BranchedComplex chain(std::size_t steps, const Rational& w = 1, const Rational& lower_bound = 1);

// Clusters of parallel branches: cluster c is `cluster_sizes[c]` parallel
// edges per step strung between that cluster's own junction chain. One
// cluster alone is a maximally recombining bundle; several clusters form a
// disconnected union with equal step counts. Optional per-cluster branch
// weights are constant over time.
BranchedComplex multi_bundle(const std::vector<std::size_t>& cluster_sizes, std::size_t steps,
                             const std::optional<std::vector<std::vector<Rational>>>& weights =
                                 std::nullopt,
                             const Rational& lower_bound = 1);

// Two branches recombining at every layer (a single 2-branch bundle).
BranchedComplex recombining_pair(std::size_t steps);

// Two branches that never meet (two 1-branch clusters).
BranchedComplex separated_pair(std::size_t steps);

// The six-edge worked example: two parallel edges joining into a two-step
// spine that splits into two tails; weights (1,1,2,2,1,1) when asked.
BranchedComplex merge_split(bool with_weights);

// Paired complexes with equal simplex counts: `branches` branches that
// recombine at every layer vs. the same branches kept separate. The frequent
// variant always has the larger null space.
std::pair<BranchedComplex, BranchedComplex> cohesion_pair(std::size_t branches,
                                                          std::size_t steps);

// Template family for the deficit scan: four branches over volume + 1 steps,
// either all sharing one junction chain (connected) or split into two
// two-branch clusters (blocked). Equal simplex counts by construction.
BranchedComplex cluster_template(std::size_t volume, bool connected);

// Complete transition grid: `sites` positions per layer, one edge for every
// site pair of consecutive layers. Its paths are exactly the site sequences
// the transfer-matrix kernel sums over.
BranchedComplex site_grid(std::size_t sites, std::size_t steps);

// Random layered complex: random vertex populations per layer, every vertex
// covered, at most `max_simplices` edges. Drives the randomized null-space
// and counting tests.
BranchedComplex random_layered(Rng& rng, std::size_t max_simplices = 40);

// B after A in time: B's layers are shifted to start at A's last layer, ids
// are prefixed, labels offset. Constraint systems stay block-independent,
// so counts multiply. Lower bounds must match.
BranchedComplex sequential_union(const BranchedComplex& a, const BranchedComplex& b);

// A and B side by side over the same starting layer (labels offset).
BranchedComplex parallel_union(const BranchedComplex& a, const BranchedComplex& b);

}  // namespace branchsim::builders
