#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "branchsim/action.hpp"
#include "branchsim/complex.hpp"
#include "branchsim/paths.hpp"

namespace branchsim {

// Two-outcome sample model on a line of T steps: a branch pair either kept
// apart (weights pinned, two independent symbol streams) or fused into one
// bundle that redistributes its excess weight at every step.
struct ToyModelSpec {
  double b = std::log(2.0);  // field entropy rate per branch step, nats
  double L = 1.0;            // weight floor per branch
  double w_T = 4.0;          // conserved total weight
  std::size_t T = 1;         // step count
  double dw = 1.0;           // weight resolution of the allocation grid
};

// InvalidSpec unless b > 0, L > 0, w_T >= 2L, T >= 1, dw > 0 (all finite).
void validate_spec(const ToyModelSpec& spec);

struct ToyEntropies {
  double s_A = 0;           // separated pair: 2bT, field freedom only
  double s_B_weight = 0;    // fused pair, per-step excess allocations
  double s_B_field_lo = 0;  // fused pair, field share bracket (bT, 2bT)
  double s_B_field_hi = 0;
};

// Closed-form entropies of the two configurations. The weight share counts
// allocation lattice points, so it carries a +1 against the continuum form
// T*ln(w_T - 2L): s_B_weight = T * ln((w_T - 2L)/dw + 1).
ToyEntropies toy_entropies(const ToyModelSpec& spec);

// Total weight above which the fused pair's entropy (weight share plus the
// field bracket's lower edge) beats the separated pair: e^b + 2L. On the dw
// grid the comparison with the discrete weight count flips one unit lower.
double collapse_threshold(double b, double L);

// Finest simultaneous row/column block structure of a boundary matrix: the
// connected components of the bipartite face-simplex incidence graph.
// Columns with no nonzero entry form singleton blocks. Blocks are ordered by
// smallest member column (pure-row components, if any, come last); indices
// inside a block ascend.
struct BlockDecomposition {
  std::vector<std::vector<std::size_t>> column_blocks;
  std::vector<std::vector<std::size_t>> row_blocks;  // parallel to column_blocks
};

BlockDecomposition block_decomposition(const BoundaryMatrix& d);

// Nullity cost of losing the cross-connections: for each volume V the
// connected four-branch template is compared against its two-cluster split
// with equal simplex counts, and the nullity difference is recorded together
// with a least-squares line through the series.
struct DeficitScan {
  std::vector<std::size_t> volumes;
  std::vector<long> deficits;
  double slope = 0;
  double intercept = 0;
  double r_squared = 0;
};

DeficitScan entropy_deficit_scan(const std::vector<std::size_t>& volumes,
                                 std::size_t budget = 1000000);

// State of the weight-exchange walk over R outcomes.
struct CollapseState {
  std::vector<double> outcome_weights;
  std::size_t step = 0;
  std::optional<std::size_t> absorbed;
};

struct CollapseRun {
  CollapseState final_state;
  std::size_t outcome = 0;  // index of the surviving outcome
  // trajectory[s] = weights after s steps; row 0 is the initial state. Only
  // filled when requested.
  std::vector<std::vector<double>> trajectory;
};

// Unbiased weight-exchange walk: each step picks an unordered pair of live
// outcomes, fixes a stake, then moves it by a fair coin. The stake is
// min(step_scale, w_i, w_j), escalated to the whole smaller weight when the
// losing side would otherwise be left at or below l_threshold. Because the
// stake is settled before the coin, every outcome weight is an exact
// martingale and absorption frequencies reproduce the initial proportions.
// An outcome whose weight falls to or below l_threshold is frozen: its
// residual stays in the total (conservation is exact) but is never exchanged
// again. With l_threshold = 0 residuals are exactly zero and the surviving
// outcome ends with the full total.
//
// `equilibrium_bias` tilts the coin toward the currently heavier outcome
// (probability 0.5 + bias). It exists to show how an entropy-seeking drift
// distorts the absorption statistics and must stay 0 for Born-rule runs.
CollapseRun simulate_collapse(const std::vector<double>& initial_weights, double l_threshold,
                              double step_scale, std::uint64_t seed,
                              std::size_t max_steps = 50000000, bool record_trajectory = true,
                              double equilibrium_bias = 0.0);

struct BornReport {
  std::vector<std::size_t> counts;
  std::vector<double> frequencies;
  std::vector<double> ci_low;   // 95% Wald intervals
  std::vector<double> ci_high;
  double chi_squared = 0;       // against the |psi_r|^2 expectations
  std::size_t n_trials = 0;
};

// Runs the collapse walk n_trials times from weights w_T * |psi_r|^2 and
// tabulates which outcome absorbs. Components must be pairwise orthogonal
// (NonOrthogonalDecomposition above 1e-9) and the squared norms must sum to
// one (UnnormalizedState outside 1e-9). Trials draw independent per-index
// streams from the seed, so results do not depend on the worker count.
BornReport born_statistics(const std::vector<std::vector<std::complex<double>>>& psi_components,
                           std::size_t n_trials, std::uint64_t seed, double w_T = 1.0,
                           double step_scale = 0.0,  // 0 picks w_T / 64
                           unsigned threads = 1);

// Amplitude restricted to paths near a reference trajectory. The distance is
// the mean over layers of the L2 gap between a path's per-layer label
// centroid (path_layer_positions coordinates) and the reference row.
struct CutoffAmplitude {
  std::complex<double> z_cut{0.0, 0.0};   // sum over paths within the radius
  std::complex<double> z_full{0.0, 0.0};  // unrestricted sum for comparison
  std::size_t n_inside = 0;
  bool empty = false;  // no path within the radius; z_cut is exactly 0
};

CutoffAmplitude similarity_cutoff_propagator(const BranchedComplex& complex,
                                             const PathSet& paths,
                                             const std::vector<std::vector<double>>& classical_path,
                                             double radius, const ActionModel& model, double hbar,
                                             double w_E = 1.0);

// Saturating response f(u) = u0 * tanh(u / u0); odd, monotone, |f| <= u0.
double tanh_response(double u, double u0);

struct LogOddsSeries {
  std::vector<double> d;  // ln(P / (1 - P))
  std::vector<double> j;  // (d - d_at_zero) / 4
};

// Log-odds of the channel probabilities over the grid. The grid must contain
// u = 0 (the reference point for j); probabilities must sit strictly inside
// (0, 1) or DegenerateProbability is raised.
LogOddsSeries log_odds_statistic(const std::vector<double>& p_of_u,
                                 const std::vector<double>& u_grid);

}  // namespace branchsim
