#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "branchsim/action.hpp"
#include "branchsim/complex.hpp"

namespace branchsim {

// Z = sum_i w_i e^{i S_i / hbar}, accumulated by pairwise summation so the
// result does not depend on how large the ensemble is split.
std::complex<double> amplitude_sum(const std::vector<double>& path_weights,
                                   const std::vector<double>& actions, double hbar);

// zeta * w_E * sum_p e^{(i/hbar - k) S[p]}: the finite, entropy-damped path
// sum. zeta defaults to 1/#paths so the k = 0, S = 0 ensemble comes out at
// exactly w_E.
std::complex<double> expected_amplitude(const std::vector<double>& actions, double k,
                                        double hbar, double w_e = 1.0,
                                        std::optional<double> zeta = std::nullopt);

// Exact kernel <sink| M^steps |source> on a `sites`-site grid with spacing
// model.spacing, where M_xy = e^{(i/hbar - k) S_step(x, y)} and S_step is one
// time step of the model's action (potential sampled at the departure site).
// Cost grows as sites^2 * steps, capped by `budget`.
std::complex<double> transfer_matrix_propagator(const ActionModel& model, long sites, long steps,
                                                long source, long sink, double k, double hbar,
                                                long long budget = 50000000);

struct McResult {
  std::complex<double> estimate;
  double std_error = 0.0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
};

// Importance-sampled path sum over an enumerated ensemble: paths are drawn
// with probability proportional to e^{-k S}, unit phases averaged, and the
// partition value restored, so suppression acts on the sampling and never on
// a phase's magnitude. Trial t draws from Rng::stream(seed, t) and trials
// are reduced over a fixed chunk grid: any thread count gives the same bits.
McResult monte_carlo_amplitude(const std::vector<double>& actions, double k, double hbar,
                               std::size_t n, std::uint64_t seed, double w_e = 1.0,
                               std::optional<double> zeta = std::nullopt, unsigned threads = 1);

// The same estimator with paths drawn ancestrally, layer by layer, from
// exact conditionals (a backward partition pass over the step adjacency).
// Never materializes the path family, so it scales to complexes whose path
// count is far beyond enumeration. Actions are the model's lattice actions
// along per-layer centroid positions.
McResult monte_carlo_amplitude_ancestral(const BranchedComplex& complex, const ActionModel& model,
                                         double k, double hbar, std::size_t n, std::uint64_t seed,
                                         double w_e = 1.0,
                                         std::optional<double> zeta = std::nullopt,
                                         unsigned threads = 1);

struct CumulantReport {
  std::complex<double> exact;
  std::complex<double> factorized;
  std::complex<double> corrected;
};

// Compares mean(w e^{iS/hbar}) against the factorized form
// mean(w) mean(e^{iS/hbar}) and the second-order cumulant form
// mean(w) e^{i mean(S)/hbar} e^{-Var(S)/(2 hbar^2)}. The gap between exact
// and factorized tracks Cov[w, S]; the cumulant form repairs the pure-phase
// part for near-Gaussian action samples.
CumulantReport cumulant_corrected_expectation(const std::vector<double>& weight_samples,
                                              const std::vector<double>& action_samples,
                                              double hbar);

}  // namespace branchsim
