#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "branchsim/complex.hpp"
#include "branchsim/linalg.hpp"

namespace branchsim {

// All source-to-target paths through a layered complex. Paths are stored as
// simplex indices (canonical order), one per time step, in lexicographic
// order of the index sequence — so path j is reproducible from the
// description alone.
struct PathSet {
  std::vector<std::vector<std::size_t>> paths;
  std::vector<std::string> source_ids;  // resolved c_I, canonical order
  std::vector<std::string> target_ids;  // resolved c_F, canonical order
  std::size_t simplex_count = 0;
  std::size_t step_count = 0;
};

// Successor lists: entry sigma holds the next-step simplices sharing an
// n-face with sigma on the interface layer, in ascending index order.
// Last-step simplices get empty lists.
std::vector<std::vector<std::size_t>> step_adjacency(const BranchedComplex& complex);

// Enumerates every layer-contiguous path from a first-step simplex in c_I to
// a last-step simplex in c_F, consecutive simplices sharing an n-face on the
// interface layer. Empty c_I (or c_F) means "all simplices of that step".
// Throws PathExplosion if more than `cap` paths exist.
PathSet enumerate_paths(const BranchedComplex& complex, const std::vector<std::string>& c_I,
                        const std::vector<std::string>& c_F, std::size_t cap = 100000);

struct IncidenceMatrix {
  std::vector<std::vector<int>> entries;  // rows = simplices, cols = paths
  std::size_t rows() const { return entries.size(); }
  std::size_t cols() const { return entries.empty() ? 0 : entries[0].size(); }
};

// 0/1 membership matrix: entry (sigma, i) says whether path i passes
// through simplex sigma. Orderings are those of the complex and PathSet.
IncidenceMatrix incidence_matrix(const PathSet& path_set);

// w_sigma = sum_i A_sigma_i * path_weight_i. Exact.
std::vector<Rational> simplex_weights_from_paths(const IncidenceMatrix& a,
                                                 const std::vector<Rational>& path_weights);

// Softmin ensemble: P(i) proportional to exp(-k * action_i), computed with a
// max-shift so large actions cannot overflow.
std::vector<double> path_probabilities(const std::vector<double>& actions, double k);

// Spatial positions along a path: entry t is the centroid label of the
// path's vertices on layer t (length step_count + 1). Used by lattice
// actions and the similarity metric.
std::vector<std::vector<double>> path_layer_positions(const BranchedComplex& complex,
                                                      const std::vector<std::size_t>& path);

}  // namespace branchsim
