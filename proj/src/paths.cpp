#include "branchsim/paths.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "branchsim/errors.hpp"

namespace branchsim {

namespace {

// Vertices of a simplex lying on one layer, as a sorted id set.
std::vector<std::string> layer_vertices(const BranchedComplex& complex, const Simplex& s,
                                        long t) {
  std::vector<std::string> out;
  for (const std::string& vid : s.vertices) {
    if (complex.vertex(vid).t == t) out.push_back(vid);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Consecutive simplices are adjacent when they share an n-face on the
// interface layer, i.e. at least n+1 common vertices there.
bool adjacent(const BranchedComplex& complex, const Simplex& a, const Simplex& b) {
  long interface = a.t_start + 1;
  std::vector<std::string> va = layer_vertices(complex, a, interface);
  std::vector<std::string> vb = layer_vertices(complex, b, interface);
  std::vector<std::string> common;
  std::set_intersection(va.begin(), va.end(), vb.begin(), vb.end(), std::back_inserter(common));
  return common.size() >= static_cast<std::size_t>(complex.n_dim()) + 1;
}

std::vector<std::size_t> resolve_config(const BranchedComplex& complex,
                                        const std::vector<std::string>& ids, long step_t,
                                        const char* which) {
  const auto& members = complex.step_simplices(step_t);
  if (ids.empty()) return members;
  std::set<std::size_t> allowed(members.begin(), members.end());
  std::vector<std::size_t> out;
  for (const std::string& id : ids) {
    std::size_t idx = complex.simplex_index(id);  // throws UnknownSimplex
    if (!allowed.count(idx)) {
      fail(ErrorCode::BadConfiguration,
           std::string(which) + " simplex " + id + " is not in the required step");
    }
    out.push_back(idx);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

std::vector<std::vector<std::size_t>> step_adjacency(const BranchedComplex& complex) {
  const long t0 = complex.t_min();
  const long t_last = t0 + static_cast<long>(complex.step_count()) - 1;
  const auto& simplices = complex.simplices();
  std::vector<std::vector<std::size_t>> next(simplices.size());
  for (long t = t0; t < t_last; ++t) {
    for (std::size_t i : complex.step_simplices(t)) {
      for (std::size_t j : complex.step_simplices(t + 1)) {
        if (adjacent(complex, simplices[i], simplices[j])) next[i].push_back(j);
      }
    }
  }
  return next;
}

PathSet enumerate_paths(const BranchedComplex& complex, const std::vector<std::string>& c_I,
                        const std::vector<std::string>& c_F, std::size_t cap) {
  const long t0 = complex.t_min();
  const long t_last = t0 + static_cast<long>(complex.step_count()) - 1;
  std::vector<std::size_t> sources = resolve_config(complex, c_I, t0, "source");
  std::vector<std::size_t> targets = resolve_config(complex, c_F, t_last, "target");
  std::set<std::size_t> target_set(targets.begin(), targets.end());

  // Successor lists in ascending index order make the DFS output
  // lexicographic with no post-sort.
  const auto& simplices = complex.simplices();
  std::vector<std::vector<std::size_t>> next = step_adjacency(complex);

  PathSet out;
  out.simplex_count = simplices.size();
  out.step_count = complex.step_count();
  for (std::size_t idx : sources) out.source_ids.push_back(simplices[idx].id);
  for (std::size_t idx : targets) out.target_ids.push_back(simplices[idx].id);

  std::vector<std::size_t> current;
  auto dfs = [&](auto&& self, std::size_t simplex) -> void {
    current.push_back(simplex);
    if (current.size() == out.step_count) {
      if (target_set.count(simplex)) {
        if (out.paths.size() == cap) {
          fail(ErrorCode::PathExplosion,
               "more than " + std::to_string(cap) + " paths; raise the cap or sample instead");
        }
        out.paths.push_back(current);
      }
    } else {
      for (std::size_t succ : next[simplex]) self(self, succ);
    }
    current.pop_back();
  };
  for (std::size_t s : sources) dfs(dfs, s);
  return out;
}

IncidenceMatrix incidence_matrix(const PathSet& path_set) {
  if (path_set.paths.empty()) {
    fail(ErrorCode::DegenerateEnsemble, "incidence matrix of an empty path set");
  }
  IncidenceMatrix a;
  a.entries.assign(path_set.simplex_count, std::vector<int>(path_set.paths.size(), 0));
  for (std::size_t i = 0; i < path_set.paths.size(); ++i) {
    for (std::size_t simplex : path_set.paths[i]) a.entries[simplex][i] = 1;
  }
  return a;
}

std::vector<Rational> simplex_weights_from_paths(const IncidenceMatrix& a,
                                                 const std::vector<Rational>& path_weights) {
  if (path_weights.size() != a.cols()) {
    fail(ErrorCode::DimensionMismatch, "path weight vector does not match path count");
  }
  for (const Rational& w : path_weights) {
    if (w < 0) fail(ErrorCode::BadConfiguration, "path weights must be non-negative");
  }
  std::vector<Rational> w(a.rows(), Rational(0));
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) {
      if (a.entries[r][c]) w[r] += path_weights[c];
    }
  }
  return w;
}

std::vector<double> path_probabilities(const std::vector<double>& actions, double k) {
  if (actions.empty()) fail(ErrorCode::DegenerateEnsemble, "empty action vector");
  if (k < 0) fail(ErrorCode::BadConfiguration, "k must be non-negative");
  double lowest = std::numeric_limits<double>::infinity();
  for (double s : actions) {
    if (!std::isfinite(s)) fail(ErrorCode::BadConfiguration, "non-finite action");
    lowest = std::min(lowest, s);
  }
  std::vector<double> p(actions.size());
  double z = 0.0;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    // Shift by the minimum so the largest exponent is exactly 0.
    p[i] = std::exp(-k * (actions[i] - lowest));
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

std::vector<std::vector<double>> path_layer_positions(const BranchedComplex& complex,
                                                      const std::vector<std::size_t>& path) {
  if (path.size() != complex.step_count()) {
    fail(ErrorCode::DimensionMismatch, "path length does not match the step count");
  }
  const auto& simplices = complex.simplices();
  auto centroid = [&](const Simplex& s, long t) {
    std::vector<double> acc;
    std::size_t n = 0;
    for (const std::string& vid : s.vertices) {
      const Vertex& v = complex.vertex(vid);
      if (v.t != t) continue;
      if (acc.empty()) acc.assign(v.label.size(), 0.0);
      for (std::size_t d = 0; d < v.label.size(); ++d) acc[d] += static_cast<double>(v.label[d]);
      ++n;
    }
    for (double& x : acc) x /= static_cast<double>(n);
    return acc;
  };
  std::vector<std::vector<double>> out;
  out.reserve(path.size() + 1);
  long t = complex.t_min();
  for (std::size_t idx : path) {
    if (idx >= simplices.size() || simplices[idx].t_start != t) {
      fail(ErrorCode::BadConfiguration, "path does not advance one step per simplex");
    }
    out.push_back(centroid(simplices[idx], t));
    ++t;
  }
  out.push_back(centroid(simplices[path.back()], t));
  return out;
}

}  // namespace branchsim
