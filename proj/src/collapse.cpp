#include "branchsim/collapse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "branchsim/builders.hpp"
#include "branchsim/errors.hpp"
#include "branchsim/parallel.hpp"
#include "branchsim/propagator.hpp"
#include "branchsim/rng.hpp"
#include "branchsim/weights.hpp"

namespace branchsim {

namespace {

bool finite(double x) { return std::isfinite(x); }

// Disjoint-set forest over row and column nodes of a boundary matrix.
class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

 private:
  std::vector<std::size_t> parent_;
};

// Core walk shared by simulate_collapse and born_statistics. `weights` is
// mutated in place; returns the surviving outcome's index.
std::size_t run_walk(std::vector<double>& weights, double l_threshold, double step_scale,
                     Rng& rng, double equilibrium_bias, std::size_t max_steps,
                     std::vector<std::vector<double>>* trajectory) {
  std::vector<std::size_t> alive;
  for (std::size_t r = 0; r < weights.size(); ++r) {
    if (weights[r] > l_threshold) alive.push_back(r);
  }
  if (trajectory) trajectory->push_back(weights);

  std::size_t steps = 0;
  while (alive.size() > 1) {
    if (steps >= max_steps) {
      fail(ErrorCode::BudgetExceeded,
           "collapse walk did not absorb within " + std::to_string(max_steps) + " steps");
    }
    ++steps;

    std::size_t pick_i = rng.next_below(alive.size());
    std::size_t pick_j = rng.next_below(alive.size() - 1);
    if (pick_j >= pick_i) ++pick_j;
    std::size_t i = alive[pick_i];
    std::size_t j = alive[pick_j];

    // The stake is fixed before the coin so each weight stays a martingale.
    // When the smaller side would be left in the dead zone it stakes
    // everything instead, making exact elimination reachable.
    double smaller = std::min(weights[i], weights[j]);
    double stake = std::min(step_scale, smaller);
    if (smaller - stake <= l_threshold) stake = smaller;

    std::size_t heavier = weights[i] >= weights[j] ? i : j;
    std::size_t lighter = heavier == i ? j : i;
    bool heavier_wins = rng.next_double() < 0.5 + equilibrium_bias;
    std::size_t winner = heavier_wins ? heavier : lighter;
    std::size_t loser = heavier_wins ? lighter : heavier;

    weights[winner] += stake;
    weights[loser] -= stake;

    if (weights[loser] <= l_threshold) {
      auto pos = std::find(alive.begin(), alive.end(), loser);
      alive.erase(pos);
    }
    if (trajectory) trajectory->push_back(weights);
  }
  return alive.front();
}

}  // namespace

void validate_spec(const ToyModelSpec& spec) {
  if (!finite(spec.b) || spec.b <= 0) {
    fail(ErrorCode::InvalidSpec, "field entropy rate b must be positive and finite");
  }
  if (!finite(spec.L) || spec.L <= 0) {
    fail(ErrorCode::InvalidSpec, "weight floor L must be positive and finite");
  }
  if (!finite(spec.w_T) || spec.w_T < 2 * spec.L) {
    fail(ErrorCode::InvalidSpec, "total weight w_T must cover two branches at the floor");
  }
  if (spec.T < 1) fail(ErrorCode::InvalidSpec, "step count T must be at least 1");
  if (!finite(spec.dw) || spec.dw <= 0) {
    fail(ErrorCode::InvalidSpec, "weight resolution dw must be positive and finite");
  }
}

ToyEntropies toy_entropies(const ToyModelSpec& spec) {
  validate_spec(spec);
  double t = static_cast<double>(spec.T);
  ToyEntropies out;
  out.s_A = 2.0 * spec.b * t;
  double excess = spec.w_T - 2.0 * spec.L;
  out.s_B_weight = t * std::log(excess / spec.dw + 1.0);
  out.s_B_field_lo = spec.b * t;
  out.s_B_field_hi = 2.0 * spec.b * t;
  return out;
}

double collapse_threshold(double b, double L) {
  if (!finite(b) || b <= 0 || !finite(L) || L <= 0) {
    fail(ErrorCode::BadConfiguration, "collapse threshold needs b > 0 and L > 0");
  }
  return std::exp(b) + 2.0 * L;
}

BlockDecomposition block_decomposition(const BoundaryMatrix& d) {
  std::size_t rows = d.rows();
  std::size_t cols = d.cols();
  UnionFind uf(rows + cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (d.entries[r][c] != 0) uf.unite(r, rows + c);
    }
  }

  // Group columns by component root, keep rows alongside.
  std::map<std::size_t, std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> groups;
  for (std::size_t c = 0; c < cols; ++c) groups[uf.find(rows + c)].first.push_back(c);
  for (std::size_t r = 0; r < rows; ++r) groups[uf.find(r)].second.push_back(r);

  // Components holding columns come first, ordered by their smallest column;
  // any pure-row component follows, ordered by its smallest row.
  std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> with_cols, row_only;
  for (auto& entry : groups) {
    auto& group = entry.second;
    (group.first.empty() ? row_only : with_cols).push_back(std::move(group));
  }
  std::sort(with_cols.begin(), with_cols.end(),
            [](const auto& a, const auto& b) { return a.first.front() < b.first.front(); });
  std::sort(row_only.begin(), row_only.end(),
            [](const auto& a, const auto& b) { return a.second.front() < b.second.front(); });

  BlockDecomposition out;
  for (auto& group : with_cols) {
    out.column_blocks.push_back(std::move(group.first));
    out.row_blocks.push_back(std::move(group.second));
  }
  for (auto& group : row_only) {
    out.column_blocks.emplace_back();
    out.row_blocks.push_back(std::move(group.second));
  }
  return out;
}

DeficitScan entropy_deficit_scan(const std::vector<std::size_t>& volumes, std::size_t budget) {
  if (volumes.empty()) {
    fail(ErrorCode::BadConfiguration, "the deficit scan needs at least one volume");
  }
  std::size_t total_simplices = 0;
  for (std::size_t v : volumes) total_simplices += 8 * (v + 2);
  if (total_simplices > budget) {
    fail(ErrorCode::BudgetExceeded, "deficit scan over " + std::to_string(total_simplices) +
                                        " template simplices exceeds the budget");
  }

  DeficitScan out;
  out.volumes = volumes;
  for (std::size_t v : volumes) {
    auto connected = builders::cluster_template(v, true);
    auto blocked = builders::cluster_template(v, false);
    long n_conn = static_cast<long>(null_space(boundary_matrix(connected)).nullity);
    long n_block = static_cast<long>(null_space(boundary_matrix(blocked)).nullity);
    out.deficits.push_back(n_conn - n_block);
  }

  std::size_t n = volumes.size();
  if (n == 1) {
    out.slope = 0;
    out.intercept = static_cast<double>(out.deficits[0]);
    out.r_squared = 1;
    return out;
  }
  double mean_x = 0, mean_y = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_x += static_cast<double>(volumes[i]);
    mean_y += static_cast<double>(out.deficits[i]);
  }
  mean_x /= static_cast<double>(n);
  mean_y /= static_cast<double>(n);
  double sxx = 0, sxy = 0, stot = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = static_cast<double>(volumes[i]) - mean_x;
    double dy = static_cast<double>(out.deficits[i]) - mean_y;
    sxx += dx * dx;
    sxy += dx * dy;
    stot += dy * dy;
  }
  if (sxx == 0) {
    fail(ErrorCode::BadConfiguration, "the deficit scan needs at least two distinct volumes");
  }
  out.slope = sxy / sxx;
  out.intercept = mean_y - out.slope * mean_x;
  double sres = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double fit = out.intercept + out.slope * static_cast<double>(volumes[i]);
    double res = static_cast<double>(out.deficits[i]) - fit;
    sres += res * res;
  }
  out.r_squared = stot == 0 ? (sres == 0 ? 1.0 : 0.0) : 1.0 - sres / stot;
  return out;
}

CollapseRun simulate_collapse(const std::vector<double>& initial_weights, double l_threshold,
                              double step_scale, std::uint64_t seed, std::size_t max_steps,
                              bool record_trajectory, double equilibrium_bias) {
  if (initial_weights.size() < 2) {
    fail(ErrorCode::BadInitialState, "the collapse walk needs at least two outcomes");
  }
  double total = 0;
  for (double w : initial_weights) {
    if (!finite(w) || w < 0) {
      fail(ErrorCode::BadInitialState, "outcome weights must be finite and non-negative");
    }
    total += w;
  }
  if (total <= 0) fail(ErrorCode::BadInitialState, "the initial state carries no weight");
  if (!finite(l_threshold) || l_threshold < 0) {
    fail(ErrorCode::BadConfiguration, "the absorption threshold must be non-negative");
  }
  for (double w : initial_weights) {
    if (w > 0 && w <= l_threshold) {
      fail(ErrorCode::BadInitialState,
           "an initial outcome weight sits in the dead zone (0, threshold]");
    }
  }
  if (!finite(step_scale) || step_scale <= 0) {
    fail(ErrorCode::BadConfiguration, "the step scale must be positive");
  }
  if (!finite(equilibrium_bias) || equilibrium_bias < 0 || equilibrium_bias >= 0.5) {
    fail(ErrorCode::BadConfiguration, "the equilibrium bias must lie in [0, 0.5)");
  }
  if (max_steps == 0) fail(ErrorCode::BadConfiguration, "max_steps must be positive");

  CollapseRun run;
  run.final_state.outcome_weights = initial_weights;
  Rng rng(seed);
  std::size_t outcome =
      run_walk(run.final_state.outcome_weights, l_threshold, step_scale, rng, equilibrium_bias,
               max_steps, record_trajectory ? &run.trajectory : nullptr);
  run.outcome = outcome;
  run.final_state.step = record_trajectory ? run.trajectory.size() - 1 : 0;
  run.final_state.absorbed = outcome;
  return run;
}

BornReport born_statistics(const std::vector<std::vector<std::complex<double>>>& psi_components,
                           std::size_t n_trials, std::uint64_t seed, double w_T,
                           double step_scale, unsigned threads) {
  if (psi_components.empty()) {
    fail(ErrorCode::BadInitialState, "the decomposition has no components");
  }
  std::size_t dim = psi_components.front().size();
  if (dim == 0) fail(ErrorCode::BadInitialState, "components must not be empty vectors");
  for (const auto& psi : psi_components) {
    if (psi.size() != dim) {
      fail(ErrorCode::DimensionMismatch, "components live in different spaces");
    }
  }
  std::size_t r_count = psi_components.size();
  for (std::size_t r = 0; r < r_count; ++r) {
    for (std::size_t s = r + 1; s < r_count; ++s) {
      std::complex<double> inner{0.0, 0.0};
      for (std::size_t i = 0; i < dim; ++i) {
        inner += std::conj(psi_components[r][i]) * psi_components[s][i];
      }
      if (std::abs(inner) > 1e-9) {
        fail(ErrorCode::NonOrthogonalDecomposition,
             "components " + std::to_string(r) + " and " + std::to_string(s) +
                 " are not orthogonal");
      }
    }
  }
  std::vector<double> probs(r_count, 0.0);
  double norm = 0;
  for (std::size_t r = 0; r < r_count; ++r) {
    for (const auto& a : psi_components[r]) probs[r] += std::norm(a);
    norm += probs[r];
  }
  if (std::abs(norm - 1.0) > 1e-9) {
    fail(ErrorCode::UnnormalizedState, "component norms sum to " + std::to_string(norm));
  }
  if (n_trials == 0) fail(ErrorCode::BadConfiguration, "n_trials must be positive");
  if (!finite(w_T) || w_T <= 0) {
    fail(ErrorCode::BadConfiguration, "the total weight must be positive");
  }
  if (!finite(step_scale) || step_scale < 0) {
    fail(ErrorCode::BadConfiguration, "the step scale must be non-negative");
  }
  double delta = step_scale == 0 ? w_T / 64.0 : step_scale;

  BornReport report;
  report.n_trials = n_trials;
  if (r_count == 1) {
    report.counts = {n_trials};
  } else {
    std::vector<double> weights(r_count);
    for (std::size_t r = 0; r < r_count; ++r) weights[r] = w_T * probs[r];

    auto chunk_fn = [&](std::size_t lo, std::size_t hi) {
      std::vector<std::size_t> counts(r_count, 0);
      for (std::size_t trial = lo; trial < hi; ++trial) {
        Rng rng = Rng::stream(seed, trial);
        std::vector<double> w = weights;
        counts[run_walk(w, 0.0, delta, rng, 0.0, 50000000, nullptr)] += 1;
      }
      return counts;
    };
    auto merge = [](std::vector<std::size_t> acc, const std::vector<std::size_t>& part) {
      for (std::size_t r = 0; r < acc.size(); ++r) acc[r] += part[r];
      return acc;
    };
    report.counts = chunked_reduce<std::vector<std::size_t>>(
        n_trials, 4096, threads, std::vector<std::size_t>(r_count, 0), chunk_fn, merge);
  }

  double n = static_cast<double>(n_trials);
  for (std::size_t r = 0; r < r_count; ++r) {
    double f = static_cast<double>(report.counts[r]) / n;
    report.frequencies.push_back(f);
    double half = 1.96 * std::sqrt(f * (1.0 - f) / n);
    report.ci_low.push_back(std::max(0.0, f - half));
    report.ci_high.push_back(std::min(1.0, f + half));
    if (probs[r] > 0) {
      double expected = n * probs[r];
      double diff = static_cast<double>(report.counts[r]) - expected;
      report.chi_squared += diff * diff / expected;
    } else if (report.counts[r] > 0) {
      report.chi_squared = std::numeric_limits<double>::infinity();
    }
  }
  return report;
}

CutoffAmplitude similarity_cutoff_propagator(const BranchedComplex& complex,
                                             const PathSet& paths,
                                             const std::vector<std::vector<double>>& classical_path,
                                             double radius, const ActionModel& model, double hbar,
                                             double w_E) {
  if (paths.paths.empty()) {
    fail(ErrorCode::DegenerateEnsemble, "the path set is empty");
  }
  if (std::isnan(radius) || radius < 0) {
    fail(ErrorCode::BadConfiguration, "the similarity radius must be non-negative");
  }
  if (!finite(hbar) || hbar <= 0) fail(ErrorCode::BadConfiguration, "hbar must be positive");
  if (!finite(w_E)) fail(ErrorCode::BadConfiguration, "w_E must be finite");
  std::size_t layers = paths.step_count + 1;
  if (classical_path.size() != layers) {
    fail(ErrorCode::DimensionMismatch, "the reference trajectory has " +
                                           std::to_string(classical_path.size()) +
                                           " layers, the paths have " + std::to_string(layers));
  }

  std::vector<double> actions = path_actions(complex, paths, model);
  std::vector<double> inside_weights, inside_actions;
  std::vector<double> full_weights(actions.size(), w_E);
  for (std::size_t i = 0; i < paths.paths.size(); ++i) {
    auto positions = path_layer_positions(complex, paths.paths[i]);
    double dist = 0;
    for (std::size_t l = 0; l < layers; ++l) {
      if (classical_path[l].size() != positions[l].size()) {
        fail(ErrorCode::DimensionMismatch, "the reference trajectory's layer " +
                                               std::to_string(l) +
                                               " has the wrong spatial dimension");
      }
      double sq = 0;
      for (std::size_t a = 0; a < positions[l].size(); ++a) {
        double gap = positions[l][a] - classical_path[l][a];
        sq += gap * gap;
      }
      dist += std::sqrt(sq);
    }
    dist /= static_cast<double>(layers);
    if (dist <= radius) {
      inside_weights.push_back(w_E);
      inside_actions.push_back(actions[i]);
    }
  }

  CutoffAmplitude out;
  out.z_full = amplitude_sum(full_weights, actions, hbar);
  out.n_inside = inside_weights.size();
  if (inside_weights.empty()) {
    out.empty = true;
    return out;
  }
  out.z_cut = amplitude_sum(inside_weights, inside_actions, hbar);
  return out;
}

double tanh_response(double u, double u0) {
  if (!finite(u0) || u0 <= 0) {
    fail(ErrorCode::BadConfiguration, "the saturation scale u0 must be positive");
  }
  if (!finite(u)) fail(ErrorCode::BadConfiguration, "the channel coordinate must be finite");
  return u0 * std::tanh(u / u0);
}

LogOddsSeries log_odds_statistic(const std::vector<double>& p_of_u,
                                 const std::vector<double>& u_grid) {
  if (p_of_u.size() != u_grid.size()) {
    fail(ErrorCode::DimensionMismatch, "probability samples and grid differ in length");
  }
  if (u_grid.empty()) fail(ErrorCode::BadConfiguration, "the grid is empty");
  std::size_t zero_at = u_grid.size();
  for (std::size_t i = 0; i < u_grid.size(); ++i) {
    if (u_grid[i] == 0.0) {
      zero_at = i;
      break;
    }
  }
  if (zero_at == u_grid.size()) {
    fail(ErrorCode::BadConfiguration, "the grid must contain u = 0 as the reference point");
  }

  LogOddsSeries out;
  for (double p : p_of_u) {
    if (!finite(p) || p <= 0 || p >= 1) {
      fail(ErrorCode::DegenerateProbability,
           "channel probabilities must lie strictly inside (0, 1)");
    }
    out.d.push_back(std::log(p / (1.0 - p)));
  }
  double d0 = out.d[zero_at];
  for (double d : out.d) out.j.push_back((d - d0) / 4.0);
  return out;
}

}  // namespace branchsim
