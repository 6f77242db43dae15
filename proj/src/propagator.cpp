#include "branchsim/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "branchsim/errors.hpp"
#include "branchsim/parallel.hpp"
#include "branchsim/paths.hpp"
#include "branchsim/rng.hpp"

namespace branchsim {

namespace {

void check_hbar(double hbar) {
  if (!(hbar > 0) || !std::isfinite(hbar)) {
    fail(ErrorCode::BadConfiguration, "hbar must be positive and finite");
  }
}

void check_k(double k) {
  if (!(k >= 0) || !std::isfinite(k)) {
    fail(ErrorCode::BadConfiguration, "k must be non-negative and finite");
  }
}

// Pairwise (tree) reduction; the term count fixes the bracketing, so sums
// are reproducible and the error stays logarithmic in the length.
std::complex<double> pairwise(const std::vector<std::complex<double>>& terms, std::size_t lo,
                              std::size_t hi) {
  if (hi - lo <= 8) {
    std::complex<double> s = 0;
    for (std::size_t i = lo; i < hi; ++i) s += terms[i];
    return s;
  }
  std::size_t mid = lo + (hi - lo) / 2;
  return pairwise(terms, lo, mid) + pairwise(terms, mid, hi);
}

std::complex<double> pairwise(const std::vector<std::complex<double>>& terms) {
  return terms.empty() ? std::complex<double>(0) : pairwise(terms, 0, terms.size());
}

double pairwise_real(const std::vector<double>& terms, std::size_t lo, std::size_t hi) {
  if (hi - lo <= 8) {
    double s = 0;
    for (std::size_t i = lo; i < hi; ++i) s += terms[i];
    return s;
  }
  std::size_t mid = lo + (hi - lo) / 2;
  return pairwise_real(terms, lo, mid) + pairwise_real(terms, mid, hi);
}

double pairwise_real(const std::vector<double>& terms) {
  return terms.empty() ? 0.0 : pairwise_real(terms, 0, terms.size());
}

// One time step of the model's action between departure x and arrival y
// (the potential term samples the departure point).
double one_step_action(const ActionModel& model, double x, double y) {
  double eps = model.time_step;
  double v = (y - x) / eps;
  double s = 0.5 * model.mass * v * v * eps;
  if (model.kind == ActionKind::HarmonicOscillator) {
    s -= 0.5 * model.mass * model.omega * model.omega * x * x * eps;
  }
  return s;
}

double one_step_action_nd(const ActionModel& model, const std::vector<double>& x,
                          const std::vector<double>& y) {
  double eps = model.time_step;
  double dx2 = 0.0;
  double x2 = 0.0;
  for (std::size_t d = 0; d < x.size(); ++d) {
    double dx = y[d] - x[d];
    dx2 += dx * dx;
    x2 += x[d] * x[d];
  }
  double s = 0.5 * model.mass * dx2 / (eps * eps) * eps;
  if (model.kind == ActionKind::HarmonicOscillator) {
    s -= 0.5 * model.mass * model.omega * model.omega * x2 * eps;
  }
  return s;
}

void require_physical_kind(const ActionModel& model) {
  if (model.kind != ActionKind::FreeParticle && model.kind != ActionKind::HarmonicOscillator) {
    fail(ErrorCode::BadModelKind, "the propagator needs a physical action kind, not '" +
                                      action_kind_name(model.kind) + "'");
  }
  validate_action_model(model);
}

// Phase accumulator shared by both samplers: complex sum and sum of squared
// magnitudes over unit phases, merged chunk by chunk in fixed order.
struct PhaseAcc {
  std::complex<double> sum{0.0, 0.0};
  double sum_sq = 0.0;
};

McResult finish_mc(const PhaseAcc& acc, std::size_t n, std::uint64_t seed, double scale) {
  McResult out;
  out.n_samples = n;
  out.seed = seed;
  std::complex<double> mean = acc.sum / static_cast<double>(n);
  out.estimate = scale * mean;
  if (n >= 2) {
    double var = (acc.sum_sq - static_cast<double>(n) * std::norm(mean)) /
                 static_cast<double>(n - 1);
    out.std_error = std::abs(scale) * std::sqrt(std::max(0.0, var) / static_cast<double>(n));
  }
  return out;
}

}  // namespace

std::complex<double> amplitude_sum(const std::vector<double>& path_weights,
                                   const std::vector<double>& actions, double hbar) {
  check_hbar(hbar);
  if (path_weights.size() != actions.size()) {
    fail(ErrorCode::DimensionMismatch, "weight and action vectors differ in length");
  }
  std::vector<std::complex<double>> terms(actions.size());
  for (std::size_t i = 0; i < actions.size(); ++i) {
    terms[i] = path_weights[i] * std::polar(1.0, actions[i] / hbar);
  }
  return pairwise(terms);
}

std::complex<double> expected_amplitude(const std::vector<double>& actions, double k, double hbar,
                                        double w_e, std::optional<double> zeta) {
  check_hbar(hbar);
  check_k(k);
  if (actions.empty()) {
    fail(ErrorCode::DegenerateEnsemble, "expected amplitude of an empty ensemble");
  }
  double z = zeta ? *zeta : 1.0 / static_cast<double>(actions.size());
  std::vector<std::complex<double>> terms(actions.size());
  for (std::size_t i = 0; i < actions.size(); ++i) {
    terms[i] = std::exp(-k * actions[i]) * std::polar(1.0, actions[i] / hbar);
  }
  return z * w_e * pairwise(terms);
}

std::complex<double> transfer_matrix_propagator(const ActionModel& model, long sites, long steps,
                                                long source, long sink, double k, double hbar,
                                                long long budget) {
  require_physical_kind(model);
  check_hbar(hbar);
  check_k(k);
  if (sites < 1 || steps < 1) {
    fail(ErrorCode::BadConfiguration, "the grid needs at least one site and one step");
  }
  if (source < 0 || source >= sites || sink < 0 || sink >= sites) {
    fail(ErrorCode::BadConfiguration, "source and sink must name grid sites");
  }
  if (static_cast<long long>(sites) * sites * steps > budget) {
    fail(ErrorCode::BudgetExceeded, "transfer matrix cost " + std::to_string(sites) + "^2 x " +
                                        std::to_string(steps) + " exceeds the budget");
  }

  const std::size_t n = static_cast<std::size_t>(sites);
  std::vector<std::complex<double>> m(n * n);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      double s = one_step_action(model, static_cast<double>(x) * model.spacing,
                                 static_cast<double>(y) * model.spacing);
      m[x * n + y] = std::exp(-k * s) * std::polar(1.0, s / hbar);
    }
  }

  std::vector<std::complex<double>> state(n, 0.0);
  state[static_cast<std::size_t>(source)] = 1.0;
  std::vector<std::complex<double>> next(n);
  for (long step = 0; step < steps; ++step) {
    for (std::size_t y = 0; y < n; ++y) {
      std::complex<double> acc = 0.0;
      for (std::size_t x = 0; x < n; ++x) acc += state[x] * m[x * n + y];
      next[y] = acc;
    }
    state.swap(next);
  }
  return state[static_cast<std::size_t>(sink)];
}

McResult monte_carlo_amplitude(const std::vector<double>& actions, double k, double hbar,
                               std::size_t n, std::uint64_t seed, double w_e,
                               std::optional<double> zeta, unsigned threads) {
  check_hbar(hbar);
  if (n < 1) fail(ErrorCode::BadConfiguration, "at least one sample is required");
  // path_probabilities validates k and rejects empty or non-finite ensembles.
  CategoricalSampler sampler(path_probabilities(actions, k));

  double lowest = *std::min_element(actions.begin(), actions.end());
  std::vector<double> damped(actions.size());
  for (std::size_t i = 0; i < actions.size(); ++i) damped[i] = std::exp(-k * (actions[i] - lowest));
  double log_partition = -k * lowest + std::log(pairwise_real(damped));
  double z = zeta ? *zeta : 1.0 / static_cast<double>(actions.size());
  double scale = z * w_e * std::exp(log_partition);

  PhaseAcc acc = chunked_reduce(
      n, 4096, threads, PhaseAcc{},
      [&](std::size_t lo, std::size_t hi) {
        PhaseAcc part;
        for (std::size_t i = lo; i < hi; ++i) {
          Rng rng = Rng::stream(seed, i);
          std::complex<double> phase =
              std::polar(1.0, actions[sampler.sample(rng)] / hbar);
          part.sum += phase;
          part.sum_sq += std::norm(phase);
        }
        return part;
      },
      [](PhaseAcc a, const PhaseAcc& b) {
        a.sum += b.sum;
        a.sum_sq += b.sum_sq;
        return a;
      });
  return finish_mc(acc, n, seed, scale);
}

McResult monte_carlo_amplitude_ancestral(const BranchedComplex& complex, const ActionModel& model,
                                         double k, double hbar, std::size_t n, std::uint64_t seed,
                                         double w_e, std::optional<double> zeta,
                                         unsigned threads) {
  require_physical_kind(model);
  check_hbar(hbar);
  check_k(k);
  if (n < 1) fail(ErrorCode::BadConfiguration, "at least one sample is required");

  const auto& simplices = complex.simplices();
  const std::size_t count = simplices.size();
  const long t0 = complex.t_min();
  const long t_last = t0 + static_cast<long>(complex.step_count()) - 1;

  // Scaled centroid positions of each simplex's departure and arrival layer.
  auto centroid = [&](const Simplex& s, long t) {
    std::vector<double> acc;
    std::size_t hits = 0;
    for (const std::string& vid : s.vertices) {
      const Vertex& v = complex.vertex(vid);
      if (v.t != t) continue;
      if (acc.empty()) acc.assign(v.label.size(), 0.0);
      for (std::size_t d = 0; d < v.label.size(); ++d) acc[d] += static_cast<double>(v.label[d]);
      ++hits;
    }
    for (double& x : acc) x *= model.spacing / static_cast<double>(hits);
    return acc;
  };
  std::vector<std::vector<double>> bottom(count), top(count);
  for (std::size_t i = 0; i < count; ++i) {
    bottom[i] = centroid(simplices[i], simplices[i].t_start);
    top[i] = centroid(simplices[i], simplices[i].t_start + 1);
  }

  // Backward pass: g[sigma] is the partition value of all continuations from
  // sigma, including sigma's own departure-step action term. The final step
  // closes the trajectory with its own bottom-to-top term.
  std::vector<std::vector<std::size_t>> succ = step_adjacency(complex);
  std::vector<double> g(count, 0.0);
  std::vector<double> paths_from(count, 0.0);
  std::vector<std::vector<double>> succ_weight(count);
  for (std::size_t i : complex.step_simplices(t_last)) {
    g[i] = std::exp(-k * one_step_action_nd(model, bottom[i], top[i]));
    paths_from[i] = 1.0;
  }
  for (long t = t_last - 1; t >= t0; --t) {
    for (std::size_t i : complex.step_simplices(t)) {
      succ_weight[i].reserve(succ[i].size());
      double total = 0.0;
      double ways = 0.0;
      for (std::size_t j : succ[i]) {
        double w = std::exp(-k * one_step_action_nd(model, bottom[i], bottom[j])) * g[j];
        succ_weight[i].push_back(w);
        total += w;
        ways += paths_from[j];
      }
      g[i] = total;
      paths_from[i] = ways;
    }
  }
  double partition = 0.0;
  double path_count = 0.0;
  for (std::size_t i : complex.step_simplices(t0)) {
    partition += g[i];
    path_count += paths_from[i];
  }
  if (path_count == 0.0) {
    fail(ErrorCode::DegenerateEnsemble, "the complex has no source-to-target path");
  }
  if (!(partition > 0.0) || !std::isfinite(partition)) {
    fail(ErrorCode::BadConfiguration, "the path partition under- or overflowed");
  }

  const auto& roots = complex.step_simplices(t0);
  double z = zeta ? *zeta : 1.0 / path_count;
  double scale = z * w_e * partition;

  PhaseAcc acc = chunked_reduce(
      n, 4096, threads, PhaseAcc{},
      [&](std::size_t lo, std::size_t hi) {
        PhaseAcc part;
        for (std::size_t trial = lo; trial < hi; ++trial) {
          Rng rng = Rng::stream(seed, trial);
          // Root choice proportional to its partition share.
          std::size_t cur = roots.back();
          double r = rng.next_double() * partition;
          double cum = 0.0;
          for (std::size_t i : roots) {
            cum += g[i];
            if (r < cum) {
              cur = i;
              break;
            }
          }
          double action = 0.0;
          while (!succ[cur].empty()) {
            double pick = rng.next_double() * g[cur];
            double run = 0.0;
            std::size_t chosen = succ[cur].size() - 1;
            for (std::size_t j = 0; j < succ[cur].size(); ++j) {
              run += succ_weight[cur][j];
              if (pick < run) {
                chosen = j;
                break;
              }
            }
            std::size_t nxt = succ[cur][chosen];
            action += one_step_action_nd(model, bottom[cur], bottom[nxt]);
            cur = nxt;
          }
          action += one_step_action_nd(model, bottom[cur], top[cur]);
          std::complex<double> phase = std::polar(1.0, action / hbar);
          part.sum += phase;
          part.sum_sq += std::norm(phase);
        }
        return part;
      },
      [](PhaseAcc a, const PhaseAcc& b) {
        a.sum += b.sum;
        a.sum_sq += b.sum_sq;
        return a;
      });
  return finish_mc(acc, n, seed, scale);
}

CumulantReport cumulant_corrected_expectation(const std::vector<double>& weight_samples,
                                              const std::vector<double>& action_samples,
                                              double hbar) {
  check_hbar(hbar);
  if (weight_samples.size() != action_samples.size()) {
    fail(ErrorCode::DimensionMismatch, "weight and action sample vectors differ in length");
  }
  const std::size_t n = weight_samples.size();
  if (n < 2) fail(ErrorCode::DegenerateEnsemble, "cumulant comparison needs at least 2 samples");
  const double dn = static_cast<double>(n);

  std::vector<std::complex<double>> weighted(n);
  std::vector<std::complex<double>> phases(n);
  for (std::size_t i = 0; i < n; ++i) {
    phases[i] = std::polar(1.0, action_samples[i] / hbar);
    weighted[i] = weight_samples[i] * phases[i];
  }
  double mean_w = pairwise_real(weight_samples) / dn;
  double mean_s = pairwise_real(action_samples) / dn;
  std::vector<double> centered_sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    double d = action_samples[i] - mean_s;
    centered_sq[i] = d * d;
  }
  double var_s = pairwise_real(centered_sq) / (dn - 1.0);

  CumulantReport report;
  report.exact = pairwise(weighted) / dn;
  report.factorized = mean_w * (pairwise(phases) / dn);
  report.corrected =
      mean_w * std::polar(1.0, mean_s / hbar) * std::exp(-var_s / (2.0 * hbar * hbar));
  return report;
}

}  // namespace branchsim
