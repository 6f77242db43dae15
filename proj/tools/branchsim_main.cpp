#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "branchsim/action.hpp"
#include "branchsim/builders.hpp"
#include "branchsim/collapse.hpp"
#include "branchsim/complex.hpp"
#include "branchsim/errors.hpp"
#include "branchsim/paths.hpp"
#include "branchsim/propagator.hpp"
#include "branchsim/report.hpp"
#include "branchsim/weights.hpp"

namespace {

using branchsim::ErrorCode;
using nlohmann::ordered_json;
using cplx = std::complex<double>;

// All tunables with their defaults; a fresh instance is the single source of
// truth for defaults.json and the --help strings.
struct Options {
  std::string input;
  std::string output;
  std::string format = "json";
  std::uint64_t seed = 1;
  unsigned threads = 1;
  long long budget = 10000000;

  // nullspace
  bool no_basis = false;

  // count
  std::string total;  // rational "p/q"; empty takes the file's total_weight
  std::string dw = "1";

  // paths
  std::vector<std::string> from;
  std::vector<std::string> to;
  std::size_t cap = 100000;
  bool no_list = false;

  // propagate
  std::string model = "free_particle";
  double mass = 1.0;
  double omega = 1.0;
  double eps = 1.0;
  double spacing = 1.0;
  double k = 0.0;
  double hbar = 1.0;
  double w_e = 1.0;
  double zeta = 0.0;  // 0 resolves to 1/|ensemble|
  std::size_t n_samples = 10000;
  long sites = 4;
  long steps = 4;
  long source = 0;
  long sink = 0;

  // toy01
  double b = std::log(2.0);
  double floor_l = 1.0;
  double w_total = 4.0;
  std::size_t t_steps = 3;
  double dw_toy = 1.0;

  // collapse
  std::vector<double> weights{1.0, 3.0};
  double l_threshold = 0.0;
  double delta = 0.05;
  double bias = 0.0;
  std::size_t max_steps = 50000000;

  // born
  std::vector<double> p;
  std::size_t n_trials = 100000;
  double born_w_total = 1.0;
  double born_delta = 0.0;  // 0 resolves to w_total / 64

  // deficit
  std::vector<std::size_t> volumes{2, 3, 4, 5, 6, 7, 8, 9, 10};

  // nonlinearity
  double u0 = 1.0;
  double u_max = 2.0;
  std::size_t grid_points = 41;
};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadConfiguration:
    case ErrorCode::InvalidSpec:
    case ErrorCode::BadModelKind:
      return 2;
    case ErrorCode::MalformedDescription:
    case ErrorCode::DanglingFace:
    case ErrorCode::WeightBelowBound:
    case ErrorCode::UnknownSimplex:
    case ErrorCode::BadInitialState:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::NonOrthogonalDecomposition:
    case ErrorCode::UnnormalizedState:
      return 3;
    case ErrorCode::BudgetExceeded:
    case ErrorCode::PathExplosion:
      return 4;
    case ErrorCode::ZeroMicrostates:
    case ErrorCode::DegenerateEnsemble:
    case ErrorCode::DegenerateProbability:
      return 5;
  }
  return 1;
}

branchsim::Rational parse_rational(const std::string& text, const std::string& what) {
  try {
    branchsim::Rational r(text);
    r.canonicalize();
    return r;
  } catch (const std::invalid_argument&) {
    branchsim::fail(ErrorCode::BadConfiguration,
                    what + " must be an integer or a p/q fraction, got '" + text + "'");
  }
}

branchsim::BranchedComplex require_input(const Options& opt) {
  if (opt.input.empty()) {
    branchsim::fail(ErrorCode::BadConfiguration, "this subcommand needs --input <file>");
  }
  return branchsim::load_complex(opt.input);
}

std::optional<std::string> output_of(const Options& opt) {
  if (opt.output.empty()) return std::nullopt;
  return opt.output;
}

void require_json(const Options& opt, const std::string& subcommand) {
  if (opt.format != "json") {
    branchsim::fail(ErrorCode::BadConfiguration, subcommand + " only emits JSON reports");
  }
}

ordered_json json_complex_number(const cplx& z) {
  return ordered_json{{"re", z.real()}, {"im", z.imag()}};
}

// Shared part of every config echo. The worker count is deliberately not
// part of it: outputs must be byte-identical for any --threads value.
ordered_json base_config(const Options& opt) {
  ordered_json config;
  if (!opt.input.empty()) config["input"] = opt.input;
  config["format"] = opt.format;
  config["seed"] = opt.seed;
  return config;
}

void emit(const Options& opt, const std::string& subcommand, const ordered_json& config,
          const ordered_json& body) {
  branchsim::write_text(output_of(opt),
                        branchsim::report_envelope(subcommand, config, body).dump(2) + "\n");
}

// ---------------------------------------------------------------- check ---

int run_check(const Options& opt) {
  auto complex = require_input(opt);
  if (!complex.has_weights()) {
    branchsim::fail(ErrorCode::BadConfiguration,
                    "the description carries no weights; nothing to check");
  }
  bool conserved = branchsim::weights_conserved(complex);

  // Per-layer totals; conservation in the full sense also keeps these equal.
  std::vector<std::string> totals;
  bool totals_equal = true;
  branchsim::Rational first_total;
  for (std::size_t s = 0; s < complex.step_count(); ++s) {
    branchsim::Rational sum = 0;
    long t = complex.t_min() + static_cast<long>(s);
    for (std::size_t idx : complex.step_simplices(t)) {
      sum += *complex.simplices()[idx].weight;
    }
    if (s == 0) {
      first_total = sum;
    } else if (sum != first_total) {
      totals_equal = false;
    }
    totals.push_back(sum.get_str());
  }

  bool pass = conserved && totals_equal;
  ordered_json config = base_config(opt);
  ordered_json body;
  body["simplices"] = complex.simplices().size();
  body["interior_faces"] = branchsim::boundary_matrix(complex).rows();
  body["flux_conserved"] = conserved;
  body["layer_totals"] = totals;
  body["layer_totals_equal"] = totals_equal;
  body["verdict"] = pass ? "PASS" : "FAIL";
  emit(opt, "check", config, body);
  return pass ? 0 : 5;
}

// ------------------------------------------------------------ nullspace ---

int run_nullspace(const Options& opt) {
  require_json(opt, "nullspace");
  auto complex = require_input(opt);
  auto d = branchsim::boundary_matrix(complex);
  auto ns = branchsim::null_space(d);

  ordered_json config = base_config(opt);
  config["basis"] = !opt.no_basis;
  ordered_json body;
  body["rows"] = d.rows();
  body["columns"] = d.cols();
  body["rank"] = ns.rank;
  body["nullity"] = ns.nullity;
  if (!opt.no_basis) {
    ordered_json basis = ordered_json::array();
    for (const auto& vec : ns.basis_vectors) {
      ordered_json row = ordered_json::array();
      for (const auto& v : vec) row.push_back(v.get_str());
      basis.push_back(row);
    }
    body["basis"] = basis;
    body["simplex_order"] = d.simplex_ids;
  }
  emit(opt, "nullspace", config, body);
  return 0;
}

// ---------------------------------------------------------------- count ---

int run_count(const Options& opt) {
  require_json(opt, "count");
  auto complex = require_input(opt);
  branchsim::Rational total;
  if (!opt.total.empty()) {
    total = parse_rational(opt.total, "--total");
  } else if (complex.total_weight()) {
    total = *complex.total_weight();
  } else {
    branchsim::fail(ErrorCode::BadConfiguration,
                    "no --total given and the description stores none");
  }
  branchsim::Rational dw = parse_rational(opt.dw, "--dw");

  auto count =
      branchsim::count_lattice_configs(complex, complex.lower_bound(), total, dw, opt.budget);

  ordered_json config = base_config(opt);
  config["total"] = total.get_str();
  config["dw"] = dw.get_str();
  config["budget"] = opt.budget;
  ordered_json body;
  body["lower_bound"] = complex.lower_bound().get_str();
  body["count"] = count.get_str();
  if (count > 0) {
    body["entropy_nats"] = branchsim::weight_entropy(count);
  } else {
    body["entropy_nats"] = nullptr;
  }
  emit(opt, "count", config, body);
  return count > 0 ? 0 : 5;
}

// ---------------------------------------------------------------- paths ---

int run_paths(const Options& opt) {
  auto complex = require_input(opt);
  auto paths = branchsim::enumerate_paths(complex, opt.from, opt.to, opt.cap);

  ordered_json config = base_config(opt);
  config["from"] = opt.from;
  config["to"] = opt.to;
  config["cap"] = opt.cap;

  if (opt.format == "csv") {
    // Membership matrix: one row per simplex, one column per path.
    auto a = branchsim::incidence_matrix(paths);
    std::vector<std::string> header{"simplex"};
    for (std::size_t i = 0; i < paths.paths.size(); ++i) {
      header.push_back("p" + std::to_string(i));
    }
    std::vector<std::vector<std::string>> rows;
    for (std::size_t s = 0; s < a.rows(); ++s) {
      std::vector<std::string> row{complex.simplices()[s].id};
      for (std::size_t i = 0; i < a.cols(); ++i) {
        row.push_back(std::to_string(a.entries[s][i]));
      }
      rows.push_back(std::move(row));
    }
    branchsim::write_text(output_of(opt), branchsim::csv_table("paths", config, header, rows));
  } else {
    ordered_json body;
    body["path_count"] = paths.paths.size();
    body["step_count"] = paths.step_count;
    body["sources"] = paths.source_ids;
    body["targets"] = paths.target_ids;
    if (!opt.no_list) {
      ordered_json listing = ordered_json::array();
      for (const auto& path : paths.paths) {
        ordered_json ids = ordered_json::array();
        for (std::size_t idx : path) ids.push_back(complex.simplices()[idx].id);
        listing.push_back(ids);
      }
      body["paths"] = listing;
    }
    emit(opt, "paths", config, body);
  }
  return paths.paths.empty() ? 5 : 0;
}

// ------------------------------------------------------------ propagate ---

branchsim::ActionModel model_from_flags(const Options& opt) {
  branchsim::ActionModel model;
  model.kind = branchsim::parse_action_kind(opt.model);
  if (model.kind != branchsim::ActionKind::FreeParticle &&
      model.kind != branchsim::ActionKind::HarmonicOscillator) {
    branchsim::fail(ErrorCode::BadModelKind,
                    "propagate needs a physical action model (free_particle or "
                    "harmonic_oscillator)");
  }
  model.mass = opt.mass;
  model.omega = opt.omega;
  model.time_step = opt.eps;
  model.spacing = opt.spacing;
  branchsim::validate_action_model(model);
  return model;
}

int run_propagate(const Options& opt) {
  if (opt.k < 0 || !std::isfinite(opt.k)) {
    branchsim::fail(ErrorCode::BadConfiguration, "--k must be non-negative");
  }
  if (opt.hbar <= 0 || !std::isfinite(opt.hbar)) {
    branchsim::fail(ErrorCode::BadConfiguration, "--hbar must be positive");
  }
  auto model = model_from_flags(opt);

  bool grid_mode = opt.input.empty();
  std::optional<branchsim::BranchedComplex> complex;
  std::vector<std::string> from = opt.from;
  std::vector<std::string> to = opt.to;
  if (grid_mode) {
    if (opt.sites < 1 || opt.steps < 1) {
      branchsim::fail(ErrorCode::BadConfiguration, "--sites and --steps must be at least 1");
    }
    if (opt.source < 0 || opt.source >= opt.sites || opt.sink < 0 || opt.sink >= opt.sites) {
      branchsim::fail(ErrorCode::BadConfiguration, "--source and --sink must name grid sites");
    }
    complex = branchsim::builders::site_grid(static_cast<std::size_t>(opt.sites),
                                             static_cast<std::size_t>(opt.steps));
    from.clear();
    to.clear();
    for (long s = 0; s < opt.sites; ++s) {
      from.push_back("s0f" + std::to_string(opt.source) + "t" + std::to_string(s));
      to.push_back("s" + std::to_string(opt.steps - 1) + "f" + std::to_string(s) + "t" +
                   std::to_string(opt.sink));
    }
  } else {
    complex = branchsim::load_complex(opt.input);
  }

  // Exact enumeration when the ensemble fits under the cap.
  std::optional<branchsim::PathSet> paths;
  try {
    paths = branchsim::enumerate_paths(*complex, from, to, opt.cap);
  } catch (const branchsim::Error& e) {
    if (e.code() != ErrorCode::PathExplosion) throw;
  }
  std::vector<double> actions;
  if (paths) actions = branchsim::path_actions(*complex, *paths, model);

  ordered_json config = base_config(opt);
  config["model"] = branchsim::action_kind_name(model.kind);
  config["mass"] = opt.mass;
  if (model.kind == branchsim::ActionKind::HarmonicOscillator) config["omega"] = opt.omega;
  config["eps"] = opt.eps;
  config["spacing"] = opt.spacing;
  config["k"] = opt.k;
  config["hbar"] = opt.hbar;
  config["w_e"] = opt.w_e;
  config["zeta"] = opt.zeta;
  config["n_samples"] = opt.n_samples;
  config["cap"] = opt.cap;
  config["budget"] = opt.budget;
  if (grid_mode) {
    config["sites"] = opt.sites;
    config["steps"] = opt.steps;
    config["source"] = opt.source;
    config["sink"] = opt.sink;
  }

  if (opt.format == "csv") {
    if (!paths) {
      branchsim::fail(ErrorCode::BadConfiguration,
                      "per-path CSV needs an ensemble below the enumeration cap");
    }
    double zeta = opt.zeta > 0 ? opt.zeta : 1.0 / static_cast<double>(actions.size());
    auto probs = branchsim::path_probabilities(actions, opt.k);
    std::vector<std::string> header{"path", "action", "damped_weight", "probability", "re",
                                    "im"};
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < actions.size(); ++i) {
      cplx term = zeta * opt.w_e * std::exp(-opt.k * actions[i]) *
                  std::polar(1.0, actions[i] / opt.hbar);
      rows.push_back({std::to_string(i), branchsim::format_double(actions[i]),
                      branchsim::format_double(std::exp(-opt.k * actions[i])),
                      branchsim::format_double(probs[i]),
                      branchsim::format_double(term.real()),
                      branchsim::format_double(term.imag())});
    }
    branchsim::write_text(output_of(opt),
                          branchsim::csv_table("propagate", config, header, rows));
    return 0;
  }

  ordered_json body;
  body["mode"] = grid_mode ? "grid" : "complex";
  if (grid_mode) {
    cplx kernel = branchsim::transfer_matrix_propagator(
        model, opt.sites, opt.steps, opt.source, opt.sink, opt.k, opt.hbar,
        static_cast<std::size_t>(opt.budget));
    body["kernel"] = json_complex_number(kernel);
  }
  if (paths) {
    double zeta = opt.zeta > 0 ? opt.zeta : 1.0 / static_cast<double>(actions.size());
    body["path_count"] = paths->paths.size();
    body["zeta_resolved"] = zeta;
    std::vector<double> uniform(actions.size(), opt.w_e);
    body["z_exact"] = json_complex_number(branchsim::amplitude_sum(uniform, actions, opt.hbar));
    body["e_z"] = json_complex_number(
        branchsim::expected_amplitude(actions, opt.k, opt.hbar, opt.w_e, zeta));
    if (opt.n_samples > 0) {
      auto mc = branchsim::monte_carlo_amplitude(actions, opt.k, opt.hbar, opt.n_samples,
                                                 opt.seed, opt.w_e, zeta, opt.threads);
      ordered_json mc_json;
      mc_json["estimate"] = json_complex_number(mc.estimate);
      mc_json["std_error"] = mc.std_error;
      mc_json["n_samples"] = mc.n_samples;
      body["mc"] = mc_json;
    }
  } else {
    body["path_count"] = nullptr;
    body["note"] = "path ensemble above the cap; exact sums skipped";
    if (opt.n_samples > 0 && from.empty() && to.empty()) {
      auto mc = branchsim::monte_carlo_amplitude_ancestral(
          *complex, model, opt.k, opt.hbar, opt.n_samples, opt.seed, opt.w_e,
          opt.zeta > 0 ? std::optional<double>(opt.zeta) : std::nullopt, opt.threads);
      ordered_json mc_json;
      mc_json["estimate"] = json_complex_number(mc.estimate);
      mc_json["std_error"] = mc.std_error;
      mc_json["n_samples"] = mc.n_samples;
      body["mc"] = mc_json;
    }
  }
  emit(opt, "propagate", config, body);
  return 0;
}

// ---------------------------------------------------------------- toy01 ---

int run_toy01(const Options& opt) {
  require_json(opt, "toy01");
  branchsim::ToyModelSpec spec;
  spec.b = opt.b;
  spec.L = opt.floor_l;
  spec.w_T = opt.w_total;
  spec.T = opt.t_steps;
  spec.dw = opt.dw_toy;
  auto ent = branchsim::toy_entropies(spec);
  double threshold = branchsim::collapse_threshold(opt.b, opt.floor_l);

  // The verdict grants the fused pair only the lower edge of its field
  // bracket, the same comparison the threshold formula is built from.
  double fused_floor = ent.s_B_weight + ent.s_B_field_lo;
  std::string verdict = fused_floor > ent.s_A   ? "fused"
                        : fused_floor < ent.s_A ? "separated"
                                                : "tie";

  ordered_json config = base_config(opt);
  config["b"] = opt.b;
  config["L"] = opt.floor_l;
  config["w_total"] = opt.w_total;
  config["T"] = opt.t_steps;
  config["dw"] = opt.dw_toy;
  ordered_json body;
  body["s_A"] = ent.s_A;
  body["s_B_weight"] = ent.s_B_weight;
  body["s_B_field"] = ordered_json{ent.s_B_field_lo, ent.s_B_field_hi};
  body["threshold"] = threshold;
  body["verdict"] = verdict;
  emit(opt, "toy01", config, body);
  return 0;
}

// -------------------------------------------------------------- collapse ---

int run_collapse(const Options& opt) {
  auto run = branchsim::simulate_collapse(opt.weights, opt.l_threshold, opt.delta, opt.seed,
                                          opt.max_steps, true, opt.bias);

  ordered_json config = base_config(opt);
  config["weights"] = opt.weights;
  config["l_threshold"] = opt.l_threshold;
  config["delta"] = opt.delta;
  config["bias"] = opt.bias;
  config["max_steps"] = opt.max_steps;

  if (opt.format == "csv") {
    std::vector<std::string> header{"step"};
    for (std::size_t r = 0; r < opt.weights.size(); ++r) {
      header.push_back("w" + std::to_string(r));
    }
    std::vector<std::vector<std::string>> rows;
    for (std::size_t s = 0; s < run.trajectory.size(); ++s) {
      std::vector<std::string> row{std::to_string(s)};
      for (double w : run.trajectory[s]) row.push_back(branchsim::format_double(w));
      rows.push_back(std::move(row));
    }
    branchsim::write_text(output_of(opt),
                          branchsim::csv_table("collapse", config, header, rows));
    return 0;
  }

  ordered_json body;
  body["outcome"] = run.outcome;
  body["steps"] = run.trajectory.size() - 1;
  body["final_weights"] = run.final_state.outcome_weights;
  emit(opt, "collapse", config, body);
  return 0;
}

// ------------------------------------------------------------------ born ---

int run_born(const Options& opt) {
  require_json(opt, "born");
  if (opt.p.empty()) {
    branchsim::fail(ErrorCode::BadConfiguration, "born needs --p with outcome probabilities");
  }
  // Orthogonal components along the coordinate axes carrying the requested
  // squared norms; born_statistics re-validates them.
  std::vector<std::vector<cplx>> components;
  for (std::size_t r = 0; r < opt.p.size(); ++r) {
    if (opt.p[r] < 0 || !std::isfinite(opt.p[r])) {
      branchsim::fail(ErrorCode::BadConfiguration, "--p entries must be non-negative");
    }
    std::vector<cplx> psi(opt.p.size(), cplx(0, 0));
    psi[r] = cplx(std::sqrt(opt.p[r]), 0);
    components.push_back(std::move(psi));
  }
  auto report = branchsim::born_statistics(components, opt.n_trials, opt.seed,
                                           opt.born_w_total, opt.born_delta, opt.threads);

  ordered_json config = base_config(opt);
  config["p"] = opt.p;
  config["n"] = opt.n_trials;
  config["w_total"] = opt.born_w_total;
  config["delta"] = opt.born_delta;
  ordered_json body;
  body["n_trials"] = report.n_trials;
  body["counts"] = report.counts;
  body["frequencies"] = report.frequencies;
  body["ci_low"] = report.ci_low;
  body["ci_high"] = report.ci_high;
  body["chi_squared"] = report.chi_squared;
  emit(opt, "born", config, body);
  return 0;
}

// --------------------------------------------------------------- deficit ---

int run_deficit(const Options& opt) {
  auto scan =
      branchsim::entropy_deficit_scan(opt.volumes, static_cast<std::size_t>(opt.budget));

  ordered_json config = base_config(opt);
  config["volumes"] = opt.volumes;
  config["budget"] = opt.budget;

  if (opt.format == "csv") {
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < scan.volumes.size(); ++i) {
      rows.push_back({std::to_string(scan.volumes[i]), std::to_string(scan.deficits[i])});
    }
    // The fit rides along in the preamble.
    ordered_json annotated = config;
    annotated["slope"] = scan.slope;
    annotated["intercept"] = scan.intercept;
    annotated["r_squared"] = scan.r_squared;
    branchsim::write_text(
        output_of(opt),
        branchsim::csv_table("deficit", annotated, {"volume", "deficit"}, rows));
    return 0;
  }

  ordered_json body;
  body["volumes"] = scan.volumes;
  body["deficits"] = scan.deficits;
  body["slope"] = scan.slope;
  body["intercept"] = scan.intercept;
  body["r_squared"] = scan.r_squared;
  emit(opt, "deficit", config, body);
  return 0;
}

// ---------------------------------------------------------- nonlinearity ---

int run_nonlinearity(const Options& opt) {
  if (opt.grid_points < 3 || opt.grid_points % 2 == 0) {
    branchsim::fail(ErrorCode::BadConfiguration,
                    "--grid-points must be odd and at least 3 so the grid contains u = 0");
  }
  if (!std::isfinite(opt.u_max) || opt.u_max <= 0) {
    branchsim::fail(ErrorCode::BadConfiguration, "--u-max must be positive");
  }
  std::size_t center = (opt.grid_points - 1) / 2;
  double step = opt.u_max / static_cast<double>(center);
  std::vector<double> grid(opt.grid_points);
  for (std::size_t i = 0; i < opt.grid_points; ++i) {
    grid[i] = (static_cast<double>(i) - static_cast<double>(center)) * step;
  }

  // Demonstration channel: the response drives a logistic probability whose
  // log-odds is 4 f(u), so the recovered coupling series equals f exactly.
  std::vector<double> f(grid.size()), p(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    f[i] = branchsim::tanh_response(grid[i], opt.u0);
    p[i] = 1.0 / (1.0 + std::exp(-4.0 * f[i]));
  }
  auto series = branchsim::log_odds_statistic(p, grid);

  ordered_json config = base_config(opt);
  config["u0"] = opt.u0;
  config["u_max"] = opt.u_max;
  config["grid_points"] = opt.grid_points;

  if (opt.format == "csv") {
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      rows.push_back({branchsim::format_double(grid[i]), branchsim::format_double(f[i]),
                      branchsim::format_double(p[i]), branchsim::format_double(series.d[i]),
                      branchsim::format_double(series.j[i])});
    }
    branchsim::write_text(
        output_of(opt),
        branchsim::csv_table("nonlinearity", config, {"u", "f", "p", "d", "j"}, rows));
    return 0;
  }

  ordered_json body;
  body["u"] = grid;
  body["f"] = f;
  body["p"] = p;
  body["d"] = series.d;
  body["j"] = series.j;
  emit(opt, "nonlinearity", config, body);
  return 0;
}

// -------------------------------------------------------------- defaults ---

int write_defaults(const Options& opt) {
  Options d;  // pristine defaults
  ordered_json out;
  out["artifact"] = branchsim::kArtifactName;
  out["version"] = branchsim::kArtifactVersion;
  out["global"] = {{"format", d.format}, {"seed", d.seed}, {"threads", d.threads},
                   {"budget", d.budget}};
  out["count"] = {{"dw", d.dw}};
  out["paths"] = {{"cap", d.cap}};
  out["propagate"] = {{"model", d.model}, {"mass", d.mass},     {"omega", d.omega},
                      {"eps", d.eps},     {"spacing", d.spacing}, {"k", d.k},
                      {"hbar", d.hbar},   {"w_e", d.w_e},       {"zeta", d.zeta},
                      {"n_samples", d.n_samples}, {"cap", d.cap}, {"sites", d.sites},
                      {"steps", d.steps}, {"source", d.source}, {"sink", d.sink}};
  out["toy01"] = {{"b", d.b}, {"L", d.floor_l}, {"w_total", d.w_total}, {"T", d.t_steps},
                  {"dw", d.dw_toy}};
  out["collapse"] = {{"weights", d.weights},  {"l_threshold", d.l_threshold},
                     {"delta", d.delta},      {"bias", d.bias},
                     {"max_steps", d.max_steps}};
  out["born"] = {{"n", d.n_trials}, {"w_total", d.born_w_total}, {"delta", d.born_delta}};
  out["deficit"] = {{"volumes", d.volumes}};
  out["nonlinearity"] = {{"u0", d.u0}, {"u_max", d.u_max}, {"grid_points", d.grid_points}};

  std::string target = opt.output.empty() ? "defaults.json" : opt.output;
  branchsim::write_text(target, out.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  CLI::App app{"finite branched-complex path sums: conservation, counting, propagation, and "
               "collapse statistics"};
  app.require_subcommand(0, 1);

  app.add_option("--input", opt.input, "complex description file (JSON)");
  app.add_option("--output", opt.output, "write the report here instead of stdout");
  app.add_option("--format", opt.format, "report format: json or csv")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  app.add_option("--seed", opt.seed, "base RNG seed; recorded in every report")
      ->capture_default_str();
  app.add_option("--threads", opt.threads, "worker threads; never changes output bytes")
      ->capture_default_str();
  app.add_option("--budget", opt.budget, "node budget for exact counting and kernels")
      ->capture_default_str();
  bool defaults_flag = false;
  app.add_flag("--write-defaults", defaults_flag, "write defaults.json and exit");

  auto* check = app.add_subcommand("check", "verify exact weight conservation of a description");
  check->fallthrough();

  auto* nullspace =
      app.add_subcommand("nullspace", "rank, nullity, and an exact kernel basis of the "
                                      "conservation system");
  nullspace->fallthrough();
  nullspace->add_flag("--no-basis", opt.no_basis, "omit the basis vectors from the report");

  auto* count =
      app.add_subcommand("count", "count exact lattice weight assignments and their entropy");
  count->fallthrough();
  count->add_option("--total", opt.total, "total weight per layer (p/q; default: from file)");
  count->add_option("--dw", opt.dw, "weight grid resolution (p/q)")->capture_default_str();

  auto* paths = app.add_subcommand("paths", "enumerate source-to-target paths; csv format "
                                            "emits the path membership matrix");
  paths->fallthrough();
  paths->add_option("--from", opt.from, "source simplex ids (default: whole first step)")
      ->delimiter(',');
  paths->add_option("--to", opt.to, "target simplex ids (default: whole last step)")
      ->delimiter(',');
  paths->add_option("--cap", opt.cap, "maximum number of paths")->capture_default_str();
  paths->add_flag("--no-list", opt.no_list, "report the count only, not the paths");

  auto* propagate = app.add_subcommand(
      "propagate", "path sums, transfer-matrix kernels, and Monte Carlo estimates");
  propagate->fallthrough();
  propagate->add_option("--model", opt.model, "free_particle or harmonic_oscillator")
      ->capture_default_str();
  propagate->add_option("--mass", opt.mass, "particle mass")->capture_default_str();
  propagate->add_option("--omega", opt.omega, "oscillator frequency")->capture_default_str();
  propagate->add_option("--eps", opt.eps, "time step")->capture_default_str();
  propagate->add_option("--spacing", opt.spacing, "lattice spacing")->capture_default_str();
  propagate->add_option("--k", opt.k, "statistical damping rate")->capture_default_str();
  propagate->add_option("--hbar", opt.hbar, "phase scale")->capture_default_str();
  propagate->add_option("--w-e", opt.w_e, "common path weight")->capture_default_str();
  propagate->add_option("--zeta", opt.zeta, "normalization; 0 resolves to 1/paths")
      ->capture_default_str();
  propagate->add_option("--n-samples", opt.n_samples, "Monte Carlo samples; 0 disables")
      ->capture_default_str();
  propagate->add_option("--sites", opt.sites, "grid sites (when no --input)")
      ->capture_default_str();
  propagate->add_option("--steps", opt.steps, "grid steps (when no --input)")
      ->capture_default_str();
  propagate->add_option("--source", opt.source, "grid source site")->capture_default_str();
  propagate->add_option("--sink", opt.sink, "grid sink site")->capture_default_str();
  propagate->add_option("--from", opt.from, "source simplex ids (complex mode)")
      ->delimiter(',');
  propagate->add_option("--to", opt.to, "target simplex ids (complex mode)")->delimiter(',');
  propagate->add_option("--cap", opt.cap, "enumeration cap for the exact sums")
      ->capture_default_str();

  auto* toy01 = app.add_subcommand(
      "toy01", "two-branch sample model: entropies, threshold, and the favored configuration");
  toy01->fallthrough();
  toy01->add_option("--b", opt.b, "field entropy rate per branch step")->capture_default_str();
  toy01->add_option("--L", opt.floor_l, "weight floor per branch")->capture_default_str();
  toy01->add_option("--w-total", opt.w_total, "conserved total weight")->capture_default_str();
  toy01->add_option("--T", opt.t_steps, "step count")->capture_default_str();
  toy01->add_option("--dw", opt.dw_toy, "weight grid resolution")->capture_default_str();

  auto* collapse = app.add_subcommand(
      "collapse", "one weight-exchange walk; csv format emits the full trajectory");
  collapse->fallthrough();
  collapse->add_option("--weights", opt.weights, "initial outcome weights")
      ->delimiter(',')
      ->capture_default_str();
  collapse->add_option("--l-threshold", opt.l_threshold, "freeze-out threshold")
      ->capture_default_str();
  collapse->add_option("--delta", opt.delta, "exchange step scale")->capture_default_str();
  collapse->add_option("--bias", opt.bias, "coin bias toward the heavier outcome (breaks the "
                                           "martingale; keep 0 for Born statistics)")
      ->capture_default_str();
  collapse->add_option("--max-steps", opt.max_steps, "absorption step budget")
      ->capture_default_str();

  auto* born = app.add_subcommand(
      "born", "absorption frequencies of the collapse walk against |psi|^2 targets");
  born->fallthrough();
  born->add_option("--p", opt.p, "squared component norms, e.g. 0.25,0.75")->delimiter(',');
  born->add_option("--n", opt.n_trials, "number of trials")->capture_default_str();
  born->add_option("--w-total", opt.born_w_total, "total weight scale")->capture_default_str();
  born->add_option("--delta", opt.born_delta, "exchange step; 0 picks w_total/64")
      ->capture_default_str();

  auto* deficit = app.add_subcommand(
      "deficit", "nullity gap between connected and split templates over a volume sweep");
  deficit->fallthrough();
  deficit->add_option("--volumes", opt.volumes, "template volumes to scan")
      ->delimiter(',')
      ->capture_default_str();

  auto* nonlinearity = app.add_subcommand(
      "nonlinearity", "saturating response curve and its log-odds readout over a grid");
  nonlinearity->fallthrough();
  nonlinearity->add_option("--u0", opt.u0, "saturation scale")->capture_default_str();
  nonlinearity->add_option("--u-max", opt.u_max, "grid half-width")->capture_default_str();
  nonlinearity->add_option("--grid-points", opt.grid_points, "odd number of grid points")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (defaults_flag) return write_defaults(opt);
    if (check->parsed()) return run_check(opt);
    if (nullspace->parsed()) return run_nullspace(opt);
    if (count->parsed()) return run_count(opt);
    if (paths->parsed()) return run_paths(opt);
    if (propagate->parsed()) return run_propagate(opt);
    if (toy01->parsed()) return run_toy01(opt);
    if (collapse->parsed()) return run_collapse(opt);
    if (born->parsed()) return run_born(opt);
    if (deficit->parsed()) return run_deficit(opt);
    if (nonlinearity->parsed()) return run_nonlinearity(opt);
    std::cerr << app.help() << std::flush;
    return 2;
  } catch (const branchsim::Error& e) {
    std::cerr << "error [" << branchsim::error_code_name(e.code()) << "]: " << e.what()
              << std::endl;
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
}
