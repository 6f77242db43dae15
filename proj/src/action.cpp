#include "branchsim/action.hpp"

#include <cmath>
#include <map>

#include "branchsim/errors.hpp"
#include "branchsim/weights.hpp"

namespace branchsim {

ActionKind parse_action_kind(const std::string& name) {
  if (name == "free_particle") return ActionKind::FreeParticle;
  if (name == "harmonic_oscillator") return ActionKind::HarmonicOscillator;
  if (name == "entropic") return ActionKind::Entropic;
  if (name == "table") return ActionKind::Table;
  fail(ErrorCode::BadModelKind, "unknown action kind '" + name + "'");
}

std::string action_kind_name(ActionKind kind) {
  switch (kind) {
    case ActionKind::FreeParticle: return "free_particle";
    case ActionKind::HarmonicOscillator: return "harmonic_oscillator";
    case ActionKind::Entropic: return "entropic";
    case ActionKind::Table: return "table";
  }
  fail(ErrorCode::BadModelKind, "unknown action kind value");
}

void validate_action_model(const ActionModel& model) {
  auto positive = [](double v, const char* what) {
    if (!(v > 0) || !std::isfinite(v)) {
      fail(ErrorCode::BadConfiguration, std::string(what) + " must be positive and finite");
    }
  };
  switch (model.kind) {
    case ActionKind::HarmonicOscillator:
      if (!(model.omega >= 0) || !std::isfinite(model.omega)) {
        fail(ErrorCode::BadConfiguration, "omega must be non-negative and finite");
      }
      [[fallthrough]];
    case ActionKind::FreeParticle:
      positive(model.mass, "mass");
      positive(model.time_step, "time step");
      positive(model.spacing, "lattice spacing");
      break;
    case ActionKind::Entropic:
      positive(model.alpha, "alpha");
      break;
    case ActionKind::Table:
      for (double v : model.table) {
        if (!std::isfinite(v)) fail(ErrorCode::BadConfiguration, "table actions must be finite");
      }
      break;
  }
}

namespace {

// Shared step accumulator: dx2/x2 are the squared displacement and squared
// left-endpoint position of one time step.
double physical_step(double dx2, double x2, const ActionModel& model) {
  double eps = model.time_step;
  double s = 0.5 * model.mass * dx2 / (eps * eps) * eps;
  if (model.kind == ActionKind::HarmonicOscillator) {
    s -= 0.5 * model.mass * model.omega * model.omega * x2 * eps;
  }
  return s;
}

void require_physical(const ActionModel& model) {
  if (model.kind != ActionKind::FreeParticle && model.kind != ActionKind::HarmonicOscillator) {
    fail(ErrorCode::BadModelKind,
         "lattice actions are defined for the physical kinds, not '" +
             action_kind_name(model.kind) + "'");
  }
  validate_action_model(model);
}

}  // namespace

double lattice_action(const std::vector<double>& trajectory, const ActionModel& model) {
  require_physical(model);
  if (trajectory.size() < 2) {
    fail(ErrorCode::BadConfiguration, "a trajectory needs at least two samples");
  }
  double total = 0.0;
  for (std::size_t t = 0; t + 1 < trajectory.size(); ++t) {
    double dx = trajectory[t + 1] - trajectory[t];
    total += physical_step(dx * dx, trajectory[t] * trajectory[t], model);
  }
  return total;
}

double lattice_action_nd(const std::vector<std::vector<double>>& trajectory,
                         const ActionModel& model) {
  require_physical(model);
  if (trajectory.size() < 2) {
    fail(ErrorCode::BadConfiguration, "a trajectory needs at least two samples");
  }
  double total = 0.0;
  for (std::size_t t = 0; t + 1 < trajectory.size(); ++t) {
    const auto& here = trajectory[t];
    const auto& next = trajectory[t + 1];
    if (next.size() != here.size()) {
      fail(ErrorCode::DimensionMismatch, "trajectory points change dimension mid-path");
    }
    double dx2 = 0.0;
    double x2 = 0.0;
    for (std::size_t d = 0; d < here.size(); ++d) {
      double dx = next[d] - here[d];
      dx2 += dx * dx;
      x2 += here[d] * here[d];
    }
    total += physical_step(dx2, x2, model);
  }
  return total;
}

std::vector<double> path_actions(const BranchedComplex& complex, const PathSet& paths,
                                 const ActionModel& model) {
  if (model.kind == ActionKind::Table) {
    validate_action_model(model);
    if (model.table.size() != paths.paths.size()) {
      fail(ErrorCode::DimensionMismatch,
           "table has " + std::to_string(model.table.size()) + " actions for " +
               std::to_string(paths.paths.size()) + " paths");
    }
    return model.table;
  }
  if (model.kind == ActionKind::Entropic) {
    fail(ErrorCode::BadModelKind,
         "entropic actions are assembled from microstate_entropy, not per-path trajectories");
  }
  std::vector<double> actions;
  actions.reserve(paths.paths.size());
  for (const auto& path : paths.paths) {
    std::vector<std::vector<double>> points = path_layer_positions(complex, path);
    for (auto& p : points) {
      for (double& c : p) c *= model.spacing;
    }
    actions.push_back(lattice_action_nd(points, model));
  }
  return actions;
}

FieldEnsembleModel make_field_model(double entropy_rate) {
  if (!(entropy_rate > 0) || !std::isfinite(entropy_rate)) {
    fail(ErrorCode::BadConfiguration, "field entropy rate must be positive and finite");
  }
  FieldEnsembleModel model;
  model.entropy_rate = entropy_rate;
  model.symbol_count = std::lround(std::exp(entropy_rate));
  if (model.symbol_count < 1) model.symbol_count = 1;
  return model;
}

mpz_class field_microstate_count(const BranchedComplex& complex,
                                 const FieldEnsembleModel& model) {
  if (model.symbol_count < 1) {
    fail(ErrorCode::BadConfiguration, "field alphabet must have at least one symbol");
  }
  const unsigned long m = static_cast<unsigned long>(model.symbol_count);
  mpz_class total = 1;
  for (std::size_t s = 0; s < complex.step_count(); ++s) {
    long t = complex.t_min() + static_cast<long>(s);
    // Cells: simplices of this step keyed by their (canonically ordered)
    // vertex set. A cell of g simplices shares an unordered multiset of g
    // symbols, C(m+g-1, g) ways; cells are independent.
    std::map<std::string, unsigned long> cell_sizes;
    for (std::size_t idx : complex.step_simplices(t)) {
      const Simplex& sx = complex.simplices()[idx];
      std::string key;
      for (const auto& v : sx.vertices) {
        key += v;
        key += '|';
      }
      ++cell_sizes[key];
    }
    for (const auto& [key, g] : cell_sizes) {
      mpz_class ways;
      mpz_bin_uiui(ways.get_mpz_t(), m + g - 1, g);
      total *= ways;
    }
  }
  return total;
}

double microstate_entropy(const std::vector<std::size_t>& path, const BranchedComplex& complex,
                          const Rational& dw, const FieldEnsembleModel& field_model,
                          long long node_budget) {
  if (path.size() != complex.step_count()) {
    fail(ErrorCode::BadConfiguration, "the path must cross every time step exactly once");
  }
  for (std::size_t k = 0; k < path.size(); ++k) {
    if (path[k] >= complex.simplices().size()) {
      fail(ErrorCode::BadConfiguration, "path refers to a simplex outside the complex");
    }
    long expected = complex.t_min() + static_cast<long>(k);
    if (complex.simplices()[path[k]].t_start != expected) {
      fail(ErrorCode::BadConfiguration, "path simplices must follow consecutive time steps");
    }
  }
  if (!complex.total_weight()) {
    fail(ErrorCode::BadConfiguration, "microstate counting needs the complex's total weight");
  }
  mpz_class n_w = count_lattice_configs(complex, complex.lower_bound(), *complex.total_weight(),
                                        dw, node_budget);
  mpz_class n_phi = field_microstate_count(complex, field_model);
  return weight_entropy(n_w * n_phi);
}

double entropic_action(double s_en, double alpha) {
  if (!(alpha > 0) || !std::isfinite(alpha)) {
    fail(ErrorCode::BadConfiguration, "alpha must be positive and finite");
  }
  if (!std::isfinite(s_en)) {
    fail(ErrorCode::BadConfiguration, "entropy must be finite");
  }
  return -alpha * s_en;
}

ModelConfig model_from_json(const nlohmann::json& block) {
  if (!block.is_object()) fail(ErrorCode::BadConfiguration, "the model block must be an object");
  for (const auto& [key, value] : block.items()) {
    (void)value;
    if (key != "kind" && key != "m" && key != "omega" && key != "eps" && key != "a" &&
        key != "alpha" && key != "table" && key != "b") {
      fail(ErrorCode::BadConfiguration, "unknown model key '" + key + "'");
    }
  }
  ModelConfig config;
  config.action.kind = parse_action_kind(block.value("kind", "free_particle"));
  auto number = [&](const char* key, double fallback) {
    if (!block.contains(key)) return fallback;
    if (!block[key].is_number()) {
      fail(ErrorCode::BadConfiguration, std::string("model key '") + key + "' must be a number");
    }
    return block[key].get<double>();
  };
  config.action.mass = number("m", 1.0);
  config.action.omega = number("omega", 1.0);
  config.action.time_step = number("eps", 1.0);
  config.action.spacing = number("a", 1.0);
  config.action.alpha = number("alpha", 1.0);
  if (block.contains("table")) {
    if (!block["table"].is_array()) {
      fail(ErrorCode::BadConfiguration, "model key 'table' must be an array of numbers");
    }
    for (const auto& v : block["table"]) {
      if (!v.is_number()) {
        fail(ErrorCode::BadConfiguration, "model key 'table' must be an array of numbers");
      }
      config.action.table.push_back(v.get<double>());
    }
  }
  validate_action_model(config.action);
  config.field = make_field_model(number("b", std::log(2.0)));
  return config;
}

nlohmann::json model_to_json(const ModelConfig& config) {
  nlohmann::json block{
      {"kind", action_kind_name(config.action.kind)}, {"m", config.action.mass},
      {"omega", config.action.omega},                 {"eps", config.action.time_step},
      {"a", config.action.spacing},                   {"alpha", config.action.alpha},
      {"b", config.field.entropy_rate},
  };
  if (!config.action.table.empty()) block["table"] = config.action.table;
  return block;
}

}  // namespace branchsim
