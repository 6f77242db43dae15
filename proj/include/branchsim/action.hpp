#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "branchsim/complex.hpp"
#include "branchsim/linalg.hpp"
#include "branchsim/paths.hpp"

namespace branchsim {

// What assigns an action to a path: a discretized classical action
// (free_particle, harmonic_oscillator), a linear rescaling of microstate
// entropy (entropic), or explicit per-path values (table).
enum class ActionKind { FreeParticle, HarmonicOscillator, Entropic, Table };

// Maps the config spelling ("free_particle", ...) to the enum; unknown
// spellings raise BadModelKind.
ActionKind parse_action_kind(const std::string& name);
std::string action_kind_name(ActionKind kind);

struct ActionModel {
  ActionKind kind = ActionKind::FreeParticle;
  double mass = 1.0;       // m > 0
  double omega = 1.0;      // oscillator frequency, >= 0
  double time_step = 1.0;  // grid spacing in time, > 0
  double spacing = 1.0;    // grid spacing in space, > 0; scales integer labels
  double alpha = 1.0;      // entropy-to-action scale for the entropic kind, > 0
  std::vector<double> table;  // per-path actions for the table kind
};

// Checks the parameters the active kind relies on; BadConfiguration on
// violations (BadModelKind is reserved for unknown kind spellings).
void validate_action_model(const ActionModel& model);

// Action of a spatial trajectory x_0..x_T sampled at uniform time steps:
// sum over steps of (m/2)((x_{t+1}-x_t)/eps)^2 * eps, minus
// (m omega^2/2) x_t^2 * eps per step for the oscillator. Only the physical
// kinds apply; anything else is BadModelKind.
double lattice_action(const std::vector<double>& trajectory, const ActionModel& model);

// Same discretization for trajectories of d-dimensional points; squared
// displacements and squared positions become squared Euclidean norms.
double lattice_action_nd(const std::vector<std::vector<double>>& trajectory,
                         const ActionModel& model);

// Actions for every path in the set. Physical kinds integrate along the
// path's per-layer centroid positions scaled by model.spacing; the table
// kind hands back model.table (one value per path). The entropic kind needs
// ensemble context, so callers assemble it from microstate_entropy and
// entropic_action instead.
std::vector<double> path_actions(const BranchedComplex& complex, const PathSet& paths,
                                 const ActionModel& model);

// Per-branch field ensemble: each top simplex carries one symbol per time
// step from an alphabet of symbol_count letters, and simplices spanning the
// same vertex pair share an unordered multiset of symbols instead of
// independent draws.
struct FieldEnsembleModel {
  double entropy_rate = 0.0;  // b, nats per free branch per step
  long symbol_count = 0;      // alphabet size, round(e^b)
};

// Builds the model from the entropy rate b > 0; symbol_count = round(e^b),
// so ln(symbol_count) tracks b up to the rounding gap (worst near half-way
// points, e.g. |ln 1 - ln 1.5| when e^b is just under 1.5).
FieldEnsembleModel make_field_model(double entropy_rate);

// Number of field assignments on the whole complex. Within one time step,
// simplices with identical vertex sets form a cell whose symbols are an
// unordered multiset (multiset coefficient C(m+g-1, g)); distinct cells are
// independent, as are distinct steps.
mpz_class field_microstate_count(const BranchedComplex& complex,
                                 const FieldEnsembleModel& model);

// Entropy ln(N_w * N_phi) in nats of the microstates consistent with `path`:
// N_w counts lattice weight assignments of the complex (every assignment
// keeps the path's support positive, because weights are bounded below by
// L > 0) and N_phi counts field assignments. The path must traverse the
// complex one simplex per step. Requires complex.total_weight(); raises
// ZeroMicrostates when the weight region is empty and passes BudgetExceeded
// through from the counter.
double microstate_entropy(const std::vector<std::size_t>& path, const BranchedComplex& complex,
                          const Rational& dw, const FieldEnsembleModel& field_model,
                          long long node_budget = 10000000);

// S = -alpha * s: higher entropy, strictly lower action.
double entropic_action(double s_en, double alpha);

// Action and field models from one JSON block {kind, m, omega, eps, a,
// alpha, table, b}, every key optional, unknown keys rejected.
struct ModelConfig {
  ActionModel action;
  FieldEnsembleModel field;
};
ModelConfig model_from_json(const nlohmann::json& block);
nlohmann::json model_to_json(const ModelConfig& config);

}  // namespace branchsim
