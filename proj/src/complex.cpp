#include "branchsim/complex.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "branchsim/errors.hpp"

namespace branchsim {

namespace {

using nlohmann::json;

std::string join_ids(const std::vector<std::string>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += '|';
    out += ids[i];
  }
  return out;
}

// Weights and bounds may arrive as JSON numbers or as exact "p/q" strings.
// Doubles convert exactly (binary fractions), so round-trips are lossless.
Rational parse_rational(const json& v, const std::string& what) {
  if (v.is_number_integer()) {
    return Rational(static_cast<long>(v.get<std::int64_t>()));
  }
  if (v.is_number_float()) {
    double d = v.get<double>();
    if (!std::isfinite(d)) fail(ErrorCode::MalformedDescription, what + " is not finite");
    return Rational(d);
  }
  if (v.is_string()) {
    mpq_class q;
    if (q.set_str(v.get<std::string>(), 10) != 0) {
      fail(ErrorCode::MalformedDescription, what + " is not a valid rational: " + v.get<std::string>());
    }
    if (q.get_den() == 0) {
      fail(ErrorCode::MalformedDescription, what + " has zero denominator");
    }
    q.canonicalize();
    return q;
  }
  fail(ErrorCode::MalformedDescription, what + " must be a number or a rational string");
}

json rational_to_json(const Rational& q) {
  if (q.get_den() == 1 && q.get_num().fits_slong_p()) {
    return json(q.get_num().get_si());
  }
  return json(q.get_str());
}

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) {
      fail(ErrorCode::MalformedDescription, where + ": unknown key \"" + it.key() + "\"");
    }
  }
}

}  // namespace

BranchedComplex::BranchedComplex(int n_dim, Rational lower_bound)
    : n_dim_(n_dim), lower_bound_(std::move(lower_bound)) {
  if (n_dim_ < 0) fail(ErrorCode::MalformedDescription, "n_dim must be non-negative");
  if (lower_bound_ <= 0) {
    fail(ErrorCode::MalformedDescription, "weight lower bound must be positive");
  }
}

void BranchedComplex::add_vertex(Vertex v) {
  if (finalized_) fail(ErrorCode::BadConfiguration, "complex is finalized");
  if (v.id.empty()) fail(ErrorCode::MalformedDescription, "vertex id must be non-empty");
  if (vertex_index_.count(v.id)) {
    fail(ErrorCode::MalformedDescription, "duplicate vertex id: " + v.id);
  }
  if (!vertices_.empty() && v.label.size() != vertices_.front().label.size()) {
    fail(ErrorCode::MalformedDescription,
         "vertex " + v.id + " has a label of different length than earlier vertices");
  }
  for (const Vertex& u : vertices_) {
    if (u.t == v.t && u.label == v.label) {
      fail(ErrorCode::MalformedDescription,
           "vertices " + u.id + " and " + v.id + " share layer and label");
    }
  }
  vertex_index_[v.id] = vertices_.size();
  vertices_.push_back(std::move(v));
}

void BranchedComplex::check_simplex_layers(Simplex& s) const {
  long lo = 0, hi = 0;
  bool first = true;
  for (const std::string& vid : s.vertices) {
    long t = vertices_[vertex_index_.at(vid)].t;
    if (first) {
      lo = hi = t;
      first = false;
    } else {
      lo = std::min(lo, t);
      hi = std::max(hi, t);
    }
  }
  if (hi != lo + 1) {
    fail(ErrorCode::MalformedDescription,
         "simplex " + s.id + " must span exactly one time step (layers " +
             std::to_string(lo) + ".." + std::to_string(hi) + ")");
  }
  s.t_start = lo;
  // Canonical vertex order: earlier layer first, then label, then id. The
  // boundary signs below are omission parities in this order.
  std::sort(s.vertices.begin(), s.vertices.end(), [&](const std::string& a, const std::string& b) {
    const Vertex& va = vertices_[vertex_index_.at(a)];
    const Vertex& vb = vertices_[vertex_index_.at(b)];
    if (va.t != vb.t) return va.t < vb.t;
    if (va.label != vb.label) return va.label < vb.label;
    return natural_less(a, b);
  });
}

void BranchedComplex::add_simplex(const std::string& id, const std::vector<std::string>& vertex_ids,
                                  std::optional<Rational> weight,
                                  std::optional<std::complex<double>> field) {
  if (finalized_) fail(ErrorCode::BadConfiguration, "complex is finalized");
  if (id.empty()) fail(ErrorCode::MalformedDescription, "simplex id must be non-empty");
  if (simplex_index_.count(id)) {
    fail(ErrorCode::MalformedDescription, "duplicate simplex id: " + id);
  }
  Simplex s;
  s.id = id;
  s.vertices = vertex_ids;
  if (s.vertices.size() != static_cast<std::size_t>(n_dim_) + 2) {
    fail(ErrorCode::MalformedDescription,
         "simplex " + id + " needs " + std::to_string(n_dim_ + 2) + " vertices, got " +
             std::to_string(s.vertices.size()));
  }
  std::set<std::string> seen;
  for (const std::string& vid : s.vertices) {
    if (!vertex_index_.count(vid)) {
      fail(ErrorCode::MalformedDescription, "simplex " + id + " uses unknown vertex " + vid);
    }
    if (!seen.insert(vid).second) {
      fail(ErrorCode::MalformedDescription, "simplex " + id + " repeats vertex " + vid);
    }
  }
  check_simplex_layers(s);
  if (weight) {
    if (*weight < lower_bound_) {
      fail(ErrorCode::WeightBelowBound,
           "simplex " + id + " has weight below the lower bound");
    }
    s.weight = std::move(weight);
  }
  if (field) s.field = *field;
  simplex_index_[id] = simplices_.size();
  simplices_.push_back(std::move(s));
}

void BranchedComplex::finalize() {
  if (finalized_) fail(ErrorCode::BadConfiguration, "finalize called twice");
  if (simplices_.empty()) {
    fail(ErrorCode::MalformedDescription, "complex has no simplices");
  }

  // Freeze canonical orders: both tables sorted by natural id so any matrix
  // built later has a reproducible layout.
  std::sort(vertices_.begin(), vertices_.end(),
            [](const Vertex& a, const Vertex& b) { return natural_less(a.id, b.id); });
  vertex_index_.clear();
  for (std::size_t i = 0; i < vertices_.size(); ++i) vertex_index_[vertices_[i].id] = i;

  std::sort(simplices_.begin(), simplices_.end(),
            [](const Simplex& a, const Simplex& b) { return natural_less(a.id, b.id); });
  simplex_index_.clear();
  for (std::size_t i = 0; i < simplices_.size(); ++i) simplex_index_[simplices_[i].id] = i;

  // Weights are all-or-none: a partially weighted complex has no usable
  // conservation statement, so treat it as a description error.
  std::size_t weighted = 0, with_field = 0;
  for (const Simplex& s : simplices_) {
    if (s.weight) ++weighted;
    if (s.field) ++with_field;
  }
  if (weighted != 0 && weighted != simplices_.size()) {
    fail(ErrorCode::MalformedDescription,
         "either all simplices carry a weight or none does");
  }
  has_weights_ = weighted == simplices_.size();
  has_fields_ = with_field > 0;

  // Every vertex must support some simplex; an isolated vertex is the
  // zero-dimensional analog of a dangling face.
  std::set<std::string> used;
  for (const Simplex& s : simplices_) used.insert(s.vertices.begin(), s.vertices.end());
  for (const Vertex& v : vertices_) {
    if (!used.count(v.id)) {
      fail(ErrorCode::DanglingFace, "vertex " + v.id + " is not part of any simplex");
    }
  }

  // Step table, and the requirement that occupied steps are contiguous so
  // the complex really is a layered slab in time.
  steps_.clear();
  for (std::size_t i = 0; i < simplices_.size(); ++i) {
    steps_[simplices_[i].t_start].push_back(i);
  }
  long expect = steps_.begin()->first;
  for (const auto& [t, ids] : steps_) {
    if (t != expect) {
      fail(ErrorCode::MalformedDescription,
           "no simplex spans the step starting at layer " + std::to_string(expect));
    }
    ++expect;
  }

  // Face table: every n-face of every simplex, keyed by vertex set, with
  // omission-parity signs recorded per incidence.
  std::map<std::string, Face> face_map;
  for (const Simplex& s : simplices_) {
    for (std::size_t k = 0; k < s.vertices.size(); ++k) {
      std::vector<std::string> fv;
      fv.reserve(s.vertices.size() - 1);
      for (std::size_t j = 0; j < s.vertices.size(); ++j) {
        if (j != k) fv.push_back(s.vertices[j]);
      }
      std::vector<std::string> sorted_fv = fv;
      std::sort(sorted_fv.begin(), sorted_fv.end(), natural_less);
      std::string key = join_ids(sorted_fv);
      auto [it, fresh] = face_map.try_emplace(key);
      if (fresh) {
        it->second.key = key;
        it->second.vertices = sorted_fv;
      }
      it->second.incidences.emplace_back(s.id, (k % 2 == 0) ? 1 : -1);
    }
  }
  faces_.clear();
  faces_.reserve(face_map.size());
  std::vector<std::string> keys;
  keys.reserve(face_map.size());
  for (auto& [key, f] : face_map) keys.push_back(key);
  std::sort(keys.begin(), keys.end(), natural_less);
  for (const std::string& key : keys) faces_.push_back(std::move(face_map[key]));

  finalized_ = true;
}

const std::vector<Vertex>& BranchedComplex::vertices() const { return vertices_; }
const std::vector<Simplex>& BranchedComplex::simplices() const { return simplices_; }

const std::vector<Face>& BranchedComplex::faces() const {
  if (!finalized_) fail(ErrorCode::BadConfiguration, "complex not finalized");
  return faces_;
}

const Vertex& BranchedComplex::vertex(const std::string& id) const {
  auto it = vertex_index_.find(id);
  if (it == vertex_index_.end()) fail(ErrorCode::UnknownSimplex, "unknown vertex: " + id);
  return vertices_[it->second];
}

const Simplex& BranchedComplex::simplex(const std::string& id) const {
  return simplices_[simplex_index(id)];
}

bool BranchedComplex::has_simplex(const std::string& id) const {
  return simplex_index_.count(id) != 0;
}

std::size_t BranchedComplex::simplex_index(const std::string& id) const {
  auto it = simplex_index_.find(id);
  if (it == simplex_index_.end()) fail(ErrorCode::UnknownSimplex, "unknown simplex: " + id);
  return it->second;
}

long BranchedComplex::t_min() const {
  if (!finalized_) fail(ErrorCode::BadConfiguration, "complex not finalized");
  return steps_.begin()->first;
}

long BranchedComplex::t_max() const { return t_min() + static_cast<long>(steps_.size()); }

std::size_t BranchedComplex::step_count() const {
  if (!finalized_) fail(ErrorCode::BadConfiguration, "complex not finalized");
  return steps_.size();
}

const std::vector<std::size_t>& BranchedComplex::step_simplices(long t_start) const {
  if (!finalized_) fail(ErrorCode::BadConfiguration, "complex not finalized");
  auto it = steps_.find(t_start);
  if (it == steps_.end()) {
    fail(ErrorCode::BadConfiguration, "no step starts at layer " + std::to_string(t_start));
  }
  return it->second;
}

std::vector<Rational> BranchedComplex::weight_vector() const {
  if (!finalized_) fail(ErrorCode::BadConfiguration, "complex not finalized");
  if (!has_weights_) fail(ErrorCode::BadConfiguration, "complex carries no weights");
  std::vector<Rational> w;
  w.reserve(simplices_.size());
  for (const Simplex& s : simplices_) w.push_back(*s.weight);
  return w;
}

BranchedComplex build_complex(const json& description) {
  if (!description.is_object()) {
    fail(ErrorCode::MalformedDescription, "description must be a JSON object");
  }
  reject_unknown_keys(description,
                      {"n_dim", "lower_bound_L", "total_weight", "vertices", "simplices"},
                      "description");
  if (!description.contains("n_dim") || !description["n_dim"].is_number_integer()) {
    fail(ErrorCode::MalformedDescription, "description needs integer n_dim");
  }
  if (!description.contains("lower_bound_L")) {
    fail(ErrorCode::MalformedDescription, "description needs lower_bound_L");
  }
  BranchedComplex complex(description["n_dim"].get<int>(),
                          parse_rational(description["lower_bound_L"], "lower_bound_L"));
  if (description.contains("total_weight")) {
    Rational wt = parse_rational(description["total_weight"], "total_weight");
    if (wt <= 0) fail(ErrorCode::MalformedDescription, "total_weight must be positive");
    complex.set_total_weight(std::move(wt));
  }

  if (!description.contains("vertices") || !description["vertices"].is_array()) {
    fail(ErrorCode::MalformedDescription, "description needs a vertices array");
  }
  for (const json& jv : description["vertices"]) {
    if (!jv.is_object()) fail(ErrorCode::MalformedDescription, "vertex entries must be objects");
    reject_unknown_keys(jv, {"id", "t", "x"}, "vertex");
    if (!jv.contains("id") || !jv["id"].is_string() || !jv.contains("t") ||
        !jv["t"].is_number_integer() || !jv.contains("x") || !jv["x"].is_array()) {
      fail(ErrorCode::MalformedDescription, "vertex entries need id, t and x");
    }
    Vertex v;
    v.id = jv["id"].get<std::string>();
    v.t = jv["t"].get<long>();
    for (const json& c : jv["x"]) {
      if (!c.is_number_integer()) {
        fail(ErrorCode::MalformedDescription, "vertex " + v.id + " has a non-integer label");
      }
      v.label.push_back(c.get<long>());
    }
    complex.add_vertex(std::move(v));
  }

  if (!description.contains("simplices") || !description["simplices"].is_array()) {
    fail(ErrorCode::MalformedDescription, "description needs a simplices array");
  }
  for (const json& js : description["simplices"]) {
    if (!js.is_object()) fail(ErrorCode::MalformedDescription, "simplex entries must be objects");
    reject_unknown_keys(js, {"id", "vertices", "weight", "field"}, "simplex");
    if (!js.contains("id") || !js["id"].is_string() || !js.contains("vertices") ||
        !js["vertices"].is_array()) {
      fail(ErrorCode::MalformedDescription, "simplex entries need id and vertices");
    }
    std::string id = js["id"].get<std::string>();
    std::vector<std::string> vids;
    for (const json& v : js["vertices"]) {
      if (!v.is_string()) {
        fail(ErrorCode::MalformedDescription, "simplex " + id + " vertex list must hold ids");
      }
      vids.push_back(v.get<std::string>());
    }
    std::optional<Rational> weight;
    if (js.contains("weight")) weight = parse_rational(js["weight"], "weight of " + id);
    std::optional<std::complex<double>> field;
    if (js.contains("field")) {
      const json& jf = js["field"];
      if (jf.is_number()) {
        field = std::complex<double>(jf.get<double>(), 0.0);
      } else if (jf.is_array() && jf.size() == 2 && jf[0].is_number() && jf[1].is_number()) {
        field = std::complex<double>(jf[0].get<double>(), jf[1].get<double>());
      } else {
        fail(ErrorCode::MalformedDescription,
             "field of " + id + " must be a number or [re, im] pair");
      }
    }
    complex.add_simplex(id, vids, std::move(weight), field);
  }

  complex.finalize();
  return complex;
}

BranchedComplex load_complex(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::MalformedDescription, "cannot open " + path);
  json description;
  try {
    description = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::MalformedDescription, path + ": " + e.what());
  }
  return build_complex(description);
}

json complex_to_json(const BranchedComplex& complex) {
  json out;
  out["n_dim"] = complex.n_dim();
  out["lower_bound_L"] = rational_to_json(complex.lower_bound());
  if (complex.total_weight()) out["total_weight"] = rational_to_json(*complex.total_weight());
  json vertices = json::array();
  for (const Vertex& v : complex.vertices()) {
    json jv;
    jv["id"] = v.id;
    jv["t"] = v.t;
    jv["x"] = v.label;
    vertices.push_back(std::move(jv));
  }
  out["vertices"] = std::move(vertices);
  json simplices = json::array();
  for (const Simplex& s : complex.simplices()) {
    json js;
    js["id"] = s.id;
    js["vertices"] = s.vertices;
    if (s.weight) js["weight"] = rational_to_json(*s.weight);
    if (s.field) js["field"] = json::array({s.field->real(), s.field->imag()});
    simplices.push_back(std::move(js));
  }
  out["simplices"] = std::move(simplices);
  return out;
}

BoundaryMatrix boundary_matrix(const BranchedComplex& complex) {
  BoundaryMatrix d;
  for (const Simplex& s : complex.simplices()) d.simplex_ids.push_back(s.id);
  // Interior faces only: at least one simplex arrives (+) and one departs
  // (-). Pure sources and sinks carry no conservation constraint.
  for (const Face& f : complex.faces()) {
    bool pos = false, neg = false;
    for (const auto& [sid, sign] : f.incidences) {
      (sign > 0 ? pos : neg) = true;
    }
    if (!(pos && neg)) continue;
    d.face_keys.push_back(f.key);
    std::vector<int> row(d.simplex_ids.size(), 0);
    for (const auto& [sid, sign] : f.incidences) {
      row[complex.simplex_index(sid)] += sign;
    }
    d.entries.push_back(std::move(row));
  }
  return d;
}

bool weights_conserved(const BranchedComplex& complex) {
  BoundaryMatrix d = boundary_matrix(complex);
  std::vector<Rational> w = complex.weight_vector();
  for (const std::vector<int>& row : d.entries) {
    Rational acc(0);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (row[j] != 0) acc += Rational(row[j]) * w[j];
    }
    if (acc != 0) return false;
  }
  return true;
}

BranchedComplex refine(const BranchedComplex& complex, const std::string& simplex_id, int parts) {
  if (!complex.finalized()) fail(ErrorCode::BadConfiguration, "complex not finalized");
  if (parts < 1) fail(ErrorCode::BadConfiguration, "parts must be at least 1");
  const Simplex& target = complex.simplex(simplex_id);  // throws UnknownSimplex
  if (complex.n_dim() != 0) {
    fail(ErrorCode::BadConfiguration,
         "refine is only supported for edge complexes (n_dim 0); higher prisms do not split "
         "into one simplex per sub-step");
  }

  BranchedComplex out(complex.n_dim(), complex.lower_bound());
  if (complex.total_weight()) out.set_total_weight(*complex.total_weight());
  long t0 = target.t_start;
  // Layers after the split step shift up to make room for parts - 1 new ones.
  auto relabel = [&](long t) { return t <= t0 ? t : t + (parts - 1); };

  std::set<std::string> vertex_ids;
  for (const Vertex& v : complex.vertices()) vertex_ids.insert(v.id);
  long fresh_label = 0;
  bool any_label = false;
  for (const Vertex& v : complex.vertices()) {
    Vertex copy = v;
    copy.t = relabel(v.t);
    out.add_vertex(std::move(copy));
    if (!v.label.empty()) {
      fresh_label = any_label ? std::max(fresh_label, v.label[0]) : v.label[0];
      any_label = true;
    }
  }
  fresh_label += 1;

  auto unique_id = [](std::set<std::string>& taken, std::string candidate) {
    while (taken.count(candidate)) candidate += "+";
    taken.insert(candidate);
    return candidate;
  };

  std::set<std::string> simplex_ids;
  for (const Simplex& s : complex.simplices()) simplex_ids.insert(s.id);

  for (const Simplex& s : complex.simplices()) {
    if (s.t_start != t0 || parts == 1) {
      out.add_simplex(s.id, s.vertices, s.weight, s.field);
      continue;
    }
    // Split this edge into a chain through parts - 1 fresh vertices. Each
    // split edge gets its own label value so parallel edges stay distinct.
    const std::string& u = s.vertices.front();
    const std::string& v = s.vertices.back();
    std::vector<long> label = complex.vertex(u).label;
    if (!label.empty()) label[0] = fresh_label++;
    std::vector<std::string> chain;
    chain.push_back(u);
    for (int j = 1; j < parts; ++j) {
      Vertex m;
      m.id = unique_id(vertex_ids, s.id + "@" + std::to_string(j));
      m.t = t0 + j;
      m.label = label;
      chain.push_back(m.id);
      out.add_vertex(std::move(m));
    }
    chain.push_back(v);
    for (int j = 0; j < parts; ++j) {
      std::string id = unique_id(simplex_ids, s.id + "~" + std::to_string(j + 1));
      out.add_simplex(id, {chain[j], chain[j + 1]}, s.weight, s.field);
    }
  }

  out.finalize();
  return out;
}

}  // namespace branchsim
