#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "branchsim/ids.hpp"
#include "branchsim/linalg.hpp"

namespace branchsim {

// A vertex of the layered complex: `t` is the time layer, `label` the
// integer spatial label tuple. (t, label) pairs are unique per complex.
struct Vertex {
  std::string id;
  long t = 0;
  std::vector<long> label;
};

// A top-dimensional simplex. It spans exactly one time step: every vertex
// sits on layer t_start or t_start + 1 and both layers are populated.
// Vertices are kept in canonical order (earlier layer first, then by label,
// then by id); boundary signs are derived from this order.
struct Simplex {
  std::string id;
  std::vector<std::string> vertices;  // canonical order, size n_dim + 2
  long t_start = 0;
  std::optional<Rational> weight;
  std::optional<std::complex<double>> field;
};

// An n-dimensional face shared between top simplices, identified by its
// vertex set. `incidences` lists (simplex id, boundary sign) pairs where the
// sign is the omission parity of the face inside that simplex.
struct Face {
  std::string key;                    // sorted vertex ids joined with '|'
  std::vector<std::string> vertices;  // sorted by natural id
  std::vector<std::pair<std::string, int>> incidences;
};

// Signed face/simplex incidence matrix restricted to interior faces, i.e.
// faces where at least one simplex ends and at least one begins. Row order
// follows face keys, column order simplex ids, both in natural id order, so
// the matrix layout is reproducible from the description alone.
struct BoundaryMatrix {
  std::vector<std::string> face_keys;
  std::vector<std::string> simplex_ids;
  std::vector<std::vector<int>> entries;  // entries[row][col] in {-1, 0, +1}

  std::size_t rows() const { return face_keys.size(); }
  std::size_t cols() const { return simplex_ids.size(); }
};

class BranchedComplex {
 public:
  BranchedComplex(int n_dim, Rational lower_bound);

  int n_dim() const { return n_dim_; }
  const Rational& lower_bound() const { return lower_bound_; }
  const std::optional<Rational>& total_weight() const { return total_weight_; }
  void set_total_weight(Rational w_total) { total_weight_ = std::move(w_total); }

  // Vertices must be added before the simplices that use them.
  void add_vertex(Vertex v);
  void add_simplex(const std::string& id, const std::vector<std::string>& vertex_ids,
                   std::optional<Rational> weight = std::nullopt,
                   std::optional<std::complex<double>> field = std::nullopt);

  // Validates the whole structure and freezes derived data (canonical simplex
  // order, face table). Must be called once after the last add_*; accessors
  // below require it.
  void finalize();
  bool finalized() const { return finalized_; }

  const std::vector<Vertex>& vertices() const;
  const std::vector<Simplex>& simplices() const;
  const std::vector<Face>& faces() const;

  const Vertex& vertex(const std::string& id) const;
  const Simplex& simplex(const std::string& id) const;
  bool has_simplex(const std::string& id) const;
  // Position of a simplex in the canonical (natural id) order.
  std::size_t simplex_index(const std::string& id) const;

  // Time layers: first step start, number of steps, and the simplices
  // spanning step (t, t+1) in canonical order.
  long t_min() const;
  long t_max() const;  // last layer, i.e. t_min + step count
  std::size_t step_count() const;
  const std::vector<std::size_t>& step_simplices(long t_start) const;

  bool has_weights() const { return has_weights_; }
  bool has_fields() const { return has_fields_; }
  // Weight vector in canonical simplex order; requires has_weights().
  std::vector<Rational> weight_vector() const;

 private:
  void check_simplex_layers(Simplex& s) const;

  int n_dim_;
  Rational lower_bound_;
  std::optional<Rational> total_weight_;
  bool finalized_ = false;
  bool has_weights_ = false;
  bool has_fields_ = false;

  std::vector<Vertex> vertices_;
  std::map<std::string, std::size_t, NaturalLess> vertex_index_;
  std::vector<Simplex> simplices_;
  std::map<std::string, std::size_t, NaturalLess> simplex_index_;
  std::vector<Face> faces_;
  std::map<long, std::vector<std::size_t>> steps_;
};

// Builds a complex from its JSON description. The description is an object
// with keys n_dim, lower_bound_L, vertices, simplices and optionally
// total_weight; anything else is rejected so typos surface as errors instead
// of being silently ignored. See docs/complex-format.md for the layout.
BranchedComplex build_complex(const nlohmann::json& description);

// Reads the file and delegates to build_complex. IO and parse failures are
// reported as MalformedDescription.
BranchedComplex load_complex(const std::string& path);

// Serializes a complex back into the description format accepted by
// build_complex (weights become exact "p/q" strings).
nlohmann::json complex_to_json(const BranchedComplex& complex);

// Signed incidence of interior faces vs. top simplices. A row is emitted for
// every face where some simplex ends and another begins; w is conserved
// exactly when this matrix annihilates the weight vector.
BoundaryMatrix boundary_matrix(const BranchedComplex& complex);

// Exact conservation check D * w = 0 for the stored weights.
bool weights_conserved(const BranchedComplex& complex);

// Splits the time step spanned by `simplex_id` into `parts` equal sub-steps.
// Every simplex spanning that step is replaced by a chain of `parts`
// simplices carrying the parent's weight, so per-layer totals and
// conservation are untouched. parts == 1 returns an identical copy.
// Only supported for edge complexes (n_dim == 0); higher-dimensional prisms
// do not decompose into single simplices per sub-step.
BranchedComplex refine(const BranchedComplex& complex, const std::string& simplex_id,
                       int parts);

}  // namespace branchsim
