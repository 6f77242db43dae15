#include "branchsim/builders.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "branchsim/errors.hpp"

namespace branchsim::builders {

namespace {

std::string num(std::size_t v) { return std::to_string(v); }

}  // namespace

BranchedComplex single_edge(const Rational& w, const Rational& lower_bound) {
  return chain(1, w, lower_bound);
}

BranchedComplex chain(std::size_t steps, const Rational& w, const Rational& lower_bound) {
  if (steps == 0) fail(ErrorCode::BadConfiguration, "chain needs at least one step");
  BranchedComplex c(0, lower_bound);
  c.set_total_weight(w);
  for (std::size_t t = 0; t <= steps; ++t) {
    c.add_vertex({"v" + num(t), static_cast<long>(t), {0}});
  }
  for (std::size_t t = 0; t < steps; ++t) {
    c.add_simplex("s" + num(t + 1), {"v" + num(t), "v" + num(t + 1)}, w);
  }
  c.finalize();
  return c;
}

BranchedComplex multi_bundle(const std::vector<std::size_t>& cluster_sizes, std::size_t steps,
                             const std::optional<std::vector<std::vector<Rational>>>& weights,
                             const Rational& lower_bound) {
  if (steps == 0 || cluster_sizes.empty()) {
    fail(ErrorCode::BadConfiguration, "bundle needs at least one step and one cluster");
  }
  if (weights && weights->size() != cluster_sizes.size()) {
    fail(ErrorCode::BadConfiguration, "one weight list per cluster required");
  }
  BranchedComplex c(0, lower_bound);
  Rational total(0);
  for (std::size_t cl = 0; cl < cluster_sizes.size(); ++cl) {
    if (cluster_sizes[cl] == 0) fail(ErrorCode::BadConfiguration, "empty cluster");
    if (weights && (*weights)[cl].size() != cluster_sizes[cl]) {
      fail(ErrorCode::BadConfiguration, "one weight per branch required");
    }
    for (std::size_t t = 0; t <= steps; ++t) {
      c.add_vertex({"c" + num(cl) + "j" + num(t), static_cast<long>(t),
                    {static_cast<long>(cl)}});
    }
    for (std::size_t t = 0; t < steps; ++t) {
      for (std::size_t b = 0; b < cluster_sizes[cl]; ++b) {
        std::optional<Rational> w;
        if (weights) w = (*weights)[cl][b];
        c.add_simplex("c" + num(cl) + "s" + num(t + 1) + "b" + num(b + 1),
                      {"c" + num(cl) + "j" + num(t), "c" + num(cl) + "j" + num(t + 1)}, w);
      }
    }
    if (weights) {
      for (const Rational& w : (*weights)[cl]) total += w;
    }
  }
  if (weights) c.set_total_weight(total);
  c.finalize();
  return c;
}

BranchedComplex recombining_pair(std::size_t steps) { return multi_bundle({2}, steps); }

BranchedComplex separated_pair(std::size_t steps) { return multi_bundle({1, 1}, steps); }

BranchedComplex merge_split(bool with_weights) {
  BranchedComplex c(0, 1);
  for (int t = 0; t <= 4; ++t) {
    c.add_vertex({"v" + num(t), t, {0}});
  }
  auto w = [&](long v) -> std::optional<Rational> {
    if (!with_weights) return std::nullopt;
    return Rational(v);
  };
  c.add_simplex("e1", {"v0", "v1"}, w(1));
  c.add_simplex("e2", {"v0", "v1"}, w(1));
  c.add_simplex("e3", {"v1", "v2"}, w(2));
  c.add_simplex("e4", {"v2", "v3"}, w(2));
  c.add_simplex("e5", {"v3", "v4"}, w(1));
  c.add_simplex("e6", {"v3", "v4"}, w(1));
  if (with_weights) c.set_total_weight(2);
  c.finalize();
  return c;
}

std::pair<BranchedComplex, BranchedComplex> cohesion_pair(std::size_t branches,
                                                          std::size_t steps) {
  if (branches < 2) fail(ErrorCode::BadConfiguration, "cohesion pair needs at least 2 branches");
  std::vector<std::size_t> separate(branches, 1);
  return {multi_bundle({branches}, steps), multi_bundle(separate, steps)};
}

BranchedComplex cluster_template(std::size_t volume, bool connected) {
  if (volume == 0) fail(ErrorCode::BadConfiguration, "volume must be at least 1");
  std::size_t steps = volume + 1;
  return connected ? multi_bundle({4}, steps) : multi_bundle({2, 2}, steps);
}

BranchedComplex site_grid(std::size_t sites, std::size_t steps) {
  if (sites == 0 || steps == 0) {
    fail(ErrorCode::BadConfiguration, "a site grid needs at least one site and one step");
  }
  BranchedComplex c(0, 1);
  for (std::size_t t = 0; t <= steps; ++t) {
    for (std::size_t s = 0; s < sites; ++s) {
      c.add_vertex({"t" + std::to_string(t) + "s" + std::to_string(s), static_cast<long>(t),
                    {static_cast<long>(s)}});
    }
  }
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t a = 0; a < sites; ++a) {
      for (std::size_t b = 0; b < sites; ++b) {
        c.add_simplex("s" + std::to_string(t) + "f" + std::to_string(a) + "t" + std::to_string(b),
                      {"t" + std::to_string(t) + "s" + std::to_string(a),
                       "t" + std::to_string(t + 1) + "s" + std::to_string(b)});
      }
    }
  }
  c.finalize();
  return c;
}

BranchedComplex random_layered(Rng& rng, std::size_t max_simplices) {
  if (max_simplices < 8) fail(ErrorCode::BadConfiguration, "budget too small for a random complex");
  // Draw layer populations and a covering random bipartite step between
  // consecutive layers; redraw outright on the rare budget overshoot so no
  // vertex is ever left dangling.
  for (int attempt = 0; attempt < 100; ++attempt) {
    std::size_t steps = 1 + rng.next_below(5);
    std::vector<std::size_t> population(steps + 1);
    for (auto& p : population) p = 1 + rng.next_below(3);

    std::vector<std::set<std::pair<std::size_t, std::size_t>>> step_pairs(steps);
    std::size_t total = 0;
    for (std::size_t t = 0; t < steps; ++t) {
      auto& pairs = step_pairs[t];
      // Cover both sides so no vertex dangles.
      for (std::size_t i = 0; i < population[t]; ++i) {
        pairs.insert({i, rng.next_below(population[t + 1])});
      }
      for (std::size_t j = 0; j < population[t + 1]; ++j) {
        pairs.insert({rng.next_below(population[t]), j});
      }
      total += pairs.size();
    }
    if (total > max_simplices) continue;
    // Spend any leftover budget on extra random edges.
    for (std::size_t t = 0; t < steps && total < max_simplices; ++t) {
      std::size_t extra = rng.next_below(3);
      for (std::size_t k = 0; k < extra && total < max_simplices; ++k) {
        if (step_pairs[t]
                .insert({rng.next_below(population[t]), rng.next_below(population[t + 1])})
                .second) {
          ++total;
        }
      }
    }

    BranchedComplex c(0, 1);
    for (std::size_t t = 0; t <= steps; ++t) {
      for (std::size_t i = 0; i < population[t]; ++i) {
        c.add_vertex({"t" + num(t) + "v" + num(i), static_cast<long>(t),
                      {static_cast<long>(i)}});
      }
    }
    for (std::size_t t = 0; t < steps; ++t) {
      std::size_t k = 0;
      for (const auto& [i, j] : step_pairs[t]) {
        c.add_simplex("t" + num(t) + "e" + num(++k),
                      {"t" + num(t) + "v" + num(i), "t" + num(t + 1) + "v" + num(j)});
      }
    }
    c.finalize();
    return c;
  }
  fail(ErrorCode::BudgetExceeded, "could not draw a random complex within the budget");
}

namespace {

// Copies `src` into `dst` with layers shifted by t_shift, the first label
// coordinate shifted by label_shift, and ids prefixed.
void merge_into(BranchedComplex& dst, const BranchedComplex& src, long t_shift,
                long label_shift, const std::string& prefix, std::size_t label_dim) {
  for (const Vertex& v : src.vertices()) {
    std::vector<long> label(label_dim, 0);
    for (std::size_t d = 0; d < v.label.size(); ++d) label[d] = v.label[d];
    if (!label.empty()) label[0] += label_shift;
    dst.add_vertex({prefix + v.id, v.t + t_shift, label});
  }
  for (const Simplex& s : src.simplices()) {
    std::vector<std::string> vids;
    for (const std::string& vid : s.vertices) vids.push_back(prefix + vid);
    dst.add_simplex(prefix + s.id, vids, s.weight, s.field);
  }
}

long label_span(const BranchedComplex& c) {
  long hi = 0;
  for (const Vertex& v : c.vertices()) {
    if (!v.label.empty()) hi = std::max(hi, std::abs(v.label[0]));
  }
  return hi + 1;
}

BranchedComplex union_of(const BranchedComplex& a, const BranchedComplex& b, bool sequential) {
  if (a.n_dim() != b.n_dim()) fail(ErrorCode::BadConfiguration, "dimension mismatch in union");
  if (a.lower_bound() != b.lower_bound()) {
    fail(ErrorCode::BadConfiguration, "lower bounds must match in a union");
  }
  std::size_t label_dim = 1;
  for (const Vertex& v : a.vertices()) label_dim = std::max(label_dim, v.label.size());
  for (const Vertex& v : b.vertices()) label_dim = std::max(label_dim, v.label.size());

  BranchedComplex out(a.n_dim(), a.lower_bound());
  long t_shift = sequential ? a.t_max() - b.t_min() : a.t_min() - b.t_min();
  merge_into(out, a, 0, 0, "A.", label_dim);
  merge_into(out, b, t_shift, label_span(a), "B.", label_dim);
  if (a.total_weight() && b.total_weight()) {
    if (sequential) {
      if (*a.total_weight() == *b.total_weight()) out.set_total_weight(*a.total_weight());
    } else {
      out.set_total_weight(*a.total_weight() + *b.total_weight());
    }
  }
  out.finalize();
  return out;
}

}  // namespace

BranchedComplex sequential_union(const BranchedComplex& a, const BranchedComplex& b) {
  return union_of(a, b, true);
}

BranchedComplex parallel_union(const BranchedComplex& a, const BranchedComplex& b) {
  return union_of(a, b, false);
}

}  // namespace branchsim::builders
