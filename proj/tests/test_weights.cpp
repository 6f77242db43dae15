#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "branchsim/builders.hpp"
#include "branchsim/complex.hpp"
#include "branchsim/errors.hpp"
#include "branchsim/rng.hpp"
#include "branchsim/weights.hpp"
#include "oracles.hpp"

using branchsim::BranchedComplex;
using branchsim::Error;
using branchsim::ErrorCode;
using branchsim::Rational;
namespace builders = branchsim::builders;

TEST_CASE("null space of the merge-split complex") {
  auto ns = branchsim::null_space(branchsim::boundary_matrix(builders::merge_split(false)));
  CHECK(ns.rank == 3);
  CHECK(ns.nullity == 3);
  REQUIRE(ns.basis_vectors.size() == 3);
  const long expect[3][6] = {
      {-1, 1, 0, 0, 0, 0},
      {1, 0, 1, 1, 1, 0},
      {1, 0, 1, 1, 0, 1},
  };
  for (std::size_t v = 0; v < 3; ++v) {
    for (std::size_t j = 0; j < 6; ++j) {
      CHECK(ns.basis_vectors[v][j] == Rational(expect[v][j]));
    }
  }
}

TEST_CASE("an unconstrained single edge has a full null space") {
  auto d = branchsim::boundary_matrix(builders::single_edge());
  CHECK(d.rows() == 0);
  CHECK(d.cols() == 1);
  auto ns = branchsim::null_space(d);
  CHECK(ns.rank == 0);
  REQUIRE(ns.nullity == 1);
  CHECK(ns.basis_vectors[0][0] == 1);
}

TEST_CASE("nullity adds over disjoint unions") {
  branchsim::Rng rng(0x5eed1001);
  for (int trial = 0; trial < 12; ++trial) {
    BranchedComplex a = builders::random_layered(rng);
    BranchedComplex b = builders::random_layered(rng);
    auto na = branchsim::null_space(branchsim::boundary_matrix(a));
    auto nb = branchsim::null_space(branchsim::boundary_matrix(b));
    auto nu = branchsim::null_space(
        branchsim::boundary_matrix(builders::parallel_union(a, b)));
    CHECK(nu.nullity == na.nullity + nb.nullity);
  }
}

TEST_CASE("rank-nullity and exact annihilation on random complexes") {
  branchsim::Rng rng(0x5eed1002);
  for (int trial = 0; trial < 40; ++trial) {
    auto d = branchsim::boundary_matrix(builders::random_layered(rng));
    auto ns = branchsim::null_space(d);
    CHECK(ns.rank + ns.nullity == d.cols());
    oracle::IntMatrix m(d.rows(), std::vector<mpz_class>(d.cols()));
    for (std::size_t r = 0; r < d.rows(); ++r) {
      for (std::size_t c = 0; c < d.cols(); ++c) m[r][c] = d.entries[r][c];
    }
    CHECK(ns.rank == oracle::bareiss_rank(m));
    branchsim::RatMatrix dr = branchsim::boundary_to_rational(d);
    for (const auto& v : ns.basis_vectors) {
      for (const Rational& entry : branchsim::mat_vec(dr, v)) CHECK(entry == 0);
    }
  }
}

TEST_CASE("recombining bundles have more slack than separated branches") {
  branchsim::Rng rng(0x5eed1003);
  for (int trial = 0; trial < 10; ++trial) {
    std::size_t branches = 2 + rng.next_below(4);
    std::size_t steps = 2 + rng.next_below(7);
    auto [frequent, rare] = builders::cohesion_pair(branches, steps);
    auto nf = branchsim::null_space(branchsim::boundary_matrix(frequent));
    auto nr = branchsim::null_space(branchsim::boundary_matrix(rare));
    CHECK(nf.nullity > nr.nullity);
  }
}

TEST_CASE("feasibility on the merge-split complex") {
  BranchedComplex c = builders::merge_split(false);

  SUBCASE("w_T = 2 pins the unique configuration") {
    auto rep = branchsim::feasible_region(c, 1, 2);
    REQUIRE(rep.feasible);
    CHECK(rep.polytope_dim == 0);
    const long expect[6] = {1, 1, 2, 2, 1, 1};
    REQUIRE(rep.witness.size() == 6);
    for (std::size_t j = 0; j < 6; ++j) CHECK(rep.witness[j] == Rational(expect[j]));
  }
  SUBCASE("w_T = 1 cannot host two branches") {
    auto rep = branchsim::feasible_region(c, 1, 1);
    CHECK_FALSE(rep.feasible);
    CHECK(rep.reason.find("2 branches") != std::string::npos);
    CHECK(rep.polytope_dim == -1);
  }
  SUBCASE("w_T = 3 leaves one slack direction per split") {
    auto rep = branchsim::feasible_region(c, 1, 3);
    REQUIRE(rep.feasible);
    CHECK(rep.polytope_dim == 2);
  }
}

TEST_CASE("single branch at the lower bound is feasible and rigid") {
  auto rep = branchsim::feasible_region(builders::chain(5), 1, 1);
  REQUIRE(rep.feasible);
  CHECK(rep.polytope_dim == 0);
  for (const Rational& w : rep.witness) CHECK(w == 1);
}

TEST_CASE("coordinates pinned only by inequalities still collapse the hull") {
  // Three branches in one step at w_T = 3L: equalities alone leave a plane,
  // but every weight is forced to L.
  auto rep = branchsim::feasible_region(builders::multi_bundle({3}, 1), 1, 3);
  REQUIRE(rep.feasible);
  CHECK(rep.polytope_dim == 0);
  for (const Rational& w : rep.witness) CHECK(w == 1);
}

TEST_CASE("witness always satisfies the constraints it claims") {
  branchsim::Rng rng(0x5eed1004);
  for (int trial = 0; trial < 15; ++trial) {
    BranchedComplex c = builders::random_layered(rng);
    Rational w_t(2 + static_cast<long>(rng.next_below(3)));
    auto rep = branchsim::feasible_region(c, 1, w_t);
    if (!rep.feasible) continue;
    auto sys = branchsim::weight_constraints(c, w_t);
    auto lhs = branchsim::mat_vec(sys.a, rep.witness);
    for (std::size_t i = 0; i < lhs.size(); ++i) CHECK(lhs[i] == sys.b[i]);
    for (const Rational& w : rep.witness) CHECK(w >= 1);
  }
}

TEST_CASE("lattice counting matches the worked example") {
  BranchedComplex c = builders::merge_split(false);
  CHECK(branchsim::count_lattice_configs(c, 1, 3, 1) == 4);
  CHECK(branchsim::count_lattice_configs(c, 1, 2, 1) == 1);
  CHECK(branchsim::count_lattice_configs(c, 1, 1, 1) == 0);
}

TEST_CASE("lattice counting agrees with the grid oracle on random complexes") {
  branchsim::Rng rng(0x5eed1005);
  int compared = 0;
  for (int trial = 0; trial < 25; ++trial) {
    BranchedComplex c = builders::random_layered(rng, 14);
    for (long w_t = 2; w_t <= 4; ++w_t) {
      mpz_class expected;
      try {
        expected = oracle::grid_count(c, 1, w_t, 1);
      } catch (const Error&) {
        continue;  // oracle grid too large; skip the pair
      }
      CHECK(branchsim::count_lattice_configs(c, 1, w_t, 1) == expected);
      ++compared;
    }
  }
  CHECK(compared > 20);
}

TEST_CASE("counts never decrease when the total grows") {
  for (long w_t = 2; w_t <= 6; ++w_t) {
    auto lo = branchsim::count_lattice_configs(builders::recombining_pair(3), 1, w_t, 1);
    auto hi = branchsim::count_lattice_configs(builders::recombining_pair(3), 1, w_t + 1, 1);
    CHECK(hi >= lo);
  }
}

TEST_CASE("per-step allocation law for the recombining pair") {
  // Each step reallocates the excess independently: (excess + 1)^T options.
  for (std::size_t steps = 1; steps <= 4; ++steps) {
    mpz_class expect = 1;
    for (std::size_t t = 0; t < steps; ++t) expect *= 3;
    CHECK(branchsim::count_lattice_configs(builders::recombining_pair(steps), 1, 4, 1) ==
          expect);
  }
  // Separated branches choose one allocation for the whole duration.
  for (std::size_t steps = 1; steps <= 4; ++steps) {
    CHECK(branchsim::count_lattice_configs(builders::separated_pair(steps), 1, 4, 1) == 3);
  }
}

TEST_CASE("counts multiply and entropies add over sequential unions") {
  BranchedComplex a = builders::merge_split(false);
  BranchedComplex b = builders::recombining_pair(2);
  BranchedComplex u = builders::sequential_union(a, b);
  mpz_class ca = branchsim::count_lattice_configs(a, 1, 3, 1);
  mpz_class cb = branchsim::count_lattice_configs(b, 1, 3, 1);
  mpz_class cu = branchsim::count_lattice_configs(u, 1, 3, 1);
  CHECK(cu == ca * cb);
  CHECK(branchsim::weight_entropy(cu) ==
        doctest::Approx(branchsim::weight_entropy(ca) + branchsim::weight_entropy(cb))
            .epsilon(1e-12));
}

TEST_CASE("enumeration respects its node budget") {
  CHECK_THROWS_AS(
      branchsim::count_lattice_configs(builders::recombining_pair(12), 1, 30, 1, 1000),
      Error);
  try {
    branchsim::count_lattice_configs(builders::recombining_pair(12), 1, 30, 1, 1000);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BudgetExceeded);
  }
}

TEST_CASE("entropy of a count") {
  CHECK(branchsim::weight_entropy(1) == 0.0);
  CHECK(branchsim::weight_entropy(4) == doctest::Approx(std::log(4.0)).epsilon(1e-15));
  mpz_class big = 1;
  big <<= 200;
  CHECK(branchsim::weight_entropy(big) ==
        doctest::Approx(200.0 * std::log(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(branchsim::weight_entropy(0), Error);
}
