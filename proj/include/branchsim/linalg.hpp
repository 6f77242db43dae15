#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <vector>

namespace branchsim {

// Exact arithmetic type for all constraint algebra. Entropies and Monte
// Carlo use doubles; everything touching null spaces or feasibility
// stays rational so invariants can be checked bit-exactly.
using Rational = mpq_class;

// Dense rational matrix, row major. Desk-scale sizes only.
class RatMatrix {
 public:
  RatMatrix() : rows_(0), cols_(0) {}
  RatMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, Rational(0)) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Rational& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Rational& at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  static RatMatrix from_int_rows(const std::vector<std::vector<long>>& rows);

 private:
  std::size_t rows_, cols_;
  std::vector<Rational> data_;
};

struct RrefResult {
  RatMatrix reduced;
  std::vector<std::size_t> pivot_columns;  // ascending
  std::size_t rank = 0;
};

// Gauss-Jordan to reduced row echelon form, exact, first-nonzero pivoting.
// The output is the canonical RREF, so downstream bases are deterministic.
RrefResult rref(const RatMatrix& m);

std::size_t rank(const RatMatrix& m);

// Kernel basis in the canonical free-column form: one vector per free
// column j, with entry 1 at j and the negated reduced column above the
// pivots. Vectors are ordered by free column index.
std::vector<std::vector<Rational>> kernel_basis(const RatMatrix& m);

// Exact A*x for a rational matrix and vector.
std::vector<Rational> mat_vec(const RatMatrix& m, const std::vector<Rational>& x);

inline double to_double(const Rational& q) { return q.get_d(); }

// Exact integer product of two small integer matrices (row major).
std::vector<std::vector<long long>> int_mat_mul(
    const std::vector<std::vector<int>>& a,
    const std::vector<std::vector<int>>& b);

}  // namespace branchsim
