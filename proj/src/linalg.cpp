#include "branchsim/linalg.hpp"

#include "branchsim/errors.hpp"

namespace branchsim {

RatMatrix RatMatrix::from_int_rows(const std::vector<std::vector<long>>& rows) {
  std::size_t r = rows.size();
  std::size_t c = r == 0 ? 0 : rows[0].size();
  RatMatrix m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    if (rows[i].size() != c) {
      fail(ErrorCode::DimensionMismatch, "ragged rows in integer matrix");
    }
    for (std::size_t j = 0; j < c; ++j) m.at(i, j) = Rational(rows[i][j]);
  }
  return m;
}

RrefResult rref(const RatMatrix& m) {
  RrefResult out;
  out.reduced = m;
  RatMatrix& a = out.reduced;
  const std::size_t rows = a.rows(), cols = a.cols();

  std::size_t pivot_row = 0;
  for (std::size_t col = 0; col < cols && pivot_row < rows; ++col) {
    std::size_t sel = rows;
    for (std::size_t r = pivot_row; r < rows; ++r) {
      if (a.at(r, col) != 0) { sel = r; break; }
    }
    if (sel == rows) continue;
    if (sel != pivot_row) {
      for (std::size_t c = 0; c < cols; ++c) std::swap(a.at(sel, c), a.at(pivot_row, c));
    }
    Rational inv = a.at(pivot_row, col);
    for (std::size_t c = col; c < cols; ++c) a.at(pivot_row, c) /= inv;
    for (std::size_t r = 0; r < rows; ++r) {
      if (r == pivot_row) continue;
      Rational f = a.at(r, col);
      if (f == 0) continue;
      for (std::size_t c = col; c < cols; ++c) {
        a.at(r, c) -= f * a.at(pivot_row, c);
      }
    }
    out.pivot_columns.push_back(col);
    ++pivot_row;
  }
  out.rank = out.pivot_columns.size();
  return out;
}

std::size_t rank(const RatMatrix& m) { return rref(m).rank; }

std::vector<std::vector<Rational>> kernel_basis(const RatMatrix& m) {
  RrefResult r = rref(m);
  const std::size_t cols = m.cols();

  std::vector<bool> is_pivot(cols, false);
  for (std::size_t p : r.pivot_columns) is_pivot[p] = true;

  std::vector<std::vector<Rational>> basis;
  for (std::size_t free_col = 0; free_col < cols; ++free_col) {
    if (is_pivot[free_col]) continue;
    std::vector<Rational> v(cols, Rational(0));
    v[free_col] = 1;
    for (std::size_t k = 0; k < r.pivot_columns.size(); ++k) {
      v[r.pivot_columns[k]] = -r.reduced.at(k, free_col);
    }
    basis.push_back(std::move(v));
  }
  return basis;
}

std::vector<Rational> mat_vec(const RatMatrix& m, const std::vector<Rational>& x) {
  if (x.size() != m.cols()) {
    fail(ErrorCode::DimensionMismatch, "mat_vec: vector length does not match columns");
  }
  std::vector<Rational> y(m.rows(), Rational(0));
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (m.at(r, c) != 0) y[r] += m.at(r, c) * x[c];
    }
  }
  return y;
}

std::vector<std::vector<long long>> int_mat_mul(
    const std::vector<std::vector<int>>& a,
    const std::vector<std::vector<int>>& b) {
  const std::size_t n = a.size();
  const std::size_t k = n == 0 ? 0 : a[0].size();
  const std::size_t m = b.empty() ? 0 : b[0].size();
  if (k != b.size()) {
    fail(ErrorCode::DimensionMismatch, "int_mat_mul: inner dimensions differ");
  }
  std::vector<std::vector<long long>> out(n, std::vector<long long>(m, 0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < k; ++t) {
      if (a[i][t] == 0) continue;
      for (std::size_t j = 0; j < m; ++j) {
        out[i][j] += static_cast<long long>(a[i][t]) * b[t][j];
      }
    }
  }
  return out;
}

}  // namespace branchsim
