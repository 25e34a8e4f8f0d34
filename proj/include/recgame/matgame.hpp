#pragma once

// Finite two-player zero-sum matrix games. The row player maximizes.
//
// The matrix is shifted to strict positivity and the standard pair of LPs
//
//   max 1'y  s.t.  B y <= 1, y >= 0        (column player, primal)
//   min 1'x  s.t.  B'x >= 1, x >= 0        (row player, dual)
//
// is solved with a dense tableau simplex. The leaving row is chosen by the
// lexicographic ratio test, which rules out cycling under degeneracy; the
// entering column is the most positive reduced cost, lowest index on ties.
// The slack basis is always feasible, so no phase one is needed.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "recgame/error.hpp"

namespace recgame {

inline constexpr double kFeasibilityTol = 1e-10;
inline constexpr double kOptimalityTol = 1e-8;

// Dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> init) {
    rows_ = init.size();
    cols_ = rows_ ? init.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& row : init) {
      if (row.size() != cols_) fail(ErrorKind::kDimensionMismatch, "ragged matrix literal");
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  std::span<const double> data() const { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct MatrixGameSolution {
  double value = 0.0;
  std::vector<double> x;  // row player (maximizer)
  std::vector<double> y;  // column player (minimizer)
};

// min_j x'A e_j: what the row mixture x secures.
inline double row_guarantee(const Matrix& a, std::span<const double> x) {
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < a.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) s += x[i] * a(i, j);
    worst = std::min(worst, s);
  }
  return worst;
}

// max_i e_i'A y: what the column mixture y concedes.
inline double column_guarantee(const Matrix& a, std::span<const double> y) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * y[j];
    worst = std::max(worst, s);
  }
  return worst;
}

namespace detail {

// Projects a nearly-stochastic vector back onto the simplex.
inline void clean_distribution(std::vector<double>& p) {
  double sum = 0.0;
  for (double& v : p) {
    if (v < kFeasibilityTol) v = 0.0;
    sum += v;
  }
  if (!(sum > 0.0)) fail(ErrorKind::kInternal, "matrix game LP produced an empty strategy");
  for (double& v : p) v /= sum;
}

class SimplexTableau {
 public:
  // Sets up max 1'y s.t. B y <= 1, y >= 0 with slack basis.
  explicit SimplexTableau(const Matrix& b)
      : m_(b.rows()), n_(b.cols()), width_(n_ + m_ + 1),
        t_((m_ + 1) * width_, 0.0), basis_(m_) {
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) at(i, j) = b(i, j);
      at(i, n_ + i) = 1.0;
      at(i, rhs()) = 1.0;
      basis_[i] = n_ + i;
    }
    // Objective row holds -c; optimal once no entry is negative.
    for (std::size_t j = 0; j < n_; ++j) at(m_, j) = -1.0;
  }

  void solve() {
    // Lexicographic pivoting terminates; the cap only guards against defects.
    const std::size_t cap = 50 * (m_ + n_ + 10) * (m_ + n_ + 10);
    for (std::size_t iter = 0; iter < cap; ++iter) {
      const auto col = entering();
      if (col == kNone) return;
      const auto row = leaving(col);
      if (row == kNone)
        fail(ErrorKind::kInternal, "matrix game LP reported unbounded; the shift is broken");
      pivot(row, col);
    }
    fail(ErrorKind::kInternal, "matrix game simplex exceeded its pivot cap");
  }

  double objective() const { return at(m_, rhs()); }

  std::vector<double> primal() const {
    std::vector<double> y(n_, 0.0);
    for (std::size_t i = 0; i < m_; ++i)
      if (basis_[i] < n_) y[basis_[i]] = at(i, rhs());
    return y;
  }

  // Duals are the reduced costs of the slack columns.
  std::vector<double> dual() const {
    std::vector<double> x(m_);
    for (std::size_t i = 0; i < m_; ++i) x[i] = at(m_, n_ + i);
    return x;
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  std::size_t rhs() const { return width_ - 1; }
  double& at(std::size_t r, std::size_t c) { return t_[r * width_ + c]; }
  double at(std::size_t r, std::size_t c) const { return t_[r * width_ + c]; }

  std::size_t entering() const {
    std::size_t best = kNone;
    double most = -kFeasibilityTol;
    for (std::size_t c = 0; c < n_ + m_; ++c) {
      if (at(m_, c) < most) {
        most = at(m_, c);
        best = c;
      }
    }
    return best;
  }

  // Lexicographic min-ratio over (rhs, slack columns) / pivot element.
  std::size_t leaving(std::size_t col) const {
    std::size_t best = kNone;
    for (std::size_t r = 0; r < m_; ++r) {
      if (at(r, col) <= kFeasibilityTol) continue;
      if (best == kNone || lex_less(r, best, col)) best = r;
    }
    return best;
  }

  bool lex_less(std::size_t r, std::size_t s, std::size_t col) const {
    const double pr = at(r, col);
    const double ps = at(s, col);
    auto cmp = [&](std::size_t c) {
      const double a = at(r, c) / pr;
      const double b = at(s, c) / ps;
      if (a < b - 1e-12 * (1.0 + std::abs(b))) return -1;
      if (b < a - 1e-12 * (1.0 + std::abs(a))) return 1;
      return 0;
    };
    if (int c = cmp(rhs())) return c < 0;
    for (std::size_t k = 0; k < m_; ++k)
      if (int c = cmp(n_ + k)) return c < 0;
    return basis_[r] < basis_[s];
  }

  void pivot(std::size_t row, std::size_t col) {
    const double inv = 1.0 / at(row, col);
    for (std::size_t c = 0; c < width_; ++c) at(row, c) *= inv;
    at(row, col) = 1.0;
    for (std::size_t r = 0; r <= m_; ++r) {
      if (r == row) continue;
      const double f = at(r, col);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < width_; ++c) at(r, c) -= f * at(row, c);
      at(r, col) = 0.0;
    }
    basis_[row] = col;
  }

  std::size_t m_, n_, width_;
  std::vector<double> t_;
  std::vector<std::size_t> basis_;
};

}  // namespace detail

inline MatrixGameSolution solve_matrix_game(const Matrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (m == 0 || n == 0) fail(ErrorKind::kDimensionMismatch, "matrix game needs m, n >= 1");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double v : a.data()) {
    if (!std::isfinite(v)) fail(ErrorKind::kNonFiniteEntry, "matrix game entry is not finite");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }

  // Constant matrices (including 1x1) need no LP.
  if (lo == hi) return {lo, std::vector<double>(m, 1.0 / m), std::vector<double>(n, 1.0 / n)};

  // Pure saddle point: maximin row against minimax column, lowest indices.
  {
    std::size_t best_row = 0;
    double maximin = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      double row_min = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n; ++j) row_min = std::min(row_min, a(i, j));
      if (row_min > maximin) {
        maximin = row_min;
        best_row = i;
      }
    }
    std::size_t best_col = 0;
    double minimax = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      double col_max = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m; ++i) col_max = std::max(col_max, a(i, j));
      if (col_max < minimax) {
        minimax = col_max;
        best_col = j;
      }
    }
    if (maximin == minimax) {
      MatrixGameSolution sol{maximin, std::vector<double>(m, 0.0), std::vector<double>(n, 0.0)};
      sol.x[best_row] = 1.0;
      sol.y[best_col] = 1.0;
      return sol;
    }
  }

  // Shift and scale to entries in [1, 2]; both are value-affine.
  const double scale = hi - lo;
  Matrix b(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) b(i, j) = 1.0 + (a(i, j) - lo) / scale;

  detail::SimplexTableau tableau(b);
  tableau.solve();
  const double obj = tableau.objective();
  if (!(obj > 0.0)) fail(ErrorKind::kInternal, "matrix game LP has a non-positive optimum");

  MatrixGameSolution sol;
  sol.x = tableau.dual();
  sol.y = tableau.primal();
  detail::clean_distribution(sol.x);
  detail::clean_distribution(sol.y);
  // Report the value as the midpoint of what each strategy secures on the
  // original matrix; the two agree to rounding.
  const double lower = row_guarantee(a, sol.x);
  const double upper = column_guarantee(a, sol.y);
  sol.value = 0.5 * (lower + upper);
  return sol;
}

}  // namespace recgame
