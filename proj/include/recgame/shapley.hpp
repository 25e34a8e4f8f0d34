#pragma once

// The Shapley operator
//
//   Phi(lambda, f)(k) = val [ lambda g(k,i,j) + (1-lambda) sum_k' q(k,i,j)(k') f~(k') ]
//
// where f~ extends f by the absorbing payoffs, and the value notions built
// on it: discounted values (its fixed points), n-stage values (the averaged
// backward recursion) and the vanishing-discount limit.

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <span>
#include <vector>

#include "recgame/detail/parallel.hpp"
#include "recgame/error.hpp"
#include "recgame/format.hpp"
#include "recgame/matgame.hpp"
#include "recgame/model.hpp"

namespace recgame {

inline double sup_norm_diff(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

namespace detail {

inline void check_lambda_closed(double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    fail(ErrorKind::kInvalidArgument, "discount factor must lie in [0, 1]");
}

inline void check_lambda_open(double lambda) {
  if (!(lambda > 0.0 && lambda <= 1.0))
    fail(ErrorKind::kInvalidArgument, "discount factor must lie in (0, 1]");
}

}  // namespace detail

// The one-shot game at active state k, given the extended continuation
// vector (length num_states()).
inline Matrix stage_matrix(const GameSpec& game, std::size_t k, double lambda,
                           std::span<const double> extended) {
  const std::size_t m = game.p1_actions(k);
  const std::size_t n = game.p2_actions(k);
  Matrix a(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto q = game.transition(k, i, j);
      double cont = 0.0;
      for (std::size_t t = 0; t < q.size(); ++t) cont += q[t] * extended[t];
      a(i, j) = lambda * game.payoff(k, i, j) + (1.0 - lambda) * cont;
    }
  }
  return a;
}

// Solutions of every active state's one-shot game under Phi(lambda, f).
inline std::vector<MatrixGameSolution> solve_stage_games(const GameSpec& game, double lambda,
                                                         std::span<const double> f) {
  detail::check_lambda_closed(lambda);
  const auto ext = game.extend(f);
  std::vector<MatrixGameSolution> out;
  out.reserve(game.num_active());
  for (std::size_t k = 0; k < game.num_active(); ++k)
    out.push_back(solve_matrix_game(stage_matrix(game, k, lambda, ext)));
  return out;
}

// Phi(lambda, f). lambda = 0 is allowed and gives the undiscounted operator.
inline ValueVector apply_operator(const GameSpec& game, double lambda, std::span<const double> f) {
  detail::check_lambda_closed(lambda);
  const auto ext = game.extend(f);
  ValueVector out(game.num_active());
  for (std::size_t k = 0; k < game.num_active(); ++k)
    out[k] = solve_matrix_game(stage_matrix(game, k, lambda, ext)).value;
  return out;
}

struct DiscountedSolution {
  ValueVector values;
  double residual = 0.0;  // ||Phi(lambda, values) - values||_inf
  std::size_t iterations = 0;
};

// A priori iteration bound for value iteration to reach residual tol*lambda
// from any start in [-M, M].
inline std::size_t discounted_iteration_cap(double lambda, double tol, double bound) {
  constexpr double kHardCap = 1e7;
  if (lambda >= 1.0 || bound <= 0.0) return 2;
  const double ratio = tol * lambda / (2.0 * bound);
  if (ratio >= 1.0) return 2;
  const double n = std::ceil(std::log(ratio) / std::log1p(-lambda));
  return static_cast<std::size_t>(std::min(n, kHardCap)) + 2;
}

// Value iteration f <- Phi(lambda, f) until ||Phi(lambda, f) - f|| <= tol*lambda,
// which puts f within tol of v_lambda. The threshold is floored at a few ulps
// of M, below which the residual is rounding noise.
inline DiscountedSolution solve_discounted(const GameSpec& game, double lambda, double tol,
                                           std::span<const double> start = {}) {
  detail::check_lambda_open(lambda);
  if (!(tol > 0.0)) fail(ErrorKind::kInvalidArgument, "tolerance must be positive");
  const double bound = game.payoff_bound();
  const double threshold = std::max(tol * lambda, 8.0 * DBL_EPSILON * std::max(bound, 1.0));
  const std::size_t cap = discounted_iteration_cap(lambda, threshold / lambda, bound);

  ValueVector f(game.num_active(), 0.0);
  if (!start.empty()) {
    if (start.size() != f.size())
      fail(ErrorKind::kDimensionMismatch, "start vector has the wrong length");
    std::copy(start.begin(), start.end(), f.begin());
  }
  for (std::size_t it = 0; it <= cap; ++it) {
    ValueVector next = apply_operator(game, lambda, f);
    const double residual = sup_norm_diff(next, f);
    if (residual <= threshold) return {std::move(f), residual, it};
    f = std::move(next);
  }
  fail(ErrorKind::kInternal, "value iteration exceeded its a priori iteration bound");
}

inline ValueVector discounted_value(const GameSpec& game, double lambda, double tol) {
  return solve_discounted(game, lambda, tol).values;
}

// v_1, ..., v_N with v_0 = 0 and v_n = Phi(1/n, v_{n-1}).
inline std::vector<ValueVector> n_stage_values(const GameSpec& game, std::size_t horizon) {
  if (horizon < 1) fail(ErrorKind::kInvalidArgument, "n-stage horizon must be >= 1");
  std::vector<ValueVector> out;
  out.reserve(horizon);
  ValueVector v(game.num_active(), 0.0);
  for (std::size_t n = 1; n <= horizon; ++n) {
    v = apply_operator(game, 1.0 / static_cast<double>(n), v);
    out.push_back(v);
  }
  return out;
}

// Stationary strategy playing, at every active state, the given player's
// optimal mixed action in the one-shot game of Phi(lambda, f).
inline StationaryStrategy stage_optimal_strategy(const GameSpec& game, double lambda,
                                                 std::span<const double> f, int player) {
  if (player != 1 && player != 2) fail(ErrorKind::kInvalidArgument, "player must be 1 or 2");
  StationaryStrategy s{player, {}};
  for (auto& sol : solve_stage_games(game, lambda, f))
    s.mixed.push_back(player == 1 ? std::move(sol.x) : std::move(sol.y));
  return s;
}

// ---------------------------------------------------------------------------
// Vanishing discount

struct DiscountCurve {
  std::vector<double> lambdas;       // strictly decreasing
  std::vector<ValueVector> values;   // v_lambda per grid point
  std::vector<double> residuals;     // ||Phi(lambda, v) - v||_inf per grid point
  std::vector<double> cauchy;        // ||v_i - v_{i-1}||_inf, i >= 1
};

struct LimitEstimate {
  ValueVector estimate;
  bool converged = false;
  DiscountCurve curve;
};

struct LimitOptions {
  // Accuracy of each v_lambda solve; 0 picks tol / 100.
  double solve_tol = 0.0;
  std::size_t jobs = 1;
};

inline std::vector<double> geometric_grid(double from, double to, std::size_t points) {
  if (points < 2 || !(from > 0.0) || !(to > 0.0))
    fail(ErrorKind::kInvalidArgument, "geometric grid needs >= 2 points and positive ends");
  std::vector<double> grid(points);
  const double ratio = std::log(to / from) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i)
    grid[i] = from * std::exp(ratio * static_cast<double>(i));
  grid.front() = from;
  grid.back() = to;
  return grid;
}

// Solves v_lambda along a decreasing grid and accepts the last point once the
// last three points agree within tol in sup norm.
inline LimitEstimate vanishing_discount_limit(const GameSpec& game, std::span<const double> grid,
                                              double tol, const LimitOptions& options = {}) {
  if (grid.empty()) fail(ErrorKind::kInvalidArgument, "discount grid is empty");
  if (grid.size() < 4) fail(ErrorKind::kInvalidArgument, "discount grid needs at least 4 points");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0 && grid[i] <= 1.0))
      fail(ErrorKind::kInvalidArgument, "discount grid values must lie in (0, 1]");
    if (i > 0 && !(grid[i] < grid[i - 1]))
      fail(ErrorKind::kInvalidArgument, "discount grid must be strictly decreasing");
  }
  if (!(tol > 0.0)) fail(ErrorKind::kInvalidArgument, "tolerance must be positive");
  const double solve_tol = options.solve_tol > 0.0 ? options.solve_tol : tol / 100.0;

  LimitEstimate out;
  DiscountCurve& curve = out.curve;
  curve.lambdas.assign(grid.begin(), grid.end());
  curve.values.resize(grid.size());
  curve.residuals.resize(grid.size());
  detail::parallel_for(grid.size(), options.jobs, [&](std::size_t i) {
    auto sol = solve_discounted(game, grid[i], solve_tol);
    curve.values[i] = std::move(sol.values);
    curve.residuals[i] = sol.residual;
  });
  for (std::size_t i = 1; i < grid.size(); ++i)
    curve.cauchy.push_back(sup_norm_diff(curve.values[i], curve.values[i - 1]));

  const std::size_t c = curve.cauchy.size();
  out.converged = std::max(curve.cauchy[c - 1], curve.cauchy[c - 2]) <= tol;
  out.estimate = curve.values.back();
  return out;
}

inline void write_curve_csv(std::ostream& os, const GameSpec& game, const DiscountCurve& curve) {
  os << "lambda,state,value,residual\n";
  for (std::size_t i = 0; i < curve.lambdas.size(); ++i)
    for (std::size_t k = 0; k < game.num_active(); ++k)
      os << format_number(curve.lambdas[i]) << ',' << game.state(k).name << ','
         << format_number(curve.values[i][k]) << ',' << format_number(curve.residuals[i])
         << '\n';
}

// ||Phi(lambda, f) - (1 - lambda) Phi(0, f)||_inf, identically zero on
// recursive games.
inline double recursive_identity_residual(const GameSpec& game, double lambda,
                                          std::span<const double> f) {
  require_recursive(game);
  const auto discounted = apply_operator(game, lambda, f);
  auto undiscounted = apply_operator(game, 0.0, f);
  for (double& x : undiscounted) x *= (1.0 - lambda);
  return sup_norm_diff(discounted, undiscounted);
}

}  // namespace recgame
