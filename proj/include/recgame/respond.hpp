#pragma once

// Best responses to a fixed stationary strategy. Fixing one player's mixed
// actions turns the game into a discounted decision problem for the other,
// solved here by value iteration with greedy policy extraction.

#include <algorithm>
#include <cfloat>
#include <cstddef>
#include <limits>
#include <vector>

#include "recgame/error.hpp"
#include "recgame/model.hpp"
#include "recgame/shapley.hpp"

namespace recgame {

struct BestResponseResult {
  double lambda = 0.0;
  int responder = 2;                 // the optimizing player
  ValueVector values;                // responder's optimal discounted payoff per active state
  std::vector<std::size_t> policy;   // pure stationary action per active state
  double residual = 0.0;

  StationaryStrategy strategy(const GameSpec& game) const {
    return pure_strategy(game, responder, policy);
  }
};

namespace detail {

// One-player decision problem induced by a fixed stationary strategy.
struct InducedProblem {
  std::size_t num_states = 0;
  std::vector<std::vector<double>> reward;  // [k][a]
  std::vector<std::vector<double>> next;    // [k][a * num_states + k']
};

inline InducedProblem induce(const GameSpec& game, const StationaryStrategy& fixed) {
  InducedProblem p;
  p.num_states = game.num_states();
  const int responder = 3 - fixed.player;
  for (std::size_t k = 0; k < game.num_active(); ++k) {
    const std::size_t na = action_count(game, responder, k);
    const std::size_t nf = action_count(game, fixed.player, k);
    std::vector<double> r(na, 0.0);
    std::vector<double> q(na * p.num_states, 0.0);
    for (std::size_t a = 0; a < na; ++a) {
      for (std::size_t b = 0; b < nf; ++b) {
        const double w = fixed.mixed[k][b];
        if (w == 0.0) continue;
        const std::size_t i = fixed.player == 1 ? b : a;
        const std::size_t j = fixed.player == 1 ? a : b;
        r[a] += w * game.payoff(k, i, j);
        const auto t = game.transition(k, i, j);
        for (std::size_t s = 0; s < t.size(); ++s) q[a * p.num_states + s] += w * t[s];
      }
    }
    p.reward.push_back(std::move(r));
    p.next.push_back(std::move(q));
  }
  return p;
}

}  // namespace detail

inline BestResponseResult best_response_discounted(const GameSpec& game,
                                                   const StationaryStrategy& fixed, double lambda,
                                                   double tol) {
  detail::check_lambda_open(lambda);
  if (!(tol > 0.0)) fail(ErrorKind::kInvalidArgument, "tolerance must be positive");
  check_strategy(game, fixed);

  const auto problem = detail::induce(game, fixed);
  const bool minimize = fixed.player == 1;
  const std::size_t n_active = game.num_active();
  const double bound = game.payoff_bound();
  const double threshold = std::max(tol * lambda, 8.0 * DBL_EPSILON * std::max(bound, 1.0));
  const std::size_t cap = discounted_iteration_cap(lambda, threshold / lambda, bound);

  // Q-value of action a at state k against the extended vector ext.
  auto q_value = [&](std::size_t k, std::size_t a, const std::vector<double>& ext) {
    const double* row = problem.next[k].data() + a * problem.num_states;
    double cont = 0.0;
    for (std::size_t s = 0; s < problem.num_states; ++s) cont += row[s] * ext[s];
    return lambda * problem.reward[k][a] + (1.0 - lambda) * cont;
  };
  // Greedy action, lowest index on ties.
  auto greedy = [&](std::size_t k, const std::vector<double>& ext, double* best_value) {
    std::size_t best = 0;
    double bv = q_value(k, 0, ext);
    for (std::size_t a = 1; a < problem.reward[k].size(); ++a) {
      const double v = q_value(k, a, ext);
      if (minimize ? v < bv : v > bv) {
        bv = v;
        best = a;
      }
    }
    *best_value = bv;
    return best;
  };

  BestResponseResult out;
  out.lambda = lambda;
  out.responder = 3 - fixed.player;
  std::vector<double> ext = game.extend(ValueVector(n_active, 0.0));
  std::vector<double> next = ext;
  bool done = false;
  for (std::size_t it = 0; it <= cap && !done; ++it) {
    double residual = 0.0;
    for (std::size_t k = 0; k < n_active; ++k) {
      double v;
      greedy(k, ext, &v);
      next[k] = v;
      residual = std::max(residual, std::abs(v - ext[k]));
    }
    if (residual <= threshold) {
      out.residual = residual;
      done = true;
    } else {
      std::swap(ext, next);
    }
  }
  if (!done) fail(ErrorKind::kInternal, "best-response iteration exceeded its a priori bound");

  out.values.assign(ext.begin(), ext.begin() + static_cast<std::ptrdiff_t>(n_active));
  out.policy.resize(n_active);
  for (std::size_t k = 0; k < n_active; ++k) {
    double v;
    out.policy[k] = greedy(k, ext, &v);
  }
  return out;
}

}  // namespace recgame
