#pragma once

// Canonical games, random generators and a grid discretizer for games whose
// action sets are real intervals.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "recgame/error.hpp"
#include "recgame/format.hpp"
#include "recgame/model.hpp"
#include "recgame/sim.hpp"

namespace recgame::zoo {

inline const std::vector<std::string>& names() {
  static const std::vector<std::string> kNames = {"quit", "duel", "bigmatch"};
  return kNames;
}

namespace detail {

inline RawState active(const std::string& name) { return {name, false, std::nullopt}; }
inline RawState absorbing(const std::string& name, double payoff) { return {name, true, payoff}; }

inline RawGame quit() {
  RawGame g;
  g.states = {active("s"), absorbing("win", 1.0)};
  g.actions["s"] = {{"stay", "quit"}, {"wait"}};
  g.payoffs["s"] = {{0.0}, {0.0}};
  g.transitions["s"] = {{{{"s", 1.0}}}, {{{"win", 1.0}}}};
  g.initial = "s";
  return g;
}

// Off-diagonal play continues; matching absorbs at +1 (a1,b1) or -1 (a2,b2).
inline RawGame duel() {
  RawGame g;
  g.states = {active("s"), absorbing("plus", 1.0), absorbing("minus", -1.0)};
  g.actions["s"] = {{"a1", "a2"}, {"b1", "b2"}};
  g.payoffs["s"] = {{0.0, 0.0}, {0.0, 0.0}};
  g.transitions["s"] = {{{{"plus", 1.0}}, {{"s", 1.0}}}, {{{"s", 1.0}}, {{"minus", 1.0}}}};
  g.initial = "s";
  return g;
}

// Top absorbs (1 against left, 0 against right) and pays that amount on the
// absorbing stage too; bottom continues with stage payoff 0 / 1.
inline RawGame bigmatch() {
  RawGame g;
  g.states = {active("s"), absorbing("one", 1.0), absorbing("zero", 0.0)};
  g.actions["s"] = {{"top", "bottom"}, {"left", "right"}};
  g.payoffs["s"] = {{1.0, 0.0}, {0.0, 1.0}};
  g.transitions["s"] = {{{{"one", 1.0}}, {{"zero", 1.0}}}, {{{"s", 1.0}}, {{"s", 1.0}}}};
  g.initial = "s";
  return g;
}

}  // namespace detail

inline GameSpec make(std::string_view name) {
  if (name == "quit") return validate(detail::quit());
  if (name == "duel") return validate(detail::duel());
  if (name == "bigmatch") return validate(detail::bigmatch());
  fail(ErrorKind::kUnknownName, "unknown zoo game '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Random games

struct RandomGameParams {
  std::size_t num_active = 1;
  std::size_t num_absorbing = 1;
  std::size_t max_actions = 1;   // per player, per state; drawn in [1, max_actions]
  double absorb_prob = 0.5;      // mass of every transition sent to absorbing states
  std::uint64_t seed = 0;
  bool stage_payoffs = false;    // draw active payoffs in [-1, 1]; false keeps the game recursive
};

namespace detail {

inline std::vector<double> random_simplex(std::size_t n, std::mt19937_64& gen) {
  std::vector<double> p(n);
  double sum = 0.0;
  for (double& x : p) {
    x = -std::log(1.0 - uniform01(gen));
    sum += x;
  }
  for (double& x : p) x /= sum;
  return p;
}

}  // namespace detail

inline GameSpec random_game(const RandomGameParams& params) {
  if (params.num_active < 1 || params.num_absorbing < 1 || params.max_actions < 1)
    fail(ErrorKind::kInvalidArgument, "random game counts must be >= 1");
  if (!(params.absorb_prob >= 0.0 && params.absorb_prob <= 1.0))
    fail(ErrorKind::kInvalidArgument, "absorb_prob must lie in [0, 1]");
  std::mt19937_64 gen(splitmix64(params.seed));
  auto draw_count = [&] {
    return 1 + static_cast<std::size_t>(uniform01(gen) * static_cast<double>(params.max_actions));
  };

  RawGame g;
  std::vector<std::string> active_names, absorbing_names;
  for (std::size_t k = 0; k < params.num_active; ++k)
    active_names.push_back("s" + std::to_string(k));
  for (std::size_t k = 0; k < params.num_absorbing; ++k)
    absorbing_names.push_back("t" + std::to_string(k));
  for (const auto& n : active_names) g.states.push_back(detail::active(n));
  for (const auto& n : absorbing_names)
    g.states.push_back(detail::absorbing(n, 2.0 * uniform01(gen) - 1.0));

  for (const auto& name : active_names) {
    const std::size_t m = std::min(draw_count(), params.max_actions);
    const std::size_t n = std::min(draw_count(), params.max_actions);
    RawActions acts;
    for (std::size_t i = 0; i < m; ++i) acts.p1.push_back("i" + std::to_string(i));
    for (std::size_t j = 0; j < n; ++j) acts.p2.push_back("j" + std::to_string(j));
    g.actions[name] = acts;
    auto& pay = g.payoffs[name];
    auto& tr = g.transitions[name];
    pay.assign(m, std::vector<double>(n, 0.0));
    tr.assign(m, std::vector<RawTransitionCell>(n));
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (params.stage_payoffs) pay[i][j] = 2.0 * uniform01(gen) - 1.0;
        const auto stay = detail::random_simplex(params.num_active, gen);
        const auto leave = detail::random_simplex(params.num_absorbing, gen);
        auto& cell = tr[i][j];
        for (std::size_t t = 0; t < stay.size(); ++t)
          if (params.absorb_prob < 1.0) cell[active_names[t]] += (1.0 - params.absorb_prob) * stay[t];
        for (std::size_t t = 0; t < leave.size(); ++t)
          if (params.absorb_prob > 0.0) cell[absorbing_names[t]] += params.absorb_prob * leave[t];
      }
    }
  }
  g.initial = active_names.front();
  return validate(g);
}

// Recursive by construction: all active stage payoffs are zero.
inline GameSpec random_recursive(std::size_t num_active, std::size_t num_absorbing,
                                 std::size_t max_actions, double absorb_prob,
                                 std::uint64_t seed) {
  return random_game({num_active, num_absorbing, max_actions, absorb_prob, seed, false});
}

// ---------------------------------------------------------------------------
// Interval-action games

// sum_{a,b} coeff[a][b] x^a y^b, with x the player-1 and y the player-2 action.
struct Polynomial2 {
  std::vector<std::vector<double>> coeff;

  double operator()(double x, double y) const {
    double total = 0.0;
    double xa = 1.0;
    for (const auto& row : coeff) {
      double yb = 1.0;
      for (double c : row) {
        total += c * xa * yb;
        yb *= y;
      }
      xa *= x;
    }
    return total;
  }
};

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

struct ParametricState {
  std::string name;
  Interval p1;
  Interval p2;
  Polynomial2 payoff;
  // One polynomial per target, keyed by target state name.
  std::map<std::string, Polynomial2> transition;
};

struct ParametricGame {
  std::vector<ParametricState> active;
  std::vector<std::pair<std::string, double>> absorbing;
  std::string initial;
};

inline std::vector<double> interval_grid(const Interval& iv, std::size_t points) {
  std::vector<double> out(points);
  for (std::size_t a = 0; a < points; ++a)
    out[a] = iv.lo + (iv.hi - iv.lo) * static_cast<double>(a) / static_cast<double>(points - 1);
  out.back() = iv.hi;
  return out;
}

// Evaluates the game on a uniform grid (endpoints included) of each action
// interval. Transition rows within 1e-9 of stochastic are renormalized.
inline GameSpec discretize(const ParametricGame& pg, std::size_t points) {
  if (points < 2) fail(ErrorKind::kInvalidArgument, "discretization needs >= 2 grid points");
  RawGame g;
  for (const auto& s : pg.active) g.states.push_back(detail::active(s.name));
  for (const auto& [name, payoff] : pg.absorbing) g.states.push_back(detail::absorbing(name, payoff));
  for (const auto& s : pg.active) {
    const auto xs = interval_grid(s.p1, points);
    const auto ys = interval_grid(s.p2, points);
    RawActions acts;
    for (std::size_t a = 0; a < points; ++a) {
      acts.p1.push_back("x" + std::to_string(a) + "=" + format_number(xs[a]));
      acts.p2.push_back("y" + std::to_string(a) + "=" + format_number(ys[a]));
    }
    g.actions[s.name] = acts;
    auto& pay = g.payoffs[s.name];
    auto& tr = g.transitions[s.name];
    pay.assign(points, std::vector<double>(points));
    tr.assign(points, std::vector<RawTransitionCell>(points));
    for (std::size_t i = 0; i < points; ++i) {
      for (std::size_t j = 0; j < points; ++j) {
        pay[i][j] = s.payoff(xs[i], ys[j]);
        for (const auto& [target, poly] : s.transition) {
          const double p = poly(xs[i], ys[j]);
          if (p != 0.0) tr[i][j][target] = p;
        }
      }
    }
  }
  g.initial = pg.initial;
  return validate(g);
}

}  // namespace recgame::zoo
