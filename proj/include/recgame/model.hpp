#pragma once

// Finite zero-sum stochastic games with absorbing states: the canonical
// in-memory form, its validation, and the JSON game-file format.
//
// State layout is fixed by validation: active (non-absorbing) states come
// first, then absorbing states, each group in input order. A ValueVector is
// indexed by active state only; absorbing coordinates are implied by the
// absorbing payoffs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "recgame/error.hpp"

namespace recgame {

using ValueVector = std::vector<double>;

inline constexpr double kRowSumTolerance = 1e-9;   // larger deviations are rejected
inline constexpr double kRowExactTolerance = 1e-12;  // smaller deviations are kept as-is

struct State {
  std::string name;
  bool absorbing = false;
  double absorbing_payoff = 0.0;
  std::vector<std::string> p1_actions;  // empty for absorbing states
  std::vector<std::string> p2_actions;
};

// Unvalidated game description, one-to-one with the JSON game file.
struct RawState {
  std::string name;
  bool absorbing = false;
  std::optional<double> payoff;
};

struct RawActions {
  std::vector<std::string> p1;
  std::vector<std::string> p2;
};

using RawTransitionCell = std::map<std::string, double>;

struct RawGame {
  std::vector<RawState> states;
  std::map<std::string, RawActions> actions;
  std::map<std::string, std::vector<std::vector<double>>> payoffs;
  std::map<std::string, std::vector<std::vector<RawTransitionCell>>> transitions;
  std::string initial;
};

struct ValidateOptions {
  // A game with no active state is degenerate; accept it only on request.
  bool allow_trivial = false;
};

class GameSpec {
 public:
  std::size_t num_states() const { return states_.size(); }
  std::size_t num_active() const { return num_active_; }
  std::size_t initial() const { return initial_; }
  bool trivial() const { return num_active_ == 0; }

  const State& state(std::size_t k) const { return states_.at(k); }
  const std::vector<State>& states() const { return states_; }
  bool is_absorbing(std::size_t k) const { return states_[k].absorbing; }

  std::size_t p1_actions(std::size_t k) const { return states_[k].p1_actions.size(); }
  std::size_t p2_actions(std::size_t k) const { return states_[k].p2_actions.size(); }

  double payoff(std::size_t k, std::size_t i, std::size_t j) const {
    return payoffs_[k][i * p2_actions(k) + j];
  }

  // Distribution of the next state over all states (length num_states()).
  std::span<const double> transition(std::size_t k, std::size_t i,
                                     std::size_t j) const {
    const std::size_t n = num_states();
    const std::size_t cell = i * p2_actions(k) + j;
    return {transitions_[k].data() + cell * n, n};
  }

  double absorbing_payoff(std::size_t k) const { return states_[k].absorbing_payoff; }

  // M: the largest absolute stage or absorbing payoff.
  double payoff_bound() const { return payoff_bound_; }

  std::optional<std::size_t> find_state(std::string_view name) const {
    for (std::size_t k = 0; k < states_.size(); ++k)
      if (states_[k].name == name) return k;
    return std::nullopt;
  }

  // Extends an active-state vector by the absorbing payoffs.
  std::vector<double> extend(std::span<const double> f) const {
    if (f.size() != num_active_)
      fail(ErrorKind::kDimensionMismatch,
           "value vector has " + std::to_string(f.size()) + " entries, game has " +
               std::to_string(num_active_) + " active states");
    std::vector<double> full(num_states());
    std::copy(f.begin(), f.end(), full.begin());
    for (std::size_t k = num_active_; k < num_states(); ++k)
      full[k] = states_[k].absorbing_payoff;
    return full;
  }

  friend GameSpec validate(const RawGame& raw, const ValidateOptions& options);
  friend bool operator==(const GameSpec&, const GameSpec&);

 private:
  std::vector<State> states_;
  std::size_t num_active_ = 0;
  std::size_t initial_ = 0;
  double payoff_bound_ = 0.0;
  std::vector<std::vector<double>> payoffs_;      // per active state, row-major m x n
  std::vector<std::vector<double>> transitions_;  // per active state, (m*n) x |K|
};

inline bool operator==(const State& a, const State& b) {
  return a.name == b.name && a.absorbing == b.absorbing &&
         a.absorbing_payoff == b.absorbing_payoff &&
         a.p1_actions == b.p1_actions && a.p2_actions == b.p2_actions;
}

inline bool operator==(const GameSpec& a, const GameSpec& b) {
  return a.states_ == b.states_ && a.num_active_ == b.num_active_ &&
         a.initial_ == b.initial_ && a.payoff_bound_ == b.payoff_bound_ &&
         a.payoffs_ == b.payoffs_ && a.transitions_ == b.transitions_;
}

namespace detail {

inline void require_finite(double x, const std::string& where) {
  if (!std::isfinite(x)) fail(ErrorKind::kNonFiniteEntry, "non-finite value at " + where);
}

// Checks one probability row and rescales it onto the simplex when the
// deviation is small enough to be rounding noise.
inline void normalize_row(std::span<double> row, const std::string& where) {
  double sum = 0.0;
  for (double& p : row) {
    require_finite(p, where);
    if (p < 0.0) {
      if (p < -kRowExactTolerance)
        fail(ErrorKind::kNegativeProbability, "negative probability at " + where);
      p = 0.0;
    }
    sum += p;
  }
  const double deviation = std::abs(sum - 1.0);
  if (deviation > kRowSumTolerance)
    fail(ErrorKind::kNonStochasticRow,
         "row sums to " + std::to_string(sum) + " at " + where);
  if (deviation > kRowExactTolerance)
    for (double& p : row) p /= sum;
}

}  // namespace detail

inline GameSpec validate(const RawGame& raw, const ValidateOptions& options = {}) {
  GameSpec game;
  if (raw.states.empty()) fail(ErrorKind::kDimensionMismatch, "game has no states");

  // Reorder: active states first, absorbing after, both in input order.
  std::vector<const RawState*> order;
  for (const auto& s : raw.states)
    if (!s.absorbing) order.push_back(&s);
  const std::size_t num_active = order.size();
  for (const auto& s : raw.states)
    if (s.absorbing) order.push_back(&s);

  std::map<std::string, std::size_t> index;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const RawState& s = *order[k];
    if (s.name.empty()) fail(ErrorKind::kDimensionMismatch, "state with empty name");
    if (!index.emplace(s.name, k).second)
      fail(ErrorKind::kDimensionMismatch, "duplicate state name '" + s.name + "'");
  }
  if (num_active == 0 && !options.allow_trivial)
    fail(ErrorKind::kNoActiveState, "game has no active state");

  for (const auto& [name, _] : raw.actions)
    if (!index.count(name) || order[index[name]]->absorbing)
      fail(ErrorKind::kDimensionMismatch, "actions given for non-active state '" + name + "'");
  for (const auto& [name, _] : raw.payoffs)
    if (!index.count(name) || order[index[name]]->absorbing)
      fail(ErrorKind::kDimensionMismatch, "payoffs given for non-active state '" + name + "'");
  for (const auto& [name, _] : raw.transitions)
    if (!index.count(name) || order[index[name]]->absorbing)
      fail(ErrorKind::kDimensionMismatch,
           "transitions given for non-active state '" + name + "'");

  const std::size_t n_states = order.size();
  double bound = 0.0;
  game.num_active_ = num_active;
  game.states_.reserve(n_states);
  for (std::size_t k = 0; k < n_states; ++k) {
    const RawState& rs = *order[k];
    State st;
    st.name = rs.name;
    st.absorbing = rs.absorbing;
    if (rs.absorbing) {
      if (!rs.payoff)
        fail(ErrorKind::kDimensionMismatch, "absorbing state '" + rs.name + "' needs a payoff");
      detail::require_finite(*rs.payoff, "payoff of '" + rs.name + "'");
      st.absorbing_payoff = *rs.payoff;
      bound = std::max(bound, std::abs(*rs.payoff));
      game.states_.push_back(std::move(st));
      continue;
    }
    if (rs.payoff)
      fail(ErrorKind::kDimensionMismatch, "active state '" + rs.name + "' has a payoff field");

    auto act = raw.actions.find(rs.name);
    auto pay = raw.payoffs.find(rs.name);
    auto tr = raw.transitions.find(rs.name);
    if (act == raw.actions.end() || pay == raw.payoffs.end() || tr == raw.transitions.end())
      fail(ErrorKind::kDimensionMismatch,
           "active state '" + rs.name + "' needs actions, payoffs and transitions");
    const std::size_t m = act->second.p1.size();
    const std::size_t n = act->second.p2.size();
    if (m == 0 || n == 0)
      fail(ErrorKind::kDimensionMismatch, "state '" + rs.name + "' has an empty action set");
    st.p1_actions = act->second.p1;
    st.p2_actions = act->second.p2;

    if (pay->second.size() != m)
      fail(ErrorKind::kDimensionMismatch, "payoff matrix of '" + rs.name + "' has wrong row count");
    if (tr->second.size() != m)
      fail(ErrorKind::kDimensionMismatch,
           "transition matrix of '" + rs.name + "' has wrong row count");

    std::vector<double> g(m * n);
    std::vector<double> q(m * n * n_states, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      if (pay->second[i].size() != n)
        fail(ErrorKind::kDimensionMismatch,
             "payoff matrix of '" + rs.name + "' has wrong column count");
      if (tr->second[i].size() != n)
        fail(ErrorKind::kDimensionMismatch,
             "transition matrix of '" + rs.name + "' has wrong column count");
      for (std::size_t j = 0; j < n; ++j) {
        const std::string where =
            "'" + rs.name + "'[" + std::to_string(i) + "][" + std::to_string(j) + "]";
        const double gij = pay->second[i][j];
        detail::require_finite(gij, "payoff " + where);
        g[i * n + j] = gij;
        bound = std::max(bound, std::abs(gij));

        std::span<double> row(q.data() + (i * n + j) * n_states, n_states);
        for (const auto& [target, p] : tr->second[i][j]) {
          auto it = index.find(target);
          if (it == index.end())
            fail(ErrorKind::kDimensionMismatch, "unknown target state '" + target + "' in " + where);
          row[it->second] = p;
        }
        detail::normalize_row(row, "transition " + where);
      }
    }
    game.payoffs_.push_back(std::move(g));
    game.transitions_.push_back(std::move(q));
    game.states_.push_back(std::move(st));
  }

  auto init = index.find(raw.initial);
  if (init == index.end())
    fail(ErrorKind::kDimensionMismatch, "unknown initial state '" + raw.initial + "'");
  game.initial_ = init->second;
  game.payoff_bound_ = bound;
  return game;
}

// Exact: every active stage payoff is zero.
inline bool is_recursive(const GameSpec& game) {
  for (std::size_t k = 0; k < game.num_active(); ++k)
    for (std::size_t i = 0; i < game.p1_actions(k); ++i)
      for (std::size_t j = 0; j < game.p2_actions(k); ++j)
        if (game.payoff(k, i, j) != 0.0) return false;
  return true;
}

inline void require_recursive(const GameSpec& game) {
  if (!is_recursive(game))
    fail(ErrorKind::kNotRecursive, "game has a nonzero stage payoff at an active state");
}

// ---------------------------------------------------------------------------
// JSON game file

inline RawGame raw_from_json(const nlohmann::json& doc) {
  using nlohmann::json;
  auto expect = [](bool ok, const std::string& what) {
    if (!ok) fail(ErrorKind::kParse, what);
  };
  expect(doc.is_object(), "game file must be a JSON object");
  static const std::vector<std::string> kTopKeys = {"states", "actions", "payoffs",
                                                    "transitions", "initial"};
  for (const auto& [key, _] : doc.items())
    expect(std::find(kTopKeys.begin(), kTopKeys.end(), key) != kTopKeys.end(),
           "unknown top-level key '" + key + "'");
  expect(doc.contains("states") && doc.contains("initial"),
         "game file needs 'states' and 'initial'");

  RawGame raw;
  try {
    expect(doc["states"].is_array(), "'states' must be an array");
    for (const auto& s : doc["states"]) {
      expect(s.is_object(), "state entries must be objects");
      for (const auto& [key, _] : s.items())
        expect(key == "name" || key == "absorbing" || key == "payoff",
               "unknown state key '" + key + "'");
      RawState rs;
      rs.name = s.at("name").get<std::string>();
      rs.absorbing = s.at("absorbing").get<bool>();
      if (s.contains("payoff")) {
        expect(s["payoff"].is_number(), "state payoff must be a number");
        rs.payoff = s["payoff"].get<double>();
      }
      raw.states.push_back(std::move(rs));
    }
    if (doc.contains("actions")) {
      for (const auto& [name, a] : doc["actions"].items()) {
        for (const auto& [key, _] : a.items())
          expect(key == "p1" || key == "p2", "unknown actions key '" + key + "'");
        raw.actions[name] = {a.at("p1").get<std::vector<std::string>>(),
                             a.at("p2").get<std::vector<std::string>>()};
      }
    }
    if (doc.contains("payoffs"))
      for (const auto& [name, m] : doc["payoffs"].items())
        raw.payoffs[name] = m.get<std::vector<std::vector<double>>>();
    if (doc.contains("transitions"))
      for (const auto& [name, m] : doc["transitions"].items())
        raw.transitions[name] = m.get<std::vector<std::vector<RawTransitionCell>>>();
    raw.initial = doc.at("initial").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kParse, e.what());
  }
  return raw;
}

inline GameSpec game_from_json(const nlohmann::json& doc, const ValidateOptions& options = {}) {
  return validate(raw_from_json(doc), options);
}

inline GameSpec parse_game(std::string_view text, const ValidateOptions& options = {}) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kParse, e.what());
  }
  return game_from_json(doc, options);
}

// Zero transition probabilities are omitted; object keys come out sorted.
inline nlohmann::json to_json(const GameSpec& game) {
  using nlohmann::json;
  json doc;
  doc["states"] = json::array();
  doc["actions"] = json::object();
  doc["payoffs"] = json::object();
  doc["transitions"] = json::object();
  for (std::size_t k = 0; k < game.num_states(); ++k) {
    const State& s = game.state(k);
    json entry = {{"name", s.name}, {"absorbing", s.absorbing}};
    if (s.absorbing) entry["payoff"] = s.absorbing_payoff;
    doc["states"].push_back(entry);
    if (s.absorbing) continue;

    doc["actions"][s.name] = {{"p1", s.p1_actions}, {"p2", s.p2_actions}};
    json pay = json::array();
    json tr = json::array();
    for (std::size_t i = 0; i < game.p1_actions(k); ++i) {
      json prow = json::array();
      json trow = json::array();
      for (std::size_t j = 0; j < game.p2_actions(k); ++j) {
        prow.push_back(game.payoff(k, i, j));
        json cell = json::object();
        auto q = game.transition(k, i, j);
        for (std::size_t t = 0; t < q.size(); ++t)
          if (q[t] != 0.0) cell[game.state(t).name] = q[t];
        trow.push_back(cell);
      }
      pay.push_back(prow);
      tr.push_back(trow);
    }
    doc["payoffs"][s.name] = pay;
    doc["transitions"][s.name] = tr;
  }
  doc["initial"] = game.state(game.initial()).name;
  return doc;
}

inline std::string serialize(const GameSpec& game) { return to_json(game).dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Stationary strategies

// One mixed action per active state for a single player (1 = maximizer,
// 2 = minimizer).
struct StationaryStrategy {
  int player = 1;
  std::vector<std::vector<double>> mixed;
};

inline bool operator==(const StationaryStrategy& a, const StationaryStrategy& b) {
  return a.player == b.player && a.mixed == b.mixed;
}

inline std::size_t action_count(const GameSpec& game, int player, std::size_t k) {
  return player == 1 ? game.p1_actions(k) : game.p2_actions(k);
}

// Throws unless the strategy matches the game's action sets; rows within
// 1e-12 of the simplex are accepted unchanged.
inline void check_strategy(const GameSpec& game, const StationaryStrategy& s) {
  if (s.player != 1 && s.player != 2)
    fail(ErrorKind::kInvalidArgument, "player must be 1 or 2");
  if (s.mixed.size() != game.num_active())
    fail(ErrorKind::kDimensionMismatch, "strategy covers " + std::to_string(s.mixed.size()) +
                                            " states, game has " +
                                            std::to_string(game.num_active()) + " active");
  for (std::size_t k = 0; k < game.num_active(); ++k) {
    if (s.mixed[k].size() != action_count(game, s.player, k))
      fail(ErrorKind::kDimensionMismatch, "strategy at state '" + game.state(k).name +
                                              "' has the wrong number of actions");
    double sum = 0.0;
    for (double p : s.mixed[k]) {
      if (!std::isfinite(p) || p < 0.0)
        fail(ErrorKind::kNegativeProbability,
             "strategy at state '" + game.state(k).name + "' is not a distribution");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kRowExactTolerance)
      fail(ErrorKind::kNonStochasticRow,
           "strategy at state '" + game.state(k).name + "' does not sum to 1");
  }
}

inline StationaryStrategy pure_strategy(const GameSpec& game, int player,
                                        const std::vector<std::size_t>& actions) {
  StationaryStrategy s{player, {}};
  if (actions.size() != game.num_active())
    fail(ErrorKind::kDimensionMismatch, "pure strategy needs one action per active state");
  for (std::size_t k = 0; k < game.num_active(); ++k) {
    std::vector<double> row(action_count(game, player, k), 0.0);
    if (actions[k] >= row.size()) fail(ErrorKind::kDimensionMismatch, "action index out of range");
    row[actions[k]] = 1.0;
    s.mixed.push_back(std::move(row));
  }
  return s;
}

inline StationaryStrategy uniform_strategy(const GameSpec& game, int player) {
  StationaryStrategy s{player, {}};
  for (std::size_t k = 0; k < game.num_active(); ++k) {
    const std::size_t n = action_count(game, player, k);
    s.mixed.emplace_back(n, 1.0 / static_cast<double>(n));
  }
  return s;
}

// {"player": 1, "states": {"s": {"stay": 0.0, "quit": 1.0}}}
inline nlohmann::json strategy_to_json(const GameSpec& game, const StationaryStrategy& s) {
  nlohmann::json doc;
  doc["player"] = s.player;
  doc["states"] = nlohmann::json::object();
  for (std::size_t k = 0; k < game.num_active(); ++k) {
    const auto& names = s.player == 1 ? game.state(k).p1_actions : game.state(k).p2_actions;
    nlohmann::json row = nlohmann::json::object();
    for (std::size_t a = 0; a < names.size(); ++a) row[names[a]] = s.mixed[k][a];
    doc["states"][game.state(k).name] = row;
  }
  return doc;
}

inline StationaryStrategy strategy_from_json(const GameSpec& game, const nlohmann::json& doc) {
  StationaryStrategy s;
  try {
    for (const auto& [key, _] : doc.items())
      if (key != "player" && key != "states")
        fail(ErrorKind::kParse, "unknown strategy key '" + key + "'");
    s.player = doc.at("player").get<int>();
    if (s.player != 1 && s.player != 2) fail(ErrorKind::kParse, "player must be 1 or 2");
    const auto& states = doc.at("states");
    for (const auto& [name, _] : states.items()) {
      auto k = game.find_state(name);
      if (!k || game.is_absorbing(*k))
        fail(ErrorKind::kDimensionMismatch, "strategy names unknown active state '" + name + "'");
    }
    for (std::size_t k = 0; k < game.num_active(); ++k) {
      const State& st = game.state(k);
      const auto& names = s.player == 1 ? st.p1_actions : st.p2_actions;
      if (!states.contains(st.name))
        fail(ErrorKind::kDimensionMismatch, "strategy misses state '" + st.name + "'");
      const auto& row = states.at(st.name);
      std::vector<double> probs(names.size(), 0.0);
      for (const auto& [action, p] : row.items()) {
        auto it = std::find(names.begin(), names.end(), action);
        if (it == names.end())
          fail(ErrorKind::kDimensionMismatch,
               "unknown action '" + action + "' at state '" + st.name + "'");
        probs[static_cast<std::size_t>(it - names.begin())] = p.get<double>();
      }
      s.mixed.push_back(std::move(probs));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kParse, e.what());
  }
  check_strategy(game, s);
  return s;
}

}  // namespace recgame
