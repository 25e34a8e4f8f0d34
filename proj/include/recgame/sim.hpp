#pragma once

// Monte Carlo play of stationary strategy profiles and the empirical check
// of the two uniform-guarantee clauses:
//
//   (A) (1/n) E[sum_{t<=n} g_t] >= floor(k1) - eps for all large n
//   (B) E[liminf (1/n) sum_{t<=n} g_t] >= floor(k1) - eps
//
// against a battery of stationary adversaries. (B) is estimated by the
// average payoff over the last 10% of the horizon. Reports are statistical
// evidence, not proofs.
//
// Stage convention: the payoff of the stage that transitions into an
// absorbing state is g of the active state; the absorbing payoff is paid
// from the next stage on. After absorption a trajectory is continued
// analytically.
//
// Random streams: replication r of a run with seed s draws from
// std::mt19937_64 seeded with splitmix64(splitmix64(s) ^ r); uniforms are
// the top 53 bits scaled by 2^-53. Both pieces are fully specified by their
// standards, so reports are reproducible across platforms (stream format
// version 1).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "recgame/detail/parallel.hpp"
#include "recgame/error.hpp"
#include "recgame/format.hpp"
#include "recgame/model.hpp"
#include "recgame/respond.hpp"

namespace recgame {

inline constexpr int kStreamFormatVersion = 1;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::mt19937_64 replication_stream(std::uint64_t seed, std::uint64_t replication) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ replication));
}

inline double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Index drawn from a probability vector; the last positive entry absorbs
// rounding slack.
inline std::size_t sample_index(std::span<const double> p, std::mt19937_64& gen) {
  const double u = uniform01(gen);
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    acc += p[i];
    last = i;
    if (u < acc) return i;
  }
  return last;
}

// Checkpoints 1, 2, 5, 10, 20, 50, ... below the horizon, plus the horizon.
inline std::vector<std::size_t> checkpoints_for(std::size_t horizon) {
  std::vector<std::size_t> out;
  for (std::size_t decade = 1;; decade *= 10) {
    for (std::size_t m : {1, 2, 5}) {
      const std::size_t n = m * decade;
      if (n >= horizon) {
        out.push_back(horizon);
        return out;
      }
      out.push_back(n);
    }
  }
}

// ---------------------------------------------------------------------------
// Single trajectories

inline constexpr std::size_t kNoAction = static_cast<std::size_t>(-1);

struct Trajectory {
  std::vector<std::size_t> states;                          // k_1..k_H
  std::vector<std::pair<std::size_t, std::size_t>> actions;  // kNoAction once absorbed
  std::vector<double> payoffs;                              // g_1..g_H
  std::optional<std::size_t> absorption_stage;              // stage of the absorbing transition
};

namespace detail {

inline void check_profile(const GameSpec& game, const StationaryStrategy& sigma,
                          const StationaryStrategy& tau) {
  check_strategy(game, sigma);
  check_strategy(game, tau);
  if (sigma.player != 1 || tau.player != 2)
    fail(ErrorKind::kInvalidArgument, "sigma must belong to player 1 and tau to player 2");
}

}  // namespace detail

inline Trajectory sample_trajectory(const GameSpec& game, const StationaryStrategy& sigma,
                                    const StationaryStrategy& tau, std::size_t horizon,
                                    std::mt19937_64& gen) {
  detail::check_profile(game, sigma, tau);
  Trajectory tr;
  std::size_t k = game.initial();
  if (game.is_absorbing(k)) tr.absorption_stage = 0;
  for (std::size_t t = 1; t <= horizon; ++t) {
    tr.states.push_back(k);
    if (game.is_absorbing(k)) {
      tr.actions.emplace_back(kNoAction, kNoAction);
      tr.payoffs.push_back(game.absorbing_payoff(k));
      continue;
    }
    const std::size_t i = sample_index(sigma.mixed[k], gen);
    const std::size_t j = sample_index(tau.mixed[k], gen);
    tr.actions.emplace_back(i, j);
    tr.payoffs.push_back(game.payoff(k, i, j));
    k = sample_index(game.transition(k, i, j), gen);
    if (game.is_absorbing(k)) tr.absorption_stage = t;
  }
  return tr;
}

// ---------------------------------------------------------------------------
// Aggregate simulation

struct CheckpointStats {
  std::size_t n = 0;
  double mean = 0.0;
  double ci_halfwidth = 0.0;
  double absorption_rate = 0.0;  // fraction absorbed at or before stage n
};

struct SimulationReport {
  std::size_t initial_state = 0;
  std::size_t horizon = 0;
  std::size_t replications = 0;
  std::uint64_t seed = 0;
  std::vector<CheckpointStats> checkpoints;
  double absorption_frequency = 0.0;  // absorbed within the horizon
  double tail_mean = 0.0;             // mean over replications of the final-10% average
  double tail_ci_halfwidth = 0.0;
};

inline bool operator==(const CheckpointStats& a, const CheckpointStats& b) {
  return a.n == b.n && a.mean == b.mean && a.ci_halfwidth == b.ci_halfwidth &&
         a.absorption_rate == b.absorption_rate;
}

inline bool operator==(const SimulationReport& a, const SimulationReport& b) {
  return a.initial_state == b.initial_state && a.horizon == b.horizon &&
         a.replications == b.replications && a.seed == b.seed &&
         a.checkpoints == b.checkpoints && a.absorption_frequency == b.absorption_frequency &&
         a.tail_mean == b.tail_mean && a.tail_ci_halfwidth == b.tail_ci_halfwidth;
}

struct SimulationOptions {
  std::size_t horizon = 10000;
  std::size_t replications = 1000;
  std::uint64_t seed = 0;
  std::optional<std::size_t> initial_state;  // defaults to the game's
  std::size_t jobs = 1;
};

namespace detail {

// Active states from which no absorbing state is reachable under the profile.
// In a recursive game the payoff is zero forever once such a state is hit.
inline std::vector<bool> trapped_states(const GameSpec& game, const StationaryStrategy& sigma,
                                        const StationaryStrategy& tau) {
  const std::size_t n = game.num_states();
  std::vector<bool> reaches(n, false);
  for (std::size_t k = game.num_active(); k < n; ++k) reaches[k] = true;
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t k = 0; k < game.num_active(); ++k) {
      if (reaches[k]) continue;
      for (std::size_t i = 0; i < game.p1_actions(k) && !reaches[k]; ++i) {
        if (sigma.mixed[k][i] <= 0.0) continue;
        for (std::size_t j = 0; j < game.p2_actions(k) && !reaches[k]; ++j) {
          if (tau.mixed[k][j] <= 0.0) continue;
          const auto q = game.transition(k, i, j);
          for (std::size_t t = 0; t < n; ++t)
            if (q[t] > 0.0 && reaches[t]) {
              reaches[k] = true;
              changed = true;
              break;
            }
        }
      }
    }
  }
  std::vector<bool> trapped(n, false);
  for (std::size_t k = 0; k < game.num_active(); ++k) trapped[k] = !reaches[k];
  return trapped;
}

struct ReplicationOutcome {
  std::vector<double> averages;  // per checkpoint
  std::size_t absorption_stage;  // horizon + 1 when never absorbed
  double tail_average;
};

}  // namespace detail

inline SimulationReport simulate(const GameSpec& game, const StationaryStrategy& sigma,
                                 const StationaryStrategy& tau,
                                 const SimulationOptions& options = {}) {
  detail::check_profile(game, sigma, tau);
  const std::size_t horizon = options.horizon;
  const std::size_t reps = options.replications;
  if (horizon < 1) fail(ErrorKind::kInvalidArgument, "horizon must be >= 1");
  if (reps < 1) fail(ErrorKind::kInvalidArgument, "replications must be >= 1");
  const std::size_t start = options.initial_state.value_or(game.initial());
  if (start >= game.num_states()) fail(ErrorKind::kInvalidArgument, "initial state out of range");

  const auto checkpoints = checkpoints_for(horizon);
  const std::size_t tail_len = std::max<std::size_t>(1, (horizon + 9) / 10);
  const std::size_t tail_start = horizon - tail_len + 1;
  const bool recursive = is_recursive(game);
  const auto trapped = recursive ? detail::trapped_states(game, sigma, tau)
                                 : std::vector<bool>(game.num_states(), false);

  std::vector<detail::ReplicationOutcome> outcomes(reps);
  detail::parallel_for(reps, options.jobs, [&](std::size_t r) {
    auto gen = replication_stream(options.seed, r);
    auto& out = outcomes[r];
    out.averages.resize(checkpoints.size());
    out.absorption_stage = horizon + 1;

    std::size_t k = start;
    double sum = 0.0;
    double tail = 0.0;
    std::size_t c = 0;
    std::size_t t = 0;  // stages played so far
    // Payoff repeated forever once the trajectory stops being sampled.
    double rest = 0.0;
    if (game.is_absorbing(k)) {
      out.absorption_stage = 0;
      rest = game.absorbing_payoff(k);
    } else {
      while (t < horizon) {
        if (trapped[k]) break;
        const std::size_t i = sample_index(sigma.mixed[k], gen);
        const std::size_t j = sample_index(tau.mixed[k], gen);
        const double g = game.payoff(k, i, j);
        ++t;
        sum += g;
        if (t >= tail_start) tail += g;
        if (t == checkpoints[c]) out.averages[c++] = sum / static_cast<double>(t);
        k = sample_index(game.transition(k, i, j), gen);
        if (game.is_absorbing(k)) {
          out.absorption_stage = t;
          rest = game.absorbing_payoff(k);
          break;
        }
      }
    }
    for (; c < checkpoints.size(); ++c) {
      const std::size_t n = checkpoints[c];
      out.averages[c] = (sum + rest * static_cast<double>(n - t)) / static_cast<double>(n);
    }
    if (t < horizon) {
      const std::size_t from = std::max(t + 1, tail_start);
      tail += rest * static_cast<double>(horizon - from + 1);
    }
    out.tail_average = tail / static_cast<double>(tail_len);
  });

  // Fixed-order reduction over replications, shifted by the first sample so
  // that constant samples give their exact value and zero variance.
  auto mean_and_halfwidth = [&](auto value_of) {
    const double first = value_of(0);
    double shift = 0.0;
    for (std::size_t r = 0; r < reps; ++r) shift += value_of(r) - first;
    const double mean = first + shift / static_cast<double>(reps);
    double var = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
      const double d = value_of(r) - mean;
      var += d * d;
    }
    const double half =
        reps > 1 ? 1.96 * std::sqrt(var / static_cast<double>(reps - 1) / static_cast<double>(reps))
                 : 0.0;
    return std::pair{mean, half};
  };

  SimulationReport rep;
  rep.initial_state = start;
  rep.horizon = horizon;
  rep.replications = reps;
  rep.seed = options.seed;
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    auto [mean, half] = mean_and_halfwidth([&](std::size_t r) { return outcomes[r].averages[c]; });
    std::size_t absorbed = 0;
    for (const auto& o : outcomes)
      if (o.absorption_stage <= checkpoints[c]) ++absorbed;
    rep.checkpoints.push_back(
        {checkpoints[c], mean, half, static_cast<double>(absorbed) / static_cast<double>(reps)});
  }
  std::size_t absorbed = 0;
  for (const auto& o : outcomes)
    if (o.absorption_stage <= horizon) ++absorbed;
  rep.absorption_frequency = static_cast<double>(absorbed) / static_cast<double>(reps);
  auto [tm, th] = mean_and_halfwidth([&](std::size_t r) { return outcomes[r].tail_average; });
  rep.tail_mean = tm;
  rep.tail_ci_halfwidth = th;
  return rep;
}

// ---------------------------------------------------------------------------
// Adversaries

struct Adversary {
  std::string name;
  StationaryStrategy strategy;
};

struct BatteryOptions {
  std::vector<double> lambdas = {1e-2, 1e-3, 1e-4};
  double best_response_tol = 1e-6;
  std::size_t max_pure = 64;     // enumerate pure strategies when there are at most this many
  std::size_t num_random = 32;
  std::uint64_t seed = 0;
};

inline StationaryStrategy random_strategy(const GameSpec& game, int player, std::mt19937_64& gen) {
  StationaryStrategy s{player, {}};
  for (std::size_t k = 0; k < game.num_active(); ++k) {
    std::vector<double> row(action_count(game, player, k));
    double sum = 0.0;
    for (double& p : row) {
      p = -std::log(1.0 - uniform01(gen));
      sum += p;
    }
    for (double& p : row) p /= sum;
    s.mixed.push_back(std::move(row));
  }
  return s;
}

// Stationary opponents of `strategy`'s owner: discounted best responses,
// every pure stationary strategy when there are few, and random mixtures.
inline std::vector<Adversary> build_adversary_battery(const GameSpec& game,
                                                      const StationaryStrategy& strategy,
                                                      const BatteryOptions& options = {}) {
  check_strategy(game, strategy);
  const int opponent = 3 - strategy.player;
  std::vector<Adversary> out;
  for (double lambda : options.lambdas) {
    auto br = best_response_discounted(game, strategy, lambda, options.best_response_tol);
    out.push_back({"best_response@" + format_number(lambda), br.strategy(game)});
  }

  double count = 1.0;
  for (std::size_t k = 0; k < game.num_active(); ++k)
    count *= static_cast<double>(action_count(game, opponent, k));
  if (count <= static_cast<double>(options.max_pure)) {
    std::vector<std::size_t> choice(game.num_active(), 0);
    for (;;) {
      std::string name = "pure:";
      for (std::size_t k = 0; k < choice.size(); ++k)
        name += (k ? "," : "") + std::to_string(choice[k]);
      out.push_back({name, pure_strategy(game, opponent, choice)});
      std::size_t k = 0;
      while (k < choice.size() && ++choice[k] == action_count(game, opponent, k)) choice[k++] = 0;
      if (k == choice.size()) break;
    }
  }

  auto gen = replication_stream(options.seed, 0x6164766572736172ULL);
  for (std::size_t r = 0; r < options.num_random; ++r)
    out.push_back({"random:" + std::to_string(r), random_strategy(game, opponent, gen)});
  return out;
}

// ---------------------------------------------------------------------------
// Guarantee harness

struct AdversaryVerdict {
  std::string adversary;
  SimulationReport simulation;
  double floor = 0.0;
  bool clause_a = false;
  std::optional<std::size_t> n_hat;  // first checkpoint from which (A) holds throughout
  bool clause_b = false;
};

struct GuaranteeReport {
  int player = 1;
  double epsilon = 0.0;
  ValueVector floor;
  std::vector<AdversaryVerdict> verdicts;
  bool pass = false;
  std::string caveat =
      "Monte Carlo evidence against a finite stationary battery; not a proof of the guarantee.";
};

struct GuaranteeOptions {
  std::size_t horizon = 10000;
  std::size_t replications = 1000;
  std::uint64_t seed = 0;
  // Initial states to test; empty means the game's initial state.
  std::vector<std::size_t> initial_states;
  std::size_t jobs = 1;
};

inline GuaranteeReport guarantee_report(const GameSpec& game, const StationaryStrategy& strategy,
                                        std::span<const double> floor, double epsilon,
                                        const std::vector<Adversary>& adversaries,
                                        const GuaranteeOptions& options = {}) {
  if (adversaries.empty()) fail(ErrorKind::kInvalidArgument, "adversary list is empty");
  check_strategy(game, strategy);
  const auto full_floor = game.extend(floor);
  const double s = strategy.player == 1 ? 1.0 : -1.0;

  std::vector<std::size_t> starts = options.initial_states;
  if (starts.empty()) starts.push_back(game.initial());

  GuaranteeReport rep;
  rep.player = strategy.player;
  rep.epsilon = epsilon;
  rep.floor.assign(floor.begin(), floor.end());
  rep.pass = true;
  for (std::size_t a = 0; a < adversaries.size(); ++a) {
    const auto& adv = adversaries[a];
    if (adv.strategy.player != 3 - strategy.player)
      fail(ErrorKind::kInvalidArgument, "adversary '" + adv.name + "' plays the wrong side");
    for (std::size_t start : starts) {
      SimulationOptions sim;
      sim.horizon = options.horizon;
      sim.replications = options.replications;
      sim.seed = splitmix64(options.seed ^ splitmix64(a)) ^ start;
      sim.initial_state = start;
      sim.jobs = options.jobs;
      AdversaryVerdict v;
      v.adversary = adv.name;
      v.floor = full_floor[start];
      v.simulation = strategy.player == 1 ? simulate(game, strategy, adv.strategy, sim)
                                          : simulate(game, adv.strategy, strategy, sim);
      // Player 1 needs mean >= floor - eps - CI; player 2 the mirror image.
      auto holds = [&](double mean, double half) {
        return s * (mean - v.floor) >= -epsilon - half;
      };
      const auto& cps = v.simulation.checkpoints;
      for (std::size_t c = cps.size(); c-- > 0;) {
        if (!holds(cps[c].mean, cps[c].ci_halfwidth)) break;
        v.n_hat = cps[c].n;
      }
      v.clause_a = v.n_hat.has_value();
      v.clause_b = holds(v.simulation.tail_mean, v.simulation.tail_ci_halfwidth);
      rep.pass = rep.pass && v.clause_a && v.clause_b;
      rep.verdicts.push_back(std::move(v));
    }
  }
  return rep;
}

inline void write_simulation_csv_header(std::ostream& os) {
  os << "adversary,checkpoint_n,mean,ci_halfwidth,absorption_rate,tail_mean\n";
}

inline void write_simulation_csv_rows(std::ostream& os, const std::string& adversary,
                                      const SimulationReport& rep) {
  for (const auto& c : rep.checkpoints)
    os << adversary << ',' << c.n << ',' << format_number(c.mean) << ','
       << format_number(c.ci_halfwidth) << ',' << format_number(c.absorption_rate) << ','
       << format_number(rep.tail_mean) << '\n';
}

inline void write_guarantee_csv(std::ostream& os, const GameSpec& game,
                                const GuaranteeReport& rep) {
  write_simulation_csv_header(os);
  for (const auto& v : rep.verdicts) {
    std::string name = v.adversary;
    if (v.simulation.initial_state != game.initial())
      name += "@" + game.state(v.simulation.initial_state).name;
    write_simulation_csv_rows(os, name, v.simulation);
  }
}

inline nlohmann::json guarantee_to_json(const GameSpec& game, const GuaranteeReport& rep) {
  using nlohmann::json;
  json doc;
  doc["player"] = rep.player;
  doc["epsilon"] = rep.epsilon;
  doc["floor"] = json::object();
  for (std::size_t k = 0; k < rep.floor.size(); ++k) doc["floor"][game.state(k).name] = rep.floor[k];
  doc["verdicts"] = json::array();
  for (const auto& v : rep.verdicts) {
    json e;
    e["adversary"] = v.adversary;
    e["initial_state"] = game.state(v.simulation.initial_state).name;
    e["clause_a"] = v.clause_a ? "pass" : "fail";
    e["n_hat"] = v.n_hat ? json(*v.n_hat) : json(nullptr);
    e["clause_b"] = v.clause_b ? "pass" : "fail";
    e["final_mean"] = v.simulation.checkpoints.back().mean;
    e["tail_mean"] = v.simulation.tail_mean;
    doc["verdicts"].push_back(e);
  }
  doc["verdict"] = rep.pass ? "pass" : "fail";
  doc["caveat"] = rep.caveat;
  return doc;
}

}  // namespace recgame
