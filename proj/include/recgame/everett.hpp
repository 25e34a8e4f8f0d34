#pragma once

// Certificate regions of recursive games.
//
//   plus:  Phi(0,u) >= u, and Phi(0,u)(k) > u(k) wherever u(k) > 0
//   minus: Phi(0,u) <= u, and Phi(0,u)(k) < u(k) wherever u(k) < 0
//
// The value is the single point shared by the closures of both regions. A
// vector in the plus region is guaranteed by the maximizer with the
// stationary strategy that plays, at each state, an optimal action of the
// one-shot game Phi(0,u)(k); symmetrically for the minimizer.
//
// Strict inequalities are checked as margins: a weak tolerance for ">=" and
// an explicit strict margin for ">".

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "recgame/error.hpp"
#include "recgame/model.hpp"
#include "recgame/shapley.hpp"

namespace recgame {

enum class Side { kPlus, kMinus };

inline std::string to_string(Side side) { return side == Side::kPlus ? "plus" : "minus"; }

inline Side side_from_string(std::string_view s) {
  if (s == "plus") return Side::kPlus;
  if (s == "minus") return Side::kMinus;
  fail(ErrorKind::kInvalidArgument, "side must be 'plus' or 'minus'");
}

inline double side_sign(Side side) { return side == Side::kPlus ? 1.0 : -1.0; }

struct CertificateTolerances {
  double weak_tol = 1e-9;
  double strict_tol = 1e-6;
};

struct CertificateReport {
  ValueVector u;
  Side side = Side::kPlus;
  std::vector<double> weak_margin;       // per active state, sign-adjusted
  std::vector<std::size_t> strict_set;   // states where strictness is required
  std::vector<double> strict_margin;     // aligned with strict_set
  bool pass = false;
  CertificateTolerances tolerances;
};

inline CertificateReport xi_margin(const GameSpec& game, std::span<const double> u, Side side,
                                   const CertificateTolerances& tol = {}) {
  require_recursive(game);
  const double bound = game.payoff_bound();
  if (u.size() != game.num_active())
    fail(ErrorKind::kDimensionMismatch, "candidate vector has the wrong length");
  bool bounded = true;
  for (double x : u) {
    if (!std::isfinite(x)) fail(ErrorKind::kNonFiniteEntry, "candidate vector is not finite");
    if (std::abs(x) > bound + 1e-12) bounded = false;
  }
  const ValueVector phi = apply_operator(game, 0.0, u);
  const double s = side_sign(side);

  CertificateReport rep;
  rep.u.assign(u.begin(), u.end());
  rep.side = side;
  rep.tolerances = tol;
  // Vectors outside [-M, M] are reported but never certified.
  rep.pass = bounded;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double margin = s * (phi[k] - u[k]);
    rep.weak_margin.push_back(margin);
    if (margin < -tol.weak_tol) rep.pass = false;
    if (s * u[k] > tol.strict_tol) {
      rep.strict_set.push_back(k);
      rep.strict_margin.push_back(margin);
      if (margin < tol.strict_tol) rep.pass = false;
    }
  }
  return rep;
}

// Phi(0,u) >= u - tol, and u(k) <= tol wherever Phi(0,u)(k) is within tol of u(k).
inline bool equivalent_characterization_check(const GameSpec& game, std::span<const double> u,
                                              double tol) {
  require_recursive(game);
  const ValueVector phi = apply_operator(game, 0.0, u);
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (phi[k] < u[k] - tol) return false;
    if (std::abs(phi[k] - u[k]) <= tol && u[k] > tol) return false;
  }
  return true;
}

// Largest grid point lambda_bar such that Phi(lambda,u) >= u - 1e-10 holds at
// every grid point lambda <= lambda_bar. Works on any game.
inline std::optional<double> mn_condition_check(const GameSpec& game, std::span<const double> u,
                                                std::span<const double> grid) {
  if (grid.empty()) fail(ErrorKind::kInvalidArgument, "lambda grid is empty");
  std::vector<double> sorted(grid.begin(), grid.end());
  std::sort(sorted.begin(), sorted.end());
  std::optional<double> best;
  for (double lambda : sorted) {
    const ValueVector phi = apply_operator(game, lambda, u);
    for (std::size_t k = 0; k < u.size(); ++k)
      if (phi[k] < u[k] - 1e-10) return best;
    best = lambda;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Certificate search

struct SearchOptions {
  CertificateTolerances tolerances;
  // Repair rounds per seed.
  std::size_t budget = 40;
  // First strictness correction; doubled every round.
  double initial_step = 1e-5;
  std::size_t max_stabilize_iterations = 100000;
  // Additional starting points tried after the target itself.
  std::vector<ValueVector> extra_seeds;
};

struct SearchResult {
  bool found = false;
  // Passing certificate closest to the target, or on failure the candidate
  // with the smallest margin violation.
  CertificateReport report;
  double distance = std::numeric_limits<double>::infinity();
  std::size_t candidates_tried = 0;
};

namespace detail {

// Works in "plus coordinates" w = s*u, where the minus region of the game
// becomes the plus region of the operator w -> s*Phi(0, s*w).
class CertificateSearch {
 public:
  CertificateSearch(const GameSpec& game, Side side, const SearchOptions& options)
      : game_(game), sign_(side_sign(side)), side_(side), options_(options) {}

  ValueVector phi(const ValueVector& w) const {
    ValueVector u = scaled(w);
    ValueVector p = apply_operator(game_, 0.0, u);
    for (double& x : p) x *= sign_;
    return p;
  }

  ValueVector scaled(const ValueVector& w) const {
    ValueVector u = w;
    for (double& x : u) x *= sign_;
    return u;
  }

  // w <- min(w, Phi(w)) until the largest decrease is below weak_tol / 10;
  // the weak margins at the result are then >= -weak_tol / 10.
  ValueVector stabilize(ValueVector w) const {
    const double stop = options_.tolerances.weak_tol / 10.0;
    for (std::size_t it = 0; it < options_.max_stabilize_iterations; ++it) {
      const ValueVector p = phi(w);
      double moved = 0.0;
      for (std::size_t k = 0; k < w.size(); ++k) {
        if (p[k] < w[k]) {
          moved = std::max(moved, w[k] - p[k]);
          w[k] = p[k];
        }
      }
      if (moved <= stop) break;
    }
    return w;
  }

  ValueVector repair(ValueVector w) const {
    const double bound = game_.payoff_bound();
    const double strict = options_.tolerances.strict_tol;
    for (double& x : w) x = std::clamp(x, -bound, bound);
    double step = options_.initial_step;
    for (std::size_t round = 0; round <= options_.budget; ++round) {
      w = stabilize(std::move(w));
      const ValueVector p = phi(w);
      bool changed = false;
      for (std::size_t k = 0; k < w.size(); ++k) {
        if (w[k] > strict && p[k] - w[k] < strict) {
          // Lower the offending coordinate, stopping at zero where
          // strictness is no longer required.
          w[k] = std::max(w[k] - step, 0.0);
          changed = true;
        }
      }
      if (!changed) break;
      step *= 2.0;
    }
    return w;
  }

  CertificateReport verify(const ValueVector& w) const {
    return xi_margin(game_, scaled(w), side_, options_.tolerances);
  }

 private:
  const GameSpec& game_;
  double sign_;
  Side side_;
  const SearchOptions& options_;
};

inline double worst_violation(const CertificateReport& rep) {
  double v = 0.0;
  for (double m : rep.weak_margin) v = std::max(v, -m - rep.tolerances.weak_tol);
  for (double m : rep.strict_margin) v = std::max(v, rep.tolerances.strict_tol - m);
  return v;
}

}  // namespace detail

// Heuristic search for a passing certificate near `target`. Every seed
// (the target, then options.extra_seeds) is pushed down onto the weak
// region by u <- min(u, Phi(0,u)), then coordinates that miss the strict
// margin are lowered in growing steps. A final candidate starts from
// min(target, 0), which always reaches the region. Each candidate is checked
// by xi_margin; the passing one closest to the target wins, earliest on ties.
inline SearchResult find_certificate(const GameSpec& game, Side side,
                                     std::span<const double> target,
                                     const SearchOptions& options = {}) {
  require_recursive(game);
  if (target.size() != game.num_active())
    fail(ErrorKind::kDimensionMismatch, "target has the wrong length");
  detail::CertificateSearch search(game, side, options);
  const double s = side_sign(side);
  auto to_plus = [&](std::span<const double> u) {
    ValueVector w(u.begin(), u.end());
    for (double& x : w) x *= s;
    return w;
  };

  std::vector<ValueVector> seeds;
  seeds.push_back(to_plus(target));
  for (const auto& extra : options.extra_seeds) {
    if (extra.size() != game.num_active())
      fail(ErrorKind::kDimensionMismatch, "extra seed has the wrong length");
    seeds.push_back(to_plus(extra));
  }

  SearchResult result;
  double best_violation = std::numeric_limits<double>::infinity();
  auto consider = [&](const ValueVector& w) {
    CertificateReport rep = search.verify(w);
    ++result.candidates_tried;
    const double dist = sup_norm_diff(rep.u, target);
    if (rep.pass) {
      if (!result.found || dist < result.distance) {
        result.found = true;
        result.distance = dist;
        result.report = std::move(rep);
      }
    } else if (!result.found) {
      const double violation = detail::worst_violation(rep);
      if (violation < best_violation) {
        best_violation = violation;
        result.distance = dist;
        result.report = std::move(rep);
      }
    }
  };

  for (const auto& seed : seeds) consider(search.repair(seed));
  ValueVector fallback = seeds.front();
  for (double& x : fallback) x = std::min(x, 0.0);
  consider(search.stabilize(std::move(fallback)));
  return result;
}

// Optimal stationary strategy of the one-shot games Phi(0,u)(k): player 1
// needs a passing plus certificate, player 2 a passing minus certificate.
// The strategy depends on the state only.
inline StationaryStrategy extract_stationary_strategy(const GameSpec& game,
                                                      std::span<const double> u, int player,
                                                      const CertificateTolerances& tol = {}) {
  require_recursive(game);
  if (player != 1 && player != 2) fail(ErrorKind::kInvalidArgument, "player must be 1 or 2");
  const auto rep = xi_margin(game, u, player == 1 ? Side::kPlus : Side::kMinus, tol);
  if (!rep.pass)
    fail(ErrorKind::kCertificateNotValid,
         "vector is not a " + to_string(rep.side) + " certificate for player " +
             std::to_string(player));
  return stage_optimal_strategy(game, 0.0, u, player);
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json report_to_json(const GameSpec& game, const CertificateReport& rep) {
  using nlohmann::json;
  json doc;
  doc["side"] = to_string(rep.side);
  doc["u"] = json::object();
  doc["weak_margin"] = json::object();
  for (std::size_t k = 0; k < rep.u.size(); ++k) {
    doc["u"][game.state(k).name] = rep.u[k];
    doc["weak_margin"][game.state(k).name] = rep.weak_margin[k];
  }
  doc["strict_set"] = json::array();
  doc["strict_margin"] = json::object();
  for (std::size_t i = 0; i < rep.strict_set.size(); ++i) {
    const auto& name = game.state(rep.strict_set[i]).name;
    doc["strict_set"].push_back(name);
    doc["strict_margin"][name] = rep.strict_margin[i];
  }
  doc["tolerances"] = {{"weak_tol", rep.tolerances.weak_tol},
                       {"strict_tol", rep.tolerances.strict_tol}};
  doc["verdict"] = rep.pass ? "pass" : "fail";
  return doc;
}

// Only u, side and tolerances are read back; margins and verdict are
// recomputed so a stale or edited file cannot smuggle in a verdict.
inline CertificateReport report_from_json(const GameSpec& game, const nlohmann::json& doc) {
  ValueVector u(game.num_active(), 0.0);
  Side side;
  CertificateTolerances tol;
  try {
    side = side_from_string(doc.at("side").get<std::string>());
    const auto& uj = doc.at("u");
    for (std::size_t k = 0; k < game.num_active(); ++k) {
      const auto& name = game.state(k).name;
      if (!uj.contains(name))
        fail(ErrorKind::kDimensionMismatch, "certificate misses state '" + name + "'");
      u[k] = uj.at(name).get<double>();
    }
    if (uj.size() != game.num_active())
      fail(ErrorKind::kDimensionMismatch, "certificate names unknown states");
    if (doc.contains("tolerances")) {
      tol.weak_tol = doc["tolerances"].at("weak_tol").get<double>();
      tol.strict_tol = doc["tolerances"].at("strict_tol").get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kParse, e.what());
  }
  return xi_margin(game, u, side, tol);
}

}  // namespace recgame
