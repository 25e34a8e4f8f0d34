// Walks through the full pipeline on the quitting game: limit value,
// certificate, stationary strategy and the guarantee harness.

#include <iostream>

#include "recgame/recgame.hpp"

int main() {
  using namespace recgame;
  const GameSpec game = zoo::make("quit");

  const auto grid = geometric_grid(1e-1, 1e-5, 9);
  const auto limit = vanishing_discount_limit(game, grid, 1e-3);
  std::cout << "limit estimate: " << format_number(limit.estimate[0])
            << (limit.converged ? "" : " (not converged)") << '\n';

  const auto search = find_certificate(game, Side::kPlus, limit.estimate);
  std::cout << "plus certificate: u = " << format_number(search.report.u[0])
            << ", strict margin " << format_number(search.report.strict_margin.at(0)) << '\n';

  const auto sigma = extract_stationary_strategy(game, search.report.u, 1);
  std::cout << "strategy at s: stay " << sigma.mixed[0][0] << ", quit " << sigma.mixed[0][1]
            << '\n';

  const auto battery = build_adversary_battery(game, sigma);
  GuaranteeOptions opts;
  opts.horizon = 1000;
  opts.replications = 100;
  const auto report = guarantee_report(game, sigma, search.report.u, 0.02, battery, opts);
  std::cout << "guarantee against " << battery.size()
            << " adversaries: " << (report.pass ? "pass" : "fail") << '\n';
  return report.pass ? 0 : 1;
}
