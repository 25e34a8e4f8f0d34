#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "recgame/recgame.hpp"

namespace recgame::cli {
namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kParse, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    fail(ErrorKind::kParse, "'" + path + "': " + e.what());
  }
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::kParse, "cannot write '" + path + "'");
  out << content;
  if (!out) fail(ErrorKind::kParse, "failed writing '" + path + "'");
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

// "geometric:A..B:P" -> P points from A down to B.
std::vector<double> parse_grid(const std::string& spec) {
  const std::string prefix = "geometric:";
  auto bad = [&] {
    fail(ErrorKind::kInvalidArgument, "grid must look like geometric:A..B:P, got '" + spec + "'");
  };
  if (spec.rfind(prefix, 0) != 0) bad();
  const std::string body = spec.substr(prefix.size());
  const auto dots = body.find("..");
  const auto colon = body.rfind(':');
  if (dots == std::string::npos || colon == std::string::npos || colon < dots) bad();
  try {
    std::size_t used = 0;
    const std::string a = body.substr(0, dots);
    const std::string b = body.substr(dots + 2, colon - dots - 2);
    const std::string p = body.substr(colon + 1);
    const double from = std::stod(a, &used);
    if (used != a.size()) bad();
    const double to = std::stod(b, &used);
    if (used != b.size()) bad();
    const long points = std::stol(p, &used);
    if (used != p.size() || points < 2) bad();
    return geometric_grid(from, to, static_cast<std::size_t>(points));
  } catch (const std::logic_error&) {
    bad();
  }
  return {};
}

std::size_t default_jobs() {
  if (const char* env = std::getenv("RECGAME_JOBS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<std::size_t>(v);
    } catch (const std::logic_error&) {
    }
  }
  return 1;
}

json values_json(const GameSpec& game, const ValueVector& v) {
  json doc = json::object();
  for (std::size_t k = 0; k < v.size(); ++k) doc[game.state(k).name] = v[k];
  return doc;
}

void print_values(std::ostream& out, const GameSpec& game, const ValueVector& v) {
  out << "state,value\n";
  for (std::size_t k = 0; k < v.size(); ++k)
    out << game.state(k).name << ',' << format_number(v[k]) << '\n';
}

struct Options {
  std::size_t jobs = 1;
  std::string game;
  std::string out;
  std::string json_out;
  double lambda = 0.1;
  double tol = 1e-10;
  std::size_t n = 1;
  std::string grid = "geometric:1e-1..1e-5:9";
  double limit_tol = 1e-3;
  std::string side = "plus";
  double eps = 0.01;
  double weak_tol = 1e-9;
  double strict_tol = 1e-6;
  std::size_t budget = 40;
  std::string cert;
  int player = 1;
  std::string strategy;
  std::string sigma;
  std::string tau;
  std::size_t horizon = 10000;
  std::size_t reps = 1000;
  std::uint64_t seed = 0;
  bool allow_trivial = false;
  bool all_states = false;
  std::string name;
};

GameSpec load_game(const Options& o) {
  return game_from_json(read_json(o.game), {o.allow_trivial});
}

void emit(std::ostream& out, const std::string& path, const std::string& content) {
  if (path.empty())
    out << content;
  else
    write_file(path, content);
}

// Target for certification: the vanishing-discount estimate.
LimitEstimate estimate_limit(const GameSpec& game, const Options& o) {
  const auto grid = parse_grid(o.grid);
  LimitOptions lo;
  lo.jobs = o.jobs;
  return vanishing_discount_limit(game, grid, o.limit_tol, lo);
}

int cmd_validate(const Options& o, std::ostream& out) {
  const GameSpec game = load_game(o);
  out << "valid: " << game.num_states() << " states (" << game.num_active() << " active, "
      << game.num_states() - game.num_active() << " absorbing)\n"
      << "recursive: " << (is_recursive(game) ? "yes" : "no") << '\n'
      << "payoff_bound: " << format_number(game.payoff_bound()) << '\n';
  if (game.trivial())
    out << "trivial: value " << format_number(game.absorbing_payoff(game.initial())) << '\n';
  return kExitOk;
}

int cmd_solve(const Options& o, std::ostream& out) {
  const GameSpec game = load_game(o);
  const auto sol = solve_discounted(game, o.lambda, o.tol);
  std::ostringstream ss;
  print_values(ss, game, sol.values);
  emit(out, o.out, ss.str());
  if (!o.out.empty()) out << "residual: " << format_number(sol.residual) << '\n';
  return kExitOk;
}

int cmd_nstage(const Options& o, std::ostream& out) {
  const GameSpec game = load_game(o);
  const auto vs = n_stage_values(game, o.n);
  print_values(out, game, vs.back());
  if (!o.out.empty()) {
    std::ostringstream ss;
    ss << "n,state,value\n";
    for (std::size_t n = 0; n < vs.size(); ++n)
      for (std::size_t k = 0; k < game.num_active(); ++k)
        ss << n + 1 << ',' << game.state(k).name << ',' << format_number(vs[n][k]) << '\n';
    write_file(o.out, ss.str());
  }
  return kExitOk;
}

int cmd_limit(const Options& o, std::ostream& out) {
  const GameSpec game = load_game(o);
  const auto est = estimate_limit(game, o);
  out << "status: " << (est.converged ? "converged" : "NOT-CONVERGED") << '\n';
  out << "last_cauchy: " << format_number(est.curve.cauchy.back()) << '\n';
  for (std::size_t k = 0; k < game.num_active(); ++k)
    out << "estimate " << game.state(k).name << ' ' << format_number(est.estimate[k]) << '\n';
  if (!o.out.empty()) {
    std::ostringstream ss;
    write_curve_csv(ss, game, est.curve);
    write_file(o.out, ss.str());
  }
  return kExitOk;
}

int cmd_certify(const Options& o, std::ostream& out, std::ostream& err) {
  const GameSpec game = load_game(o);
  const Side side = side_from_string(o.side);
  const auto est = estimate_limit(game, o);
  if (!est.converged) err << "warning: vanishing-discount estimate did not converge\n";

  SearchOptions so;
  so.tolerances = {o.weak_tol, o.strict_tol};
  so.budget = o.budget;
  // Larger discounts leave bigger strict margins.
  for (std::size_t i = 0; i + 1 < est.curve.values.size(); ++i)
    so.extra_seeds.push_back(est.curve.values[i]);
  const auto result = find_certificate(game, side, est.estimate, so);

  json doc = report_to_json(game, result.report);
  doc["target"] = values_json(game, est.estimate);
  doc["distance"] = result.distance;
  doc["search"] = result.found ? "found" : "failed";
  const bool ok = result.found && result.distance <= o.eps;
  emit(out, o.out, dump(doc));
  if (!ok)
    err << (result.found ? "certificate farther than eps from the estimate\n"
                         : "no passing certificate found\n");
  return ok ? kExitOk : kExitVerdictFail;
}

int cmd_strategy(const Options& o, std::ostream& out) {
  const GameSpec game = load_game(o);
  const auto rep = report_from_json(game, read_json(o.cert));
  const auto s = extract_stationary_strategy(game, rep.u, o.player, rep.tolerances);
  emit(out, o.out, dump(strategy_to_json(game, s)));
  return kExitOk;
}

int cmd_bestresponse(const Options& o, std::ostream& out) {
  const GameSpec game = load_game(o);
  const auto fixed = strategy_from_json(game, read_json(o.strategy));
  const auto br = best_response_discounted(game, fixed, o.lambda, o.tol);
  json doc;
  doc["lambda"] = br.lambda;
  doc["responder"] = br.responder;
  doc["values"] = values_json(game, br.values);
  doc["policy"] = json::object();
  for (std::size_t k = 0; k < br.policy.size(); ++k) {
    const auto& st = game.state(k);
    doc["policy"][st.name] =
        br.responder == 1 ? st.p1_actions[br.policy[k]] : st.p2_actions[br.policy[k]];
  }
  doc["strategy"] = strategy_to_json(game, br.strategy(game));
  emit(out, o.out, dump(doc));
  return kExitOk;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  const GameSpec game = load_game(o);
  const auto sigma = strategy_from_json(game, read_json(o.sigma));
  const auto tau = strategy_from_json(game, read_json(o.tau));
  SimulationOptions so;
  so.horizon = o.horizon;
  so.replications = o.reps;
  so.seed = o.seed;
  so.jobs = o.jobs;
  const auto rep = simulate(game, sigma, tau, so);
  std::ostringstream ss;
  write_simulation_csv_header(ss);
  write_simulation_csv_rows(ss, "tau", rep);
  emit(out, o.out, ss.str());
  if (!o.out.empty()) {
    out << "final_mean: " << format_number(rep.checkpoints.back().mean) << '\n'
        << "absorption_frequency: " << format_number(rep.absorption_frequency) << '\n'
        << "tail_mean: " << format_number(rep.tail_mean) << '\n';
  }
  return kExitOk;
}

int cmd_report(const Options& o, std::ostream& out) {
  const GameSpec game = load_game(o);
  const auto cert = report_from_json(game, read_json(o.cert));
  const int player = cert.side == Side::kPlus ? 1 : 2;
  const auto strategy = extract_stationary_strategy(game, cert.u, player, cert.tolerances);

  BatteryOptions bo;
  bo.seed = o.seed;
  const auto battery = build_adversary_battery(game, strategy, bo);
  GuaranteeOptions go;
  go.horizon = o.horizon;
  go.replications = o.reps;
  go.seed = o.seed;
  go.jobs = o.jobs;
  if (o.all_states)
    for (std::size_t k = 0; k < game.num_active(); ++k) go.initial_states.push_back(k);
  const auto rep = guarantee_report(game, strategy, cert.u, o.eps, battery, go);

  if (!o.out.empty()) {
    std::ostringstream ss;
    write_guarantee_csv(ss, game, rep);
    write_file(o.out, ss.str());
  }
  json doc = guarantee_to_json(game, rep);
  doc["strategy"] = strategy_to_json(game, strategy);
  emit(out, o.json_out, dump(doc));
  if (!o.json_out.empty()) out << "verdict: " << (rep.pass ? "pass" : "fail") << '\n';
  return rep.pass ? kExitOk : kExitVerdictFail;
}

int cmd_zoo(const Options& o, std::ostream& out) {
  const GameSpec game = zoo::make(o.name);
  emit(out, o.out, serialize(game));
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  o.jobs = default_jobs();

  CLI::App app{"Solver and verification harness for zero-sum recursive stochastic games",
               "recgame"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.add_option("--jobs", o.jobs, "Worker threads (default from RECGAME_JOBS, else 1)")
      ->check(CLI::PositiveNumber);

  auto add_game = [&](CLI::App* sub) {
    sub->add_option("FILE", o.game, "Game file (JSON)")->required();
  };
  auto add_cert_tolerances = [&](CLI::App* sub) {
    sub->add_option("--weak-tol", o.weak_tol, "Tolerance on the weak inequality");
    sub->add_option("--strict-tol", o.strict_tol, "Required strict margin");
  };
  auto add_limit = [&](CLI::App* sub) {
    sub->add_option("--grid", o.grid, "Discount grid geometric:A..B:P, decreasing");
    sub->add_option("--tol", o.limit_tol, "Cauchy tolerance over the last three grid points");
  };
  auto add_sim = [&](CLI::App* sub) {
    sub->add_option("--horizon", o.horizon, "Stages per replication")->check(CLI::PositiveNumber);
    sub->add_option("--reps", o.reps, "Replications")->check(CLI::PositiveNumber);
    sub->add_option("--seed", o.seed, "Random seed");
  };

  auto* validate_cmd = app.add_subcommand("validate", "Check a game file");
  add_game(validate_cmd);
  validate_cmd->add_flag("--allow-trivial", o.allow_trivial, "Accept games without active states");

  auto* solve = app.add_subcommand("solve", "Discounted value v_lambda");
  add_game(solve);
  solve->add_option("--lambda", o.lambda, "Discount factor in (0,1]")->required();
  solve->add_option("--tol", o.tol, "Distance to the exact fixed point");
  solve->add_option("--out", o.out, "Write the CSV here instead of stdout");

  auto* nstage = app.add_subcommand("nstage", "n-stage value v_n");
  add_game(nstage);
  nstage->add_option("--n", o.n, "Number of stages")->required()->check(CLI::PositiveNumber);
  nstage->add_option("--out", o.out, "Write v_1..v_n as CSV");

  auto* limit = app.add_subcommand("limit", "Vanishing-discount limit estimate");
  add_game(limit);
  add_limit(limit);
  limit->add_option("--out", o.out, "Write the discount curve CSV here");

  auto* certify = app.add_subcommand("certify", "Search a certificate near the limit value");
  add_game(certify);
  certify->add_option("--side", o.side, "plus (player 1) or minus (player 2)")
      ->check(CLI::IsMember({"plus", "minus"}));
  certify->add_option("--eps", o.eps, "Maximum distance from the limit estimate");
  add_cert_tolerances(certify);
  add_limit(certify);
  certify->add_option("--budget", o.budget, "Repair rounds per seed");
  certify->add_option("--out", o.out, "Write the certificate JSON here");

  auto* strategy = app.add_subcommand("strategy", "Stationary strategy from a certificate");
  add_game(strategy);
  strategy->add_option("--cert", o.cert, "Certificate JSON")->required();
  strategy->add_option("--player", o.player, "1 (plus certificate) or 2 (minus)")
      ->check(CLI::IsMember({1, 2}));
  strategy->add_option("--out", o.out, "Write the strategy JSON here");

  auto* bestresponse = app.add_subcommand("bestresponse", "Discounted best response");
  add_game(bestresponse);
  bestresponse->add_option("--strategy", o.strategy, "Fixed stationary strategy JSON")->required();
  bestresponse->add_option("--lambda", o.lambda, "Discount factor in (0,1]")->required();
  bestresponse->add_option("--tol", o.tol, "Distance to the exact optimal value");
  bestresponse->add_option("--out", o.out, "Write the result JSON here");

  auto* sim = app.add_subcommand("simulate", "Monte Carlo play of a stationary profile");
  add_game(sim);
  sim->add_option("--sigma", o.sigma, "Player 1 strategy JSON")->required();
  sim->add_option("--tau", o.tau, "Player 2 strategy JSON")->required();
  add_sim(sim);
  sim->add_option("--out", o.out, "Write the CSV here instead of stdout");

  auto* report = app.add_subcommand("report", "Uniform-guarantee harness for a certificate");
  add_game(report);
  report->add_option("--cert", o.cert, "Certificate JSON")->required();
  report->add_option("--eps", o.eps, "Slack epsilon");
  add_sim(report);
  report->add_flag("--all-states", o.all_states, "Test every active initial state");
  report->add_option("--out", o.out, "Write the per-adversary CSV here");
  report->add_option("--json", o.json_out, "Write the verdict JSON here instead of stdout");

  auto* zoo_cmd = app.add_subcommand("zoo", "Emit a canonical game");
  zoo_cmd->add_option("--name", o.name, "quit, duel or bigmatch")->required();
  zoo_cmd->add_option("--out", o.out, "Write the game JSON here instead of stdout");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }

  try {
    if (*validate_cmd) return cmd_validate(o, out);
    if (*solve) return cmd_solve(o, out);
    if (*nstage) return cmd_nstage(o, out);
    if (*limit) return cmd_limit(o, out);
    if (*certify) return cmd_certify(o, out, err);
    if (*strategy) return cmd_strategy(o, out);
    if (*bestresponse) return cmd_bestresponse(o, out);
    if (*sim) return cmd_simulate(o, out);
    if (*report) return cmd_report(o, out);
    if (*zoo_cmd) return cmd_zoo(o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  err << "error: unknown subcommand\n";
  return kExitInputError;
}

}  // namespace recgame::cli
