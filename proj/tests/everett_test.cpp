#include "recgame/everett.hpp"

#include <gtest/gtest.h>

#include "recgame/matgame.hpp"
#include "recgame/shapley.hpp"
#include "recgame/zoo.hpp"

namespace recgame {
namespace {

const std::vector<double> kGrid = geometric_grid(1e-1, 1e-5, 9);

TEST(EverettTest, QuitPlusAtPointNine) {
  const auto rep = xi_margin(zoo::make("quit"), std::vector<double>{0.9}, Side::kPlus);
  EXPECT_TRUE(rep.pass);
  EXPECT_NEAR(rep.weak_margin[0], 0.1, 1e-12);
  ASSERT_EQ(rep.strict_set, std::vector<std::size_t>{0});
  EXPECT_NEAR(rep.strict_margin[0], 0.1, 1e-12);
}

TEST(EverettTest, QuitMinusAtOne) {
  const auto rep = xi_margin(zoo::make("quit"), std::vector<double>{1.0}, Side::kMinus);
  EXPECT_TRUE(rep.pass);
  EXPECT_NEAR(rep.weak_margin[0], 0.0, 1e-12);
  EXPECT_TRUE(rep.strict_set.empty());
}

TEST(EverettTest, QuitPlusAboveValueFails) {
  EXPECT_FALSE(xi_margin(zoo::make("quit"), std::vector<double>{1.1}, Side::kPlus).pass);
  EXPECT_FALSE(xi_margin(zoo::make("quit"), std::vector<double>{1.0}, Side::kPlus).pass);
}

TEST(EverettTest, DuelHalfFailsStrictness) {
  const auto rep = xi_margin(zoo::make("duel"), std::vector<double>{0.5}, Side::kPlus);
  EXPECT_FALSE(rep.pass);
  EXPECT_NEAR(rep.weak_margin[0], 0.0, 1e-12);
  ASSERT_EQ(rep.strict_set.size(), 1u);
  EXPECT_NEAR(rep.strict_margin[0], 0.0, 1e-12);
}

TEST(EverettTest, DuelZeroPassesBothSides) {
  const GameSpec g = zoo::make("duel");
  EXPECT_TRUE(xi_margin(g, std::vector<double>{0.0}, Side::kPlus).pass);
  EXPECT_TRUE(xi_margin(g, std::vector<double>{0.0}, Side::kMinus).pass);
}

TEST(EverettTest, RequiresRecursiveGame) {
  try {
    xi_margin(zoo::make("bigmatch"), std::vector<double>{0.0}, Side::kPlus);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNotRecursive);
  }
}

TEST(EverettTest, EquivalentCharacterization) {
  EXPECT_TRUE(equivalent_characterization_check(zoo::make("quit"), std::vector<double>{0.9}, 1e-9));
  EXPECT_FALSE(equivalent_characterization_check(zoo::make("duel"), std::vector<double>{0.5}, 1e-9));
  EXPECT_TRUE(equivalent_characterization_check(zoo::make("duel"), std::vector<double>{-0.3}, 1e-9));
}

// Agreement with xi_margin(plus) away from the tolerance boundary.
TEST(EverettTest, EquivalentCharacterizationAgreesWithMargins) {
  const double tol = 1e-6;
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u01(-1.0, 1.0);
  int compared = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const GameSpec g = zoo::random_recursive(1 + seed % 3, 2, 3, 0.3, seed);
    for (int rep = 0; rep < 10; ++rep) {
      std::vector<double> u(g.num_active());
      for (double& x : u) x = g.payoff_bound() * u01(gen);
      const auto r = xi_margin(g, u, Side::kPlus, {tol, tol});
      bool away = true;
      for (double m : r.weak_margin) away = away && std::abs(m) >= 2 * tol;
      for (double x : u) away = away && std::abs(x) >= 2 * tol;
      if (!away) continue;
      ++compared;
      EXPECT_EQ(equivalent_characterization_check(g, u, tol), r.pass);
    }
  }
  EXPECT_GT(compared, 100);
}

TEST(EverettTest, MnConditionExamples) {
  const std::vector<double> grid{0.2, 0.1, 0.05};
  EXPECT_EQ(mn_condition_check(zoo::make("quit"), std::vector<double>{0.9}, grid), 0.1);
  EXPECT_EQ(mn_condition_check(zoo::make("duel"), std::vector<double>{0.0}, grid), 0.2);
  EXPECT_FALSE(mn_condition_check(zoo::make("quit"), std::vector<double>{1.1}, grid).has_value());
  EXPECT_THROW(mn_condition_check(zoo::make("quit"), std::vector<double>{0.9}, {}), Error);
  // Generic: works on a non-recursive game.
  EXPECT_TRUE(mn_condition_check(zoo::make("bigmatch"), std::vector<double>{0.4}, grid).has_value());
}

TEST(EverettTest, FindCertificateQuit) {
  const GameSpec g = zoo::make("quit");
  const auto res = find_certificate(g, Side::kPlus, std::vector<double>{1.0});
  ASSERT_TRUE(res.found);
  EXPECT_TRUE(res.report.pass);
  EXPECT_LT(res.report.u[0], 1.0);
  EXPECT_GE(res.report.u[0], 0.99);
}

TEST(EverettTest, FindCertificateDuel) {
  const GameSpec g = zoo::make("duel");
  const auto at_zero = find_certificate(g, Side::kPlus, std::vector<double>{0.0});
  ASSERT_TRUE(at_zero.found);
  EXPECT_LE(at_zero.report.u[0], 0.0);
  EXPECT_NEAR(at_zero.distance, 0.0, 1e-6);

  const auto at_half = find_certificate(g, Side::kPlus, std::vector<double>{0.5});
  ASSERT_TRUE(at_half.found);
  EXPECT_LE(at_half.report.u[0], 0.0);
  EXPECT_NEAR(at_half.distance, 0.5, 1e-6);
}

TEST(EverettTest, SoundnessBracketOnZoo) {
  for (const char* name : {"quit", "duel"}) {
    const GameSpec g = zoo::make(name);
    const auto lim = vanishing_discount_limit(g, kGrid, 1e-3);
    const auto plus = find_certificate(g, Side::kPlus, lim.estimate);
    const auto minus = find_certificate(g, Side::kMinus, lim.estimate);
    ASSERT_TRUE(plus.found) << name;
    ASSERT_TRUE(minus.found) << name;
    for (std::size_t k = 0; k < g.num_active(); ++k) {
      EXPECT_LE(plus.report.u[k], lim.estimate[k] + 1e-3) << name;
      EXPECT_GE(minus.report.u[k], lim.estimate[k] - 1e-3) << name;
    }
  }
}

TEST(EverettTest, SearchResultsAlwaysReverify) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const GameSpec g = zoo::random_recursive(1 + seed % 4, 2, 3, 0.3, seed);
    const auto lim = vanishing_discount_limit(g, geometric_grid(1e-1, 1e-4, 7), 1e-3);
    for (Side side : {Side::kPlus, Side::kMinus}) {
      const auto res = find_certificate(g, side, lim.estimate);
      // The fallback candidate always lands in the region.
      ASSERT_TRUE(res.found) << seed;
      EXPECT_TRUE(xi_margin(g, res.report.u, side).pass);
      for (double x : res.report.u) EXPECT_LE(std::abs(x), g.payoff_bound() + 1e-12);
    }
  }
}

GameSpec scale_absorbing(const GameSpec& g, double t) {
  auto doc = to_json(g);
  for (auto& st : doc["states"])
    if (st["absorbing"].get<bool>()) st["payoff"] = t * st["payoff"].get<double>();
  return game_from_json(doc);
}

// Phi(0, .) is homogeneous once the absorbing payoffs scale too: a plus
// certificate u of G gives t u for the game with payoffs scaled by t, with
// the strict tolerance scaled by t.
TEST(EverettTest, ScalingClosureTowardZero) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const GameSpec g = zoo::random_recursive(1 + seed % 4, 2, 3, 0.3, seed + 50);
    const auto lim = vanishing_discount_limit(g, geometric_grid(1e-1, 1e-4, 7), 1e-3);
    const auto res = find_certificate(g, Side::kPlus, lim.estimate);
    ASSERT_TRUE(res.found);
    std::vector<double> half = res.report.u;
    for (double& x : half) x *= 0.5;
    const CertificateTolerances tol{1e-9, 0.5e-6};
    EXPECT_TRUE(xi_margin(scale_absorbing(g, 0.5), half, Side::kPlus, tol).pass) << seed;
  }
}

// With the absorbing payoffs held fixed the region is not closed under
// shrinking toward 0: absorb at -1 or stay, each with probability 1/2, has
// u = -1 in the plus region but not u = -1/2.
TEST(EverettTest, FixedGameScalingCounterexample) {
  RawGame raw;
  raw.states = {{"s", false, std::nullopt}, {"lose", true, -1.0}};
  raw.actions["s"] = {{"a"}, {"b"}};
  raw.payoffs["s"] = {{0.0}};
  raw.transitions["s"] = {{{{"s", 0.5}, {"lose", 0.5}}}};
  raw.initial = "s";
  const GameSpec g = validate(raw);
  EXPECT_TRUE(xi_margin(g, std::vector<double>{-1.0}, Side::kPlus).pass);
  const auto half = xi_margin(g, std::vector<double>{-0.5}, Side::kPlus);
  EXPECT_FALSE(half.pass);
  EXPECT_NEAR(half.weak_margin[0], -0.25, 1e-12);
}

TEST(EverettTest, MnConditionConsistency) {
  const double delta = 1e-6;
  const auto grid = geometric_grid(1e-1, 1e-9, 17);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const GameSpec g = zoo::random_recursive(1 + seed % 4, 2, 3, 0.3, seed + 80);
    const auto lim = vanishing_discount_limit(g, geometric_grid(1e-1, 1e-4, 7), 1e-3);
    const auto res = find_certificate(g, Side::kPlus, lim.estimate);
    ASSERT_TRUE(res.found);
    const double limit = delta / (g.payoff_bound() + delta);
    double smallest = 0.0;
    for (double l : grid)
      if (l <= limit && (smallest == 0.0 || l < smallest)) smallest = l;
    ASSERT_GT(smallest, 0.0);
    const auto bar = mn_condition_check(g, res.report.u, grid);
    ASSERT_TRUE(bar.has_value()) << seed;
    EXPECT_GE(*bar, smallest);
  }
}

TEST(EverettTest, ExtractStrategyExamples) {
  const GameSpec quit = zoo::make("quit");
  const auto s = extract_stationary_strategy(quit, std::vector<double>{0.9}, 1);
  EXPECT_EQ(s.mixed[0], (std::vector<double>{0.0, 1.0}));

  const GameSpec duel = zoo::make("duel");
  const auto d = extract_stationary_strategy(duel, std::vector<double>{0.0}, 1);
  EXPECT_EQ(d.mixed[0], (std::vector<double>{1.0, 0.0}));

  const auto m = extract_stationary_strategy(duel, std::vector<double>{-0.5}, 1);
  const Matrix a{{1, -0.5}, {-0.5, -1}};
  EXPECT_GE(row_guarantee(a, m.mixed[0]), -0.5 - 1e-9);
}

TEST(EverettTest, ExtractRejectsInvalidCertificate) {
  try {
    extract_stationary_strategy(zoo::make("duel"), std::vector<double>{0.5}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kCertificateNotValid);
  }
  // Player 2 needs a minus certificate.
  EXPECT_THROW(extract_stationary_strategy(zoo::make("quit"), std::vector<double>{0.9}, 2), Error);
}

// The strategy is a function of u and the state alone; discount context
// computed beforehand has no influence.
TEST(EverettTest, ExtractionIgnoresDiscountContext) {
  const GameSpec g = zoo::random_recursive(3, 2, 3, 0.3, 12);
  const auto lim = vanishing_discount_limit(g, kGrid, 1e-3);
  const auto res = find_certificate(g, Side::kPlus, lim.estimate);
  ASSERT_TRUE(res.found);
  const auto first = extract_stationary_strategy(g, res.report.u, 1);
  for (double lambda : {0.5, 0.01}) {
    (void)solve_discounted(g, lambda, 1e-8);
    EXPECT_EQ(extract_stationary_strategy(g, res.report.u, 1), first);
  }
}

TEST(EverettTest, ReportJsonRoundTrip) {
  const GameSpec g = zoo::make("quit");
  const auto rep = xi_margin(g, std::vector<double>{0.9}, Side::kPlus);
  auto doc = report_to_json(g, rep);
  EXPECT_EQ(doc["verdict"], "pass");
  const auto back = report_from_json(g, doc);
  EXPECT_EQ(back.u, rep.u);
  EXPECT_TRUE(back.pass);

  // A tampered verdict is ignored; the margins are recomputed.
  doc["u"]["s"] = 1.05;
  doc["verdict"] = "pass";
  EXPECT_FALSE(report_from_json(g, doc).pass);

  doc["u"] = nlohmann::json::object();
  EXPECT_THROW(report_from_json(g, doc), Error);
}

}  // namespace
}  // namespace recgame
