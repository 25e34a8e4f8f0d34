#include "recgame/sim.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"
#include "recgame/zoo.hpp"

namespace recgame {
namespace {

TEST(SimTest, Checkpoints) {
  EXPECT_EQ(checkpoints_for(1), (std::vector<std::size_t>{1}));
  EXPECT_EQ(checkpoints_for(7), (std::vector<std::size_t>{1, 2, 5, 7}));
  EXPECT_EQ(checkpoints_for(100), (std::vector<std::size_t>{1, 2, 5, 10, 20, 50, 100}));
  const auto c = checkpoints_for(10000);
  EXPECT_EQ(c.size(), 13u);
  EXPECT_EQ(c[11], 5000u);
  EXPECT_EQ(c.back(), 10000u);
}

TEST(SimTest, SplitmixReferenceValues) {
  // First outputs of the reference splitmix64 generator seeded with 0.
  EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(kStreamFormatVersion, 1);
}

TEST(SimTest, UniformRangeAndSampling) {
  auto gen = replication_stream(1, 2);
  for (int i = 0; i < 1000; ++i) {
    const double u = uniform01(gen);
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
  const std::vector<double> p{0.0, 1.0, 0.0};
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_index(p, gen), 1u);
}

TEST(SimTest, QuitQuitterAveragesAreExact) {
  const GameSpec g = zoo::make("quit");
  const auto rep = simulate(g, pure_strategy(g, 1, {1}), uniform_strategy(g, 2),
                            {.horizon = 100, .replications = 10, .seed = 3});
  for (const auto& c : rep.checkpoints) {
    EXPECT_DOUBLE_EQ(c.mean, (c.n - 1.0) / c.n);
    EXPECT_EQ(c.ci_halfwidth, 0.0);
    EXPECT_EQ(c.absorption_rate, 1.0);
  }
  EXPECT_EQ(rep.absorption_frequency, 1.0);
  EXPECT_DOUBLE_EQ(rep.tail_mean, 1.0);
}

TEST(SimTest, QuitStayerIsTrapped) {
  const GameSpec g = zoo::make("quit");
  const auto rep = simulate(g, pure_strategy(g, 1, {0}), uniform_strategy(g, 2),
                            {.horizon = 10000, .replications = 5, .seed = 1});
  EXPECT_EQ(rep.checkpoints.back().mean, 0.0);
  EXPECT_EQ(rep.absorption_frequency, 0.0);
}

TEST(SimTest, TrajectoryConvention) {
  const GameSpec g = zoo::make("bigmatch");
  auto gen = replication_stream(4, 0);
  const auto tr = sample_trajectory(g, pure_strategy(g, 1, {0}), pure_strategy(g, 2, {0}), 5, gen);
  // Top-left pays 1 on the absorbing stage and 1 forever after.
  EXPECT_EQ(tr.payoffs, (std::vector<double>{1, 1, 1, 1, 1}));
  EXPECT_EQ(tr.absorption_stage, 1u);
  EXPECT_EQ(tr.actions[1].first, kNoAction);
}

// Monte Carlo means agree with exact expected averages from forward
// propagation of the state distribution.
TEST(SimTest, MeansMatchExactExpectation) {
  std::mt19937_64 gen(17);
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const GameSpec g = zoo::random_game({1 + seed % 3, 2, 2, 0.1, seed, seed % 2 == 0});
    const auto sigma = random_strategy(g, 1, gen);
    const auto tau = random_strategy(g, 2, gen);
    const std::size_t horizon = 200;
    const auto rep = simulate(g, sigma, tau, {.horizon = horizon, .replications = 4000, .seed = seed});
    const auto exact = oracle::expected_averages(g, sigma, tau, g.initial(), horizon);
    for (const auto& c : rep.checkpoints) {
      // 4.5 standard errors, plus slack for a zero-variance estimate.
      const double se = c.ci_halfwidth / 1.96;
      EXPECT_NEAR(c.mean, exact[c.n - 1], 4.5 * se + 1e-12) << "seed " << seed << " n " << c.n;
    }
  }
}

TEST(SimTest, DeterministicAndJobIndependent) {
  const GameSpec g = zoo::random_game({3, 2, 3, 0.05, 21, true});
  std::mt19937_64 gen(1);
  const auto sigma = random_strategy(g, 1, gen);
  const auto tau = random_strategy(g, 2, gen);
  const SimulationOptions one{.horizon = 500, .replications = 64, .seed = 9, .jobs = 1};
  SimulationOptions many = one;
  many.jobs = 4;
  const auto a = simulate(g, sigma, tau, one);
  EXPECT_TRUE(a == simulate(g, sigma, tau, one));
  EXPECT_TRUE(a == simulate(g, sigma, tau, many));
  SimulationOptions other = one;
  other.seed = 10;
  EXPECT_FALSE(a == simulate(g, sigma, tau, other));
}

TEST(SimTest, InputErrors) {
  const GameSpec g = zoo::make("duel");
  const auto s1 = uniform_strategy(g, 1);
  const auto s2 = uniform_strategy(g, 2);
  EXPECT_THROW(simulate(g, s2, s1), Error);
  EXPECT_THROW(simulate(g, s1, s2, {.horizon = 0}), Error);
  EXPECT_THROW(simulate(g, s1, s2, {.replications = 0}), Error);
  EXPECT_THROW(simulate(g, s1, s2, {.initial_state = 7}), Error);
}

TEST(SimTest, BatteryComposition) {
  const GameSpec g = zoo::make("duel");
  const auto battery = build_adversary_battery(g, uniform_strategy(g, 1));
  ASSERT_EQ(battery.size(), 3u + 2u + 32u);
  EXPECT_EQ(battery[0].name, "best_response@0.01");
  EXPECT_EQ(battery[2].name, "best_response@0.0001");
  EXPECT_EQ(battery[3].name, "pure:0");
  EXPECT_EQ(battery[5].name, "random:0");
  for (const auto& a : battery) EXPECT_EQ(a.strategy.player, 2);

  BatteryOptions few;
  few.max_pure = 1;
  few.num_random = 0;
  EXPECT_EQ(build_adversary_battery(g, uniform_strategy(g, 1), few).size(), 3u);
}

TEST(SimTest, GuaranteeOnQuit) {
  const GameSpec g = zoo::make("quit");
  const auto sigma = pure_strategy(g, 1, {1});
  const auto battery = build_adversary_battery(g, sigma);
  const std::vector<double> floor{0.99};
  const auto rep = guarantee_report(g, sigma, floor, 0.05, battery,
                                    {.horizon = 1000, .replications = 20, .seed = 5});
  EXPECT_TRUE(rep.pass);
  for (const auto& v : rep.verdicts) {
    EXPECT_TRUE(v.clause_a);
    EXPECT_TRUE(v.clause_b);
    // (n-1)/n >= 0.94 from n = 20 on.
    EXPECT_EQ(v.n_hat, 20u);
  }
}

TEST(SimTest, BigMatchStationaryFailsGuarantee) {
  const GameSpec g = zoo::make("bigmatch");
  const StationaryStrategy sigma{1, {{0.5, 0.5}}};
  const auto battery = build_adversary_battery(g, sigma);
  const auto rep = guarantee_report(g, sigma, std::vector<double>{0.5}, 0.1, battery,
                                    {.horizon = 1000, .replications = 50, .seed = 2});
  EXPECT_FALSE(rep.pass);
  EXPECT_FALSE(rep.caveat.empty());
}

TEST(SimTest, GuaranteeOutputs) {
  const GameSpec g = zoo::make("quit");
  const auto sigma = pure_strategy(g, 1, {1});
  const std::vector<Adversary> adv{{"wait", uniform_strategy(g, 2)}};
  const auto rep = guarantee_report(g, sigma, std::vector<double>{0.9}, 0.05, adv,
                                    {.horizon = 10, .replications = 2, .seed = 0});
  std::ostringstream os;
  write_guarantee_csv(os, g, rep);
  EXPECT_EQ(os.str(),
            "adversary,checkpoint_n,mean,ci_halfwidth,absorption_rate,tail_mean\n"
            "wait,1,0,0,1,1\n"
            "wait,2,0.5,0,1,1\n"
            "wait,5,0.8,0,1,1\n"
            "wait,10,0.9,0,1,1\n");
  const auto doc = guarantee_to_json(g, rep);
  EXPECT_EQ(doc["verdict"], "pass");
  EXPECT_EQ(doc["verdicts"][0]["n_hat"], 10);
  EXPECT_THROW(guarantee_report(g, sigma, std::vector<double>{0.9}, 0.05, {}), Error);
}

}  // namespace
}  // namespace recgame
