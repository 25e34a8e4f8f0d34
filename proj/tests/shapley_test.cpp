#include "recgame/shapley.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "recgame/zoo.hpp"

namespace recgame {
namespace {

TEST(ShapleyTest, QuitDiscountedValue) {
  const GameSpec g = zoo::make("quit");
  for (double lambda : {0.5, 0.1, 0.01}) {
    const auto sol = solve_discounted(g, lambda, 1e-10);
    EXPECT_NEAR(sol.values[0], 1.0 - lambda, 1e-8) << lambda;
    EXPECT_LE(sol.residual, std::max(1e-10 * lambda, 8 * DBL_EPSILON));
  }
}

TEST(ShapleyTest, BigMatchDiscountedValueIsHalf) {
  const GameSpec g = zoo::make("bigmatch");
  for (double lambda : {0.5, 0.1, 0.01}) {
    EXPECT_NEAR(discounted_value(g, lambda, 1e-10)[0], 0.5, 1e-8) << lambda;
  }
}

TEST(ShapleyTest, DuelValueIsZero) {
  const GameSpec g = zoo::make("duel");
  for (double lambda : {0.5, 0.1, 0.01}) {
    EXPECT_NEAR(discounted_value(g, lambda, 1e-10)[0], 0.0, 1e-8) << lambda;
  }
}

TEST(ShapleyTest, LambdaOneIsStageGameValue) {
  const GameSpec g = zoo::make("bigmatch");
  const auto v = apply_operator(g, 1.0, std::vector<double>{0.3});
  EXPECT_NEAR(v[0], 0.5, 1e-12);
}

TEST(ShapleyTest, InvalidLambdaIsRejected) {
  const GameSpec g = zoo::make("quit");
  for (double lambda : {0.0, -0.1, 1.5}) {
    try {
      solve_discounted(g, lambda, 1e-8);
      ADD_FAILURE() << lambda;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kInvalidArgument);
    }
  }
  EXPECT_THROW(apply_operator(g, 1.1, std::vector<double>{0.0}), Error);
  EXPECT_THROW(apply_operator(g, 0.5, std::vector<double>{0.0, 0.0}), Error);
}

TEST(ShapleyTest, OperatorIsMonotoneAndContracting) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const GameSpec g = zoo::random_game({3, 2, 3, 0.3, seed, seed % 2 == 1});
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0), up(0.0, 0.3);
    const double lambda = 0.05 + 0.03 * static_cast<double>(seed % 10);
    std::vector<double> f(3), h(3), f_up(3);
    for (std::size_t k = 0; k < 3; ++k) {
      f[k] = u(gen);
      h[k] = u(gen);
      f_up[k] = f[k] + up(gen);
    }
    const auto pf = apply_operator(g, lambda, f);
    const auto ph = apply_operator(g, lambda, h);
    const auto pu = apply_operator(g, lambda, f_up);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_LE(pf[k], pu[k] + 1e-12);
    EXPECT_LE(sup_norm_diff(pf, ph), (1.0 - lambda) * sup_norm_diff(f, h) + 1e-12);
  }
}

// The fixed point agrees with the value obtained from the solver's optimal
// stationary strategies, evaluated exactly by a linear solve.
TEST(ShapleyTest, FixedPointMatchesStrategyEvaluation) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const GameSpec g = zoo::random_game({2 + seed % 3, 2, 2, 0.25, seed + 100, seed % 2 == 0});
    const double lambda = 0.2;
    const auto v = discounted_value(g, lambda, 1e-12);
    const auto sigma = stage_optimal_strategy(g, lambda, v, 1);
    const auto tau = stage_optimal_strategy(g, lambda, v, 2);
    const auto exact = oracle::discounted_payoff(g, sigma, tau, lambda);
    for (std::size_t k = 0; k < v.size(); ++k) EXPECT_NEAR(v[k], exact[k], 1e-8) << seed;
  }
}

TEST(ShapleyTest, WarmStartGivesSameValue) {
  const GameSpec g = zoo::random_game({3, 2, 3, 0.2, 9, true});
  const auto cold = solve_discounted(g, 0.01, 1e-10);
  const auto warm = solve_discounted(g, 0.01, 1e-10, std::vector<double>(3, 0.4));
  EXPECT_LE(sup_norm_diff(cold.values, warm.values), 2e-10);
}

TEST(ShapleyTest, QuitNStageValues) {
  const GameSpec g = zoo::make("quit");
  const auto v = n_stage_values(g, 100);
  for (std::size_t n = 1; n <= 100; ++n)
    EXPECT_NEAR(v[n - 1][0], (n - 1.0) / n, 1e-12) << n;
}

TEST(ShapleyTest, BigMatchNStageValuesAreHalf) {
  const auto v = n_stage_values(zoo::make("bigmatch"), 50);
  for (const auto& x : v) EXPECT_NEAR(x[0], 0.5, 1e-12);
}

TEST(ShapleyTest, NStageValuesStayBounded) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const GameSpec g = zoo::random_game({3, 2, 3, 0.3, seed, true});
    const double m = g.payoff_bound();
    for (const auto& v : n_stage_values(g, 40))
      for (double x : v) EXPECT_LE(std::abs(x), m + 1e-12);
  }
}

TEST(ShapleyTest, GeometricGrid) {
  const auto grid = geometric_grid(1e-1, 1e-5, 9);
  ASSERT_EQ(grid.size(), 9u);
  EXPECT_DOUBLE_EQ(grid.front(), 1e-1);
  EXPECT_DOUBLE_EQ(grid.back(), 1e-5);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    EXPECT_LT(grid[i], grid[i - 1]);
    EXPECT_NEAR(grid[i] / grid[i - 1], std::pow(10.0, -0.5), 1e-12);
  }
}

TEST(ShapleyTest, VanishingDiscountLimit) {
  const auto grid = geometric_grid(1e-1, 1e-5, 9);
  const auto quit = vanishing_discount_limit(zoo::make("quit"), grid, 1e-3);
  EXPECT_TRUE(quit.converged);
  EXPECT_NEAR(quit.estimate[0], 1.0, 1e-4);
  EXPECT_EQ(quit.curve.cauchy.size(), 8u);

  const auto duel = vanishing_discount_limit(zoo::make("duel"), grid, 1e-3);
  EXPECT_TRUE(duel.converged);
  EXPECT_NEAR(duel.estimate[0], 0.0, 1e-8);
}

TEST(ShapleyTest, LimitGridValidation) {
  const GameSpec g = zoo::make("quit");
  const std::vector<std::vector<double>> bad = {
      {}, {0.1, 0.01, 0.001}, {0.1, 0.2, 0.01, 0.001}, {2.0, 0.1, 0.01, 0.001},
      {0.1, 0.01, 0.001, 0.0}};
  for (const auto& grid : bad) EXPECT_THROW(vanishing_discount_limit(g, grid, 1e-3), Error);
}

TEST(ShapleyTest, LimitIsIndependentOfJobs) {
  const GameSpec g = zoo::random_game({3, 2, 3, 0.3, 4, false});
  const auto grid = geometric_grid(1e-1, 1e-3, 5);
  const auto a = vanishing_discount_limit(g, grid, 1e-3, {0.0, 1});
  const auto b = vanishing_discount_limit(g, grid, 1e-3, {0.0, 3});
  EXPECT_EQ(a.estimate, b.estimate);
  EXPECT_EQ(a.curve.cauchy, b.curve.cauchy);
}

TEST(ShapleyTest, CurveCsv) {
  const GameSpec g = zoo::make("quit");
  const auto est = vanishing_discount_limit(g, geometric_grid(0.5, 0.05, 4), 1.0);
  std::ostringstream os;
  write_curve_csv(os, g, est.curve);
  const std::string text = os.str();
  EXPECT_EQ(text.rfind("lambda,state,value,residual\n0.5,s,0.5,", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
}

TEST(ShapleyTest, RecursiveIdentityProperty) {
  std::mt19937_64 gen(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const GameSpec g = zoo::random_recursive(1 + seed % 4, 1 + seed % 3, 3, 0.3, seed);
    const double m = g.payoff_bound();
    for (int rep = 0; rep < 5; ++rep) {
      std::vector<double> f(g.num_active());
      for (double& x : f) x = m * (2.0 * u(gen) - 1.0);
      const double lambda = u(gen);
      EXPECT_LE(recursive_identity_residual(g, lambda, f), 1e-12 * (1.0 + m));
    }
  }
}

TEST(ShapleyTest, RecursiveIdentityRequiresRecursiveGame) {
  try {
    recursive_identity_residual(zoo::make("bigmatch"), 0.5, std::vector<double>{0.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNotRecursive);
  }
}

}  // namespace
}  // namespace recgame
