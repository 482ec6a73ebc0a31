#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include "safebench/errors.hpp"
#include "safebench/safeop.hpp"

using namespace safebench;

namespace {

Objective linear_x1(std::size_t d = 2) {
  return Objective("x1", std::vector<Interval>(d, {-5.0, 5.0}),
                   [](std::span<const double> x) { return x[0]; });
}

Objective constant(double c) {
  return Objective("const", std::vector<Interval>(2, {-5.0, 5.0}),
                   [c](std::span<const double>) { return c; });
}

ProblemSettings sphere_settings() {
  ProblemSettings s;
  s.objective = "sphere";
  s.nodes_per_axis = 100;
  s.percentile = 95.0;
  s.noise_std = 0.1;
  return s;
}

// Problem whose threshold is given explicitly, on a small grid.
SafeOpProblem fixed_threshold(Objective f, double h, ProblemSettings s) {
  auto grid = std::make_shared<const Grid>(discretize(f, 5));
  return SafeOpProblem(std::move(f), grid, h, s);
}

}  // namespace

TEST(Discretize, SphereFiveHundredSquared) {
  const Grid g = discretize(make_sphere(), 500);
  EXPECT_EQ(g.size(), 250000u);
}

TEST(Discretize, TwoNodesGiveCorners) {
  for (std::size_t d : {1u, 2u, 3u}) {
    const Grid g = discretize(make_sphere(d), 2);
    ASSERT_EQ(g.size(), std::size_t{1} << d);
    std::set<Point> corners;
    for (std::size_t i = 0; i < g.size(); ++i) {
      for (double c : g.point(i)) EXPECT_TRUE(c == -5.0 || c == 5.0);
      corners.insert(g.point(i));
    }
    EXPECT_EQ(corners.size(), g.size());
  }
}

TEST(Discretize, ElevenNodesOneDimension) {
  const Grid g = discretize(make_sphere(1), 11);
  ASSERT_EQ(g.size(), 11u);
  for (std::size_t i = 0; i < 11; ++i) EXPECT_DOUBLE_EQ(g.point(i)[0], -5.0 + static_cast<double>(i));
}

TEST(Discretize, RowMajorAndCachedValues) {
  const auto f = make_styblinski_tang();
  const Grid g = discretize(f, 7);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point p = g.point(i);
    EXPECT_DOUBLE_EQ(p[0], g.coordinate(0, i / 7));
    EXPECT_DOUBLE_EQ(p[1], g.coordinate(1, i % 7));
    EXPECT_EQ(g.value(i), f(p));
  }
  EXPECT_EQ(g.coordinate(0, 6), 5.0);
}

TEST(Discretize, RejectsTooFewNodes) {
  EXPECT_THROW(discretize(make_sphere(), 1), std::invalid_argument);
}

TEST(Grid, NearestIndexAndBoxEnumeration) {
  const Grid g = discretize(make_sphere(), 11);
  EXPECT_EQ(g.nearest_index(Point{0.2, -0.4}), g.stride(0) * 5 + 5);
  std::vector<std::size_t> seen;
  g.for_each_in_box(Point{0.0, 0.0}, 1.0, [&](std::size_t i) { seen.push_back(i); });
  // Every node within distance 1 must be visited.
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point p = g.point(i);
    if (std::hypot(p[0], p[1]) <= 1.0) {
      EXPECT_NE(std::find(seen.begin(), seen.end(), i), seen.end());
    }
  }
  std::size_t count = 0;
  g.for_each_in_box(Point{0.0, 0.0}, std::numeric_limits<double>::infinity(),
                    [&](std::size_t) { ++count; });
  EXPECT_EQ(count, g.size());
}

TEST(Percentile, SpecExamples) {
  const std::vector<double> v{40, 10, 30, 20};
  EXPECT_EQ(percentile_threshold(v, 100), 40);
  EXPECT_EQ(percentile_threshold(v, 50), 20);
  std::vector<double> w(100);
  std::iota(w.begin(), w.end(), 0.0);
  std::shuffle(w.begin(), w.end(), std::mt19937_64(3));
  EXPECT_EQ(percentile_threshold(w, 95), 94);
}

TEST(Percentile, Errors) {
  const std::vector<double> v{1, 2};
  EXPECT_THROW(percentile_threshold(v, 0), std::invalid_argument);
  EXPECT_THROW(percentile_threshold(v, 100.5), std::invalid_argument);
  EXPECT_THROW(percentile_threshold(std::vector<double>{}, 50), std::logic_error);
}

TEST(Percentile, FractionBelowProperty) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> pk(0.5, 100.0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng() % 400;
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);  // continuous draws: no ties
    const double k = pk(rng);
    const double h = percentile_threshold(v, k);
    const double below =
        static_cast<double>(std::count_if(v.begin(), v.end(), [&](double x) { return x < h; })) / n;
    EXPECT_LE(below, k / 100.0 + 1e-12);
    EXPECT_GE(below, k / 100.0 - 1.0 / n - 1e-12);
  }
}

TEST(Percentile, GridUpperBound) {
  // Grids have tied values, so only the upper bound holds in general.
  for (double k : {50.0, 75.0, 95.0}) {
    const Grid g = discretize(make_sphere(), 60);
    const double h = percentile_threshold(g, k);
    const auto vals = g.values();
    const double below = static_cast<double>(std::count_if(vals.begin(), vals.end(),
                                                           [&](double x) { return x < h; })) /
                         static_cast<double>(g.size());
    EXPECT_LE(below, k / 100.0);
  }
}

TEST(Lipschitz, ConstantIsZero) {
  EXPECT_EQ(estimate_lipschitz(discretize(constant(3.0), 20)), 0.0);
}

TEST(Lipschitz, LinearIsOne) {
  for (std::size_t n : {2u, 3u, 17u, 100u}) {
    EXPECT_NEAR(estimate_lipschitz(discretize(linear_x1(), n)), 1.0, 1e-9);
  }
}

TEST(Lipschitz, SphereFiveHundredGrid) {
  const double l = estimate_lipschitz(discretize(make_sphere(), 500));
  EXPECT_NEAR(l, 2.0 * std::sqrt(50.0), 0.02 * 2.0 * std::sqrt(50.0));
}

TEST(Seeds, SatisfyPredicateAndAreDistinct) {
  const auto problem = SafeOpProblem::make(sphere_settings());
  Rng rng(5);
  const auto seeds = sample_safe_seeds(problem, 10, rng);
  ASSERT_EQ(seeds.size(), 10u);
  std::set<Point> unique(seeds.begin(), seeds.end());
  EXPECT_EQ(unique.size(), 10u);

  // Enumerate the eligible set independently and check membership.
  std::set<Point> eligible;
  const Grid& g = problem.grid();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.value(i) >= problem.threshold() + 0.196 - 1e-12) eligible.insert(g.point(i));
  }
  for (const auto& s : seeds) {
    EXPECT_TRUE(eligible.count(s));
    EXPECT_GE(problem.objective()(s) - 1.96 * 0.1, problem.threshold());
  }
}

TEST(Seeds, ScenarioOneQuadrant) {
  ProblemSettings s;
  s.objective = "styblinski-tang";
  s.percentile = 75.0;
  s.scenario = Scenario::S1;
  const auto problem = SafeOpProblem::make(s);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    for (const auto& p : sample_safe_seeds(problem, 10, rng)) {
      EXPECT_GT(p[0], 0.0);
      EXPECT_GT(p[1], 0.0);
    }
  }
}

TEST(Seeds, ScenarioThreeSplit) {
  ProblemSettings s;
  s.objective = "styblinski-tang";
  s.percentile = 75.0;
  s.scenario = Scenario::S3;
  const auto problem = SafeOpProblem::make(s);
  Rng rng(9);
  const auto seeds = sample_safe_seeds(problem, 5, rng);
  ASSERT_EQ(seeds.size(), 5u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_TRUE(scenario_contains(Scenario::S2TopLeft, seeds[i]));
  for (std::size_t i = 3; i < 5; ++i) {
    EXPECT_TRUE(scenario_contains(Scenario::S2BottomRight, seeds[i]));
  }
}

TEST(Seeds, InfeasibleRegion) {
  ProblemSettings s = sphere_settings();
  s.percentile = 100.0;  // only the best node reaches h, and not with margin
  const auto problem = SafeOpProblem::make(s);
  Rng rng(1);
  EXPECT_THROW(sample_safe_seeds(problem, 1, rng), InfeasibleScenario);
}

TEST(Oracle, NoiselessSafeEvaluation) {
  ProblemSettings s;
  s.noise_std = 0.0;
  const auto problem = fixed_threshold(linear_x1(), 1.0, s);
  Oracle oracle(problem, 1);
  const auto& obs = oracle.evaluate(Point{2.0, 0.0});
  EXPECT_EQ(obs.y, 2.0);
  EXPECT_EQ(obs.f_true, 2.0);
  EXPECT_FALSE(obs.is_unsafe);
  EXPECT_EQ(obs.step, 1u);
}

TEST(Oracle, ZeroSafetyBudgetStopsAfterFirstUnsafe) {
  ProblemSettings s;
  s.noise_std = 0.0;
  s.safety_budget = 0;
  const auto problem = fixed_threshold(linear_x1(), 1.0, s);
  Oracle oracle(problem, 1);
  oracle.evaluate(Point{3.0, 0.0});
  const auto obs = oracle.evaluate(Point{0.5, 0.0});
  EXPECT_TRUE(obs.is_unsafe);
  EXPECT_EQ(oracle.status(), OracleStatus::SafetyExhausted);
  EXPECT_EQ(oracle.log().size(), 2u);
  EXPECT_THROW(oracle.evaluate(Point{3.0, 0.0}), TerminatedRun);
}

TEST(Oracle, EvaluationBudget) {
  ProblemSettings s;
  s.noise_std = 0.0;
  s.eval_budget = 100;
  const auto problem = fixed_threshold(linear_x1(), -10.0, s);
  Oracle oracle(problem, 1);
  for (int i = 0; i < 100; ++i) oracle.evaluate(Point{0.0, 0.0});
  EXPECT_EQ(oracle.status(), OracleStatus::BudgetExhausted);
  EXPECT_THROW(oracle.evaluate(Point{0.0, 0.0}), TerminatedRun);
  EXPECT_EQ(oracle.evals_used(), 100u);
}

TEST(Oracle, OutOfBounds) {
  const auto problem = fixed_threshold(linear_x1(), 0.0, ProblemSettings{});
  Oracle oracle(problem, 1);
  EXPECT_THROW(oracle.evaluate(Point{6.0, 0.0}), std::invalid_argument);
  EXPECT_EQ(oracle.evals_used(), 0u);
}

TEST(Oracle, SeedAndPrime) {
  const auto problem = SafeOpProblem::make(sphere_settings());
  Rng rng(2);
  const auto seeds = sample_safe_seeds(problem, 10, rng);
  Oracle oracle(problem, 3);
  const auto obs = oracle.seed_and_prime(seeds);
  EXPECT_EQ(obs.size(), 10u);
  EXPECT_EQ(oracle.log().size(), 10u);
  EXPECT_EQ(oracle.evals_used(), 10u);

  Oracle two(problem, 3);
  two.seed_and_prime(std::span<const Point>(seeds).first(2));
  EXPECT_EQ(two.remaining(), 98u);

  Oracle extra(problem, 3);
  extra.seed_and_prime(std::span<const Point>(seeds).first(2), false);
  EXPECT_EQ(extra.remaining(), 100u);
}

TEST(Oracle, NoiselessSeedsAreSafe) {
  ProblemSettings s = sphere_settings();
  s.noise_std = 0.0;
  const auto problem = SafeOpProblem::make(s);
  for (std::uint64_t r = 0; r < 10; ++r) {
    Rng rng(r);
    Oracle oracle(problem, r);
    for (const auto& o : oracle.seed_and_prime(sample_safe_seeds(problem, 10, rng))) {
      EXPECT_FALSE(o.is_unsafe);
    }
  }
}

TEST(Oracle, DeterministicNoise) {
  const auto problem = SafeOpProblem::make(sphere_settings());
  Oracle a(problem, 77), b(problem, 77), c(problem, 78);
  bool differs = false;
  for (int i = 0; i < 50; ++i) {
    const Point x{0.1 * i - 2.5, 0.3};
    const double ya = a.evaluate(x).y;
    EXPECT_EQ(ya, b.evaluate(x).y);
    differs |= ya != c.evaluate(x).y;
  }
  EXPECT_TRUE(differs);
}

TEST(Oracle, SafetyBudgetBoundProperty) {
  std::mt19937_64 gen(21);
  const auto problem_base = SafeOpProblem::make(sphere_settings());
  for (int trial = 0; trial < 200; ++trial) {
    ProblemSettings s = sphere_settings();
    const std::size_t budget_b = gen() % 5;
    s.safety_budget = budget_b;
    s.eval_budget = 1 + gen() % 60;
    SafeOpProblem problem(problem_base.objective(), problem_base.shared_grid(),
                          problem_base.threshold(), s);
    Oracle oracle(problem, gen());
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    std::size_t last_evals = 0, last_unsafe = 0;
    while (oracle.running()) {
      oracle.evaluate(Point{u(gen), u(gen)});
      EXPECT_GE(oracle.evals_used(), last_evals);
      EXPECT_GE(oracle.unsafe_used(), last_unsafe);
      last_evals = oracle.evals_used();
      last_unsafe = oracle.unsafe_used();
    }
    std::size_t unsafe = 0;
    for (const auto& o : oracle.log()) {
      unsafe += o.is_unsafe;
      EXPECT_EQ(o.is_unsafe, o.y < problem.threshold());
    }
    EXPECT_EQ(unsafe, oracle.unsafe_used());
    EXPECT_LE(unsafe, budget_b + 1);
    EXPECT_LE(oracle.evals_used(), s.eval_budget);
  }
}

TEST(Problem, ThresholdAndLipschitzFromSettings) {
  const auto problem = SafeOpProblem::make(sphere_settings());
  EXPECT_EQ(problem.threshold(), percentile_threshold(problem.grid(), 95.0));
  EXPECT_EQ(problem.lipschitz(), estimate_lipschitz(problem.grid()));
  ProblemSettings bad = sphere_settings();
  bad.scenario = Scenario::S1;
  EXPECT_THROW(SafeOpProblem::make(bad), std::invalid_argument);
}
