#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "safebench/config.hpp"
#include "safebench/errors.hpp"

using namespace safebench;

TEST(Config, DefaultsFollowTheBenchmarkSetup) {
  const ExperimentConfig c = parse_config("{}");
  EXPECT_EQ(c.problem.objective, "sphere");
  EXPECT_EQ(c.problem.dimension, 2u);
  EXPECT_EQ(c.problem.eval_budget, 100u);
  EXPECT_EQ(c.problem.noise_std, 0.1);
  EXPECT_EQ(c.problem.seed_confidence, 1.96);
  EXPECT_FALSE(c.problem.safety_budget.has_value());
  EXPECT_EQ(c.beta, 2.0);
  EXPECT_EQ(c.ea.crossover_prob, 0.8);
  EXPECT_EQ(c.ea.mutation_sigma, 0.1);
  EXPECT_EQ(c.n_runs, 20u);
  EXPECT_EQ(c.algorithms, all_algorithms());
}

TEST(Config, ParsesEveryKey) {
  const auto c = parse_config(R"({
    "objective": "styblinski-tang", "dimension": 2, "lower": -5, "upper": 5,
    "nodes_per_axis": 50, "percentile": 75, "noise_std": 0.2, "seed_confidence": 2.0,
    "eval_budget": 80, "safety_budget": 0, "scenario": "s1", "n_seeds": 2,
    "seeds_consume_budget": false, "master_seed": 42, "n_runs": 3,
    "algorithms": ["safeopt", "va-ea"], "kernel_lengthscale": 0.5,
    "kernel_signal_variance": 2.0, "beta": 3.0, "standardize_targets": false,
    "ea_crossover_prob": 0.5, "ea_mutation_prob": 0.25, "ea_mutation_sigma": 0.3,
    "ea_va_retry_cap": 7 })");
  EXPECT_EQ(c.problem.objective, "styblinski-tang");
  EXPECT_EQ(c.problem.nodes_per_axis, 50u);
  EXPECT_EQ(c.problem.safety_budget, std::optional<std::size_t>(0));
  EXPECT_EQ(c.problem.scenario, Scenario::S1);
  EXPECT_FALSE(c.problem.seeds_consume_budget);
  EXPECT_EQ(c.master_seed, 42u);
  EXPECT_EQ(c.algorithms, (std::vector<std::string>{"safeopt", "va-ea"}));
  EXPECT_EQ(c.kernel.lengthscale, 0.5);
  EXPECT_FALSE(c.standardize_targets);
  EXPECT_EQ(c.ea.va_retry_cap, 7u);

  const auto round = parse_config(config_to_json(c));
  EXPECT_EQ(config_to_json(round), config_to_json(c));
}

TEST(Config, UnlimitedSafetyBudget) {
  EXPECT_FALSE(parse_config(R"({"safety_budget": "unlimited"})").problem.safety_budget);
  EXPECT_THROW(parse_config(R"({"safety_budget": -1})"), ConfigError);
}

TEST(Config, Rejections) {
  EXPECT_THROW(parse_config("not json"), ConfigError);
  EXPECT_THROW(parse_config("[1, 2]"), ConfigError);
  EXPECT_THROW(parse_config(R"({"colour": "red"})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"objective": "ackley"})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"algorithms": "safeopt,stageopt"})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"scenario": "s1"})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"nodes_per_axis": 1})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"percentile": 0})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"noise_std": "loud"})"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(Config, Overrides) {
  ExperimentConfig c;
  apply_override(c, "eval_budget=50");
  apply_override(c, "algorithms=safeopt,msafe-ucb");
  apply_override(c, "objective=styblinski-tang");
  apply_override(c, "scenario=s3");
  apply_override(c, "safety_budget=unlimited");
  c.validate();
  EXPECT_EQ(c.problem.eval_budget, 50u);
  EXPECT_EQ(c.algorithms, (std::vector<std::string>{"safeopt", "msafe-ucb"}));
  EXPECT_EQ(c.problem.scenario, Scenario::S3);
  EXPECT_THROW(apply_override(c, "eval_budget"), ConfigError);
  EXPECT_THROW(apply_override(c, "bogus=1"), ConfigError);
}

TEST(Config, LoadFromFile) {
  const auto path = std::filesystem::temp_directory_path() / "safebench_config_test.json";
  {
    std::ofstream out(path);
    out << R"({"objective": "sphere", "n_runs": 4})";
  }
  EXPECT_EQ(load_config(path).n_runs, 4u);
  std::filesystem::remove(path);
}
