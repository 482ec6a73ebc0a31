#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "safebench/errors.hpp"
#include "safebench/harness.hpp"
#include "safebench/persistence.hpp"

using namespace safebench;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.problem.nodes_per_axis = 30;
  c.problem.eval_budget = 30;
  c.problem.n_seeds = 4;
  c.n_runs = 3;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(SeedSets, ShapeDeterminismAndDistinctness) {
  ExperimentConfig c;
  const auto problem = SafeOpProblem::make(c.problem);
  const auto a = make_seed_sets(problem, 20, 10, 1);
  const auto b = make_seed_sets(problem, 20, 10, 1);
  ASSERT_EQ(a.size(), 20u);
  for (const auto& s : a) EXPECT_EQ(s.size(), 10u);
  EXPECT_EQ(a, b);
  for (std::size_t i = 1; i < a.size(); ++i) EXPECT_NE(a[0], a[i]);
  EXPECT_NE(make_seed_sets(problem, 1, 10, 2)[0], a[0]);
}

TEST(SeedSets, InfeasibleScenarioPropagates) {
  ExperimentConfig c;
  c.problem.percentile = 100.0;
  const auto problem = SafeOpProblem::make(c.problem);
  EXPECT_THROW(make_seed_sets(problem, 2, 3, 1), InfeasibleScenario);
}

TEST(Run, FullBudgetWithUnlimitedSafety) {
  ExperimentConfig c;
  const auto problem = SafeOpProblem::make(c.problem);
  const auto seeds = make_seed_sets(problem, 1, 10, 1)[0];
  for (const auto& algo : all_algorithms()) {
    const auto r = run({algo, 0}, problem, seeds, c);
    ASSERT_EQ(r.records.size(), 100u) << algo << ": " << r.message;
    EXPECT_EQ(r.termination, Termination::BudgetExhausted);
    double best = -1e300;
    for (std::size_t t = 0; t < r.records.size(); ++t) {
      EXPECT_EQ(r.records[t].step, t + 1);
      best = std::max(best, r.records[t].f_true);
      EXPECT_EQ(r.records[t].bsf_true, best);
    }
  }
}

TEST(Run, ZeroSafetyBudgetStopsAtFirstUnsafe) {
  ExperimentConfig c;
  c.problem.safety_budget = 0;
  c.problem.objective = "styblinski-tang";
  c.problem.percentile = 75.0;
  const auto problem = SafeOpProblem::make(c.problem);
  const auto sets = make_seed_sets(problem, 5, 10, 3);
  bool saw_failure = false;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const auto r = run({"unsafe-ea", i}, problem, sets[i], c);
    const auto unsafe = unsafe_count_series(r);
    EXPECT_LE(unsafe.back(), 1u);
    if (r.termination == Termination::SafetyExhausted) {
      saw_failure = true;
      EXPECT_TRUE(r.records.back().is_unsafe);
      EXPECT_EQ(unsafe.back(), 1u);
    } else {
      EXPECT_EQ(r.records.size(), 100u);
    }
  }
  EXPECT_TRUE(saw_failure);
}

TEST(Run, UnknownAlgorithmIsConfigError) {
  ExperimentConfig c = small_config();
  const auto problem = SafeOpProblem::make(c.problem);
  const auto seeds = make_seed_sets(problem, 1, 4, 1)[0];
  EXPECT_THROW(run({"stageopt", 0}, problem, seeds, c), ConfigError);
}

TEST(Series, UnsafeCountPrefixSum) {
  RunResult r;
  for (std::size_t t = 1; t <= 10; ++t) {
    StepRecord rec;
    rec.step = t;
    rec.is_unsafe = t == 3 || t == 7;
    r.records.push_back(rec);
  }
  EXPECT_EQ(unsafe_count_series(r), (std::vector<std::size_t>{0, 0, 1, 1, 1, 1, 2, 2, 2, 2}));
  RunResult safe;
  safe.records.resize(4);
  EXPECT_EQ(unsafe_count_series(safe), (std::vector<std::size_t>{0, 0, 0, 0}));
}

TEST(Benchmark, CountsOrderingAndSharedSeeds) {
  ExperimentConfig c = small_config();
  const auto problem = SafeOpProblem::make(c.problem);
  const auto plan = BenchmarkPlan::make(c, problem);
  const auto results = benchmark(plan, problem, 3);
  ASSERT_EQ(results.size(), 6u * 3u);
  for (std::size_t a = 0; a < 6; ++a) {
    for (std::size_t r = 0; r < 3; ++r) {
      const auto& res = results[a * 3 + r];
      EXPECT_EQ(res.algorithm, all_algorithms()[a]);
      EXPECT_EQ(res.run_index, r);
      // The first n_seeds records are the shared seed set.
      for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(res.records[k].point, plan.seed_sets[r][k]);
    }
  }
}

TEST(Benchmark, SerializedOutputIndependentOfThreads) {
  ExperimentConfig c = small_config();
  const auto problem = SafeOpProblem::make(c.problem);
  const auto plan = BenchmarkPlan::make(c, problem);
  const auto base = std::filesystem::temp_directory_path() / "safebench_harness_test";
  std::filesystem::remove_all(base);
  write_benchmark(base / "one", plan, problem, benchmark(plan, problem, 1));
  write_benchmark(base / "four", plan, problem, benchmark(plan, problem, 4));
  for (const auto& entry : std::filesystem::directory_iterator(base / "one")) {
    const auto name = entry.path().filename();
    if (name == "timing.json") continue;
    EXPECT_EQ(slurp(entry.path()), slurp(base / "four" / name)) << name;
  }

  const auto loaded = load_results(base / "one");
  ASSERT_EQ(loaded.runs.size(), 18u);
  EXPECT_EQ(loaded.dimension, 2u);
  EXPECT_EQ(loaded.threshold, problem.threshold());
  const auto direct = benchmark(plan, problem, 1);
  for (std::size_t i = 0; i < direct.size(); ++i) {
    ASSERT_EQ(loaded.runs[i].records.size(), direct[i].records.size());
    for (std::size_t t = 0; t < direct[i].records.size(); ++t) {
      EXPECT_EQ(loaded.runs[i].records[t].y, direct[i].records[t].y);
      EXPECT_EQ(loaded.runs[i].records[t].bsf_true, direct[i].records[t].bsf_true);
      EXPECT_EQ(loaded.runs[i].records[t].diag.safe_set_size,
                direct[i].records[t].diag.safe_set_size);
    }
  }
  std::filesystem::remove_all(base);
}

TEST(Persistence, RunCsvHeaderAndRoundTrip) {
  RunResult r;
  r.algorithm = "safeopt";
  r.run_index = 4;
  r.records.push_back({1, {0.1, -0.2}, -1.5, -1.4, true, -1.4, {}});
  r.records.push_back({2, {1.0 / 3.0, 2.0}, 0.25, 0.2, false, 0.2, {}});
  std::stringstream ss;
  write_run_csv(ss, r, 2);
  const std::string text = ss.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "step,x1,x2,y,f_true,is_unsafe,bsf_true");
  EXPECT_EQ(run_file_name(r), "safeopt_run4.csv");
  const auto back = read_run_csv(ss);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].point[0], 1.0 / 3.0);
  EXPECT_TRUE(back[0].is_unsafe);
  std::stringstream bad("step,x1\n1,2\n");
  EXPECT_THROW(read_run_csv(bad), std::runtime_error);
}
