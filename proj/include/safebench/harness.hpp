#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "safebench/config.hpp"
#include "safebench/optimizer.hpp"
#include "safebench/safeop.hpp"

namespace safebench {

enum class Termination { BudgetExhausted, SafetyExhausted, Stalled, Failed };

std::string_view to_string(Termination t);
Termination parse_termination(std::string_view text);

struct StepRecord {
  std::size_t step = 0;  // 1-based, contiguous
  Point point;
  double y = 0.0;
  double f_true = 0.0;
  bool is_unsafe = false;
  double bsf_true = 0.0;  // best f_true over steps 1..step, unsafe ones included
  StepDiagnostics diag;
};

struct RunResult {
  std::string algorithm;
  std::size_t run_index = 0;
  std::vector<StepRecord> records;
  Termination termination = Termination::BudgetExhausted;
  std::string message;     // detail for Stalled / Failed
  std::size_t budget = 0;  // evaluation budget the run was given, seeds included
  double wall_seconds = 0.0;
};

struct RunConfig {
  std::string algorithm;
  std::size_t run_index = 0;
};

/// Builds an optimizer by name: "safeopt", "safe-ucb", "msafeopt",
/// "msafe-ucb", "va-ea", "unsafe-ea". Throws ConfigError for other names.
std::unique_ptr<Optimizer> make_optimizer(std::string_view name, const SafeOpProblem& problem,
                                          const ExperimentConfig& config, std::size_t run_index,
                                          std::size_t n_seeds);

/// One seed set per run, each drawn from the stream (master_seed, run i).
std::vector<std::vector<Point>> make_seed_sets(const SafeOpProblem& problem, std::size_t n_runs,
                                               std::size_t n_seeds, std::uint64_t master_seed);

/// Primes an oracle with the seeds and steps the optimizer until the oracle
/// stops. An empty safe set or a numerical failure ends the run early and is
/// reported through the termination reason.
RunResult run(const RunConfig& run_config, const SafeOpProblem& problem,
              std::span<const Point> seeds, const ExperimentConfig& config);

struct BenchmarkPlan {
  ExperimentConfig config;
  std::vector<std::vector<Point>> seed_sets;  // index = run index, shared by all algorithms

  /// Builds the problem-independent part of a plan by sampling seed sets.
  static BenchmarkPlan make(const ExperimentConfig& config, const SafeOpProblem& problem);
};

/// Runs every (algorithm, run index) pair on up to `threads` workers
/// (0: hardware concurrency). Results are ordered algorithm-major, then by
/// run index, independent of scheduling.
std::vector<RunResult> benchmark(const BenchmarkPlan& plan, const SafeOpProblem& problem,
                                 unsigned threads = 0);

/// Cumulative number of unsafe evaluations after each step.
std::vector<std::size_t> unsafe_count_series(const RunResult& result);
std::vector<double> bsf_series(const RunResult& result);

}  // namespace safebench
