#include "safebench/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <limits>
#include <stdexcept>
#include <thread>

#include "safebench/ea.hpp"
#include "safebench/errors.hpp"
#include "safebench/safegp.hpp"

namespace safebench {

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::BudgetExhausted: return "budget-exhausted";
    case Termination::SafetyExhausted: return "safety-exhausted";
    case Termination::Stalled: return "stalled";
    case Termination::Failed: return "failed";
  }
  return "failed";
}

Termination parse_termination(std::string_view text) {
  for (auto t : {Termination::BudgetExhausted, Termination::SafetyExhausted, Termination::Stalled,
                 Termination::Failed}) {
    if (text == to_string(t)) return t;
  }
  throw std::invalid_argument("unknown termination reason '" + std::string(text) + "'");
}

std::unique_ptr<Optimizer> make_optimizer(std::string_view name, const SafeOpProblem& problem,
                                          const ExperimentConfig& config, std::size_t run_index,
                                          std::size_t n_seeds) {
  if (is_safegp_name(name)) {
    SafeGpSettings s;
    s.variant = parse_safegp_variant(name);
    s.kernel = config.kernel;
    s.beta = config.beta;
    s.lipschitz = problem.lipschitz();
    s.standardize = config.standardize_targets;
    return std::make_unique<SafeGpOptimizer>(s, problem.shared_grid(), problem.threshold(),
                                             problem.noise_std());
  }
  if (name == "va-ea" || name == "unsafe-ea") {
    EaParams p = config.ea;
    p.mu = n_seeds;
    p.lambda = n_seeds;
    return std::make_unique<EvolutionaryOptimizer>(
        p, name == "va-ea", problem.objective().bounds(),
        make_rng(config.master_seed, run_index, Stream::Algorithm));
  }
  throw ConfigError("unknown algorithm '" + std::string(name) + "'");
}

std::vector<std::vector<Point>> make_seed_sets(const SafeOpProblem& problem, std::size_t n_runs,
                                               std::size_t n_seeds, std::uint64_t master_seed) {
  std::vector<std::vector<Point>> sets;
  sets.reserve(n_runs);
  for (std::size_t r = 0; r < n_runs; ++r) {
    Rng rng = make_rng(master_seed, r, Stream::SeedSampling);
    sets.push_back(sample_safe_seeds(problem, n_seeds, rng));
  }
  return sets;
}

RunResult run(const RunConfig& run_config, const SafeOpProblem& problem,
              std::span<const Point> seeds, const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  RunResult result;
  result.algorithm = run_config.algorithm;
  result.run_index = run_config.run_index;

  Oracle oracle(problem, derive_seed(config.master_seed, run_config.run_index, Stream::Noise));
  std::vector<StepDiagnostics> diags;
  try {
    auto optimizer =
        make_optimizer(run_config.algorithm, problem, config, run_config.run_index, seeds.size());
    const auto primed = oracle.seed_and_prime(seeds, config.problem.seeds_consume_budget);
    diags.resize(primed.size());
    std::vector<Measurement> measured;
    for (const auto& o : primed) measured.push_back({o.point, o.y, o.is_unsafe});
    optimizer->initialize(measured);

    BlackBox box(oracle);
    while (oracle.running()) {
      const std::size_t before = oracle.evals_used();
      auto step_diags = optimizer->step(box);
      if (oracle.evals_used() == before) {
        throw std::logic_error("optimizer step made no evaluation");
      }
      step_diags.resize(oracle.evals_used() - before);
      diags.insert(diags.end(), step_diags.begin(), step_diags.end());
    }
    result.termination = oracle.status() == OracleStatus::SafetyExhausted
                             ? Termination::SafetyExhausted
                             : Termination::BudgetExhausted;
  } catch (const StalledAlgorithm& e) {
    result.termination = Termination::Stalled;
    result.message = e.what();
  } catch (const InfeasibleScenario&) {
    throw;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    result.termination = Termination::Failed;
    result.message = e.what();
  }

  result.budget = oracle.eval_budget();
  diags.resize(oracle.log().size());
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < oracle.log().size(); ++i) {
    const Observation& o = oracle.log()[i];
    best = std::max(best, o.f_true);
    result.records.push_back({o.step, o.point, o.y, o.f_true, o.is_unsafe, best, diags[i]});
  }
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

BenchmarkPlan BenchmarkPlan::make(const ExperimentConfig& config, const SafeOpProblem& problem) {
  BenchmarkPlan plan;
  plan.config = config;
  plan.seed_sets =
      make_seed_sets(problem, config.n_runs, config.problem.n_seeds, config.master_seed);
  return plan;
}

std::vector<RunResult> benchmark(const BenchmarkPlan& plan, const SafeOpProblem& problem,
                                 unsigned threads) {
  const auto& algos = plan.config.algorithms;
  const std::size_t n_runs = plan.seed_sets.size();
  const std::size_t total = algos.size() * n_runs;
  std::vector<RunResult> results(total);
  std::vector<std::exception_ptr> errors(total);

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t job = next++; job < total; job = next++) {
      const std::size_t a = job / n_runs;
      const std::size_t r = job % n_runs;
      try {
        results[job] = run({algos[a], r}, problem, plan.seed_sets[r], plan.config);
      } catch (...) {
        errors[job] = std::current_exception();
      }
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(total, 1)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

std::vector<std::size_t> unsafe_count_series(const RunResult& result) {
  std::vector<std::size_t> out;
  out.reserve(result.records.size());
  std::size_t n = 0;
  for (const auto& r : result.records) {
    if (r.is_unsafe) ++n;
    out.push_back(n);
  }
  return out;
}

std::vector<double> bsf_series(const RunResult& result) {
  std::vector<double> out;
  out.reserve(result.records.size());
  for (const auto& r : result.records) out.push_back(r.bsf_true);
  return out;
}

}  // namespace safebench
