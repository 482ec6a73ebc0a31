#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "safebench/config.hpp"
#include "safebench/errors.hpp"
#include "safebench/harness.hpp"
#include "safebench/persistence.hpp"
#include "safebench/report.hpp"

namespace {

using namespace safebench;

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kInfeasible = 3, kNumerical = 4 };

// Turns leftover "--key value" / "--key=value" arguments into config overrides.
std::vector<std::string> extras_to_overrides(const std::vector<std::string>& extras) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& arg = extras[i];
    if (arg.rfind("--", 0) != 0 || arg.size() <= 2) {
      throw ConfigError("unexpected argument '" + arg + "'");
    }
    std::string key = arg.substr(2);
    std::string value;
    if (const auto eq = key.find('='); eq != std::string::npos) {
      value = key.substr(eq + 1);
      key.resize(eq);
    } else if (i + 1 < extras.size()) {
      value = extras[++i];
    } else {
      throw ConfigError("missing value for --" + key);
    }
    std::replace(key.begin(), key.end(), '-', '_');
    out.push_back(key + "=" + value);
  }
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct Options {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string algo;
  std::size_t run_index = 0;
  std::string algos;
  std::size_t runs = 0;
  unsigned threads = 0;
  std::string out;
  std::string format = "csv";
  std::string metric = "bsf";
};

ExperimentConfig build_config(const Options& o, const std::vector<std::string>& extras) {
  ExperimentConfig config = load_config(o.config_path);
  for (const auto& s : o.overrides) apply_override(config, s);
  for (const auto& s : extras_to_overrides(extras)) apply_override(config, s);
  config.validate();
  return config;
}

int cmd_inspect(const ExperimentConfig& config) {
  const auto problem = SafeOpProblem::make(config.problem);
  const auto& grid = problem.grid();
  const auto& values = grid.values();
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const auto eligible = eligible_seed_indices(problem, problem.scenario());
  std::printf("objective        %s\n", problem.objective().name().c_str());
  std::printf("dimension        %zu\n", grid.dimension());
  std::printf("grid points      %zu\n", grid.size());
  std::printf("grid spacing     %.17g\n", grid.spacing(0));
  std::printf("f range          [%.17g, %.17g]\n", *lo, *hi);
  std::printf("threshold h      %.17g (percentile %.17g)\n", problem.threshold(),
              config.problem.percentile);
  std::printf("lipschitz L      %.17g\n", problem.lipschitz());
  std::printf("scenario         %s\n", std::string(to_string(problem.scenario())).c_str());
  std::printf("eligible seeds   %zu\n", eligible.size());
  return kOk;
}

int cmd_run(const ExperimentConfig& config, const Options& o) {
  const auto problem = SafeOpProblem::make(config.problem);
  Rng rng = make_rng(config.master_seed, o.run_index, Stream::SeedSampling);
  const auto seeds = sample_safe_seeds(problem, config.problem.n_seeds, rng);
  const RunResult result = run({o.algo, o.run_index}, problem, seeds, config);

  std::ostringstream csv;
  write_run_csv(csv, result, problem.objective().dimension());
  if (o.out.empty()) {
    std::cout << csv.str();
  } else {
    emit(o.out, csv.str());
  }
  std::size_t unsafe = 0;
  for (const auto& r : result.records) unsafe += r.is_unsafe ? 1 : 0;
  std::fprintf(stderr, "%s run %zu: %zu evaluations, %zu unsafe, best f %.6g, %s%s%s\n",
               result.algorithm.c_str(), result.run_index, result.records.size(), unsafe,
               result.records.empty() ? 0.0 : result.records.back().bsf_true,
               std::string(to_string(result.termination)).c_str(),
               result.message.empty() ? "" : ": ", result.message.c_str());
  return result.termination == Termination::Failed ? kNumerical : kOk;
}

int cmd_benchmark(ExperimentConfig config, const Options& o) {
  if (!o.algos.empty()) config.algorithms = split_list(o.algos);
  if (o.runs > 0) config.n_runs = o.runs;
  config.validate();
  const auto problem = SafeOpProblem::make(config.problem);
  const auto plan = BenchmarkPlan::make(config, problem);
  const auto results = benchmark(plan, problem, o.threads);
  const std::filesystem::path dir = o.out.empty() ? std::filesystem::path("results") : std::filesystem::path(o.out);
  write_benchmark(dir, plan, problem, results);

  std::size_t failed = 0;
  for (const auto& group : group_by_algorithm(results)) {
    const auto unsafe = summarize_unsafe(group);
    const auto bsf = aggregate_bsf(group);
    std::printf("%-10s final mean BSF %10.4f  mean unsafe %7.3f\n", group.front().algorithm.c_str(),
                bsf.mean.empty() ? 0.0 : bsf.mean.back(), unsafe.mean);
    for (const auto& r : group) failed += r.termination == Termination::Failed ? 1 : 0;
  }
  if (failed > 0) std::fprintf(stderr, "warning: %zu run(s) failed; see manifest.json\n", failed);
  std::printf("results written to %s\n", dir.string().c_str());
  return kOk;
}

int cmd_report(const std::string& dir, const Options& o) {
  const auto results = load_results(dir);
  const std::string text = render_report(results, parse_report_metric(o.metric),
                                         parse_report_format(o.format));
  if (o.out.empty()) {
    std::cout << text;
  } else {
    emit(o.out, text);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Benchmark harness for safe black-box optimization"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("config", o.config_path, "JSON configuration file")->required();
    cmd->add_option("--set", o.overrides, "Override a config key (key=value), repeatable");
    cmd->allow_extras();
  };

  auto* problem_cmd = app.add_subcommand("problem", "Problem utilities");
  problem_cmd->require_subcommand(1);
  auto* inspect = problem_cmd->add_subcommand("inspect", "Print threshold, Lipschitz estimate and grid stats");
  add_common(inspect);

  auto* run_cmd = app.add_subcommand("run", "Execute one run and print its CSV log");
  add_common(run_cmd);
  run_cmd->add_option("--algo", o.algo, "Algorithm name")->required();
  run_cmd->add_option("--run-index", o.run_index, "Run index (selects seed set and streams)");
  run_cmd->add_option("--out", o.out, "Write the CSV here instead of stdout");

  auto* bench_cmd = app.add_subcommand("benchmark", "Execute every (algorithm, run) pair");
  add_common(bench_cmd);
  bench_cmd->add_option("--algos", o.algos, "Comma-separated algorithm names");
  bench_cmd->add_option("--runs", o.runs, "Number of runs");
  bench_cmd->add_option("--threads", o.threads, "Worker threads (0: all cores)");
  bench_cmd->add_option("--out", o.out, "Results directory (default: results)");

  std::string results_dir;
  auto* report_cmd = app.add_subcommand("report", "Aggregate a results directory");
  report_cmd->add_option("dir", results_dir, "Results directory")->required();
  report_cmd->add_option("--format", o.format, "csv or svg")
      ->check(CLI::IsMember({"csv", "svg"}));
  report_cmd->add_option("--metric", o.metric, "bsf, unsafe or trajectory")
      ->check(CLI::IsMember({"bsf", "unsafe", "trajectory"}));
  report_cmd->add_option("--out", o.out, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (inspect->parsed()) return cmd_inspect(build_config(o, inspect->remaining()));
    if (run_cmd->parsed()) return cmd_run(build_config(o, run_cmd->remaining()), o);
    if (bench_cmd->parsed()) return cmd_benchmark(build_config(o, bench_cmd->remaining()), o);
    if (report_cmd->parsed()) return cmd_report(results_dir, o);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const InfeasibleScenario& e) {
    std::fprintf(stderr, "infeasible scenario: %s\n", e.what());
    return kInfeasible;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFailure;
  }
  return kOk;
}
