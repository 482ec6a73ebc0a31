#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "safebench/ea.hpp"
#include "safebench/gp.hpp"
#include "safebench/safeop.hpp"

namespace safebench {

/// Algorithm names in canonical order.
const std::vector<std::string>& all_algorithms();

/// Everything needed to reproduce a benchmark.
///
/// Stored as a flat JSON object. Recognized keys:
///   objective, dimension, lower, upper, nodes_per_axis, percentile,
///   noise_std, seed_confidence, eval_budget, safety_budget ("unlimited" or
///   an integer), scenario, n_seeds, seeds_consume_budget, master_seed,
///   n_runs, algorithms, kernel_lengthscale, kernel_signal_variance, beta,
///   standardize_targets, ea_crossover_prob, ea_mutation_prob,
///   ea_mutation_sigma, ea_va_retry_cap
/// Missing keys keep their defaults; unknown keys are rejected.
struct ExperimentConfig {
  ProblemSettings problem;
  KernelSpec kernel;
  double beta = 2.0;
  bool standardize_targets = true;
  EaParams ea;
  std::uint64_t master_seed = 1;
  std::size_t n_runs = 20;
  std::vector<std::string> algorithms = all_algorithms();

  /// Throws ConfigError on out-of-range values or unknown names.
  void validate() const;
};

/// All parse functions throw ConfigError.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const ExperimentConfig& config, int indent = 2);

/// Applies a single "key=value" override. The value is parsed as JSON when
/// possible and taken as a plain string otherwise. Does not validate, so
/// several overrides can be applied before calling validate().
void apply_override(ExperimentConfig& config, std::string_view assignment);

}  // namespace safebench
