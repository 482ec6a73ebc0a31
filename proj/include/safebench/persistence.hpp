#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "safebench/config.hpp"
#include "safebench/harness.hpp"

namespace safebench {

inline constexpr const char* kToolVersion = "0.1.0";

/// "<algo>_run<idx>.csv"
std::string run_file_name(const RunResult& result);

/// Header: step,x1,...,xd,y,f_true,is_unsafe,bsf_true
void write_run_csv(std::ostream& out, const RunResult& result, std::size_t dimension);
/// Header: step,safe_set_size,maximizers,expanders,fallback,forced_accept,rejected
void write_diagnostics_csv(std::ostream& out, const RunResult& result);

/// Parses a run CSV (and optionally its diagnostics). Throws
/// std::runtime_error on malformed input.
std::vector<StepRecord> read_run_csv(std::istream& in);
void read_diagnostics_csv(std::istream& in, std::vector<StepRecord>& records);

/// Writes per-run CSVs, a manifest.json (config, problem stats, seed sets,
/// termination reasons) and a timing.json with wall-clock times. Everything
/// but timing.json is byte-identical for identical plans.
void write_benchmark(const std::filesystem::path& dir, const BenchmarkPlan& plan,
                     const SafeOpProblem& problem, const std::vector<RunResult>& results);

struct ResultSet {
  ExperimentConfig config;
  double threshold = 0.0;
  std::size_t dimension = 0;
  std::vector<RunResult> runs;
};

/// Reads a directory produced by write_benchmark. Never touches objectives.
ResultSet load_results(const std::filesystem::path& dir);

}  // namespace safebench
