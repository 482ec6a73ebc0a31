#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "safebench/harness.hpp"
#include "safebench/persistence.hpp"

namespace safebench {

/// Mean best-so-far curve with standard error across runs of one algorithm.
struct AggregateSeries {
  std::string algorithm;
  std::vector<double> mean;
  std::vector<double> se;  // sample sd (n - 1) / sqrt(n)
  std::size_t n_runs = 0;
  std::vector<std::size_t> padded_count;  // runs carried forward at each step
  std::vector<bool> padded_mask;          // padded_count > 0
  bool se_undefined = false;              // fewer than two runs; se reported as 0

  double padded_fraction(std::size_t step_index) const;
};

struct UnsafeSummary {
  std::string algorithm;
  std::vector<std::size_t> counts;  // final cumulative unsafe count per run
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

/// Carry-forward pads each run's BSF series to `length` steps (0: the
/// largest run budget) and averages per step. Throws std::invalid_argument
/// on an empty run list or a run without records.
AggregateSeries aggregate_bsf(std::span<const RunResult> runs, std::size_t length = 0);

/// Five-number summary (linearly interpolated quartiles) plus the mean.
UnsafeSummary summarize_unsafe(std::span<const RunResult> runs);

/// Linear-interpolation quantile of already sorted data, q in [0, 1].
double quantile_sorted(std::span<const double> sorted, double q);

/// Groups runs by algorithm, preserving first-appearance order.
std::vector<std::vector<RunResult>> group_by_algorithm(std::span<const RunResult> runs);

enum class ReportFormat { Csv, Svg };
enum class ReportMetric { Bsf, Unsafe, Trajectory };
ReportFormat parse_report_format(std::string_view text);
ReportMetric parse_report_metric(std::string_view text);

/// algorithm,step,mean,se,padded_frac
std::string bsf_csv(std::span<const AggregateSeries> series);
/// algorithm,n_runs,min,q1,median,q3,max,mean,counts
std::string unsafe_csv(std::span<const UnsafeSummary> summaries);
/// algorithm,run,step,x1..xd,y,is_unsafe
std::string trajectory_csv(std::span<const RunResult> runs);
/// Line chart with shaded +-SE bands.
std::string bsf_svg(std::span<const AggregateSeries> series);
/// Box-and-whisker chart of final unsafe counts.
std::string unsafe_svg(std::span<const UnsafeSummary> summaries);

/// Renders one metric of a loaded result set. Trajectories are CSV only;
/// asking for SVG throws std::invalid_argument.
std::string render_report(const ResultSet& results, ReportMetric metric, ReportFormat format);

/// Writes text to path; throws std::runtime_error when it cannot.
void emit(const std::filesystem::path& path, std::string_view content);

}  // namespace safebench
