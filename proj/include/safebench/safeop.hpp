#pragma once

#include <cstddef>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "safebench/problems.hpp"
#include "safebench/random.hpp"

namespace safebench {

/// Uniform Cartesian discretization of an objective's box, with the
/// objective cached at every node. Flattened in row-major order: the last
/// axis varies fastest.
class Grid {
 public:
  Grid(const Objective& objective, std::vector<std::size_t> nodes_per_axis);

  std::size_t dimension() const { return nodes_.size(); }
  std::size_t size() const { return values_.size(); }
  std::size_t nodes(std::size_t axis) const { return nodes_[axis]; }
  const std::vector<std::size_t>& nodes_per_axis() const { return nodes_; }
  const Interval& bounds(std::size_t axis) const { return bounds_[axis]; }
  double spacing(std::size_t axis) const;
  double coordinate(std::size_t axis, std::size_t node) const;

  /// d x N matrix; column i is grid point i.
  const Eigen::MatrixXd& points() const { return points_; }
  Point point(std::size_t index) const;
  std::span<const double> values() const { return values_; }
  double value(std::size_t index) const { return values_[index]; }

  std::size_t stride(std::size_t axis) const { return strides_[axis]; }
  std::vector<std::size_t> multi_index(std::size_t index) const;
  std::size_t nearest_index(std::span<const double> x) const;

  /// Calls fn(index) for every node inside the axis-aligned box
  /// [c - radius, c + radius] padded by one node per side. Callers apply
  /// their exact predicate; the padding only guarantees no node is missed.
  template <typename Fn>
  void for_each_in_box(std::span<const double> center, double radius, Fn&& fn) const;

 private:
  std::vector<std::size_t> nodes_;
  std::vector<Interval> bounds_;
  std::vector<std::size_t> strides_;
  Eigen::MatrixXd points_;
  std::vector<double> values_;
};

/// Throws std::invalid_argument when nodes_per_axis < 2.
Grid discretize(const Objective& objective, std::size_t nodes_per_axis);

/// Nearest-rank percentile: the ceil(k/100 * N)-th smallest value (1-based).
/// Throws std::invalid_argument unless 0 < k <= 100 and std::logic_error on
/// empty input.
double percentile_threshold(std::span<const double> values, double k);
double percentile_threshold(const Grid& grid, double k);

/// Largest Euclidean norm of the finite-difference gradient over all grid
/// nodes. Central differences inside, one-sided on the boundary.
double estimate_lipschitz(const Grid& grid);

struct ProblemSettings {
  std::string objective = "sphere";
  std::size_t dimension = 2;
  Interval axis{-5.0, 5.0};
  std::size_t nodes_per_axis = 100;
  double percentile = 95.0;
  double noise_std = 0.1;
  double seed_confidence = 1.96;
  std::size_t eval_budget = 100;
  std::optional<std::size_t> safety_budget;  // nullopt: unlimited
  Scenario scenario = Scenario::None;
  std::size_t n_seeds = 10;
  bool seeds_consume_budget = true;
};

/// An objective turned into a safe optimization problem. Immutable; the grid
/// is shared between copies.
class SafeOpProblem {
 public:
  /// Builds the grid, threshold and Lipschitz estimate from settings.
  static SafeOpProblem make(const ProblemSettings& settings);
  static SafeOpProblem make(Objective objective, const ProblemSettings& settings);

  /// Direct construction with an explicit threshold, mostly for tests.
  SafeOpProblem(Objective objective, std::shared_ptr<const Grid> grid, double threshold,
                const ProblemSettings& settings);

  const Objective& objective() const { return objective_; }
  const Grid& grid() const { return *grid_; }
  std::shared_ptr<const Grid> shared_grid() const { return grid_; }
  double threshold() const { return threshold_; }
  double lipschitz() const { return lipschitz_; }
  double noise_std() const { return settings_.noise_std; }
  double seed_confidence() const { return settings_.seed_confidence; }
  std::size_t eval_budget() const { return settings_.eval_budget; }
  const std::optional<std::size_t>& safety_budget() const { return settings_.safety_budget; }
  Scenario scenario() const { return settings_.scenario; }
  const ProblemSettings& settings() const { return settings_; }

 private:
  Objective objective_;
  std::shared_ptr<const Grid> grid_;
  double threshold_;
  double lipschitz_;
  ProblemSettings settings_;
};

/// Grid indices satisfying f(x) - sigma*beta >= h inside the given region.
std::vector<std::size_t> eligible_seed_indices(const SafeOpProblem& problem, Scenario region);

/// Draws n distinct eligible grid points uniformly at random. Under S3 the
/// first ceil(n/2) come from the top-left quadrant and the remaining
/// floor(n/2) from the bottom-right one. Throws InfeasibleScenario when a
/// region has fewer eligible points than requested.
std::vector<Point> sample_safe_seeds(const SafeOpProblem& problem, std::size_t n, Rng& rng);

struct Observation {
  Point point;
  double y = 0.0;       // noisy value seen by the optimizer
  double f_true = 0.0;  // noiseless value, logged out of band
  bool is_unsafe = false;
  std::size_t step = 0;  // 1-based
};

/// What an optimizer is allowed to learn from an evaluation.
struct Measurement {
  Point point;
  double y = 0.0;
  bool is_unsafe = false;
};

enum class OracleStatus { Running, BudgetExhausted, SafetyExhausted };
std::string_view to_string(OracleStatus s);

/// Budget-tracking noisy evaluator for one run. Single owner.
class Oracle {
 public:
  Oracle(SafeOpProblem problem, std::uint64_t noise_seed);

  /// Evaluates x with fresh Gaussian noise and updates the counters. The
  /// evaluation that breaks the safety budget is recorded before the oracle
  /// stops. Throws TerminatedRun once stopped and std::invalid_argument for
  /// out-of-bounds points.
  const Observation& evaluate(std::span<const double> x);

  /// Evaluates every seed in order. With consume_budget == false the
  /// evaluation budget is first enlarged by the number of seeds.
  std::vector<Observation> seed_and_prime(std::span<const Point> seeds, bool consume_budget = true);

  const SafeOpProblem& problem() const { return problem_; }
  OracleStatus status() const { return status_; }
  bool running() const { return status_ == OracleStatus::Running; }
  std::size_t evals_used() const { return log_.size(); }
  std::size_t unsafe_used() const { return unsafe_used_; }
  std::size_t eval_budget() const { return budget_; }
  std::size_t remaining() const { return budget_ - log_.size(); }
  const std::vector<Observation>& log() const { return log_; }

 private:
  SafeOpProblem problem_;
  Rng rng_;
  std::vector<Observation> log_;
  std::size_t unsafe_used_ = 0;
  std::size_t budget_;
  OracleStatus status_ = OracleStatus::Running;
};

/// Optimizer-facing view of an Oracle: hides the true objective value.
class BlackBox {
 public:
  explicit BlackBox(Oracle& oracle) : oracle_(oracle) {}

  Measurement query(std::span<const double> x) {
    const Observation& obs = oracle_.evaluate(x);
    return {obs.point, obs.y, obs.is_unsafe};
  }
  bool running() const { return oracle_.running(); }
  std::size_t remaining() const { return oracle_.remaining(); }
  double threshold() const { return oracle_.problem().threshold(); }
  const std::vector<Interval>& bounds() const { return oracle_.problem().objective().bounds(); }

 private:
  Oracle& oracle_;
};

template <typename Fn>
void Grid::for_each_in_box(std::span<const double> center, double radius, Fn&& fn) const {
  const std::size_t d = dimension();
  std::vector<std::size_t> lo(d), hi(d);
  for (std::size_t a = 0; a < d; ++a) {
    const double h = spacing(a);
    const double top = static_cast<double>(nodes_[a] - 1);
    double first = std::floor((center[a] - radius - bounds_[a].lo) / h) - 1.0;
    double last = std::ceil((center[a] + radius - bounds_[a].lo) / h) + 1.0;
    if (!(first > 0.0)) first = 0.0;  // also catches NaN from infinite radius
    if (!(last < top)) last = top;
    if (first > top || last < 0.0) return;
    lo[a] = static_cast<std::size_t>(first);
    hi[a] = static_cast<std::size_t>(last);
  }
  std::vector<std::size_t> idx = lo;
  while (true) {
    std::size_t flat = 0;
    for (std::size_t a = 0; a < d; ++a) flat += idx[a] * strides_[a];
    fn(flat);
    std::size_t a = d;
    while (a > 0) {
      --a;
      if (idx[a] < hi[a]) {
        ++idx[a];
        break;
      }
      idx[a] = lo[a];
      if (a == 0) return;
    }
  }
}

}  // namespace safebench
