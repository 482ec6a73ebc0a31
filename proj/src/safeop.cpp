#include "safebench/safeop.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "safebench/errors.hpp"

namespace safebench {

Grid::Grid(const Objective& objective, std::vector<std::size_t> nodes_per_axis)
    : nodes_(std::move(nodes_per_axis)), bounds_(objective.bounds()) {
  const std::size_t d = objective.dimension();
  if (nodes_.size() != d) {
    throw std::invalid_argument("grid needs one node count per objective axis");
  }
  std::size_t total = 1;
  for (std::size_t n : nodes_) {
    if (n < 2) throw std::invalid_argument("grid needs at least 2 nodes per axis");
    total *= n;
  }
  strides_.assign(d, 1);
  for (std::size_t a = d - 1; a > 0; --a) strides_[a - 1] = strides_[a] * nodes_[a];

  points_.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(total));
  values_.resize(total);
  Point x(d);
  for (std::size_t i = 0; i < total; ++i) {
    std::size_t rest = i;
    for (std::size_t a = 0; a < d; ++a) {
      const std::size_t node = rest / strides_[a];
      rest %= strides_[a];
      x[a] = coordinate(a, node);
      points_(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(i)) = x[a];
    }
    values_[i] = objective(x);
  }
}

double Grid::spacing(std::size_t axis) const {
  return bounds_[axis].width() / static_cast<double>(nodes_[axis] - 1);
}

double Grid::coordinate(std::size_t axis, std::size_t node) const {
  if (node + 1 == nodes_[axis]) return bounds_[axis].hi;
  return bounds_[axis].lo + static_cast<double>(node) * spacing(axis);
}

Point Grid::point(std::size_t index) const {
  const auto col = points_.col(static_cast<Eigen::Index>(index));
  return Point(col.data(), col.data() + col.size());
}

std::vector<std::size_t> Grid::multi_index(std::size_t index) const {
  std::vector<std::size_t> out(dimension());
  for (std::size_t a = 0; a < dimension(); ++a) {
    out[a] = index / strides_[a];
    index %= strides_[a];
  }
  return out;
}

std::size_t Grid::nearest_index(std::span<const double> x) const {
  if (x.size() != dimension()) throw std::invalid_argument("nearest_index: dimension mismatch");
  std::size_t flat = 0;
  for (std::size_t a = 0; a < dimension(); ++a) {
    double node = std::round((x[a] - bounds_[a].lo) / spacing(a));
    node = std::clamp(node, 0.0, static_cast<double>(nodes_[a] - 1));
    flat += static_cast<std::size_t>(node) * strides_[a];
  }
  return flat;
}

Grid discretize(const Objective& objective, std::size_t nodes_per_axis) {
  if (nodes_per_axis < 2) throw std::invalid_argument("nodes_per_axis must be at least 2");
  return Grid(objective, std::vector<std::size_t>(objective.dimension(), nodes_per_axis));
}

double percentile_threshold(std::span<const double> values, double k) {
  if (!(k > 0.0 && k <= 100.0)) throw std::invalid_argument("percentile must be in (0, 100]");
  if (values.empty()) throw std::logic_error("percentile of an empty value set");
  const double n = static_cast<double>(values.size());
  // Small slack so k*N/100 landing a hair above an integer does not bump the rank.
  auto rank = static_cast<std::size_t>(std::ceil(k * n / 100.0 - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  std::vector<double> sorted(values.begin(), values.end());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank - 1),
                   sorted.end());
  return sorted[rank - 1];
}

double percentile_threshold(const Grid& grid, double k) {
  return percentile_threshold(grid.values(), k);
}

double estimate_lipschitz(const Grid& grid) {
  const std::size_t d = grid.dimension();
  const auto values = grid.values();
  double best_sq = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto idx = grid.multi_index(i);
    double sq = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
      const std::size_t s = grid.stride(a);
      const double h = grid.spacing(a);
      double g;
      if (idx[a] == 0) {
        g = (values[i + s] - values[i]) / h;
      } else if (idx[a] + 1 == grid.nodes(a)) {
        g = (values[i] - values[i - s]) / h;
      } else {
        g = (values[i + s] - values[i - s]) / (2.0 * h);
      }
      sq += g * g;
    }
    best_sq = std::max(best_sq, sq);
  }
  return std::sqrt(best_sq);
}

SafeOpProblem SafeOpProblem::make(const ProblemSettings& settings) {
  return make(ObjectiveRegistry::instance().make(settings.objective, settings.dimension,
                                                 settings.axis),
              settings);
}

SafeOpProblem SafeOpProblem::make(Objective objective, const ProblemSettings& settings) {
  auto grid = std::make_shared<const Grid>(discretize(objective, settings.nodes_per_axis));
  const double h = percentile_threshold(*grid, settings.percentile);
  return SafeOpProblem(std::move(objective), std::move(grid), h, settings);
}

SafeOpProblem::SafeOpProblem(Objective objective, std::shared_ptr<const Grid> grid,
                             double threshold, const ProblemSettings& settings)
    : objective_(std::move(objective)),
      grid_(std::move(grid)),
      threshold_(threshold),
      lipschitz_(0.0),
      settings_(settings) {
  if (!grid_) throw std::invalid_argument("problem needs a grid");
  if (!(settings_.noise_std >= 0.0)) throw std::invalid_argument("noise_std must be >= 0");
  if (settings_.eval_budget < 1) throw std::invalid_argument("eval_budget must be >= 1");
  check_scenario(settings_.scenario, objective_);
  lipschitz_ = estimate_lipschitz(*grid_);
}

std::vector<std::size_t> eligible_seed_indices(const SafeOpProblem& problem, Scenario region) {
  const Grid& grid = problem.grid();
  const double margin = problem.noise_std() * problem.seed_confidence();
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid.value(i) - margin < problem.threshold()) continue;
    const auto col = grid.points().col(static_cast<Eigen::Index>(i));
    if (!scenario_contains(region, std::span<const double>(col.data(), col.size()))) continue;
    out.push_back(i);
  }
  return out;
}

namespace {

void draw_from(const SafeOpProblem& problem, Scenario region, std::size_t n, Rng& rng,
               std::vector<Point>& out) {
  if (n == 0) return;
  const auto eligible = eligible_seed_indices(problem, region);
  if (eligible.size() < n) {
    throw InfeasibleScenario("region '" + std::string(to_string(region)) + "' has only " +
                             std::to_string(eligible.size()) +
                             " eligible seed points, " + std::to_string(n) + " requested");
  }
  std::vector<std::size_t> picked;
  picked.reserve(n);
  std::sample(eligible.begin(), eligible.end(), std::back_inserter(picked),
              static_cast<std::ptrdiff_t>(n), rng);
  std::shuffle(picked.begin(), picked.end(), rng);
  for (std::size_t i : picked) out.push_back(problem.grid().point(i));
}

}  // namespace

std::vector<Point> sample_safe_seeds(const SafeOpProblem& problem, std::size_t n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("need at least one seed");
  std::vector<Point> out;
  out.reserve(n);
  if (problem.scenario() == Scenario::S3) {
    draw_from(problem, Scenario::S2TopLeft, (n + 1) / 2, rng, out);
    draw_from(problem, Scenario::S2BottomRight, n / 2, rng, out);
  } else {
    draw_from(problem, problem.scenario(), n, rng, out);
  }
  return out;
}

std::string_view to_string(OracleStatus s) {
  switch (s) {
    case OracleStatus::Running: return "running";
    case OracleStatus::BudgetExhausted: return "budget-exhausted";
    case OracleStatus::SafetyExhausted: return "safety-exhausted";
  }
  return "running";
}

Oracle::Oracle(SafeOpProblem problem, std::uint64_t noise_seed)
    : problem_(std::move(problem)), rng_(noise_seed), budget_(problem_.eval_budget()) {}

const Observation& Oracle::evaluate(std::span<const double> x) {
  if (!running()) {
    throw TerminatedRun("evaluation requested after termination (" +
                        std::string(to_string(status_)) + ")");
  }
  if (!problem_.objective().in_bounds(x)) {
    throw std::invalid_argument("evaluation point outside the search box");
  }
  Observation obs;
  obs.point.assign(x.begin(), x.end());
  obs.f_true = problem_.objective()(x);
  double noise = 0.0;
  if (problem_.noise_std() > 0.0) {
    noise = std::normal_distribution<double>(0.0, problem_.noise_std())(rng_);
  }
  obs.y = obs.f_true + noise;
  obs.is_unsafe = obs.y < problem_.threshold();
  obs.step = log_.size() + 1;
  if (obs.is_unsafe) ++unsafe_used_;
  log_.push_back(std::move(obs));

  const auto& limit = problem_.safety_budget();
  if (limit && unsafe_used_ > *limit) {
    status_ = OracleStatus::SafetyExhausted;
  } else if (log_.size() >= budget_) {
    status_ = OracleStatus::BudgetExhausted;
  }
  return log_.back();
}

std::vector<Observation> Oracle::seed_and_prime(std::span<const Point> seeds, bool consume_budget) {
  if (seeds.empty()) throw std::invalid_argument("seed_and_prime needs at least one seed");
  if (!consume_budget && log_.empty()) budget_ += seeds.size();
  std::vector<Observation> out;
  out.reserve(seeds.size());
  for (const auto& s : seeds) out.push_back(evaluate(s));
  return out;
}

}  // namespace safebench
