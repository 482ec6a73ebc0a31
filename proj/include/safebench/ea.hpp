#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "safebench/optimizer.hpp"
#include "safebench/random.hpp"
#include "safebench/safeop.hpp"

namespace safebench {

struct EaParams {
  std::size_t mu = 10;
  std::size_t lambda = 10;
  double crossover_prob = 0.8;
  double mutation_prob = -1.0;  // negative: 1/d
  double mutation_sigma = 0.1;
  double mutation_mean = 0.0;
  std::size_t va_retry_cap = 100;
};

/// Every evaluated point with all of its noisy observations, in first-seen
/// order.
class EvalHistory {
 public:
  struct Entry {
    Point point;
    std::vector<double> ys;
    std::vector<bool> unsafe;

    double average() const;
    bool last_safe() const { return !unsafe.back(); }
  };

  void record(const Point& x, double y, bool is_unsafe);
  bool contains(const Point& x) const { return index_.count(x) != 0; }
  /// Throws std::out_of_range for a point that was never evaluated.
  const Entry& at(const Point& x) const;
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<Entry>& entries() const { return entries_; }

  /// Index of the entry closest to x (Euclidean), earliest on ties.
  std::size_t nearest(std::span<const double> x) const;

 private:
  std::vector<Entry> entries_;
  std::map<Point, std::size_t> index_;
};

struct Individual {
  Point point;
  double fitness = 0.0;
  std::size_t birth = 0;  // creation order, smaller is older
};

/// Mean of all y recorded at exactly x. Throws std::out_of_range otherwise.
double averaged_fitness(const EvalHistory& history, const Point& x);

/// Two uniform draws with replacement; the fitter wins, the first on ties.
const Individual& binary_tournament(std::span<const Individual> pop, Rng& rng);

/// With probability 1 - p_c the parents are copied; otherwise each
/// coordinate is swapped independently with probability 1/2.
std::pair<Point, Point> uniform_crossover(const Point& p1, const Point& p2, double crossover_prob,
                                          Rng& rng);

/// Adds N(mean, sigma^2) to each coordinate with probability p_m, then clamps
/// the coordinate to its axis interval.
Point gaussian_mutation(const Point& x, double mutation_prob, double sigma,
                        const std::vector<Interval>& bounds, Rng& rng, double mean = 0.0);

/// Accepts iff the nearest evaluated point's most recent observation was
/// safe. Throws std::invalid_argument on an empty history.
bool va_filter(std::span<const double> candidate, const EvalHistory& history);

/// Pools parents and offspring, keeps the mu fittest; older first on ties.
std::vector<Individual> mu_plus_lambda_select(std::span<const Individual> parents,
                                              std::span<const Individual> offspring,
                                              std::size_t mu);

/// Generational EA with (mu+lambda) survival and repeated-evaluation
/// averaging. With violation avoidance enabled, offspring whose nearest
/// evaluated neighbor was unsafe are regenerated (up to va_retry_cap times).
class EvolutionaryOptimizer final : public Optimizer {
 public:
  EvolutionaryOptimizer(EaParams params, bool va_enabled, std::vector<Interval> bounds,
                        Rng rng);

  std::string name() const override { return va_enabled_ ? "va-ea" : "unsafe-ea"; }
  void initialize(std::span<const Measurement> seeds) override;
  std::vector<StepDiagnostics> step(BlackBox& box) override;

  struct Offspring {
    std::vector<Individual> individuals;
    std::vector<StepDiagnostics> diagnostics;
  };
  /// Produces and evaluates up to lambda offspring; stops early when the
  /// box stops accepting queries.
  Offspring generate_offspring(BlackBox& box);

  const std::vector<Individual>& population() const { return population_; }
  const EvalHistory& history() const { return history_; }
  const EaParams& params() const { return params_; }
  /// Re-reads every individual's fitness from the history.
  void refresh_fitness(std::vector<Individual>& pop) const;

 private:
  std::pair<Point, Point> make_pair();

  EaParams params_;
  bool va_enabled_;
  std::vector<Interval> bounds_;
  Rng rng_;
  EvalHistory history_;
  std::vector<Individual> population_;
  std::size_t next_birth_ = 0;
};

}  // namespace safebench
