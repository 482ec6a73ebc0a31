#include "safebench/ea.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace safebench {

double EvalHistory::Entry::average() const {
  double sum = 0.0;
  for (double y : ys) sum += y;
  return sum / static_cast<double>(ys.size());
}

void EvalHistory::record(const Point& x, double y, bool is_unsafe) {
  auto [it, inserted] = index_.try_emplace(x, entries_.size());
  if (inserted) entries_.push_back({x, {}, {}});
  Entry& e = entries_[it->second];
  e.ys.push_back(y);
  e.unsafe.push_back(is_unsafe);
}

const EvalHistory::Entry& EvalHistory::at(const Point& x) const {
  auto it = index_.find(x);
  if (it == index_.end()) throw std::out_of_range("point not present in the evaluation history");
  return entries_[it->second];
}

std::size_t EvalHistory::nearest(std::span<const double> x) const {
  if (entries_.empty()) throw std::invalid_argument("nearest neighbor of an empty history");
  std::size_t best = 0;
  double best_sq = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const Point& p = entries_[i].point;
    double sq = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) sq += (p[k] - x[k]) * (p[k] - x[k]);
    if (sq < best_sq) {
      best_sq = sq;
      best = i;
    }
  }
  return best;
}

double averaged_fitness(const EvalHistory& history, const Point& x) {
  return history.at(x).average();
}

const Individual& binary_tournament(std::span<const Individual> pop, Rng& rng) {
  if (pop.empty()) throw std::invalid_argument("tournament over an empty population");
  std::uniform_int_distribution<std::size_t> pick(0, pop.size() - 1);
  const Individual& a = pop[pick(rng)];
  const Individual& b = pop[pick(rng)];
  return b.fitness > a.fitness ? b : a;
}

std::pair<Point, Point> uniform_crossover(const Point& p1, const Point& p2, double crossover_prob,
                                          Rng& rng) {
  if (p1.size() != p2.size()) throw std::invalid_argument("crossover parents differ in dimension");
  std::pair<Point, Point> children{p1, p2};
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (!(u(rng) < crossover_prob)) return children;
  for (std::size_t k = 0; k < p1.size(); ++k) {
    if (u(rng) < 0.5) std::swap(children.first[k], children.second[k]);
  }
  return children;
}

Point gaussian_mutation(const Point& x, double mutation_prob, double sigma,
                        const std::vector<Interval>& bounds, Rng& rng, double mean) {
  if (bounds.size() != x.size()) throw std::invalid_argument("mutation bounds dimension mismatch");
  Point out = x;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (!(u(rng) < mutation_prob)) continue;
    if (sigma > 0.0) out[k] += std::normal_distribution<double>(mean, sigma)(rng);
    else out[k] += mean;
    out[k] = std::clamp(out[k], bounds[k].lo, bounds[k].hi);
  }
  return out;
}

bool va_filter(std::span<const double> candidate, const EvalHistory& history) {
  return history.entries()[history.nearest(candidate)].last_safe();
}

std::vector<Individual> mu_plus_lambda_select(std::span<const Individual> parents,
                                              std::span<const Individual> offspring,
                                              std::size_t mu) {
  std::vector<Individual> pool(parents.begin(), parents.end());
  pool.insert(pool.end(), offspring.begin(), offspring.end());
  std::stable_sort(pool.begin(), pool.end(), [](const Individual& a, const Individual& b) {
    if (a.fitness != b.fitness) return a.fitness > b.fitness;
    return a.birth < b.birth;
  });
  if (pool.size() > mu) pool.resize(mu);
  return pool;
}

EvolutionaryOptimizer::EvolutionaryOptimizer(EaParams params, bool va_enabled,
                                             std::vector<Interval> bounds, Rng rng)
    : params_(params), va_enabled_(va_enabled), bounds_(std::move(bounds)), rng_(rng) {
  if (params_.mu < 1 || params_.lambda < 1) throw std::invalid_argument("mu and lambda must be >= 1");
  if (bounds_.empty()) throw std::invalid_argument("EA needs a non-empty search box");
  if (params_.mutation_prob < 0.0) params_.mutation_prob = 1.0 / static_cast<double>(bounds_.size());
}

void EvolutionaryOptimizer::initialize(std::span<const Measurement> seeds) {
  if (seeds.size() != params_.mu) {
    throw std::invalid_argument("EA population size must equal the number of seeds");
  }
  history_ = {};
  population_.clear();
  for (const auto& m : seeds) history_.record(m.point, m.y, m.is_unsafe);
  for (const auto& m : seeds) population_.push_back({m.point, 0.0, next_birth_++});
  refresh_fitness(population_);
}

void EvolutionaryOptimizer::refresh_fitness(std::vector<Individual>& pop) const {
  for (auto& ind : pop) ind.fitness = averaged_fitness(history_, ind.point);
}

std::pair<Point, Point> EvolutionaryOptimizer::make_pair() {
  const Point p1 = binary_tournament(population_, rng_).point;
  const Point p2 = binary_tournament(population_, rng_).point;
  auto [c1, c2] = uniform_crossover(p1, p2, params_.crossover_prob, rng_);
  return {gaussian_mutation(c1, params_.mutation_prob, params_.mutation_sigma, bounds_, rng_,
                            params_.mutation_mean),
          gaussian_mutation(c2, params_.mutation_prob, params_.mutation_sigma, bounds_, rng_,
                            params_.mutation_mean)};
}

EvolutionaryOptimizer::Offspring EvolutionaryOptimizer::generate_offspring(BlackBox& box) {
  Offspring out;
  std::vector<Point> pending;  // second child of the last generated pair
  auto next_candidate = [&]() {
    if (pending.empty()) {
      auto [a, b] = make_pair();
      pending.push_back(std::move(b));
      return a;
    }
    Point c = std::move(pending.back());
    pending.pop_back();
    return c;
  };

  while (out.individuals.size() < params_.lambda && box.running()) {
    StepDiagnostics diag;
    Point candidate = next_candidate();
    if (va_enabled_) {
      while (!va_filter(candidate, history_)) {
        if (diag.rejected == params_.va_retry_cap) {
          diag.forced_accept = true;
          break;
        }
        ++diag.rejected;
        candidate = next_candidate();
      }
    }
    const Measurement m = box.query(candidate);
    history_.record(m.point, m.y, m.is_unsafe);
    out.individuals.push_back({m.point, 0.0, next_birth_++});
    out.diagnostics.push_back(diag);
  }
  refresh_fitness(out.individuals);
  return out;
}

std::vector<StepDiagnostics> EvolutionaryOptimizer::step(BlackBox& box) {
  if (!box.running()) return {};
  Offspring off = generate_offspring(box);
  refresh_fitness(population_);
  population_ = mu_plus_lambda_select(population_, off.individuals, params_.mu);
  return std::move(off.diagnostics);
}

}  // namespace safebench
