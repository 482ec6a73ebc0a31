#include "safebench/problems.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace safebench {

Objective::Objective(std::string name, std::vector<Interval> bounds, EvalFn fn,
                     std::optional<Point> optimum_location, std::optional<double> optimum_value)
    : name_(std::move(name)),
      bounds_(std::move(bounds)),
      fn_(std::move(fn)),
      optimum_location_(std::move(optimum_location)),
      optimum_value_(optimum_value) {
  if (bounds_.empty()) {
    throw std::invalid_argument("objective '" + name_ + "' needs at least one dimension");
  }
  for (const auto& b : bounds_) {
    if (!std::isfinite(b.lo) || !std::isfinite(b.hi) || !(b.lo < b.hi)) {
      throw std::invalid_argument("objective '" + name_ + "' has an invalid axis interval");
    }
  }
  if (!fn_) throw std::invalid_argument("objective '" + name_ + "' has no evaluation function");
}

double Objective::operator()(std::span<const double> x) const {
  if (x.size() != dimension()) {
    throw std::invalid_argument("objective '" + name_ + "' expects dimension " +
                                std::to_string(dimension()) + ", got " +
                                std::to_string(x.size()));
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite coordinate");
  }
  return fn_(x);
}

bool Objective::in_bounds(std::span<const double> x) const {
  if (x.size() != dimension()) return false;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!bounds_[k].contains(x[k])) return false;
  }
  return true;
}

double sphere_eval(std::span<const double> x, std::span<const double> center, double peak) {
  if (x.size() != center.size()) {
    throw std::invalid_argument("sphere: point has dimension " + std::to_string(x.size()) +
                                " but the optimum has dimension " +
                                std::to_string(center.size()));
  }
  double sq = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double e = x[k] - center[k];
    sq += e * e;
  }
  return peak - sq;
}

double styblinski_tang_term(double t) {
  const double t2 = t * t;
  return -0.5 * (t2 * t2 - 16.0 * t2 + 5.0 * t);
}

double styblinski_tang_eval(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("styblinski-tang: empty point");
  double sum = 0.0;
  for (double t : x) sum += styblinski_tang_term(t);
  return sum;
}

Objective make_sphere(std::size_t dimension, Interval axis) {
  Point center(dimension, 0.0);
  return Objective(
      "sphere", std::vector<Interval>(dimension, axis),
      [center](std::span<const double> x) { return sphere_eval(x, center, 0.0); }, center, 0.0);
}

Objective make_styblinski_tang(std::size_t dimension, Interval axis) {
  return Objective("styblinski-tang", std::vector<Interval>(dimension, axis),
                   [](std::span<const double> x) { return styblinski_tang_eval(x); },
                   Point(dimension, kStyblinskiTangArgmax),
                   kStyblinskiTangPeakPerDim * static_cast<double>(dimension));
}

ObjectiveRegistry::ObjectiveRegistry() {
  factories_.emplace("sphere", [](std::size_t d, Interval a) { return make_sphere(d, a); });
  factories_.emplace("styblinski-tang",
                     [](std::size_t d, Interval a) { return make_styblinski_tang(d, a); });
}

ObjectiveRegistry& ObjectiveRegistry::instance() {
  static ObjectiveRegistry registry;
  return registry;
}

void ObjectiveRegistry::add(std::string name, Factory factory) {
  factories_.insert_or_assign(std::move(name), std::move(factory));
}

bool ObjectiveRegistry::contains(std::string_view name) const {
  return factories_.find(name) != factories_.end();
}

Objective ObjectiveRegistry::make(std::string_view name, std::size_t dimension,
                                  Interval axis) const {
  auto it = factories_.find(name);
  if (it == factories_.end()) {
    throw std::invalid_argument("unknown objective '" + std::string(name) + "'");
  }
  if (dimension == 0) throw std::invalid_argument("dimension must be positive");
  return it->second(dimension, axis);
}

std::vector<std::string> ObjectiveRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : factories_) out.push_back(name);
  return out;
}

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::None: return "none";
    case Scenario::S1: return "s1";
    case Scenario::S2TopLeft: return "s2-topleft";
    case Scenario::S2BottomRight: return "s2-bottomright";
    case Scenario::S3: return "s3";
  }
  return "none";
}

Scenario parse_scenario(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (Scenario s : {Scenario::None, Scenario::S1, Scenario::S2TopLeft, Scenario::S2BottomRight,
                     Scenario::S3}) {
    if (lower == to_string(s)) return s;
  }
  throw std::invalid_argument("unknown scenario '" + std::string(text) + "'");
}

void check_scenario(Scenario s, const Objective& objective) {
  if (s == Scenario::None) return;
  if (objective.name() != "styblinski-tang" || objective.dimension() != 2) {
    throw std::invalid_argument("scenario '" + std::string(to_string(s)) +
                                "' requires the 2-D styblinski-tang objective");
  }
}

bool scenario_contains(Scenario s, std::span<const double> x) {
  if (s == Scenario::None) return true;
  if (x.size() != 2) throw std::invalid_argument("quadrant scenarios need a 2-D point");
  const double x1 = x[0];
  const double x2 = x[1];
  switch (s) {
    case Scenario::S1: return x1 > 0.0 && x2 > 0.0;
    case Scenario::S2TopLeft: return x1 < 0.0 && x2 > 0.0;
    case Scenario::S2BottomRight: return x1 > 0.0 && x2 < 0.0;
    case Scenario::S3: return (x1 < 0.0 && x2 > 0.0) || (x1 > 0.0 && x2 < 0.0);
    case Scenario::None: break;
  }
  return true;
}

bool scenario_contains(Scenario s, const Objective& objective, std::span<const double> x) {
  check_scenario(s, objective);
  return scenario_contains(s, x);
}

}  // namespace safebench
