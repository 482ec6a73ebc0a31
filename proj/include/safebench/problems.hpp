#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace safebench {

/// A candidate solution: d finite decision variables.
using Point = std::vector<double>;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double v) const { return v >= lo && v <= hi; }
  double width() const { return hi - lo; }
};

/// Deterministic, noiseless black-box objective on a box domain (maximized).
class Objective {
 public:
  using EvalFn = std::function<double(std::span<const double>)>;

  Objective(std::string name, std::vector<Interval> bounds, EvalFn fn,
            std::optional<Point> optimum_location = std::nullopt,
            std::optional<double> optimum_value = std::nullopt);

  const std::string& name() const { return name_; }
  std::size_t dimension() const { return bounds_.size(); }
  const std::vector<Interval>& bounds() const { return bounds_; }
  const std::optional<Point>& optimum_location() const { return optimum_location_; }
  const std::optional<double>& optimum_value() const { return optimum_value_; }

  /// Throws std::invalid_argument on dimension mismatch or non-finite input.
  double operator()(std::span<const double> x) const;

  bool in_bounds(std::span<const double> x) const;

 private:
  std::string name_;
  std::vector<Interval> bounds_;
  EvalFn fn_;
  std::optional<Point> optimum_location_;
  std::optional<double> optimum_value_;
};

/// f(x) = peak - ||x - center||^2. Throws std::invalid_argument when the
/// sizes of x and center differ.
double sphere_eval(std::span<const double> x, std::span<const double> center, double peak = 0.0);

/// Per-coordinate Styblinski-Tang contribution: -(t^4 - 16 t^2 + 5 t) / 2.
double styblinski_tang_term(double t);

/// Sum of styblinski_tang_term over all coordinates (maximization form).
double styblinski_tang_eval(std::span<const double> x);

inline constexpr double kStyblinskiTangArgmax = -2.903534;
inline constexpr double kStyblinskiTangPeakPerDim = 39.16599;

Objective make_sphere(std::size_t dimension = 2, Interval axis = {-5.0, 5.0});
Objective make_styblinski_tang(std::size_t dimension = 2, Interval axis = {-5.0, 5.0});

/// Name-keyed objective factories. Built-ins: "sphere", "styblinski-tang".
class ObjectiveRegistry {
 public:
  using Factory = std::function<Objective(std::size_t dimension, Interval axis)>;

  static ObjectiveRegistry& instance();

  void add(std::string name, Factory factory);
  bool contains(std::string_view name) const;
  /// Throws std::invalid_argument for an unknown name.
  Objective make(std::string_view name, std::size_t dimension = 2,
                 Interval axis = {-5.0, 5.0}) const;
  std::vector<std::string> names() const;

 private:
  ObjectiveRegistry();
  std::map<std::string, Factory, std::less<>> factories_;
};

/// Where initial safe seeds may be drawn from.
enum class Scenario {
  None,
  S1,             // top-right quadrant
  S2TopLeft,
  S2BottomRight,
  S3,             // split between the two S2 quadrants
};

std::string_view to_string(Scenario s);
/// Accepts "none", "s1", "s2-topleft", "s2-bottomright", "s3" (case-insensitive).
Scenario parse_scenario(std::string_view text);

/// Throws std::invalid_argument unless the scenario is usable with the
/// objective (quadrant scenarios need 2-D Styblinski-Tang).
void check_scenario(Scenario s, const Objective& objective);

bool scenario_contains(Scenario s, std::span<const double> x);
/// Validates the scenario/objective pairing first.
bool scenario_contains(Scenario s, const Objective& objective, std::span<const double> x);

}  // namespace safebench
