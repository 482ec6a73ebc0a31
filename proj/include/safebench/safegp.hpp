#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "safebench/gp.hpp"
#include "safebench/optimizer.hpp"
#include "safebench/safeop.hpp"

namespace safebench {

enum class SafeGpVariant { SafeOpt, SafeUcb, MSafeOpt, MSafeUcb };

std::string_view to_string(SafeGpVariant v);
/// "safeopt", "safe-ucb", "msafeopt", "msafe-ucb".
SafeGpVariant parse_safegp_variant(std::string_view name);
bool is_safegp_name(std::string_view name);

/// True for SafeOpt and Safe-UCB, which certify safety through L.
constexpr bool uses_lipschitz(SafeGpVariant v) {
  return v == SafeGpVariant::SafeOpt || v == SafeGpVariant::SafeUcb;
}
/// True for the variants that pick by confidence width over M and G.
constexpr bool uses_expanders(SafeGpVariant v) {
  return v == SafeGpVariant::SafeOpt || v == SafeGpVariant::MSafeOpt;
}

/// Membership mask over grid indices.
struct SafeSet {
  std::vector<std::uint8_t> mask;
  std::size_t generation = 0;

  static SafeSet from_indices(std::size_t grid_size, std::span<const std::size_t> indices);

  bool contains(std::size_t i) const { return mask[i] != 0; }
  std::size_t size() const { return mask.size(); }
  std::size_t count() const;
  std::vector<std::size_t> members() const;
};

/// x is safe iff l(xs) - L * ||xs - x|| >= h for some xs in prev. Only
/// lower[xs] for members of prev is read.
SafeSet update_safe_set_lipschitz(const SafeSet& prev, std::span<const double> lower, double lipschitz,
                                  const Grid& grid, double threshold);

/// x is safe iff l(x) >= h; the result is unioned with prev.
SafeSet update_safe_set_gp(const SafeSet& prev, std::span<const double> lower, double threshold);

/// M = { x in S : u(x) >= max over S of l }.
std::vector<std::size_t> compute_maximizers(const SafeSet& safe, std::span<const double> lower,
                                            std::span<const double> upper);

/// x in S expands iff u(x) - L * ||x - x'|| >= h for some x' outside S.
std::vector<std::size_t> lipschitz_expanders(const SafeSet& safe, std::span<const double> upper,
                                             double lipschitz, const Grid& grid, double threshold);

/// Safe points with at least one non-safe node among their 3^d - 1 grid
/// neighbors.
std::vector<std::size_t> safe_boundary(const SafeSet& safe, const Grid& grid);

/// Posterior quantities on the grid in the original (unstandardized) units.
struct GridPosterior {
  std::vector<double> mean;
  std::vector<double> stddev;
  std::vector<double> lower;
  std::vector<double> upper;
};

/// Candidate x in S expands iff conditioning the GP on a noiseless
/// fictitious observation (x, u(x)) lifts l(x') >= h at some x' outside S.
/// The conditioning is done in closed form:
///   mu'(x')    = mu(x') + beta * c / sigma(x)
///   sigma'(x')^2 = sigma(x')^2 - c^2 / sigma(x)^2
/// with c the posterior covariance of x and x'. Only x' with u(x') >= h can
/// qualify, so others are skipped.
std::vector<std::size_t> gp_expanders(const SafeSet& safe, std::span<const std::size_t> candidates,
                                      const GridPosterior& post, const GpModel& model,
                                      const TargetScaler& scaler, const Grid& grid, double beta,
                                      double threshold);

struct Selection {
  std::size_t index = 0;
  bool fallback = false;
};

/// UCB variants: argmax u over S. Width variants: argmax u - l over M u G,
/// or over S when both are empty. Ties go to the lowest grid index. Throws
/// StalledAlgorithm on an empty safe set.
Selection select_next(SafeGpVariant variant, const SafeSet& safe,
                      std::span<const std::size_t> maximizers,
                      std::span<const std::size_t> expanders, std::span<const double> lower,
                      std::span<const double> upper);

struct SafeGpSettings {
  SafeGpVariant variant = SafeGpVariant::SafeOpt;
  KernelSpec kernel;
  double beta = 2.0;
  double lipschitz = 0.0;  // only read by the Lipschitz variants
  bool standardize = true;
};

/// One of the four safe GP optimizers as a step-wise state machine over the
/// problem grid.
class SafeGpOptimizer final : public Optimizer {
 public:
  SafeGpOptimizer(SafeGpSettings settings, std::shared_ptr<const Grid> grid, double threshold,
                  double noise_std);

  std::string name() const override { return std::string(to_string(settings_.variant)); }
  void initialize(std::span<const Measurement> seeds) override;
  std::vector<StepDiagnostics> step(BlackBox& box) override;

  /// Refits the GP and updates S, M and G. Returns the point to query next.
  Selection plan(StepDiagnostics* diag = nullptr);
  /// Adds an observation to the training data.
  void observe(const Measurement& m);

  const SafeSet& safe_set() const { return safe_; }
  const std::vector<std::size_t>& maximizers() const { return maximizers_; }
  const std::vector<std::size_t>& expanders() const { return expanders_; }
  const GridPosterior& posterior() const { return post_; }
  const TargetScaler& scaler() const { return scaler_; }
  const std::vector<std::size_t>& seed_indices() const { return seed_indices_; }

 private:
  GpModel refit() const;
  void fill_posterior(const GpModel& model, std::span<const std::size_t> indices);

  SafeGpSettings settings_;
  std::shared_ptr<const Grid> grid_;
  double threshold_;
  double noise_std_;
  TargetScaler scaler_;
  std::vector<Point> x_;
  std::vector<double> y_;
  std::vector<std::size_t> seed_indices_;
  SafeSet safe_;
  GridPosterior post_;
  std::vector<std::size_t> maximizers_;
  std::vector<std::size_t> expanders_;
};

}  // namespace safebench
