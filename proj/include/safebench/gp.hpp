#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "safebench/problems.hpp"

namespace safebench {

/// Isotropic squared-exponential kernel:
///   k(a, b) = s^2 * exp(-||a - b||^2 / (2 l^2))
struct KernelSpec {
  double lengthscale = 1.0;
  double signal_variance = 4.0;

  void validate() const;
  double operator()(const Eigen::Ref<const Eigen::VectorXd>& a,
                    const Eigen::Ref<const Eigen::VectorXd>& b) const;
  /// Cross-covariance between the columns of a (d x n) and b (d x m).
  Eigen::MatrixXd cross(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) const;
};

struct PosteriorMoments {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;
};

/// l = mu - beta*sigma, u = mu + beta*sigma, pointwise.
struct ConfidenceBounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  double beta = 2.0;
};

/// Exact GP regression posterior. Immutable after fit.
class GpModel {
 public:
  /// Factorizes K + noise_variance*I. When the Cholesky factorization fails,
  /// jitter 1e-10, 1e-9, ..., 1e-6 is added to the diagonal in turn; if all
  /// fail a NumericalError is thrown.
  static GpModel fit(const KernelSpec& kernel, double noise_variance, const Eigen::MatrixXd& points,
                     const Eigen::VectorXd& targets, double prior_mean = 0.0);
  static GpModel fit(const KernelSpec& kernel, double noise_variance, std::span<const Point> points,
                     std::span<const double> targets, double prior_mean = 0.0);

  const KernelSpec& kernel() const { return kernel_; }
  double noise_variance() const { return noise_variance_; }
  double prior_mean() const { return prior_mean_; }
  double jitter() const { return jitter_; }
  std::size_t size() const { return static_cast<std::size_t>(targets_.size()); }
  const Eigen::MatrixXd& train_points() const { return points_; }
  const Eigen::VectorXd& train_targets() const { return targets_; }
  /// Lower-triangular L with L L^T = K + (noise_variance + jitter) I.
  Eigen::MatrixXd factor() const;

  /// Posterior mean and standard deviation at each column of queries (d x m).
  PosteriorMoments posterior(const Eigen::MatrixXd& queries) const;
  /// Posterior covariance between the columns of a and b.
  Eigen::MatrixXd posterior_covariance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) const;

 private:
  GpModel() = default;

  KernelSpec kernel_;
  double noise_variance_ = 0.0;
  double prior_mean_ = 0.0;
  double jitter_ = 0.0;
  Eigen::MatrixXd points_;
  Eigen::VectorXd targets_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;  // (K + s I)^-1 (y - m0)
};

/// Throws std::invalid_argument for negative beta.
ConfidenceBounds confidence_bounds(const PosteriorMoments& moments, double beta);
ConfidenceBounds confidence_bounds(const GpModel& model, const Eigen::MatrixXd& queries,
                                   double beta);

/// Affine map between observed values and the standardized scale the GP is
/// fitted on: model = (y - offset) / scale.
struct TargetScaler {
  double offset = 0.0;
  double scale = 1.0;

  /// Mean and sample standard deviation of the samples. A spread below
  /// 1e-8 (or a single sample) falls back to scale 1.
  static TargetScaler from_samples(std::span<const double> samples);

  double to_model(double y) const { return (y - offset) / scale; }
  double from_model(double v) const { return offset + scale * v; }
};

}  // namespace safebench
