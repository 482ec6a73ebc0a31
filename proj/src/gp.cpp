#include "safebench/gp.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "safebench/errors.hpp"

namespace safebench {

void KernelSpec::validate() const {
  if (!(lengthscale > 0.0)) throw std::invalid_argument("kernel lengthscale must be > 0");
  if (!(signal_variance > 0.0)) throw std::invalid_argument("kernel signal variance must be > 0");
}

double KernelSpec::operator()(const Eigen::Ref<const Eigen::VectorXd>& a,
                              const Eigen::Ref<const Eigen::VectorXd>& b) const {
  const double sq = (a - b).squaredNorm();
  return signal_variance * std::exp(-0.5 * sq / (lengthscale * lengthscale));
}

Eigen::MatrixXd KernelSpec::cross(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) const {
  const Eigen::Index d = a.rows();
  const double inv = -0.5 / (lengthscale * lengthscale);
  Eigen::MatrixXd k(a.cols(), b.cols());
  for (Eigen::Index j = 0; j < b.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.cols(); ++i) {
      double sq = 0.0;
      for (Eigen::Index r = 0; r < d; ++r) {
        const double e = a(r, i) - b(r, j);
        sq += e * e;
      }
      k(i, j) = signal_variance * std::exp(inv * sq);
    }
  }
  return k;
}

GpModel GpModel::fit(const KernelSpec& kernel, double noise_variance, const Eigen::MatrixXd& points,
                     const Eigen::VectorXd& targets, double prior_mean) {
  kernel.validate();
  if (!(noise_variance >= 0.0)) throw std::invalid_argument("noise variance must be >= 0");
  if (points.cols() != targets.size()) {
    throw std::invalid_argument("gp fit: point and target counts differ");
  }
  if (!targets.allFinite()) throw std::invalid_argument("gp fit: non-finite target");

  GpModel m;
  m.kernel_ = kernel;
  m.noise_variance_ = noise_variance;
  m.prior_mean_ = prior_mean;
  m.points_ = points;
  m.targets_ = targets;
  const Eigen::Index n = targets.size();
  if (n == 0) return m;

  // Fill the upper triangle and mirror it so the Gram matrix is exactly symmetric.
  Eigen::MatrixXd gram(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      gram(i, j) = kernel(points.col(i), points.col(j));
      gram(j, i) = gram(i, j);
    }
  }
  gram.diagonal().array() += noise_variance;

  double jitter = 0.0;
  double last_tried = 0.0;
  while (true) {
    Eigen::MatrixXd a = gram;
    a.diagonal().array() += jitter;
    m.llt_.compute(a);
    if (m.llt_.info() == Eigen::Success) break;
    last_tried = jitter;
    jitter = jitter == 0.0 ? 1e-10 : jitter * 10.0;
    if (jitter > 1e-6 * (1.0 + 1e-9)) {
      std::ostringstream msg;
      msg << "gp fit: covariance factorization failed with " << n
          << " points after jitter escalation up to " << last_tried;
      throw NumericalError(msg.str());
    }
  }
  m.jitter_ = jitter;
  m.alpha_ = m.llt_.solve((targets.array() - prior_mean).matrix());
  return m;
}

GpModel GpModel::fit(const KernelSpec& kernel, double noise_variance, std::span<const Point> points,
                     std::span<const double> targets, double prior_mean) {
  const Eigen::Index d = points.empty() ? 0 : static_cast<Eigen::Index>(points.front().size());
  Eigen::MatrixXd x(d, static_cast<Eigen::Index>(points.size()));
  for (std::size_t j = 0; j < points.size(); ++j) {
    if (static_cast<Eigen::Index>(points[j].size()) != d) {
      throw std::invalid_argument("gp fit: inconsistent point dimensions");
    }
    for (Eigen::Index r = 0; r < d; ++r) x(r, static_cast<Eigen::Index>(j)) = points[j][r];
  }
  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(targets.data(),
                                                         static_cast<Eigen::Index>(targets.size()));
  return fit(kernel, noise_variance, x, y, prior_mean);
}

Eigen::MatrixXd GpModel::factor() const {
  if (targets_.size() == 0) return {};
  return llt_.matrixL();
}

PosteriorMoments GpModel::posterior(const Eigen::MatrixXd& queries) const {
  const Eigen::Index m = queries.cols();
  PosteriorMoments out;
  if (targets_.size() == 0) {
    out.mean = Eigen::VectorXd::Constant(m, prior_mean_);
    out.stddev = Eigen::VectorXd::Constant(m, std::sqrt(kernel_.signal_variance));
    return out;
  }
  const Eigen::MatrixXd k = kernel_.cross(points_, queries);
  out.mean = (k.transpose() * alpha_).array() + prior_mean_;
  const Eigen::MatrixXd v = llt_.matrixL().solve(k);
  const Eigen::ArrayXd var = kernel_.signal_variance - v.colwise().squaredNorm().transpose().array();
  out.stddev = var.max(0.0).sqrt().matrix();
  return out;
}

Eigen::MatrixXd GpModel::posterior_covariance(const Eigen::MatrixXd& a,
                                              const Eigen::MatrixXd& b) const {
  Eigen::MatrixXd prior = kernel_.cross(a, b);
  if (targets_.size() == 0) return prior;
  const Eigen::MatrixXd va = llt_.matrixL().solve(kernel_.cross(points_, a));
  const Eigen::MatrixXd vb = llt_.matrixL().solve(kernel_.cross(points_, b));
  return prior - va.transpose() * vb;
}

ConfidenceBounds confidence_bounds(const PosteriorMoments& moments, double beta) {
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be >= 0");
  ConfidenceBounds cb;
  cb.beta = beta;
  cb.lower = moments.mean - beta * moments.stddev;
  cb.upper = moments.mean + beta * moments.stddev;
  return cb;
}

ConfidenceBounds confidence_bounds(const GpModel& model, const Eigen::MatrixXd& queries,
                                   double beta) {
  return confidence_bounds(model.posterior(queries), beta);
}

TargetScaler TargetScaler::from_samples(std::span<const double> samples) {
  TargetScaler s;
  if (samples.empty()) return s;
  double sum = 0.0;
  for (double v : samples) sum += v;
  s.offset = sum / static_cast<double>(samples.size());
  if (samples.size() < 2) return s;
  double sq = 0.0;
  for (double v : samples) sq += (v - s.offset) * (v - s.offset);
  const double sd = std::sqrt(sq / static_cast<double>(samples.size() - 1));
  if (sd >= 1e-8) s.scale = sd;
  return s;
}

}  // namespace safebench
