#include "safebench/safegp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "safebench/errors.hpp"

namespace safebench {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double node_distance(const Eigen::MatrixXd& pts, std::size_t a, std::size_t b) {
  double sq = 0.0;
  for (Eigen::Index r = 0; r < pts.rows(); ++r) {
    const double e = pts(r, static_cast<Eigen::Index>(a)) - pts(r, static_cast<Eigen::Index>(b));
    sq += e * e;
  }
  return std::sqrt(sq);
}

std::span<const double> column(const Grid& grid, std::size_t i) {
  const auto col = grid.points().col(static_cast<Eigen::Index>(i));
  return {col.data(), static_cast<std::size_t>(col.size())};
}

Eigen::MatrixXd gather(const Grid& grid, std::span<const std::size_t> indices) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(grid.dimension()),
                      static_cast<Eigen::Index>(indices.size()));
  for (std::size_t k = 0; k < indices.size(); ++k) {
    out.col(static_cast<Eigen::Index>(k)) = grid.points().col(static_cast<Eigen::Index>(indices[k]));
  }
  return out;
}

}  // namespace

std::string_view to_string(SafeGpVariant v) {
  switch (v) {
    case SafeGpVariant::SafeOpt: return "safeopt";
    case SafeGpVariant::SafeUcb: return "safe-ucb";
    case SafeGpVariant::MSafeOpt: return "msafeopt";
    case SafeGpVariant::MSafeUcb: return "msafe-ucb";
  }
  return "safeopt";
}

SafeGpVariant parse_safegp_variant(std::string_view name) {
  for (auto v : {SafeGpVariant::SafeOpt, SafeGpVariant::SafeUcb, SafeGpVariant::MSafeOpt,
                 SafeGpVariant::MSafeUcb}) {
    if (name == to_string(v)) return v;
  }
  throw std::invalid_argument("unknown safe GP variant '" + std::string(name) + "'");
}

bool is_safegp_name(std::string_view name) {
  return name == "safeopt" || name == "safe-ucb" || name == "msafeopt" || name == "msafe-ucb";
}

SafeSet SafeSet::from_indices(std::size_t grid_size, std::span<const std::size_t> indices) {
  SafeSet s;
  s.mask.assign(grid_size, 0);
  for (std::size_t i : indices) {
    if (i >= grid_size) throw std::out_of_range("safe set index outside the grid");
    s.mask[i] = 1;
  }
  return s;
}

std::size_t SafeSet::count() const {
  std::size_t n = 0;
  for (auto m : mask) n += m;
  return n;
}

std::vector<std::size_t> SafeSet::members() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) out.push_back(i);
  }
  return out;
}

SafeSet update_safe_set_lipschitz(const SafeSet& prev, std::span<const double> lower, double lipschitz,
                                  const Grid& grid, double threshold) {
  if (prev.size() != grid.size() || lower.size() != grid.size()) {
    throw std::invalid_argument("safe set, bounds and grid sizes differ");
  }
  if (!(lipschitz >= 0.0)) throw std::invalid_argument("Lipschitz constant must be >= 0");
  SafeSet next;
  next.generation = prev.generation + 1;
  next.mask.assign(grid.size(), 0);
  const auto& pts = grid.points();
  for (std::size_t s = 0; s < prev.size(); ++s) {
    if (!prev.contains(s)) continue;
    const double ls = lower[s];
    // Members below h cannot certify anything, not even themselves.
    if (!(ls >= threshold)) continue;
    if (lipschitz == 0.0) {
      next.mask.assign(grid.size(), 1);
      return next;
    }
    const double radius = (ls - threshold) / lipschitz;
    grid.for_each_in_box(column(grid, s), radius, [&](std::size_t i) {
      if (next.mask[i]) return;
      if (ls - lipschitz * node_distance(pts, s, i) >= threshold) next.mask[i] = 1;
    });
  }
  return next;
}

SafeSet update_safe_set_gp(const SafeSet& prev, std::span<const double> lower, double threshold) {
  if (lower.size() != prev.size()) throw std::invalid_argument("safe set and bounds sizes differ");
  SafeSet next;
  next.generation = prev.generation + 1;
  next.mask = prev.mask;
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (lower[i] >= threshold) next.mask[i] = 1;
  }
  return next;
}

std::vector<std::size_t> compute_maximizers(const SafeSet& safe, std::span<const double> lower,
                                            std::span<const double> upper) {
  double best_lower = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < safe.size(); ++i) {
    if (safe.contains(i) && lower[i] > best_lower) best_lower = lower[i];
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < safe.size(); ++i) {
    if (safe.contains(i) && upper[i] >= best_lower) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> lipschitz_expanders(const SafeSet& safe, std::span<const double> upper,
                                             double lipschitz, const Grid& grid, double threshold) {
  std::vector<std::size_t> out;
  const std::size_t n_safe = safe.count();
  if (n_safe == safe.size()) return out;
  const auto& pts = grid.points();
  for (std::size_t x = 0; x < safe.size(); ++x) {
    if (!safe.contains(x)) continue;
    const double ux = upper[x];
    if (!(ux >= threshold)) continue;
    if (lipschitz == 0.0) {
      out.push_back(x);
      continue;
    }
    bool found = false;
    grid.for_each_in_box(column(grid, x), (ux - threshold) / lipschitz, [&](std::size_t j) {
      if (found || safe.contains(j)) return;
      if (ux - lipschitz * node_distance(pts, x, j) >= threshold) found = true;
    });
    if (found) out.push_back(x);
  }
  return out;
}

std::vector<std::size_t> safe_boundary(const SafeSet& safe, const Grid& grid) {
  std::vector<std::size_t> out;
  const std::size_t d = grid.dimension();
  for (std::size_t i = 0; i < safe.size(); ++i) {
    if (!safe.contains(i)) continue;
    const auto idx = grid.multi_index(i);
    // Enumerate offsets in {-1, 0, 1}^d.
    std::vector<int> off(d, -1);
    bool on_boundary = false;
    while (!on_boundary) {
      bool zero = true;
      bool inside = true;
      std::size_t flat = 0;
      for (std::size_t a = 0; a < d; ++a) {
        if (off[a] != 0) zero = false;
        const auto node = static_cast<long long>(idx[a]) + off[a];
        if (node < 0 || node >= static_cast<long long>(grid.nodes(a))) {
          inside = false;
          break;
        }
        flat += static_cast<std::size_t>(node) * grid.stride(a);
      }
      if (!zero && inside && !safe.contains(flat)) on_boundary = true;
      std::size_t a = 0;
      while (a < d && off[a] == 1) off[a++] = -1;
      if (a == d) break;
      ++off[a];
    }
    if (on_boundary) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> gp_expanders(const SafeSet& safe, std::span<const std::size_t> candidates,
                                      const GridPosterior& post, const GpModel& model,
                                      const TargetScaler& scaler, const Grid& grid, double beta,
                                      double threshold) {
  std::vector<std::size_t> out;
  std::vector<std::size_t> usable;
  for (std::size_t c : candidates) {
    if (!safe.contains(c)) continue;
    if (post.stddev[c] > 1e-12 * scaler.scale) usable.push_back(c);
  }
  std::vector<std::size_t> targets;
  for (std::size_t j = 0; j < safe.size(); ++j) {
    if (!safe.contains(j) && post.upper[j] >= threshold) targets.push_back(j);
  }
  if (usable.empty() || targets.empty()) return out;

  const Eigen::MatrixXd cov = model.posterior_covariance(gather(grid, usable), gather(grid, targets)) *
                              (scaler.scale * scaler.scale);
  for (std::size_t k = 0; k < usable.size(); ++k) {
    const std::size_t x = usable[k];
    const double sx = post.stddev[x];
    for (std::size_t t = 0; t < targets.size(); ++t) {
      const std::size_t j = targets[t];
      const double c = cov(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(t));
      const double mean = post.mean[j] + beta * c / sx;
      const double var = post.stddev[j] * post.stddev[j] - (c * c) / (sx * sx);
      const double lower = mean - beta * std::sqrt(std::max(var, 0.0));
      if (lower >= threshold) {
        out.push_back(x);
        break;
      }
    }
  }
  return out;
}

Selection select_next(SafeGpVariant variant, const SafeSet& safe,
                      std::span<const std::size_t> maximizers,
                      std::span<const std::size_t> expanders, std::span<const double> lower,
                      std::span<const double> upper) {
  const auto members = safe.members();
  if (members.empty()) throw StalledAlgorithm("safe set is empty");

  auto argmax = [](std::span<const std::size_t> pool, auto&& score) {
    std::size_t best = pool.front();
    double best_score = score(best);
    for (std::size_t i : pool) {
      const double s = score(i);
      if (s > best_score || (s == best_score && i < best)) {
        best = i;
        best_score = s;
      }
    }
    return best;
  };

  if (!uses_expanders(variant)) {
    return {argmax(members, [&](std::size_t i) { return upper[i]; }), false};
  }
  std::vector<std::size_t> pool(maximizers.begin(), maximizers.end());
  pool.insert(pool.end(), expanders.begin(), expanders.end());
  const auto width = [&](std::size_t i) { return upper[i] - lower[i]; };
  if (pool.empty()) return {argmax(members, width), true};
  return {argmax(pool, width), false};
}

SafeGpOptimizer::SafeGpOptimizer(SafeGpSettings settings, std::shared_ptr<const Grid> grid,
                                 double threshold, double noise_std)
    : settings_(settings), grid_(std::move(grid)), threshold_(threshold), noise_std_(noise_std) {
  if (!grid_) throw std::invalid_argument("safe GP optimizer needs a grid");
  settings_.kernel.validate();
  if (uses_lipschitz(settings_.variant) && !(settings_.lipschitz > 0.0)) {
    throw std::invalid_argument(std::string(to_string(settings_.variant)) +
                                " needs a positive Lipschitz constant");
  }
  if (!(settings_.beta >= 0.0)) throw std::invalid_argument("beta must be >= 0");
}

void SafeGpOptimizer::initialize(std::span<const Measurement> seeds) {
  if (seeds.empty()) throw std::invalid_argument("safe GP optimizers need at least one seed");
  x_.clear();
  y_.clear();
  seed_indices_.clear();
  for (const auto& m : seeds) {
    seed_indices_.push_back(grid_->nearest_index(m.point));
    observe(m);
  }
  scaler_ = settings_.standardize ? TargetScaler::from_samples(y_) : TargetScaler{};
  safe_ = SafeSet::from_indices(grid_->size(), seed_indices_);
  const std::size_t n = grid_->size();
  post_ = {std::vector<double>(n, kNaN), std::vector<double>(n, kNaN),
           std::vector<double>(n, kNaN), std::vector<double>(n, kNaN)};
}

void SafeGpOptimizer::observe(const Measurement& m) {
  x_.push_back(m.point);
  y_.push_back(m.y);
}

GpModel SafeGpOptimizer::refit() const {
  std::vector<double> targets(y_.size());
  for (std::size_t i = 0; i < y_.size(); ++i) targets[i] = scaler_.to_model(y_[i]);
  const double sn = noise_std_ / scaler_.scale;
  return GpModel::fit(settings_.kernel, sn * sn, x_, targets, 0.0);
}

void SafeGpOptimizer::fill_posterior(const GpModel& model, std::span<const std::size_t> indices) {
  if (indices.empty()) return;
  const PosteriorMoments pm = model.posterior(gather(*grid_, indices));
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const std::size_t i = indices[k];
    const auto e = static_cast<Eigen::Index>(k);
    post_.mean[i] = scaler_.from_model(pm.mean(e));
    post_.stddev[i] = scaler_.scale * pm.stddev(e);
    post_.lower[i] = post_.mean[i] - settings_.beta * post_.stddev[i];
    post_.upper[i] = post_.mean[i] + settings_.beta * post_.stddev[i];
  }
}

Selection SafeGpOptimizer::plan(StepDiagnostics* diag) {
  if (x_.empty()) throw std::logic_error("safe GP optimizer used before initialize()");
  const GpModel model = refit();
  const std::size_t n = grid_->size();
  for (auto* v : {&post_.mean, &post_.stddev, &post_.lower, &post_.upper}) v->assign(n, kNaN);

  if (uses_lipschitz(settings_.variant)) {
    const auto prev_members = safe_.members();
    fill_posterior(model, prev_members);
    SafeSet next =
        update_safe_set_lipschitz(safe_, post_.lower, settings_.lipschitz, *grid_, threshold_);
    // Keep previously certified points so the set never shrinks.
    for (std::size_t i = 0; i < n; ++i) next.mask[i] |= safe_.mask[i];
    std::vector<std::size_t> fresh;
    for (std::size_t i = 0; i < n; ++i) {
      if (next.mask[i] && !safe_.mask[i]) fresh.push_back(i);
    }
    fill_posterior(model, fresh);
    safe_ = std::move(next);
  } else {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    fill_posterior(model, all);
    safe_ = update_safe_set_gp(safe_, post_.lower, threshold_);
  }

  maximizers_.clear();
  expanders_.clear();
  if (uses_expanders(settings_.variant)) {
    maximizers_ = compute_maximizers(safe_, post_.lower, post_.upper);
    if (uses_lipschitz(settings_.variant)) {
      expanders_ =
          lipschitz_expanders(safe_, post_.upper, settings_.lipschitz, *grid_, threshold_);
    } else {
      const auto boundary = safe_boundary(safe_, *grid_);
      expanders_ = gp_expanders(safe_, boundary, post_, model, scaler_, *grid_, settings_.beta,
                                threshold_);
    }
  }
  const Selection sel =
      select_next(settings_.variant, safe_, maximizers_, expanders_, post_.lower, post_.upper);
  if (diag) {
    diag->safe_set_size = safe_.count();
    diag->maximizers = maximizers_.size();
    diag->expanders = expanders_.size();
    diag->fallback = sel.fallback;
  }
  return sel;
}

std::vector<StepDiagnostics> SafeGpOptimizer::step(BlackBox& box) {
  if (!box.running()) return {};
  StepDiagnostics diag;
  const Selection sel = plan(&diag);
  const Measurement m = box.query(grid_->point(sel.index));
  observe(m);
  return {diag};
}

}  // namespace safebench
