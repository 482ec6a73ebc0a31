#include "safebench/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace safebench {
namespace {

std::string num(double v, int digits = 17) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

const char* colour(std::size_t i) { return kPalette[i % (sizeof kPalette / sizeof *kPalette)]; }

struct Frame {
  double width = 720, height = 440;
  double left = 70, right = 170, top = 30, bottom = 50;
  double x0, x1, y0, y1;

  double sx(double x) const {
    return left + (x - x0) / (x1 - x0) * (width - left - right);
  }
  double sy(double y) const {
    return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom);
  }
};

void axes(std::ostringstream& out, const Frame& f, const std::string& xlabel,
          const std::string& ylabel, bool x_ticks) {
  const double xa = f.left, xb = f.width - f.right;
  const double ya = f.height - f.bottom, yb = f.top;
  out << "<line x1=\"" << px(xa) << "\" y1=\"" << px(ya) << "\" x2=\"" << px(xb) << "\" y2=\""
      << px(ya) << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << px(xa) << "\" y1=\"" << px(ya) << "\" x2=\"" << px(xa) << "\" y2=\""
      << px(yb) << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double y = f.y0 + (f.y1 - f.y0) * t / 4.0;
    out << "<text x=\"" << px(xa - 6) << "\" y=\"" << px(f.sy(y) + 4)
        << "\" font-size=\"11\" text-anchor=\"end\">" << num(y, 4) << "</text>\n";
    if (x_ticks) {
      const double x = f.x0 + (f.x1 - f.x0) * t / 4.0;
      out << "<text x=\"" << px(f.sx(x)) << "\" y=\"" << px(ya + 16)
          << "\" font-size=\"11\" text-anchor=\"middle\">" << num(x, 4) << "</text>\n";
    }
  }
  out << "<text x=\"" << px((xa + xb) / 2) << "\" y=\"" << px(f.height - 10)
      << "\" font-size=\"12\" text-anchor=\"middle\">" << xlabel << "</text>\n";
  out << "<text x=\"16\" y=\"" << px((ya + yb) / 2) << "\" font-size=\"12\" text-anchor=\"middle\""
      << " transform=\"rotate(-90 16 " << px((ya + yb) / 2) << ")\">" << ylabel << "</text>\n";
}

std::string svg_open(const Frame& f) {
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px(f.width) << "\" height=\""
      << px(f.height) << "\" viewBox=\"0 0 " << px(f.width) << ' ' << px(f.height) << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  return out.str();
}

void pad_range(double& lo, double& hi) {
  if (!(hi > lo)) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double m = 0.05 * (hi - lo);
  lo -= m;
  hi += m;
}

}  // namespace

double AggregateSeries::padded_fraction(std::size_t i) const {
  return n_runs == 0 ? 0.0 : static_cast<double>(padded_count[i]) / static_cast<double>(n_runs);
}

AggregateSeries aggregate_bsf(std::span<const RunResult> runs, std::size_t length) {
  if (runs.empty()) throw std::invalid_argument("aggregate_bsf needs at least one run");
  AggregateSeries s;
  s.algorithm = runs.front().algorithm;
  s.n_runs = runs.size();
  if (length == 0) {
    for (const auto& r : runs) length = std::max(length, r.budget);
  }
  std::vector<std::vector<double>> padded;
  padded.reserve(runs.size());
  s.padded_count.assign(length, 0);
  for (const auto& r : runs) {
    if (r.records.empty()) throw std::invalid_argument("run without records cannot be aggregated");
    std::vector<double> v(length);
    for (std::size_t t = 0; t < length; ++t) {
      if (t < r.records.size()) {
        v[t] = r.records[t].bsf_true;
      } else {
        v[t] = r.records.back().bsf_true;
        ++s.padded_count[t];
      }
    }
    padded.push_back(std::move(v));
  }
  const double n = static_cast<double>(runs.size());
  s.se_undefined = runs.size() < 2;
  s.mean.resize(length);
  s.se.resize(length);
  s.padded_mask.resize(length);
  for (std::size_t t = 0; t < length; ++t) {
    double sum = 0.0;
    for (const auto& v : padded) sum += v[t];
    const double mean = sum / n;
    double sq = 0.0;
    for (const auto& v : padded) sq += (v[t] - mean) * (v[t] - mean);
    s.mean[t] = mean;
    s.se[t] = s.se_undefined ? 0.0 : std::sqrt(sq / (n - 1.0)) / std::sqrt(n);
    s.padded_mask[t] = s.padded_count[t] > 0;
  }
  return s;
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty data");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

UnsafeSummary summarize_unsafe(std::span<const RunResult> runs) {
  if (runs.empty()) throw std::invalid_argument("summarize_unsafe needs at least one run");
  UnsafeSummary s;
  s.algorithm = runs.front().algorithm;
  std::vector<double> sorted;
  double sum = 0.0;
  for (const auto& r : runs) {
    std::size_t c = 0;
    for (const auto& rec : r.records) c += rec.is_unsafe ? 1 : 0;
    s.counts.push_back(c);
    sorted.push_back(static_cast<double>(c));
    sum += static_cast<double>(c);
  }
  std::sort(sorted.begin(), sorted.end());
  s.min = sorted.front();
  s.max = sorted.back();
  s.q1 = quantile_sorted(sorted, 0.25);
  s.median = quantile_sorted(sorted, 0.5);
  s.q3 = quantile_sorted(sorted, 0.75);
  s.mean = sum / static_cast<double>(sorted.size());
  return s;
}

std::vector<std::vector<RunResult>> group_by_algorithm(std::span<const RunResult> runs) {
  std::vector<std::vector<RunResult>> groups;
  std::map<std::string, std::size_t> slot;
  for (const auto& r : runs) {
    auto [it, inserted] = slot.try_emplace(r.algorithm, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(r);
  }
  for (auto& g : groups) {
    std::stable_sort(g.begin(), g.end(), [](const RunResult& a, const RunResult& b) {
      return a.run_index < b.run_index;
    });
  }
  return groups;
}

ReportFormat parse_report_format(std::string_view text) {
  if (text == "csv") return ReportFormat::Csv;
  if (text == "svg") return ReportFormat::Svg;
  throw std::invalid_argument("unknown report format '" + std::string(text) + "'");
}

ReportMetric parse_report_metric(std::string_view text) {
  if (text == "bsf") return ReportMetric::Bsf;
  if (text == "unsafe") return ReportMetric::Unsafe;
  if (text == "trajectory") return ReportMetric::Trajectory;
  throw std::invalid_argument("unknown report metric '" + std::string(text) + "'");
}

std::string bsf_csv(std::span<const AggregateSeries> series) {
  std::ostringstream out;
  out << "algorithm,step,mean,se,padded_frac\n";
  for (const auto& s : series) {
    for (std::size_t t = 0; t < s.mean.size(); ++t) {
      out << s.algorithm << ',' << t + 1 << ',' << num(s.mean[t]) << ',' << num(s.se[t]) << ','
          << num(s.padded_fraction(t)) << '\n';
    }
  }
  return out.str();
}

std::string unsafe_csv(std::span<const UnsafeSummary> summaries) {
  std::ostringstream out;
  out << "algorithm,n_runs,min,q1,median,q3,max,mean,counts\n";
  for (const auto& s : summaries) {
    out << s.algorithm << ',' << s.counts.size() << ',' << num(s.min) << ',' << num(s.q1) << ','
        << num(s.median) << ',' << num(s.q3) << ',' << num(s.max) << ',' << num(s.mean) << ',';
    for (std::size_t i = 0; i < s.counts.size(); ++i) out << (i ? ";" : "") << s.counts[i];
    out << '\n';
  }
  return out.str();
}

std::string trajectory_csv(std::span<const RunResult> runs) {
  std::ostringstream out;
  std::size_t d = 0;
  for (const auto& r : runs) {
    if (!r.records.empty()) d = std::max(d, r.records.front().point.size());
  }
  out << "algorithm,run,step";
  for (std::size_t k = 1; k <= d; ++k) out << ",x" << k;
  out << ",y,is_unsafe\n";
  for (const auto& r : runs) {
    for (const auto& rec : r.records) {
      out << r.algorithm << ',' << r.run_index << ',' << rec.step;
      for (double c : rec.point) out << ',' << num(c);
      out << ',' << num(rec.y) << ',' << (rec.is_unsafe ? 1 : 0) << '\n';
    }
  }
  return out.str();
}

std::string bsf_svg(std::span<const AggregateSeries> series) {
  Frame f;
  std::size_t len = 1;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : series) {
    len = std::max(len, s.mean.size());
    for (std::size_t t = 0; t < s.mean.size(); ++t) {
      lo = std::min(lo, s.mean[t] - s.se[t]);
      hi = std::max(hi, s.mean[t] + s.se[t]);
    }
  }
  if (!std::isfinite(lo)) lo = hi = 0.0;
  pad_range(lo, hi);
  f.x0 = 1.0;
  f.x1 = std::max<double>(2.0, static_cast<double>(len));
  f.y0 = lo;
  f.y1 = hi;

  std::ostringstream out;
  out << svg_open(f);
  axes(out, f, "function evaluations", "mean best-so-far f", true);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    if (s.mean.empty()) continue;
    out << "<polygon fill=\"" << colour(k) << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
    for (std::size_t t = 0; t < s.mean.size(); ++t) {
      out << px(f.sx(static_cast<double>(t + 1))) << ',' << px(f.sy(s.mean[t] + s.se[t])) << ' ';
    }
    for (std::size_t t = s.mean.size(); t-- > 0;) {
      out << px(f.sx(static_cast<double>(t + 1))) << ',' << px(f.sy(s.mean[t] - s.se[t])) << ' ';
    }
    out << "\"/>\n";
    out << "<polyline fill=\"none\" stroke=\"" << colour(k) << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t t = 0; t < s.mean.size(); ++t) {
      out << px(f.sx(static_cast<double>(t + 1))) << ',' << px(f.sy(s.mean[t])) << ' ';
    }
    out << "\"/>\n";
    const double ly = f.top + 18.0 * static_cast<double>(k);
    const double lx = f.width - f.right + 12;
    out << "<line x1=\"" << px(lx) << "\" y1=\"" << px(ly) << "\" x2=\"" << px(lx + 20)
        << "\" y2=\"" << px(ly) << "\" stroke=\"" << colour(k) << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << px(lx + 26) << "\" y=\"" << px(ly + 4) << "\" font-size=\"12\">"
        << s.algorithm << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string unsafe_svg(std::span<const UnsafeSummary> summaries) {
  Frame f;
  double hi = 1.0;
  for (const auto& s : summaries) hi = std::max(hi, s.max);
  double lo = 0.0;
  pad_range(lo, hi);
  f.right = 30;
  f.x0 = 0.0;
  f.x1 = static_cast<double>(std::max<std::size_t>(summaries.size(), 1));
  f.y0 = lo;
  f.y1 = hi;

  std::ostringstream out;
  out << svg_open(f);
  axes(out, f, "algorithm", "unsafe evaluations per run", false);
  const double slot = (f.sx(1.0) - f.sx(0.0));
  for (std::size_t k = 0; k < summaries.size(); ++k) {
    const auto& s = summaries[k];
    const double cx = f.sx(static_cast<double>(k) + 0.5);
    const double half = 0.25 * slot;
    out << "<line x1=\"" << px(cx) << "\" y1=\"" << px(f.sy(s.min)) << "\" x2=\"" << px(cx)
        << "\" y2=\"" << px(f.sy(s.max)) << "\" stroke=\"black\"/>\n";
    out << "<rect x=\"" << px(cx - half) << "\" y=\"" << px(f.sy(s.q3)) << "\" width=\""
        << px(2 * half) << "\" height=\"" << px(std::max(f.sy(s.q1) - f.sy(s.q3), 0.5))
        << "\" fill=\"" << colour(k) << "\" fill-opacity=\"0.5\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << px(cx - half) << "\" y1=\"" << px(f.sy(s.median)) << "\" x2=\""
        << px(cx + half) << "\" y2=\"" << px(f.sy(s.median))
        << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
    out << "<circle cx=\"" << px(cx) << "\" cy=\"" << px(f.sy(s.mean))
        << "\" r=\"3\" fill=\"white\" stroke=\"black\"/>\n";
    out << "<text x=\"" << px(cx) << "\" y=\"" << px(f.height - f.bottom + 16)
        << "\" font-size=\"11\" text-anchor=\"middle\">" << s.algorithm << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string render_report(const ResultSet& results, ReportMetric metric, ReportFormat format) {
  const auto groups = group_by_algorithm(results.runs);
  switch (metric) {
    case ReportMetric::Bsf: {
      std::vector<AggregateSeries> series;
      for (const auto& g : groups) series.push_back(aggregate_bsf(g));
      return format == ReportFormat::Csv ? bsf_csv(series) : bsf_svg(series);
    }
    case ReportMetric::Unsafe: {
      std::vector<UnsafeSummary> sums;
      for (const auto& g : groups) sums.push_back(summarize_unsafe(g));
      return format == ReportFormat::Csv ? unsafe_csv(sums) : unsafe_svg(sums);
    }
    case ReportMetric::Trajectory:
      if (format != ReportFormat::Csv) {
        throw std::invalid_argument("trajectories are exported as CSV only");
      }
      return trajectory_csv(results.runs);
  }
  return {};
}

void emit(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << content;
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace safebench
