#include "safebench/persistence.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "safebench/errors.hpp"

namespace safebench {

using nlohmann::json;

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string item; std::getline(ss, item, sep);) out.push_back(item);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::runtime_error("malformed number '" + s + "'");
  return v;
}

std::size_t parse_size(const std::string& s) {
  std::size_t used = 0;
  const unsigned long long v = std::stoull(s, &used);
  if (used != s.size()) throw std::runtime_error("malformed integer '" + s + "'");
  return static_cast<std::size_t>(v);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string diagnostics_file_name(const RunResult& r) {
  return r.algorithm + "_run" + std::to_string(r.run_index) + "_diag.csv";
}

}  // namespace

std::string run_file_name(const RunResult& r) {
  return r.algorithm + "_run" + std::to_string(r.run_index) + ".csv";
}

void write_run_csv(std::ostream& out, const RunResult& result, std::size_t dimension) {
  out << "step";
  for (std::size_t k = 1; k <= dimension; ++k) out << ",x" << k;
  out << ",y,f_true,is_unsafe,bsf_true\n";
  for (const auto& r : result.records) {
    out << r.step;
    for (double c : r.point) out << ',' << fmt_double(c);
    out << ',' << fmt_double(r.y) << ',' << fmt_double(r.f_true) << ',' << (r.is_unsafe ? 1 : 0)
        << ',' << fmt_double(r.bsf_true) << '\n';
  }
}

void write_diagnostics_csv(std::ostream& out, const RunResult& result) {
  out << "step,safe_set_size,maximizers,expanders,fallback,forced_accept,rejected\n";
  for (const auto& r : result.records) {
    const auto& d = r.diag;
    out << r.step << ',' << d.safe_set_size << ',' << d.maximizers << ',' << d.expanders << ','
        << (d.fallback ? 1 : 0) << ',' << (d.forced_accept ? 1 : 0) << ',' << d.rejected << '\n';
  }
}

std::vector<StepRecord> read_run_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("run CSV is empty");
  const auto header = split(line, ',');
  if (header.size() < 6 || header.front() != "step" || header.back() != "bsf_true") {
    throw std::runtime_error("run CSV has an unexpected header: " + line);
  }
  const std::size_t d = header.size() - 5;
  std::vector<StepRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != header.size()) throw std::runtime_error("run CSV row has the wrong width");
    StepRecord r;
    r.step = parse_size(f[0]);
    for (std::size_t k = 0; k < d; ++k) r.point.push_back(parse_double(f[1 + k]));
    r.y = parse_double(f[1 + d]);
    r.f_true = parse_double(f[2 + d]);
    r.is_unsafe = parse_size(f[3 + d]) != 0;
    r.bsf_true = parse_double(f[4 + d]);
    out.push_back(std::move(r));
  }
  return out;
}

void read_diagnostics_csv(std::istream& in, std::vector<StepRecord>& records) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("diagnostics CSV is empty");
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 7 || row >= records.size()) {
      throw std::runtime_error("diagnostics CSV does not match its run");
    }
    auto& d = records[row++].diag;
    d.safe_set_size = parse_size(f[1]);
    d.maximizers = parse_size(f[2]);
    d.expanders = parse_size(f[3]);
    d.fallback = parse_size(f[4]) != 0;
    d.forced_accept = parse_size(f[5]) != 0;
    d.rejected = parse_size(f[6]);
  }
}

void write_benchmark(const std::filesystem::path& dir, const BenchmarkPlan& plan,
                     const SafeOpProblem& problem, const std::vector<RunResult>& results) {
  std::filesystem::create_directories(dir);
  const std::size_t d = problem.objective().dimension();

  json manifest;
  manifest["format_version"] = 1;
  manifest["tool_version"] = kToolVersion;
  manifest["config"] = json::parse(config_to_json(plan.config));
  manifest["problem"] = {
      {"objective", problem.objective().name()},
      {"dimension", d},
      {"grid_size", problem.grid().size()},
      {"threshold", problem.threshold()},
      {"lipschitz", problem.lipschitz()},
      {"eligible_seed_points", eligible_seed_indices(problem, problem.scenario()).size()},
  };
  manifest["conventions"] = {
      {"bsf", "best true objective over all evaluated points, unsafe ones included"},
      {"unsafe", "observed noisy value below the threshold"},
      {"safe_set", "unioned with the previous safe set every step (all safe GP variants)"},
      {"padding", "early-terminated runs are carried forward by the report"},
  };
  manifest["seed_sets"] = plan.seed_sets;

  json runs = json::array();
  json timing = json::array();
  for (const auto& r : results) {
    {
      std::ostringstream csv;
      write_run_csv(csv, r, d);
      write_text(dir / run_file_name(r), csv.str());
    }
    {
      std::ostringstream csv;
      write_diagnostics_csv(csv, r);
      write_text(dir / diagnostics_file_name(r), csv.str());
    }
    runs.push_back({{"algorithm", r.algorithm},
                    {"run_index", r.run_index},
                    {"file", run_file_name(r)},
                    {"diagnostics_file", diagnostics_file_name(r)},
                    {"termination", std::string(to_string(r.termination))},
                    {"message", r.message},
                    {"records", r.records.size()},
                    {"budget", r.budget}});
    timing.push_back({{"algorithm", r.algorithm},
                      {"run_index", r.run_index},
                      {"wall_seconds", r.wall_seconds}});
  }
  manifest["runs"] = std::move(runs);
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  write_text(dir / "timing.json", timing.dump(2) + "\n");
}

ResultSet load_results(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw std::runtime_error("no manifest.json in " + dir.string());
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("malformed manifest.json: ") + e.what());
  }
  ResultSet set;
  set.config = parse_config(manifest.at("config").dump());
  set.threshold = manifest.at("problem").at("threshold").get<double>();
  set.dimension = manifest.at("problem").at("dimension").get<std::size_t>();
  for (const auto& entry : manifest.at("runs")) {
    RunResult r;
    r.algorithm = entry.at("algorithm").get<std::string>();
    r.run_index = entry.at("run_index").get<std::size_t>();
    r.termination = parse_termination(entry.at("termination").get<std::string>());
    r.message = entry.at("message").get<std::string>();
    r.budget = entry.at("budget").get<std::size_t>();
    std::ifstream csv(dir / entry.at("file").get<std::string>());
    if (!csv) throw std::runtime_error("missing run file " + entry.at("file").get<std::string>());
    r.records = read_run_csv(csv);
    if (entry.contains("diagnostics_file")) {
      std::ifstream diag(dir / entry.at("diagnostics_file").get<std::string>());
      if (diag) read_diagnostics_csv(diag, r.records);
    }
    set.runs.push_back(std::move(r));
  }
  return set;
}

}  // namespace safebench
