#include "safebench/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "safebench/errors.hpp"
#include "safebench/safegp.hpp"

namespace safebench {

using nlohmann::json;

const std::vector<std::string>& all_algorithms() {
  static const std::vector<std::string> names{"safeopt", "safe-ucb", "msafeopt",
                                              "msafe-ucb", "va-ea",    "unsafe-ea"};
  return names;
}

namespace {

template <typename T>
T get_as(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type: " + v.dump());
  }
}

std::size_t get_count(const json& v, const std::string& key) {
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError("config key '" + key + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

void set_key(ExperimentConfig& c, const std::string& key, const json& v) {
  auto& p = c.problem;
  if (key == "objective") p.objective = get_as<std::string>(v, key);
  else if (key == "dimension") p.dimension = get_count(v, key);
  else if (key == "lower") p.axis.lo = get_as<double>(v, key);
  else if (key == "upper") p.axis.hi = get_as<double>(v, key);
  else if (key == "nodes_per_axis") p.nodes_per_axis = get_count(v, key);
  else if (key == "percentile") p.percentile = get_as<double>(v, key);
  else if (key == "noise_std") p.noise_std = get_as<double>(v, key);
  else if (key == "seed_confidence") p.seed_confidence = get_as<double>(v, key);
  else if (key == "eval_budget") p.eval_budget = get_count(v, key);
  else if (key == "safety_budget") {
    if (v.is_string() && v.get<std::string>() == "unlimited") p.safety_budget.reset();
    else if (v.is_null()) p.safety_budget.reset();
    else p.safety_budget = get_count(v, key);
  } else if (key == "scenario") {
    try {
      p.scenario = parse_scenario(get_as<std::string>(v, key));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  } else if (key == "n_seeds") p.n_seeds = get_count(v, key);
  else if (key == "seeds_consume_budget") p.seeds_consume_budget = get_as<bool>(v, key);
  else if (key == "master_seed") c.master_seed = get_as<std::uint64_t>(v, key);
  else if (key == "n_runs") c.n_runs = get_count(v, key);
  else if (key == "algorithms") {
    if (v.is_string()) {
      c.algorithms.clear();
      std::stringstream ss(v.get<std::string>());
      for (std::string item; std::getline(ss, item, ',');) {
        if (!item.empty()) c.algorithms.push_back(item);
      }
    } else {
      c.algorithms = get_as<std::vector<std::string>>(v, key);
    }
  } else if (key == "kernel_lengthscale") c.kernel.lengthscale = get_as<double>(v, key);
  else if (key == "kernel_signal_variance") c.kernel.signal_variance = get_as<double>(v, key);
  else if (key == "beta") c.beta = get_as<double>(v, key);
  else if (key == "standardize_targets") c.standardize_targets = get_as<bool>(v, key);
  else if (key == "ea_crossover_prob") c.ea.crossover_prob = get_as<double>(v, key);
  else if (key == "ea_mutation_prob") c.ea.mutation_prob = get_as<double>(v, key);
  else if (key == "ea_mutation_sigma") c.ea.mutation_sigma = get_as<double>(v, key);
  else if (key == "ea_va_retry_cap") c.ea.va_retry_cap = get_count(v, key);
  else throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace

void ExperimentConfig::validate() const {
  const auto& p = problem;
  if (!ObjectiveRegistry::instance().contains(p.objective)) {
    throw ConfigError("unknown objective '" + p.objective + "'");
  }
  if (p.dimension < 1) throw ConfigError("dimension must be >= 1");
  if (!(p.axis.lo < p.axis.hi)) throw ConfigError("lower must be < upper");
  if (p.nodes_per_axis < 2) throw ConfigError("nodes_per_axis must be >= 2");
  if (!(p.percentile > 0.0 && p.percentile <= 100.0)) throw ConfigError("percentile must be in (0, 100]");
  if (!(p.noise_std >= 0.0)) throw ConfigError("noise_std must be >= 0");
  if (p.eval_budget < 1) throw ConfigError("eval_budget must be >= 1");
  if (p.n_seeds < 1) throw ConfigError("n_seeds must be >= 1");
  if (p.n_seeds > p.eval_budget && p.seeds_consume_budget) {
    throw ConfigError("n_seeds exceeds eval_budget");
  }
  if (p.scenario != Scenario::None && (p.objective != "styblinski-tang" || p.dimension != 2)) {
    throw ConfigError("seed scenarios need the 2-D styblinski-tang objective");
  }
  if (n_runs < 1) throw ConfigError("n_runs must be >= 1");
  if (!(kernel.lengthscale > 0.0) || !(kernel.signal_variance > 0.0)) {
    throw ConfigError("kernel hyperparameters must be positive");
  }
  if (!(beta >= 0.0)) throw ConfigError("beta must be >= 0");
  if (!(ea.crossover_prob >= 0.0 && ea.crossover_prob <= 1.0)) {
    throw ConfigError("ea_crossover_prob must be in [0, 1]");
  }
  if (ea.mutation_prob > 1.0) throw ConfigError("ea_mutation_prob must be <= 1");
  if (!(ea.mutation_sigma >= 0.0)) throw ConfigError("ea_mutation_sigma must be >= 0");
  if (algorithms.empty()) throw ConfigError("no algorithms selected");
  for (const auto& a : algorithms) {
    if (!is_safegp_name(a) && a != "va-ea" && a != "unsafe-ea") {
      throw ConfigError("unknown algorithm '" + a + "'");
    }
  }
}

ExperimentConfig parse_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;
  for (const auto& [key, value] : doc.items()) set_key(c, key, value);
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string config_to_json(const ExperimentConfig& c, int indent) {
  const auto& p = c.problem;
  json doc = json::object();
  doc["objective"] = p.objective;
  doc["dimension"] = p.dimension;
  doc["lower"] = p.axis.lo;
  doc["upper"] = p.axis.hi;
  doc["nodes_per_axis"] = p.nodes_per_axis;
  doc["percentile"] = p.percentile;
  doc["noise_std"] = p.noise_std;
  doc["seed_confidence"] = p.seed_confidence;
  doc["eval_budget"] = p.eval_budget;
  if (p.safety_budget) doc["safety_budget"] = *p.safety_budget;
  else doc["safety_budget"] = "unlimited";
  doc["scenario"] = std::string(to_string(p.scenario));
  doc["n_seeds"] = p.n_seeds;
  doc["seeds_consume_budget"] = p.seeds_consume_budget;
  doc["master_seed"] = c.master_seed;
  doc["n_runs"] = c.n_runs;
  doc["algorithms"] = c.algorithms;
  doc["kernel_lengthscale"] = c.kernel.lengthscale;
  doc["kernel_signal_variance"] = c.kernel.signal_variance;
  doc["beta"] = c.beta;
  doc["standardize_targets"] = c.standardize_targets;
  doc["ea_crossover_prob"] = c.ea.crossover_prob;
  doc["ea_mutation_prob"] = c.ea.mutation_prob;
  doc["ea_mutation_sigma"] = c.ea.mutation_sigma;
  doc["ea_va_retry_cap"] = c.ea.va_retry_cap;
  return doc.dump(indent);
}

void apply_override(ExperimentConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("override must look like key=value, got '" + std::string(assignment) + "'");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  json value = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) value = text;
  set_key(config, key, value);
}

}  // namespace safebench
