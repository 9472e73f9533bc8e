#include "adsim/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

namespace adsim {

ProblemKind problem_kind_from_string(const std::string& s) {
  if (s == "quadratic") return ProblemKind::Quadratic;
  if (s == "logreg_synthetic") return ProblemKind::LogRegSynthetic;
  if (s == "logreg_idx") return ProblemKind::LogRegIdx;
  throw ConfigError("unknown problem kind: " + s);
}

std::string to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::Quadratic: return "quadratic";
    case ProblemKind::LogRegSynthetic: return "logreg_synthetic";
    case ProblemKind::LogRegIdx: return "logreg_idx";
  }
  return "?";
}

DelayCase delay_case_from_string(const std::string& s) {
  if (s == "base") return DelayCase::Base;
  if (s == "slow_comm") return DelayCase::SlowComm;
  if (s == "comp_straggler") return DelayCase::CompStraggler;
  if (s == "comm_straggler") return DelayCase::CommStraggler;
  if (s == "combined_straggler") return DelayCase::CombinedStraggler;
  if (s == "custom") return DelayCase::Custom;
  throw ConfigError("unknown delay case: " + s);
}

std::string to_string(DelayCase c) {
  switch (c) {
    case DelayCase::Base: return "base";
    case DelayCase::SlowComm: return "slow_comm";
    case DelayCase::CompStraggler: return "comp_straggler";
    case DelayCase::CommStraggler: return "comm_straggler";
    case DelayCase::CombinedStraggler: return "combined_straggler";
    case DelayCase::Custom: return "custom";
  }
  return "?";
}

std::vector<std::string> all_delay_case_names() {
  return {"base", "slow_comm", "comp_straggler", "comm_straggler", "combined_straggler"};
}

void ExperimentConfig::validate() const {
  if (n_agents < 1) throw ConfigError("n_agents must be >= 1");
  if (dim < 1) throw ConfigError("dim must be >= 1");
  if (condition < 1.0) throw ConfigError("condition must be >= 1");
  if (alpha <= 0.0) throw ConfigError("alpha must be positive");
  if (beta.has_value()) {
    if (*beta <= 0.0) throw ConfigError("beta must be positive");
    if (*beta > alpha)
      throw ConfigError(
          "beta > alpha rejected: the reweighted mixing diagonal would go "
          "negative for small self-weights");
  }
  if (algorithm == AlgorithmKind::AdsgdDoubleStep && !beta.has_value())
    throw ConfigError("adsgd_double requires beta");
  if (heterogeneity < 0.0 || heterogeneity > 1.0)
    throw ConfigError("heterogeneity must lie in [0, 1]");
  if (max_sim_time.has_value() == max_updates.has_value())
    throw ConfigError("exactly one of max_sim_time / max_updates must be set");
  if (max_sim_time.has_value() && !(*max_sim_time > 0.0))
    throw ConfigError("max_sim_time must be positive");
  if (max_updates.has_value() && *max_updates == 0)
    throw ConfigError("max_updates must be positive");
  if (seeds.empty()) throw ConfigError("seeds must be nonempty");
  if (straggler_id < 0 || straggler_id >= n_agents)
    throw ConfigError("straggler_id out of range");
  if (comm_slowdown <= 0.0 || straggler_factor <= 0.0)
    throw ConfigError("delay multipliers must be positive");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (reg_weight < 0.0) throw ConfigError("reg_weight must be >= 0");
  if (problem == ProblemKind::LogRegIdx && (idx_images.empty() || idx_labels.empty()))
    throw ConfigError("logreg_idx requires idx_images and idx_labels");
  if (topology == TopologyKind::Custom && topology_file.empty())
    throw ConfigError("custom topology requires topology_file");
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::uint64_t> parse_seed_list(const std::string& value) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(value);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell = trim(cell);
    if (!cell.empty()) seeds.push_back(std::stoull(cell));
  }
  return seeds;
}

// Single table drives parsing, serialization and hashing, so the three can
// never drift apart.
struct Field {
  std::string key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

std::string fmt_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const std::vector<Field>& field_table() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    auto add = [&f](std::string key, auto setter, auto getter) {
      f.push_back(Field{std::move(key), setter, getter});
    };
    add("problem",
        [](ExperimentConfig& c, const std::string& v) { c.problem = problem_kind_from_string(v); },
        [](const ExperimentConfig& c) { return to_string(c.problem); });
    add("dim", [](ExperimentConfig& c, const std::string& v) { c.dim = std::stoi(v); },
        [](const ExperimentConfig& c) { return std::to_string(c.dim); });
    add("condition",
        [](ExperimentConfig& c, const std::string& v) { c.condition = std::stod(v); },
        [](const ExperimentConfig& c) { return fmt_double(c.condition); });
    add("noise_sigma2",
        [](ExperimentConfig& c, const std::string& v) { c.noise_sigma2 = std::stod(v); },
        [](const ExperimentConfig& c) { return fmt_double(c.noise_sigma2); });
    add("shared_minimizer",
        [](ExperimentConfig& c, const std::string& v) { c.shared_minimizer = (v == "true" || v == "1"); },
        [](const ExperimentConfig& c) { return c.shared_minimizer ? "true" : "false"; });
    add("n_samples",
        [](ExperimentConfig& c, const std::string& v) { c.n_samples = std::stoi(v); },
        [](const ExperimentConfig& c) { return std::to_string(c.n_samples); });
    add("blob_separation",
        [](ExperimentConfig& c, const std::string& v) { c.blob_separation = std::stod(v); },
        [](const ExperimentConfig& c) { return fmt_double(c.blob_separation); });
    add("reg_weight",
        [](ExperimentConfig& c, const std::string& v) { c.reg_weight = std::stod(v); },
        [](const ExperimentConfig& c) { return fmt_double(c.reg_weight); });
    add("batch_size",
        [](ExperimentConfig& c, const std::string& v) { c.batch_size = std::stoi(v); },
        [](const ExperimentConfig& c) { return std::to_string(c.batch_size); });
    add("idx_images", [](ExperimentConfig& c, const std::string& v) { c.idx_images = v; },
        [](const ExperimentConfig& c) { return c.idx_images; });
    add("idx_labels", [](ExperimentConfig& c, const std::string& v) { c.idx_labels = v; },
        [](const ExperimentConfig& c) { return c.idx_labels; });
    add("max_dataset",
        [](ExperimentConfig& c, const std::string& v) { c.max_dataset = std::stoi(v); },
        [](const ExperimentConfig& c) { return std::to_string(c.max_dataset); });
    add("data_seed",
        [](ExperimentConfig& c, const std::string& v) { c.data_seed = std::stoull(v); },
        [](const ExperimentConfig& c) { return std::to_string(c.data_seed); });
    add("n_agents",
        [](ExperimentConfig& c, const std::string& v) { c.n_agents = std::stoi(v); },
        [](const ExperimentConfig& c) { return std::to_string(c.n_agents); });
    add("topology",
        [](ExperimentConfig& c, const std::string& v) { c.topology = topology_kind_from_string(v); },
        [](const ExperimentConfig& c) { return to_string(c.topology); });
    add("topology_file", [](ExperimentConfig& c, const std::string& v) { c.topology_file = v; },
        [](const ExperimentConfig& c) { return c.topology_file; });
    add("algorithm",
        [](ExperimentConfig& c, const std::string& v) { c.algorithm = algorithm_kind_from_string(v); },
        [](const ExperimentConfig& c) { return to_string(c.algorithm); });
    add("alpha", [](ExperimentConfig& c, const std::string& v) { c.alpha = std::stod(v); },
        [](const ExperimentConfig& c) { return fmt_double(c.alpha); });
    add("beta",
        [](ExperimentConfig& c, const std::string& v) {
          if (v.empty() || v == "none") c.beta.reset();
          else c.beta = std::stod(v);
        },
        [](const ExperimentConfig& c) { return c.beta ? fmt_double(*c.beta) : "none"; });
    add("heterogeneity",
        [](ExperimentConfig& c, const std::string& v) { c.heterogeneity = std::stod(v); },
        [](const ExperimentConfig& c) { return fmt_double(c.heterogeneity); });
    add("delay_case",
        [](ExperimentConfig& c, const std::string& v) { c.delay_case = delay_case_from_string(v); },
        [](const ExperimentConfig& c) { return to_string(c.delay_case); });
    add("comm_slowdown",
        [](ExperimentConfig& c, const std::string& v) { c.comm_slowdown = std::stod(v); },
        [](const ExperimentConfig& c) { return fmt_double(c.comm_slowdown); });
    add("straggler_id",
        [](ExperimentConfig& c, const std::string& v) { c.straggler_id = std::stoi(v); },
        [](const ExperimentConfig& c) { return std::to_string(c.straggler_id); });
    add("straggler_factor",
        [](ExperimentConfig& c, const std::string& v) { c.straggler_factor = std::stod(v); },
        [](const ExperimentConfig& c) { return fmt_double(c.straggler_factor); });
    add("compute_mean",
        [](ExperimentConfig& c, const std::string& v) { c.compute_mean = std::stod(v); },
        [](const ExperimentConfig& c) { return fmt_double(c.compute_mean); });
    add("comm_mean",
        [](ExperimentConfig& c, const std::string& v) { c.comm_mean = std::stod(v); },
        [](const ExperimentConfig& c) { return fmt_double(c.comm_mean); });
    add("propagation",
        [](ExperimentConfig& c, const std::string& v) { c.propagation = std::stod(v); },
        [](const ExperimentConfig& c) { return fmt_double(c.propagation); });
    add("max_sim_time",
        [](ExperimentConfig& c, const std::string& v) {
          if (v.empty() || v == "none") c.max_sim_time.reset();
          else c.max_sim_time = std::stod(v);
        },
        [](const ExperimentConfig& c) {
          return c.max_sim_time ? fmt_double(*c.max_sim_time) : "none";
        });
    add("max_updates",
        [](ExperimentConfig& c, const std::string& v) {
          if (v.empty() || v == "none") c.max_updates.reset();
          else c.max_updates = std::stoull(v);
        },
        [](const ExperimentConfig& c) {
          return c.max_updates ? std::to_string(*c.max_updates) : "none";
        });
    add("metric_stride",
        [](ExperimentConfig& c, const std::string& v) { c.metric_stride = std::stoull(v); },
        [](const ExperimentConfig& c) { return std::to_string(c.metric_stride); });
    add("seeds",
        [](ExperimentConfig& c, const std::string& v) { c.seeds = parse_seed_list(v); },
        [](const ExperimentConfig& c) {
          std::string out;
          for (std::size_t i = 0; i < c.seeds.size(); ++i) {
            if (i) out += ",";
            out += std::to_string(c.seeds[i]);
          }
          return out;
        });
    add("snapshot_budget",
        [](ExperimentConfig& c, const std::string& v) { c.snapshot_budget = std::stoull(v); },
        [](const ExperimentConfig& c) { return std::to_string(c.snapshot_budget); });
    return f;
  }();
  return table;
}

const Field& find_field(const std::string& key) {
  for (const auto& f : field_table())
    if (f.key == key) return f;
  throw ConfigError("unknown config key: " + key);
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig config;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') continue;  // section header
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value: " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    find_field(key).set(config, value);
  }
  config.validate();
  return config;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  const bool looks_json = !text.empty() && trim(text).front() == '{';
  if (!looks_json) return parse_config_text(text);

  ExperimentConfig config;
  nlohmann::json j = nlohmann::json::parse(text);
  for (auto it = j.begin(); it != j.end(); ++it) {
    std::string value;
    if (it.value().is_string()) value = it.value().get<std::string>();
    else if (it.value().is_boolean()) value = it.value().get<bool>() ? "true" : "false";
    else if (it.value().is_array()) {
      for (std::size_t i = 0; i < it.value().size(); ++i) {
        if (i) value += ",";
        value += it.value()[i].dump();
      }
    } else value = it.value().dump();
    find_field(it.key()).set(config, value);
  }
  config.validate();
  return config;
}

std::string serialize_config(const ExperimentConfig& config) {
  std::string out;
  for (const auto& f : field_table()) out += f.key + " = " + f.get(config) + "\n";
  return out;
}

std::string config_hash(const ExperimentConfig& config) {
  const std::string canon = serialize_config(config);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

DelayModel preset_delay_model(const ExperimentConfig& config, std::uint64_t seed) {
  const int n = config.n_agents;
  double comp_mean = 1.0, comm_mean = 1.0;
  if (config.delay_case == DelayCase::Custom) {
    comp_mean = config.compute_mean;
    comm_mean = config.comm_mean;
  }
  if (config.delay_case == DelayCase::SlowComm) comm_mean *= config.comm_slowdown;

  DelayModel model = uniform_delay_model(n, comp_mean, comm_mean, seed);
  model.propagation = config.propagation;

  const bool slow_comp = config.delay_case == DelayCase::CompStraggler ||
                         config.delay_case == DelayCase::CombinedStraggler;
  const bool slow_link = config.delay_case == DelayCase::CommStraggler ||
                         config.delay_case == DelayCase::CombinedStraggler;
  const int s = config.straggler_id;
  if (slow_comp)
    model.compute[s] = make_delay_sampler(comp_mean * config.straggler_factor, kComputeCv);
  if (slow_link) {
    for (int j = 0; j < n; ++j) {
      if (j == s) continue;
      model.transmit[s][j] =
          make_delay_sampler(comm_mean * config.straggler_factor, kCommCv);
      model.transmit[j][s] =
          make_delay_sampler(comm_mean * config.straggler_factor, kCommCv);
    }
  }
  model.validate();
  return model;
}

}  // namespace adsim
