#pragma once

#include <optional>
#include <string>
#include <vector>

#include "adsim/delay.hpp"
#include "adsim/machines.hpp"
#include "adsim/topology.hpp"

namespace adsim {

enum class ProblemKind { Quadratic, LogRegSynthetic, LogRegIdx };
enum class DelayCase {
  Base,
  SlowComm,
  CompStraggler,
  CommStraggler,
  CombinedStraggler,
  Custom,
};

ProblemKind problem_kind_from_string(const std::string& s);
std::string to_string(ProblemKind k);
DelayCase delay_case_from_string(const std::string& s);
std::string to_string(DelayCase c);

// Declarative description of one experiment. Parsed from flat key = value
// text ('[section]' headers are grouping only) or from a flat JSON object
// with the same keys. Unknown keys are rejected.
struct ExperimentConfig {
  // problem
  ProblemKind problem = ProblemKind::Quadratic;
  int dim = 10;                 // quadratic dimension / blob feature count
  double condition = 10.0;      // quadratic spectrum spread
  double noise_sigma2 = 0.0;    // synthetic gradient noise (quadratic)
  bool shared_minimizer = false;
  int n_samples = 2000;         // synthetic dataset size
  double blob_separation = 3.0;
  double reg_weight = 0.05;
  int batch_size = 32;
  std::string idx_images;
  std::string idx_labels;
  int max_dataset = 0;          // cap on ingested samples, 0 = all
  std::uint64_t data_seed = 1;  // dataset + partition randomness

  // run
  int n_agents = 9;
  TopologyKind topology = TopologyKind::Grid;
  std::string topology_file;
  AlgorithmKind algorithm = AlgorithmKind::Adsgd;
  double alpha = 0.01;
  std::optional<double> beta;
  double heterogeneity = 0.0;  // zeta

  // delays
  DelayCase delay_case = DelayCase::Base;
  double comm_slowdown = 10.0;  // slow-comm multiplier
  int straggler_id = 0;
  double straggler_factor = 10.0;
  double compute_mean = 1.0;  // custom case
  double comm_mean = 1.0;     // custom case
  double propagation = 0.0;

  // termination: exactly one of the two
  std::optional<double> max_sim_time;
  std::optional<std::uint64_t> max_updates;

  // output
  std::uint64_t metric_stride = 0;  // 0 = one effective round (n_agents)
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::uint64_t snapshot_budget = 50'000'000;

  void validate() const;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);  // .json or key-value
std::string serialize_config(const ExperimentConfig& config);

// FNV-1a over the canonical serialization; stable across platforms.
std::string config_hash(const ExperimentConfig& config);

// Table of delay presets: base has every mean at one time unit; slow_comm
// scales all link means; the straggler cases scale one agent's compute mean
// and/or its incident links.
DelayModel preset_delay_model(const ExperimentConfig& config, std::uint64_t seed);

std::vector<std::string> all_delay_case_names();

}  // namespace adsim
