#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "adsim/audit.hpp"
#include "adsim/config.hpp"
#include "adsim/metrics.hpp"
#include "adsim/sync_runs.hpp"

namespace adsim {

// Per-run audit summary, serialized to audit.json.
struct AuditReport {
  std::string config_hash;
  std::string algorithm;
  std::string delay_case;
  std::uint64_t seed = 0;
  std::uint64_t updates = 0;
  std::int64_t b_measured = 0;
  std::int64_t d_grad_start = 0;
  std::int64_t d_commit = 0;
  StalenessErrorReport staleness_grad_start;
  StalenessErrorReport staleness_commit;
  bool assumption_holds = false;  // finite B and D measured from the trace
  BoundReport bounds;
  bool diverged = false;
};

std::string audit_report_json(const AuditReport& report);

struct RunResult {
  std::string config_hash;
  std::string case_name;
  std::uint64_t seed = 0;
  bool diverged = false;
  EventTrace trace;
  std::vector<MetricSample> metrics;
  std::optional<AuditReport> audit;
  std::filesystem::path directory;  // empty when nothing was written
};

// Builds the problem, topology, weights, delays and algorithm from the
// config, runs one (case, seed) experiment, audits the trace, and (optionally)
// writes trace.csv / metrics.csv / audit.json under out_dir.
RunResult run_single(const ExperimentConfig& config, DelayCase delay_case, std::uint64_t seed,
                     const std::filesystem::path& out_dir = {},
                     bool write_artifacts = false);

// Case x seed grid. A divergence in one run flags that run and the suite
// continues. Artifacts land under <out_root>/<config_hash>/<case>_seed<seed>/.
std::vector<RunResult> run_suite(const ExperimentConfig& config,
                                 const std::vector<std::string>& cases,
                                 const std::filesystem::path& out_root,
                                 bool write_artifacts = true);

ModelVector initial_model(const ExperimentConfig& config, int dim);

// Problem construction shared by the runner, the CLI and the tests.
struct BuiltProblem {
  std::vector<LocalProblem> problems;
  int dim = 0;
};
BuiltProblem build_problem(const ExperimentConfig& config);

}  // namespace adsim
