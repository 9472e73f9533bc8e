#include "adsim/runner.hpp"

#include <fstream>

#include <json.hpp>

namespace adsim {

namespace {

nlohmann::json staleness_json(const StalenessErrorReport& r) {
  return nlohmann::json{{"checked", r.checked},
                        {"skipped", r.skipped},
                        {"violations", r.violations},
                        {"max_lhs_minus_rhs", r.max_lhs_minus_rhs}};
}

nlohmann::json bounds_json(const BoundReport& b) {
  nlohmann::json j;
  j["c0"] = b.c0;
  j["c1"] = b.c1;
  if (b.c2) j["c2"] = *b.c2;
  j["block_rate_admissible"] = b.block_rate_admissible;
  if (b.block_rate_rhs) j["block_rate_rhs"] = *b.block_rate_rhs;
  if (b.block_sqrtk_rhs) j["block_sqrtk_rhs"] = *b.block_sqrtk_rhs;
  j["gossip_rate_admissible"] = b.gossip_rate_admissible;
  if (b.gossip_rate_rhs) j["gossip_rate_rhs"] = *b.gossip_rate_rhs;
  if (b.gossip_k13_rhs) j["gossip_k13_rhs"] = *b.gossip_k13_rhs;
  return j;
}

}  // namespace

std::string audit_report_json(const AuditReport& report) {
  nlohmann::json j;
  j["config_hash"] = report.config_hash;
  j["algorithm"] = report.algorithm;
  j["delay_case"] = report.delay_case;
  j["seed"] = report.seed;
  j["updates"] = report.updates;
  j["b_measured"] = report.b_measured;
  j["d_grad_start"] = report.d_grad_start;
  j["d_commit"] = report.d_commit;
  j["staleness_error_grad_start"] = staleness_json(report.staleness_grad_start);
  j["staleness_error_commit"] = staleness_json(report.staleness_commit);
  j["assumption_holds"] = report.assumption_holds;
  j["bounds"] = bounds_json(report.bounds);
  j["diverged"] = report.diverged;
  return j.dump(2) + "\n";
}

ModelVector initial_model(const ExperimentConfig& config, int dim) {
  (void)config;
  return ModelVector::Zero(dim);
}

BuiltProblem build_problem(const ExperimentConfig& config) {
  BuiltProblem out;
  switch (config.problem) {
    case ProblemKind::Quadratic: {
      auto fam = make_quadratic(config.n_agents, config.dim, config.data_seed,
                                config.condition, config.noise_sigma2,
                                config.shared_minimizer);
      out.problems = std::move(fam.problems);
      out.dim = config.dim;
      break;
    }
    case ProblemKind::LogRegSynthetic:
    case ProblemKind::LogRegIdx: {
      Dataset data = config.problem == ProblemKind::LogRegSynthetic
                         ? make_blobs(config.n_samples, config.dim, config.data_seed,
                                      config.blob_separation)
                         : load_idx(config.idx_images, config.idx_labels, config.max_dataset);
      PartitionSpec spec;
      spec.n_agents = config.n_agents;
      spec.heterogeneity = config.heterogeneity;
      spec.seed = config.data_seed;
      const auto shards = partition_dataset(data, spec);
      LogRegParams params;
      params.reg_weight = config.reg_weight;
      params.batch_size = config.batch_size;
      out.problems = make_nonconvex_logreg(data, shards, params);
      out.dim = data.dim();
      break;
    }
  }
  return out;
}

namespace {

struct RunPieces {
  Topology topology;
  MixingMatrix w;
  DelayModel delays;
  BuiltProblem built;
};

RunPieces assemble(const ExperimentConfig& config, DelayCase delay_case, std::uint64_t seed) {
  ExperimentConfig effective = config;
  effective.delay_case = delay_case;
  Topology topology =
      config.topology == TopologyKind::Custom
          ? load_topology_file(config.n_agents, config.topology_file)
          : build_topology(config.topology, config.n_agents);
  MixingMatrix w = metropolis_weights(topology);
  DelayModel delays = preset_delay_model(effective, seed);
  return RunPieces{std::move(topology), std::move(w), std::move(delays),
                   build_problem(config)};
}

}  // namespace

RunResult run_single(const ExperimentConfig& config, DelayCase delay_case, std::uint64_t seed,
                     const std::filesystem::path& out_dir, bool write_artifacts) {
  config.validate();
  RunPieces pieces = assemble(config, delay_case, seed);
  const int n = config.n_agents;
  const ModelVector x0 = initial_model(config, pieces.built.dim);

  EngineOptions options;
  if (config.max_sim_time) options.termination.max_sim_time = *config.max_sim_time;
  if (config.max_updates) options.termination.max_updates = *config.max_updates;
  options.iterate_snapshot_budget = config.snapshot_budget;
  options.config_hash = config_hash(config);

  const std::uint64_t stride = config.metric_stride == 0 ? std::uint64_t(n)
                                                         : config.metric_stride;
  MetricsRecorder recorder(pieces.built.problems, n, stride);
  auto hook = [&recorder](double t, std::uint64_t k, const ModelAccessor& m) {
    recorder(t, k, m);
  };

  RunResult result;
  result.config_hash = options.config_hash;
  result.case_name = to_string(delay_case);
  result.seed = seed;

  std::unique_ptr<AsyncAlgorithm> machine;
  try {
    switch (config.algorithm) {
      case AlgorithmKind::SyncDsgd:
        result.trace = run_sync_dsgd(pieces.built.problems, pieces.topology, pieces.w,
                                     config.alpha, pieces.delays, x0, options, hook);
        break;
      case AlgorithmKind::ParallelSgd:
        result.trace = run_ring_allreduce(pieces.built.problems, config.alpha, pieces.delays,
                                          x0, options, hook);
        break;
      default: {
        switch (config.algorithm) {
          case AlgorithmKind::Adsgd:
            machine = std::make_unique<AdsgdMachine>(pieces.built.problems, pieces.topology,
                                                     pieces.w, config.alpha, x0, seed);
            break;
          case AlgorithmKind::AdsgdMemEff:
            machine = std::make_unique<MemEffAdsgdMachine>(pieces.built.problems,
                                                           pieces.topology, pieces.w,
                                                           config.alpha, x0, seed);
            break;
          case AlgorithmKind::AdsgdDoubleStep:
            machine = make_double_step_machine(pieces.built.problems, pieces.topology, pieces.w,
                                               config.alpha, config.beta.value(), x0, seed);
            break;
          case AlgorithmKind::Asbcd:
            machine = std::make_unique<AsbcdPenaltyMachine>(pieces.built.problems,
                                                            pieces.topology, pieces.w,
                                                            config.alpha, x0, seed);
            break;
          default:
            throw ConfigError("unhandled algorithm");
        }
        AsyncEngine engine(pieces.topology, pieces.delays, *machine, options);
        result.trace = engine.run(hook);
        break;
      }
    }
  } catch (const DivergenceError&) {
    result.diverged = true;
    result.trace.diverged = true;
  }
  result.metrics = recorder.samples();

  // Audit the trace (skipped for the allreduce baseline, whose replicas do
  // not gossip).
  if (!result.trace.updates.empty() && config.algorithm != AlgorithmKind::ParallelSgd) {
    try {
      StalenessAnalysis analysis(result.trace, pieces.topology);
      const DelayBounds bounds = analysis.measure_bounds();
      AuditReport report;
      report.config_hash = result.config_hash;
      report.algorithm = to_string(config.algorithm);
      report.delay_case = result.case_name;
      report.seed = seed;
      report.updates = result.trace.update_count();
      report.b_measured = bounds.b_measured;
      report.d_grad_start = bounds.d_grad_start;
      report.d_commit = bounds.d_commit;
      report.staleness_grad_start = check_staleness_error_bound(
          result.trace, pieces.topology, StalenessSemantics::SnapshotAtGradStart);
      report.staleness_commit = check_staleness_error_bound(
          result.trace, pieces.topology, StalenessSemantics::SnapshotAtCommit);
      report.assumption_holds = bounds.b_measured >= 1 && bounds.d_grad_start >= 0 &&
                                bounds.d_commit >= 0 &&
                                bounds.d_grad_start >= bounds.d_commit;
      report.diverged = result.diverged;

      BoundInputs inputs;
      inputs.b = bounds.b_measured;
      inputs.d = bounds.d_commit;
      inputs.smoothness_f = max_smoothness(pieces.built.problems);
      inputs.smoothness = inputs.smoothness_f;
      inputs.smoothness_penalized =
          penalized_smoothness(inputs.smoothness_f, pieces.w.lambda_min, config.alpha);
      inputs.lambda2 = pieces.w.lambda2;
      inputs.n = n;
      inputs.alpha = config.alpha;
      inputs.beta = config.beta.value_or(config.alpha);
      inputs.horizon = std::max<std::uint64_t>(1, result.trace.update_count());
      inputs.sigma2 = 0.0;
      for (const auto& p : pieces.built.problems)
        inputs.sigma2 = std::max(inputs.sigma2, p.variance_bound);
      inputs.f_gap = sum_lower_bound_gap(pieces.built.problems, x0);
      report.bounds = evaluate_bounds(inputs);
      result.audit = std::move(report);
    } catch (const std::exception&) {
      // Audit is best effort on truncated or degenerate traces.
    }
  }

  if (write_artifacts && !out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    write_trace_csv(result.trace, (out_dir / "trace.csv").string());
    write_metrics_csv(result.metrics, seed, to_string(config.algorithm), result.case_name,
                      result.config_hash, (out_dir / "metrics.csv").string());
    if (result.audit) {
      std::ofstream out(out_dir / "audit.json");
      out << audit_report_json(*result.audit);
    }
    result.directory = out_dir;
  }
  return result;
}

std::vector<RunResult> run_suite(const ExperimentConfig& config,
                                 const std::vector<std::string>& cases,
                                 const std::filesystem::path& out_root, bool write_artifacts) {
  config.validate();
  const std::string hash = config_hash(config);
  std::vector<RunResult> results;
  std::filesystem::path suite_dir = out_root / hash;
  if (write_artifacts) {
    std::filesystem::create_directories(suite_dir);
    std::ofstream copy(suite_dir / "config.txt");
    copy << serialize_config(config);
  }
  for (const auto& case_name : cases) {
    const DelayCase delay_case = delay_case_from_string(case_name);
    for (std::uint64_t seed : config.seeds) {
      std::filesystem::path run_dir =
          suite_dir / (case_name + "_seed" + std::to_string(seed));
      results.push_back(
          run_single(config, delay_case, seed, run_dir, write_artifacts));
    }
  }
  return results;
}

}  // namespace adsim
