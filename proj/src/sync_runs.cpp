#include "adsim/sync_runs.hpp"

#include <algorithm>
#include <cmath>

namespace adsim {

namespace {

struct SyncBookkeeping {
  std::uint64_t seq = 0;
  std::uint64_t total_commits = 0;
  std::uint64_t stored_doubles = 0;
};

void record_round_updates(EventTrace& trace, SyncBookkeeping& bk, double commit_time,
                          const std::vector<ModelVector>& new_states, std::uint64_t round,
                          const EngineOptions& options, int n,
                          const std::vector<std::vector<std::uint64_t>>& seen_versions) {
  for (int i = 0; i < n; ++i) {
    const std::uint64_t seq = bk.seq++;
    trace.events.push_back(
        TraceEvent{commit_time, seq, EventKind::Update, i, -1, -1, round + 1});
    UpdateDetail detail;
    detail.time = commit_time;
    detail.seq = seq;
    detail.agent = i;
    detail.version = round + 1;
    for (int j = 0; j < n; ++j) {
      if (j == i || seen_versions[i][j] == std::uint64_t(-1)) continue;
      detail.versions_at_commit.emplace_back(j, seen_versions[i][j]);
      // The next gradient begins at this commit; by then the round-r exchange
      // has fully arrived, so the frozen view is one round behind at commit.
      detail.versions_at_grad_start.emplace_back(j, round == 0 ? 0 : round - 1);
    }
    const auto cost = static_cast<std::uint64_t>(new_states[i].size());
    if (bk.stored_doubles + cost <= options.iterate_snapshot_budget) {
      detail.iterate_after = new_states[i];
      detail.has_iterate = true;
      bk.stored_doubles += cost;
    }
    trace.updates.push_back(std::move(detail));
    bk.total_commits += 1;
  }
}

}  // namespace

EventTrace run_sync_dsgd(const std::vector<LocalProblem>& problems, const Topology& topology,
                         const MixingMatrix& w, double alpha, const DelayModel& delays,
                         const ModelVector& x0, const EngineOptions& options,
                         const CommitHook& on_commit) {
  const int n = topology.n();
  EventTrace trace;
  trace.n_agents = n;
  trace.config_hash = options.config_hash;

  std::vector<ModelVector> states(n, x0);
  for (int i = 0; i < n; ++i) trace.initial_models.push_back(x0);

  std::vector<RngStream> grad_rng, comp_rng;
  std::vector<std::vector<RngStream>> link_rng;
  for (int i = 0; i < n; ++i) {
    grad_rng.push_back(derive_stream(delays.seed, "gradient", i));
    comp_rng.push_back(derive_stream(delays.seed, "compute-delay", i));
    std::vector<RngStream> row;
    for (int j = 0; j < n; ++j) row.push_back(derive_stream(delays.seed, "link-delay", i, j));
    link_rng.push_back(std::move(row));
  }

  SyncBookkeeping bk;
  std::vector<std::vector<std::uint64_t>> seen(n, std::vector<std::uint64_t>(n, std::uint64_t(-1)));
  double now = 0.0;
  for (std::uint64_t round = 0;; ++round) {
    // Gradients at the round-start models; barrier at the slowest agent.
    std::vector<ModelVector> gradients(n);
    double max_comp = 0.0;
    for (int i = 0; i < n; ++i) {
      gradients[i] = problems[i].stochastic_gradient(states[i], grad_rng[i]);
      max_comp = std::max(max_comp, delays.compute[i].sample(comp_rng[i]));
    }
    // Serial exchange of the round-start models after the compute barrier.
    const double exchange_start = now + max_comp;
    double exchange_end = exchange_start;
    std::vector<TraceEvent> wire;
    for (int i = 0; i < n; ++i) {
      double depart = exchange_start;
      for (int j : topology.neighbors(i)) {
        const double occ = delays.transmit[i][j].sample(link_rng[i][j]);
        wire.push_back(TraceEvent{depart, 0, EventKind::Send, i, i, j, round});
        depart += occ;
        wire.push_back(
            TraceEvent{depart + delays.propagation, 0, EventKind::Arrival, j, i, j, round});
        seen[j][i] = round;
      }
      exchange_end = std::max(exchange_end, depart + delays.propagation);
    }
    const double commit_time = exchange_end;
    if (commit_time > options.termination.max_sim_time) break;

    std::stable_sort(wire.begin(), wire.end(), [](const TraceEvent& a, const TraceEvent& b) {
      return a.time < b.time;
    });
    for (auto& e : wire) {
      e.seq = bk.seq++;
      trace.events.push_back(e);
    }

    states = sync_dsgd_round(states, w, alpha, gradients);
    record_round_updates(trace, bk, commit_time, states, round, options, n, seen);
    now = commit_time;
    trace.final_time = now;
    if (on_commit)
      on_commit(now, bk.total_commits,
                [&states](int i) -> const ModelVector& { return states[i]; });
    if (options.termination.max_updates > 0 &&
        bk.total_commits >= options.termination.max_updates)
      break;
  }
  return trace;
}

EventTrace run_ring_allreduce(const std::vector<LocalProblem>& problems, double alpha,
                              const DelayModel& delays, const ModelVector& x0,
                              const EngineOptions& options, const CommitHook& on_commit) {
  const int n = static_cast<int>(problems.size());
  EventTrace trace;
  trace.n_agents = n;
  trace.config_hash = options.config_hash;
  for (int i = 0; i < n; ++i) trace.initial_models.push_back(x0);

  ModelVector x = x0;
  std::vector<RngStream> grad_rng, comp_rng;
  std::vector<RngStream> ring_rng;  // link i -> (i+1) mod n
  for (int i = 0; i < n; ++i) {
    grad_rng.push_back(derive_stream(delays.seed, "gradient", i));
    comp_rng.push_back(derive_stream(delays.seed, "compute-delay", i));
    ring_rng.push_back(derive_stream(delays.seed, "link-delay", i, (i + 1) % n));
  }

  SyncBookkeeping bk;
  std::vector<std::vector<std::uint64_t>> seen(n, std::vector<std::uint64_t>(n, std::uint64_t(-1)));
  double now = 0.0;
  for (std::uint64_t round = 0;; ++round) {
    std::vector<ModelVector> gradients(n);
    double max_comp = 0.0;
    for (int i = 0; i < n; ++i) {
      gradients[i] = problems[i].stochastic_gradient(x, grad_rng[i]);
      max_comp = std::max(max_comp, delays.compute[i].sample(comp_rng[i]));
    }
    // 2(n-1) phases; every phase waits for its slowest link, each message a
    // 1/n-sized chunk of the model.
    double comm = 0.0;
    if (n > 1) {
      for (int phase = 0; phase < 2 * (n - 1); ++phase) {
        double slowest = 0.0;
        for (int i = 0; i < n; ++i)
          slowest = std::max(slowest,
                             delays.transmit[i][(i + 1) % n].sample(ring_rng[i]) / double(n));
        comm += slowest;
      }
    }
    const double commit_time = now + max_comp + comm;
    if (commit_time > options.termination.max_sim_time) break;

    const ModelVector sum = ring_allreduce_sum(gradients);
    ModelVector new_x = x;
    new_x.noalias() -= (alpha / double(n)) * sum;
    ensure_finite_iterate(new_x, 0, alpha);
    x = std::move(new_x);

    std::vector<ModelVector> replicas(n, x);
    record_round_updates(trace, bk, commit_time, replicas, round, options, n, seen);
    now = commit_time;
    trace.final_time = now;
    if (on_commit)
      on_commit(now, bk.total_commits,
                [&replicas](int i) -> const ModelVector& { return replicas[i]; });
    if (options.termination.max_updates > 0 &&
        bk.total_commits >= options.termination.max_updates)
      break;
  }
  return trace;
}

}  // namespace adsim
