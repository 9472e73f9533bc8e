#include "adsim/engine.hpp"

#include <algorithm>
#include <cmath>

namespace adsim {

void EventQueue::schedule(SimEvent event) {
  if (event.time < current_time_)
    throw std::logic_error("event scheduled into the past");
  heap_.push(std::move(event));
}

std::optional<SimEvent> EventQueue::next_event() {
  if (heap_.empty()) return std::nullopt;
  SimEvent e = heap_.top();
  heap_.pop();
  current_time_ = e.time;
  return e;
}

AsyncEngine::AsyncEngine(const Topology& topology, const DelayModel& delays,
                         AsyncAlgorithm& algorithm, EngineOptions options)
    : topology_(topology), delays_(delays), algorithm_(algorithm), options_(std::move(options)) {
  const int n = topology_.n();
  if (delays_.n() != n) throw ConfigError("delay model size mismatch");
  if (algorithm_.n_agents() != n) throw ConfigError("algorithm size mismatch");
  port_free_.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    compute_rng_.push_back(derive_stream(delays_.seed, "compute-delay", i));
    std::vector<RngStream> row;
    for (int j = 0; j < n; ++j)
      row.push_back(derive_stream(delays_.seed, "link-delay", i, j));
    link_rng_.push_back(std::move(row));
  }
}

void AsyncEngine::multicast(int agent, std::uint64_t version,
                            std::shared_ptr<const ModelVector> payload, double now,
                            EventTrace& /*trace*/) {
  double depart = std::max(port_free_[agent], now);
  for (int j : topology_.neighbors(agent)) {  // ascending id = send order
    const double occupancy = delays_.transmit[agent][j].sample(link_rng_[agent][j]);
    queue_.schedule(SimEvent{depart, queue_.next_seq(), SimEvent::Kind::SendStart, agent, agent,
                             j, version, nullptr});
    depart += occupancy;
    queue_.schedule(SimEvent{depart + delays_.propagation, queue_.next_seq(),
                             SimEvent::Kind::Arrival, j, agent, j, version, payload});
  }
  port_free_[agent] = depart;
}

EventTrace AsyncEngine::run(const CommitHook& on_commit) {
  const int n = topology_.n();
  EventTrace trace;
  trace.n_agents = n;
  trace.config_hash = options_.config_hash;
  for (int i = 0; i < n; ++i) trace.initial_models.push_back(algorithm_.model(i));

  // t = 0: broadcast the initial models over the serial ports, then start
  // every agent's first gradient computation concurrently.
  for (int i = 0; i < n; ++i) {
    if (topology_.degree(i) == 0) continue;
    auto payload = std::make_shared<const ModelVector>(algorithm_.initial_payload(i));
    multicast(i, 0, payload, 0.0, trace);
  }
  std::vector<double> offs = options_.start_offsets;
  offs.resize(n, 0.0);
  for (int i = 0; i < n; ++i) {
    algorithm_.gradient_begin(i);
    const double delay = delays_.compute[i].sample(compute_rng_[i]);
    if (!(delay > 0.0)) throw ConfigError("compute delays must be positive");
    queue_.schedule(SimEvent{offs[i] + delay, queue_.next_seq(), SimEvent::Kind::ComputeDone, i,
                             -1, -1, 0, nullptr});
  }

  // Buffer version bookkeeping for the audit: newest arrived version per
  // directed link, and each agent's view frozen at its last gradient start.
  std::vector<std::vector<std::uint64_t>> arrived(n, std::vector<std::uint64_t>(n, 0));
  std::vector<std::vector<std::uint64_t>> at_grad_start = arrived;
  std::vector<std::uint64_t> commits_of(n, 0);
  std::uint64_t total_commits = 0;
  std::uint64_t stored_doubles = 0;
  const ModelAccessor model_of = [this](int i) -> const ModelVector& {
    return algorithm_.model(i);
  };

  const double time_budget = options_.termination.max_sim_time;
  const std::uint64_t update_budget = options_.termination.max_updates;

  while (auto ev = queue_.next_event()) {
    if (ev->time > time_budget) {
      trace.final_time = time_budget;
      return trace;
    }
    switch (ev->kind) {
      case SimEvent::Kind::SendStart:
        trace.events.push_back(
            TraceEvent{ev->time, ev->seq, EventKind::Send, ev->src, ev->src, ev->dst, ev->version});
        break;
      case SimEvent::Kind::Arrival: {
        trace.events.push_back(TraceEvent{ev->time, ev->seq, EventKind::Arrival, ev->dst, ev->src,
                                          ev->dst, ev->version});
        arrived[ev->dst][ev->src] = ev->version;
        algorithm_.on_arrival(ev->dst, ev->src, ev->version, *ev->payload);
        break;
      }
      case SimEvent::Kind::ComputeDone: {
        const int i = ev->agent;
        const ModelVector& new_x = algorithm_.commit(i);
        commits_of[i] += 1;
        total_commits += 1;
        trace.events.push_back(
            TraceEvent{ev->time, ev->seq, EventKind::Update, i, -1, -1, commits_of[i]});

        UpdateDetail detail;
        detail.time = ev->time;
        detail.seq = ev->seq;
        detail.agent = i;
        detail.version = commits_of[i];
        for (int j : topology_.neighbors(i)) {
          detail.versions_at_commit.emplace_back(j, arrived[i][j]);
          detail.versions_at_grad_start.emplace_back(j, at_grad_start[i][j]);
        }
        const std::uint64_t cost = static_cast<std::uint64_t>(new_x.size());
        if (stored_doubles + cost <= options_.iterate_snapshot_budget) {
          detail.iterate_after = new_x;
          detail.has_iterate = true;
          stored_doubles += cost;
        }
        trace.updates.push_back(std::move(detail));

        if (on_commit) on_commit(ev->time, total_commits, model_of);

        if (topology_.degree(i) > 0) {
          auto payload = std::make_shared<const ModelVector>(algorithm_.outgoing_payload(i));
          multicast(i, commits_of[i], payload, ev->time, trace);
        }
        if (update_budget > 0 && total_commits >= update_budget) {
          trace.final_time = ev->time;
          return trace;
        }
        // Next gradient starts immediately; snapshot the buffer view now.
        for (int j : topology_.neighbors(i)) at_grad_start[i][j] = arrived[i][j];
        algorithm_.gradient_begin(i);
        const double delay = delays_.compute[i].sample(compute_rng_[i]);
        if (!(delay > 0.0)) throw ConfigError("compute delays must be positive");
        queue_.schedule(SimEvent{ev->time + delay, queue_.next_seq(),
                                 SimEvent::Kind::ComputeDone, i, -1, -1, 0, nullptr});
        break;
      }
    }
  }
  trace.final_time = queue_.current_time();
  return trace;
}

}  // namespace adsim
