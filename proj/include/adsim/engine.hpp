#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <queue>
#include <vector>

#include "adsim/delay.hpp"
#include "adsim/machines.hpp"
#include "adsim/topology.hpp"
#include "adsim/trace.hpp"

namespace adsim {

// Queue entry. Arrival events share the payload of the multicast that
// produced them.
struct SimEvent {
  double time = 0.0;
  std::uint64_t seq = 0;
  enum class Kind { ComputeDone, SendStart, Arrival } kind = Kind::ComputeDone;
  int agent = -1;
  int src = -1;
  int dst = -1;
  std::uint64_t version = 0;
  std::shared_ptr<const ModelVector> payload;
};

// Min-ordered on (time, seq); seq is a global monotone tiebreak assigned at
// schedule time, which is what makes simultaneous events reproducible.
class EventQueue {
 public:
  void schedule(SimEvent event);
  std::optional<SimEvent> next_event();
  double current_time() const { return current_time_; }
  std::uint64_t next_seq() { return seq_counter_++; }
  bool empty() const { return heap_.empty(); }

 private:
  struct Later {
    bool operator()(const SimEvent& a, const SimEvent& b) const {
      if (a.time != b.time) return a.time > b.time;
      return a.seq > b.seq;
    }
  };
  std::priority_queue<SimEvent, std::vector<SimEvent>, Later> heap_;
  double current_time_ = 0.0;
  std::uint64_t seq_counter_ = 0;
};

struct Termination {
  double max_sim_time = std::numeric_limits<double>::infinity();
  std::uint64_t max_updates = 0;  // 0 = unset
};

struct EngineOptions {
  Termination termination;
  // Iterates are stored per update while the running total of stored doubles
  // stays below this budget; afterwards only a trailing window is kept.
  std::uint64_t iterate_snapshot_budget = 50'000'000;
  // Optional per-agent delay before the first gradient computation starts.
  std::vector<double> start_offsets;
  std::string config_hash;
};

// Called after every committed update with the current simulated time, the
// total number of commits so far, and an accessor for the agents' models.
using ModelAccessor = std::function<const ModelVector&(int)>;
using CommitHook =
    std::function<void(double time, std::uint64_t total_commits, const ModelAccessor& model_of)>;

// Sequential event loop: each agent cycles (compute for a sampled delay;
// commit; multicast over the serial port; immediately begin the next
// gradient). Arrivals overwrite buffers at their arrival instant. Sending
// never blocks computing or receiving.
class AsyncEngine {
 public:
  AsyncEngine(const Topology& topology, const DelayModel& delays, AsyncAlgorithm& algorithm,
              EngineOptions options);

  EventTrace run(const CommitHook& on_commit = {});

 private:
  void multicast(int agent, std::uint64_t version, std::shared_ptr<const ModelVector> payload,
                 double now, EventTrace& trace);

  const Topology& topology_;
  const DelayModel& delays_;
  AsyncAlgorithm& algorithm_;
  EngineOptions options_;
  EventQueue queue_;
  std::vector<double> port_free_;
  std::vector<RngStream> compute_rng_;
  std::vector<std::vector<RngStream>> link_rng_;
};

}  // namespace adsim
