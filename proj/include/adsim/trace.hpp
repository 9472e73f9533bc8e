#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "adsim/types.hpp"

namespace adsim {

enum class EventKind { Update, Send, Arrival };

std::string to_string(EventKind k);
EventKind event_kind_from_string(const std::string& s);

// One committed row of the simulation history. `version` is the sender's (or
// committer's) update count after the event. Payloads are not stored here;
// update-level values live in UpdateDetail.
struct TraceEvent {
  double time = 0.0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::Update;
  int agent = -1;  // committer (update), sender (send), receiver (arrival)
  int src = -1;
  int dst = -1;
  std::uint64_t version = 0;
};

// Rich per-update record kept in memory for auditing: which buffer versions
// the committer saw at gradient start and at commit, and the iterate it
// produced. Iterates may be dropped on large runs (see snapshot budget).
struct UpdateDetail {
  double time = 0.0;
  std::uint64_t seq = 0;
  int agent = -1;
  std::uint64_t version = 0;  // update count of `agent` after this commit
  std::vector<std::pair<int, std::uint64_t>> versions_at_commit;
  std::vector<std::pair<int, std::uint64_t>> versions_at_grad_start;
  ModelVector iterate_after;  // empty when not stored
  bool has_iterate = false;
};

// Totally ordered record of update/send/arrival events; the ground truth the
// audit reconstructs virtual indices and staleness from.
struct EventTrace {
  int n_agents = 0;
  std::string config_hash;
  std::vector<TraceEvent> events;       // (time, seq) ascending
  std::vector<UpdateDetail> updates;    // commit order (= virtual index order)
  std::vector<ModelVector> initial_models;
  double final_time = 0.0;
  bool diverged = false;

  std::uint64_t update_count() const { return updates.size(); }
};

// CSV schema: "time,seq,kind,agent,src,dst,version", with '#'-prefixed header
// comments (config hash). Payloads and iterates are omitted from export.
void write_trace_csv(const EventTrace& trace, const std::string& path);
EventTrace read_trace_csv(const std::string& path);

}  // namespace adsim
