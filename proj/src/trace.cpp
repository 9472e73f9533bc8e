#include "adsim/trace.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace adsim {

std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::Update: return "update";
    case EventKind::Send: return "send";
    case EventKind::Arrival: return "arrival";
  }
  return "?";
}

EventKind event_kind_from_string(const std::string& s) {
  if (s == "update") return EventKind::Update;
  if (s == "send") return EventKind::Send;
  if (s == "arrival") return EventKind::Arrival;
  throw ConfigError("unknown trace event kind: " + s);
}

void write_trace_csv(const EventTrace& trace, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("cannot write trace file: " + path);
  std::fprintf(f, "# config_hash=%s\n", trace.config_hash.c_str());
  std::fprintf(f, "# n_agents=%d\n", trace.n_agents);
  std::fprintf(f, "time,seq,kind,agent,src,dst,version\n");
  for (const auto& e : trace.events) {
    std::fprintf(f, "%.17g,%" PRIu64 ",%s,%d,%d,%d,%" PRIu64 "\n", e.time, e.seq,
                 to_string(e.kind).c_str(), e.agent, e.src, e.dst, e.version);
  }
  std::fclose(f);
}

EventTrace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file: " + path);
  EventTrace trace;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (line.find("config_hash") != std::string::npos && eq != std::string::npos)
        trace.config_hash = line.substr(eq + 1);
      if (line.find("n_agents") != std::string::npos && eq != std::string::npos)
        trace.n_agents = std::stoi(line.substr(eq + 1));
      continue;
    }
    if (!header_seen) {  // column header row
      header_seen = true;
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    TraceEvent e;
    std::getline(ss, cell, ',');
    e.time = std::stod(cell);
    std::getline(ss, cell, ',');
    e.seq = std::stoull(cell);
    std::getline(ss, cell, ',');
    e.kind = event_kind_from_string(cell);
    std::getline(ss, cell, ',');
    e.agent = std::stoi(cell);
    std::getline(ss, cell, ',');
    e.src = std::stoi(cell);
    std::getline(ss, cell, ',');
    e.dst = std::stoi(cell);
    std::getline(ss, cell, ',');
    e.version = std::stoull(cell);
    trace.events.push_back(e);
  }
  // Rebuild the update list (without payload details) so index-level audits
  // work on imported traces.
  for (const auto& e : trace.events) {
    if (e.kind != EventKind::Update) continue;
    UpdateDetail u;
    u.time = e.time;
    u.seq = e.seq;
    u.agent = e.agent;
    u.version = e.version;
    trace.updates.push_back(std::move(u));
    trace.n_agents = std::max(trace.n_agents, e.agent + 1);
  }
  if (!trace.events.empty()) trace.final_time = trace.events.back().time;
  return trace;
}

}  // namespace adsim
