#include "adsim/topology.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>

#include "adsim/types.hpp"

namespace adsim {

TopologyKind topology_kind_from_string(const std::string& s) {
  if (s == "grid") return TopologyKind::Grid;
  if (s == "ring") return TopologyKind::Ring;
  if (s == "complete") return TopologyKind::Complete;
  if (s == "custom") return TopologyKind::Custom;
  throw ConfigError("unknown topology kind: " + s);
}

std::string to_string(TopologyKind k) {
  switch (k) {
    case TopologyKind::Grid: return "grid";
    case TopologyKind::Ring: return "ring";
    case TopologyKind::Complete: return "complete";
    case TopologyKind::Custom: return "custom";
  }
  return "?";
}

namespace {

bool connected(int n, const std::vector<std::vector<int>>& adj) {
  if (n == 1) return true;
  std::vector<char> seen(n, 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  int count = 1;
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        q.push(v);
      }
    }
  }
  return count == n;
}

}  // namespace

Topology::Topology(int n, std::vector<std::pair<int, int>> edges) : n_(n) {
  if (n < 1) throw ConfigError("topology needs at least one node");
  std::set<std::pair<int, int>> unique;
  for (auto [a, b] : edges) {
    if (a == b) throw ConfigError("self-loop rejected: " + std::to_string(a));
    if (a < 0 || b < 0 || a >= n || b >= n)
      throw ConfigError("edge endpoint out of range");
    unique.insert({std::min(a, b), std::max(a, b)});
  }
  edges_.assign(unique.begin(), unique.end());
  adjacency_.assign(n, {});
  for (auto [a, b] : edges_) {
    adjacency_[a].push_back(b);
    adjacency_[b].push_back(a);
  }
  for (auto& nbrs : adjacency_) std::sort(nbrs.begin(), nbrs.end());
  if (!connected(n_, adjacency_))
    throw ConfigError("communication graph must be connected");
}

bool Topology::has_edge(int i, int j) const {
  const auto& nbrs = adjacency_[i];
  return std::binary_search(nbrs.begin(), nbrs.end(), j);
}

Topology build_topology(TopologyKind kind, int n,
                        const std::vector<std::pair<int, int>>& custom_edges) {
  std::vector<std::pair<int, int>> edges;
  switch (kind) {
    case TopologyKind::Grid: {
      const int side = static_cast<int>(std::lround(std::sqrt(double(n))));
      if (side * side != n)
        throw ConfigError("grid topology requires a perfect square agent count");
      for (int r = 0; r < side; ++r) {
        for (int c = 0; c < side; ++c) {
          const int id = r * side + c;
          if (c + 1 < side) edges.push_back({id, id + 1});
          if (r + 1 < side) edges.push_back({id, id + side});
        }
      }
      break;
    }
    case TopologyKind::Ring: {
      if (n < 3) throw ConfigError("ring topology requires n >= 3");
      for (int i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n});
      break;
    }
    case TopologyKind::Complete: {
      if (n < 2) throw ConfigError("complete topology requires n >= 2");
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) edges.push_back({i, j});
      break;
    }
    case TopologyKind::Custom:
      edges = custom_edges;
      break;
  }
  return Topology(n, std::move(edges));
}

Topology load_topology_file(int n, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open topology file: " + path);
  std::vector<std::pair<int, int>> edges;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    int a, b;
    if (ss >> a >> b) edges.push_back({a, b});
  }
  return Topology(n, std::move(edges));
}

}  // namespace adsim
