#pragma once

#include <string>
#include <utility>
#include <vector>

namespace adsim {

enum class TopologyKind { Grid, Ring, Complete, Custom };

TopologyKind topology_kind_from_string(const std::string& s);
std::string to_string(TopologyKind k);

// Undirected connected communication graph. Edges are stored as (i, j) with
// i < j; neighbor lists are sorted ascending, which also fixes the serial
// send order used by the engine.
class Topology {
 public:
  Topology(int n, std::vector<std::pair<int, int>> edges);

  int n() const { return n_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const std::vector<int>& neighbors(int i) const { return adjacency_[i]; }
  int degree(int i) const { return static_cast<int>(adjacency_[i].size()); }
  bool has_edge(int i, int j) const;

 private:
  int n_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> adjacency_;
};

// grid requires n to be a perfect square (4-neighbor lattice), ring requires
// n >= 3, complete requires n >= 2.
Topology build_topology(TopologyKind kind, int n,
                        const std::vector<std::pair<int, int>>& custom_edges = {});

// File format: one edge per line, "i j" zero-based, '#' starts a comment.
Topology load_topology_file(int n, const std::string& path);

}  // namespace adsim
