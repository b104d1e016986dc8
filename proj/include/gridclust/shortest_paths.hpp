#pragma once

#include <iosfwd>
#include <vector>

#include "gridclust/network.hpp"

namespace gridclust {

/// Distances from `root` to every node (index 0 unused).
std::vector<double> dijkstra(const NetworkGraph& graph, NodeId root);

struct Path {
  std::vector<NodeId> nodes;  // from source to sink; a single node when source == sink
  std::vector<int> edges;     // edge indices, |nodes| - 1 of them
  double cost = 0.0;
};

/// Shortest path from `from` to `to`, given distances *to* `to`. Among equal
/// cost paths the one with the lexicographically smallest node sequence is
/// returned.
Path trace_path(const NetworkGraph& graph, const std::vector<double>& dist_to_sink, NodeId from, NodeId to);

/// Convenience single-pair query.
Path shortest_path(const NetworkGraph& graph, NodeId from, NodeId to);

/// Paths for every (source, sink) pair, indexed by registry positions.
class PathTable {
 public:
  PathTable() = default;
  PathTable(std::vector<NodeId> sources, std::vector<NodeId> sinks, std::vector<Path> paths);

  int num_sources() const { return static_cast<int>(sources_.size()); }
  int num_sinks() const { return static_cast<int>(sinks_.size()); }
  NodeId source(int i) const { return sources_[static_cast<std::size_t>(i)]; }
  NodeId sink(int j) const { return sinks_[static_cast<std::size_t>(j)]; }
  const Path& at(int i, int j) const { return paths_[index(i, j)]; }
  double cost(int i, int j) const { return at(i, j).cost; }
  double max_cost() const;

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * sinks_.size() + static_cast<std::size_t>(j);
  }

  std::vector<NodeId> sources_, sinks_;
  std::vector<Path> paths_;
};

/// One Dijkstra per sink, then a greedy lexicographic walk from each source.
PathTable all_pairs_source_sink(const NetworkGraph& graph, const UnitRegistry& units, Exec exec = Exec::kParallel);

/// CSV `source,sink,cost,path` with external ids; the path is space separated.
void write_path_table_csv(std::ostream& out, const PathTable& table, const Scenario& scenario);

}  // namespace gridclust
