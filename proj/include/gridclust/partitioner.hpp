#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "gridclust/network.hpp"

namespace gridclust {

/// Assignment of every node to one of M connected clusters.
struct Partition {
  int num_clusters = 0;
  std::vector<int> assignment;  // [v] in 1..M, entry 0 unused
  double cut_weight = 0.0;
  /// Cut of the greedy split before any refinement, for the winning trial.
  double initial_cut = 0.0;

  int cluster_of(NodeId v) const { return assignment[static_cast<std::size_t>(v)]; }
  /// Nodes of cluster h (1-based), ascending.
  std::vector<NodeId> members(int h) const;
  std::vector<int> sizes() const;  // [h - 1]
};

struct BalanceRange {
  double lo = 0.0;
  double hi = 0.0;
};

/// Allowed cluster node counts: [floor(V/M) / tol, tol * ceil(V/M)]. Some
/// size vector always fits when tol >= 1.
BalanceRange balance_range(int num_nodes, int num_clusters, double balance_tol);

/// Multilevel k-way partition minimizing the weighted edge cut subject to
/// connectivity and balance. Deterministic. Throws ScenarioError on bad
/// arguments and SolverError when no balanced connected partition is found.
Partition partition_kway(const NetworkGraph& graph, const std::vector<double>& weights, int num_clusters,
                         double balance_tol = 1.3);

double cut_weight(const NetworkGraph& graph, const std::vector<double>& weights, const std::vector<int>& assignment);

/// Checks the partition invariants; returns an empty string when they hold.
std::string check_partition(const NetworkGraph& graph, const std::vector<double>& weights, const Partition& p,
                            double balance_tol);

/// Unit lists restricted to cluster h.
UnitRegistry cluster_units(const UnitRegistry& units, const Partition& p, int h);

/// CSV `node,cluster` with external ids.
void write_partition_csv(std::ostream& out, const Partition& p, const Scenario& scenario);

}  // namespace gridclust
