#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridclust/common.hpp"

namespace gridclust {

/// Undirected line. Stored with a < b regardless of file orientation.
struct Edge {
  NodeId a = 0;
  NodeId b = 0;
  double length = 1.0;
};

struct Adjacent {
  NodeId node = 0;
  int edge = 0;
};

/// Undirected weighted graph over dense node ids 1..V. Construction rejects
/// self-loops, parallel lines, ids out of range and non-positive lengths;
/// connectivity is checked separately by the scenario validator.
class NetworkGraph {
 public:
  NetworkGraph() = default;
  NetworkGraph(int num_nodes, std::vector<Edge> edges);

  int num_nodes() const { return num_nodes_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  std::span<const Edge> edges() const { return edges_; }
  const Edge& edge(int index) const { return edges_[static_cast<std::size_t>(index)]; }

  /// Neighbors of v, ascending by node id.
  std::span<const Adjacent> neighbors(NodeId v) const { return adjacency_[static_cast<std::size_t>(v)]; }

  std::optional<int> edge_index(NodeId a, NodeId b) const;
  bool connected() const;

 private:
  int num_nodes_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<Adjacent>> adjacency_;
};

/// Node roles. Index-based lookups elsewhere refer to positions in these
/// ascending lists.
struct UnitRegistry {
  std::vector<NodeId> sources;
  std::vector<NodeId> sinks;
  std::vector<NodeId> storages;
  std::vector<NodeId> dual_role;

  std::optional<int> source_index(NodeId v) const;
  std::optional<int> sink_index(NodeId v) const;
  std::optional<int> storage_index(NodeId v) const;
};

struct Timeline {
  double tau_min = 5.0;
  int num_steps = 1;         // N_t
  int steps_per_period = 1;  // N_c
  int num_clusters = 1;      // M
  int horizon = 1;           // N_p

  int num_periods() const { return num_steps / steps_per_period; }
  double tau_hours() const { return tau_min / 60.0; }
  /// First absolute step of period eta (1-based).
  int period_start(int eta) const { return (eta - 1) * steps_per_period; }
};

/// Absolute power limits of a dispatchable source, per step.
struct SourceProfile {
  NodeId node = 0;
  std::vector<double> up, dn, nom;
};

/// Absolute absorption of a sink, per step. `actual` is the realized demand
/// replayed by the simulator.
struct SinkProfile {
  NodeId node = 0;
  std::vector<double> up, dn, nom, actual;
};

/// Storage bounds, expressed as deviations: b_dn <= 0 <= b_up and
/// e_dn <= 0 <= e_up, per step.
struct StorageProfile {
  NodeId node = 0;
  std::vector<double> b_dn, b_up, e_dn, e_up;
  double e0 = 0.0;
};

struct Scenario {
  NetworkGraph graph;
  UnitRegistry units;
  Timeline timeline;
  std::vector<SourceProfile> sources;    // ordered like units.sources
  std::vector<SinkProfile> sinks;        // ordered like units.sinks
  std::vector<StorageProfile> storages;  // ordered like units.storages
  /// External id of every dense node id (index 0 unused).
  std::vector<long long> external_id;

  long long external(NodeId v) const { return external_id[static_cast<std::size_t>(v)]; }
};

/// Checks every scenario invariant; throws ScenarioError naming the
/// offending node (external id) and step.
void validate(const Scenario& scenario);

/// Permissible deviations from nominal, per step.
struct VariationBounds {
  std::vector<std::vector<double>> source_up, source_dn;  // [source][k]
  std::vector<std::vector<double>> sink_up, sink_dn;      // [sink][k]
};

VariationBounds compute_variation_bounds(const Scenario& scenario);

/// Demand deviation actually realized at step k for every sink.
std::vector<double> actual_load_deviation(const Scenario& scenario, int k);

}  // namespace gridclust
