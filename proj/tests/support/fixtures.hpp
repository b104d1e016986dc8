#pragma once

#include <random>
#include <vector>

#include "gridclust/network.hpp"

namespace fixture {

/// Scenario with identity external ids and flat zero profiles; callers fill
/// in the bounds they need.
gridclust::Scenario flat_scenario(int num_nodes, std::vector<gridclust::Edge> edges, std::vector<gridclust::NodeId> sources,
                                  std::vector<gridclust::NodeId> sinks, gridclust::Timeline timeline);

/// Sets constant bounds nom +- (up, dn) on every step of one source or sink.
void set_source(gridclust::Scenario& s, gridclust::NodeId v, double nom, double up, double dn);
void set_sink(gridclust::Scenario& s, gridclust::NodeId v, double nom, double up, double dn, double actual);

/// Seven nodes, unit lengths: 1-2, 1-3, 2-4, 2-7, 3-5, 4-6, 5-6. Source 6
/// and sink 7, each with a +-10 band around a zero nominal, one step.
gridclust::Scenario figure3();

/// Connected random graph: random spanning tree plus extra edges with
/// probability `density`; lengths uniform in [0.5, 3].
gridclust::NetworkGraph random_connected_graph(int n, double density, std::mt19937_64& rng);

struct WeightedGraph {
  gridclust::NetworkGraph graph;
  std::vector<double> weights;  // per edge
};

/// Two connected blocks of sizes n/2 and n - n/2 under a random node
/// labelling. Intra-block weights lie in [10, 20], the 1-3 bridging edges
/// in [0.1, 1], so every intra weight is at least 10x every inter weight.
WeightedGraph planted_two_block(int n, std::mt19937_64& rng);

}  // namespace fixture
