#include "support/fixtures.hpp"

#include <algorithm>
#include <set>

using namespace gridclust;

namespace fixture {

Scenario flat_scenario(int num_nodes, std::vector<Edge> edges, std::vector<NodeId> sources, std::vector<NodeId> sinks,
                       Timeline timeline) {
  Scenario s;
  s.graph = NetworkGraph(num_nodes, std::move(edges));
  s.timeline = timeline;
  s.units.sources = std::move(sources);
  s.units.sinks = std::move(sinks);
  s.external_id.resize(static_cast<std::size_t>(num_nodes) + 1);
  for (int v = 0; v <= num_nodes; ++v) s.external_id[static_cast<std::size_t>(v)] = v;
  const std::vector<double> zero(static_cast<std::size_t>(timeline.num_steps), 0.0);
  for (NodeId v : s.units.sources) s.sources.push_back({v, zero, zero, zero});
  for (NodeId v : s.units.sinks) s.sinks.push_back({v, zero, zero, zero, zero});
  return s;
}

void set_source(Scenario& s, NodeId v, double nom, double up, double dn) {
  SourceProfile& p = s.sources[static_cast<std::size_t>(*s.units.source_index(v))];
  std::fill(p.nom.begin(), p.nom.end(), nom);
  std::fill(p.up.begin(), p.up.end(), nom + up);
  std::fill(p.dn.begin(), p.dn.end(), nom + dn);
}

void set_sink(Scenario& s, NodeId v, double nom, double up, double dn, double actual) {
  SinkProfile& p = s.sinks[static_cast<std::size_t>(*s.units.sink_index(v))];
  std::fill(p.nom.begin(), p.nom.end(), nom);
  std::fill(p.up.begin(), p.up.end(), nom + up);
  std::fill(p.dn.begin(), p.dn.end(), nom + dn);
  std::fill(p.actual.begin(), p.actual.end(), nom + actual);
}

Scenario figure3() {
  std::vector<Edge> edges = {{1, 2, 1.0}, {1, 3, 1.0}, {2, 4, 1.0}, {2, 7, 1.0}, {3, 5, 1.0}, {4, 6, 1.0}, {5, 6, 1.0}};
  Scenario s = flat_scenario(7, std::move(edges), {6}, {7}, Timeline{5.0, 1, 1, 2, 1});
  set_source(s, 6, 0.0, 10.0, -10.0);
  set_sink(s, 7, 0.0, 10.0, -10.0, 0.0);
  return s;
}

NetworkGraph random_connected_graph(int n, double density, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0), len(0.5, 3.0);
  std::set<std::pair<int, int>> seen;
  std::vector<Edge> edges;
  for (int v = 2; v <= n; ++v) {
    const int parent = 1 + static_cast<int>(u(rng) * (v - 1));
    seen.insert({parent, v});
    edges.push_back({parent, v, len(rng)});
  }
  for (int a = 1; a <= n; ++a)
    for (int b = a + 1; b <= n; ++b)
      if (!seen.count({a, b}) && u(rng) < density) edges.push_back({a, b, len(rng)});
  return NetworkGraph(n, std::move(edges));
}

WeightedGraph planted_two_block(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<int> label(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) label[static_cast<std::size_t>(i)] = i + 1;
  std::shuffle(label.begin(), label.end(), rng);
  const int half = n / 2;
  std::set<std::pair<int, int>> seen;
  std::vector<gridclust::Edge> edges;
  std::vector<double> w;
  auto add = [&](int i, int j, double weight) {
    const int a = std::min(label[static_cast<std::size_t>(i)], label[static_cast<std::size_t>(j)]);
    const int b = std::max(label[static_cast<std::size_t>(i)], label[static_cast<std::size_t>(j)]);
    if (!seen.insert({a, b}).second) return;
    edges.push_back({a, b, 1.0});
    w.push_back(weight);
  };
  // Blocks are positions [0, half) and [half, n).
  for (int block = 0; block < 2; ++block) {
    const int lo = block == 0 ? 0 : half, hi = block == 0 ? half : n;
    for (int i = lo + 1; i < hi; ++i) add(lo + static_cast<int>(u(rng) * (i - lo)), i, 10.0 + 10.0 * u(rng));
    for (int i = lo; i < hi; ++i)
      for (int j = i + 1; j < hi; ++j)
        if (u(rng) < 0.3) add(i, j, 10.0 + 10.0 * u(rng));
  }
  const int bridges = 1 + static_cast<int>(u(rng) * 3);
  for (int b = 0; b < bridges; ++b)
    add(static_cast<int>(u(rng) * half), half + static_cast<int>(u(rng) * (n - half)), 0.1 + 0.9 * u(rng));
  // Sort edges by endpoint so the graph does not depend on insertion order.
  std::vector<std::size_t> order(edges.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return std::pair(edges[x].a, edges[x].b) < std::pair(edges[y].a, edges[y].b);
  });
  std::vector<gridclust::Edge> sorted_edges;
  std::vector<double> sorted_w;
  for (std::size_t i : order) {
    sorted_edges.push_back(edges[i]);
    sorted_w.push_back(w[i]);
  }
  return {gridclust::NetworkGraph(n, sorted_edges), sorted_w};
}

}  // namespace fixture
