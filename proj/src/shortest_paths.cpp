#include "gridclust/shortest_paths.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <queue>

#include "gridclust/csv.hpp"

namespace gridclust {

std::vector<double> dijkstra(const NetworkGraph& graph, NodeId root) {
  std::vector<double> dist(static_cast<std::size_t>(graph.num_nodes()) + 1, kInf);
  using Item = std::pair<double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[static_cast<std::size_t>(root)] = 0.0;
  heap.emplace(0.0, root);
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[static_cast<std::size_t>(u)]) continue;
    for (const Adjacent& adj : graph.neighbors(u)) {
      const double nd = d + graph.edge(adj.edge).length;
      double& cur = dist[static_cast<std::size_t>(adj.node)];
      if (nd < cur) {
        cur = nd;
        heap.emplace(nd, adj.node);
      }
    }
  }
  return dist;
}

Path trace_path(const NetworkGraph& graph, const std::vector<double>& dist_to_sink, NodeId from, NodeId to) {
  Path p;
  p.nodes.push_back(from);
  NodeId u = from;
  while (u != to) {
    const double du = dist_to_sink[static_cast<std::size_t>(u)];
    const double tol = 1e-12 * std::max(1.0, du);
    int next_edge = -1;
    NodeId next = 0;
    // Neighbors are sorted by id, so the first tight one is the smallest.
    for (const Adjacent& adj : graph.neighbors(u)) {
      const double via = graph.edge(adj.edge).length + dist_to_sink[static_cast<std::size_t>(adj.node)];
      if (std::abs(via - du) <= tol) {
        next = adj.node;
        next_edge = adj.edge;
        break;
      }
    }
    if (next_edge < 0) throw SolverError("no shortest-path successor found; graph disconnected?");
    p.edges.push_back(next_edge);
    p.nodes.push_back(next);
    p.cost += graph.edge(next_edge).length;
    u = next;
  }
  return p;
}

Path shortest_path(const NetworkGraph& graph, NodeId from, NodeId to) {
  return trace_path(graph, dijkstra(graph, to), from, to);
}

PathTable::PathTable(std::vector<NodeId> sources, std::vector<NodeId> sinks, std::vector<Path> paths)
    : sources_(std::move(sources)), sinks_(std::move(sinks)), paths_(std::move(paths)) {}

double PathTable::max_cost() const {
  double m = 0.0;
  for (const Path& p : paths_) m = std::max(m, p.cost);
  return m;
}

PathTable all_pairs_source_sink(const NetworkGraph& graph, const UnitRegistry& units, Exec exec) {
  const int ns = static_cast<int>(units.sources.size());
  const int nd = static_cast<int>(units.sinks.size());
  const bool par = exec == Exec::kParallel;

  std::vector<std::vector<double>> dist(static_cast<std::size_t>(nd));
#pragma omp parallel for schedule(dynamic) if (par)
  for (int j = 0; j < nd; ++j) dist[static_cast<std::size_t>(j)] = dijkstra(graph, units.sinks[static_cast<std::size_t>(j)]);

  std::vector<Path> paths(static_cast<std::size_t>(ns) * static_cast<std::size_t>(nd));
#pragma omp parallel for schedule(dynamic) if (par)
  for (int i = 0; i < ns; ++i) {
    for (int j = 0; j < nd; ++j) {
      paths[static_cast<std::size_t>(i) * static_cast<std::size_t>(nd) + static_cast<std::size_t>(j)] =
          trace_path(graph, dist[static_cast<std::size_t>(j)], units.sources[static_cast<std::size_t>(i)],
                     units.sinks[static_cast<std::size_t>(j)]);
    }
  }
  return PathTable(units.sources, units.sinks, std::move(paths));
}

void write_path_table_csv(std::ostream& out, const PathTable& table, const Scenario& scenario) {
  out << "source,sink,cost,path\n";
  for (int i = 0; i < table.num_sources(); ++i) {
    for (int j = 0; j < table.num_sinks(); ++j) {
      const Path& p = table.at(i, j);
      std::string nodes;
      for (std::size_t n = 0; n < p.nodes.size(); ++n) nodes += (n ? " " : "") + std::to_string(scenario.external(p.nodes[n]));
      CsvRow(out) << scenario.external(table.source(i)) << scenario.external(table.sink(j)) << p.cost << nodes;
    }
  }
}

}  // namespace gridclust
