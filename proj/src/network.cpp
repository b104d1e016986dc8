#include "gridclust/network.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gridclust {

NetworkGraph::NetworkGraph(int num_nodes, std::vector<Edge> edges)
    : num_nodes_(num_nodes), edges_(std::move(edges)), adjacency_(static_cast<std::size_t>(num_nodes) + 1) {
  if (num_nodes < 1) throw ScenarioError("graph must have at least one node");
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    Edge& e = edges_[i];
    std::ostringstream where;
    where << "edge [" << e.a << "," << e.b << "]";
    if (e.a < 1 || e.a > num_nodes || e.b < 1 || e.b > num_nodes)
      throw ScenarioError(where.str() + " references an unknown node");
    if (e.a == e.b) throw ScenarioError(where.str() + " is a self-loop");
    if (!(e.length > 0.0) || !std::isfinite(e.length)) throw ScenarioError(where.str() + " has non-positive length");
    if (e.a > e.b) std::swap(e.a, e.b);
    adjacency_[static_cast<std::size_t>(e.a)].push_back({e.b, static_cast<int>(i)});
    adjacency_[static_cast<std::size_t>(e.b)].push_back({e.a, static_cast<int>(i)});
  }
  for (auto& adj : adjacency_) {
    std::sort(adj.begin(), adj.end(), [](const Adjacent& x, const Adjacent& y) { return x.node < y.node; });
    for (std::size_t i = 1; i < adj.size(); ++i) {
      if (adj[i].node == adj[i - 1].node) {
        const Edge& e = edges_[static_cast<std::size_t>(adj[i].edge)];
        std::ostringstream os;
        os << "duplicate edge [" << e.a << "," << e.b << "]";
        throw ScenarioError(os.str());
      }
    }
  }
}

std::optional<int> NetworkGraph::edge_index(NodeId a, NodeId b) const {
  if (a < 1 || a > num_nodes_) return std::nullopt;
  for (const Adjacent& adj : neighbors(a))
    if (adj.node == b) return adj.edge;
  return std::nullopt;
}

bool NetworkGraph::connected() const {
  std::vector<char> seen(static_cast<std::size_t>(num_nodes_) + 1, 0);
  std::vector<NodeId> stack{1};
  seen[1] = 1;
  int count = 1;
  while (!stack.empty()) {
    const NodeId v = stack.back();
    stack.pop_back();
    for (const Adjacent& adj : neighbors(v)) {
      if (!seen[static_cast<std::size_t>(adj.node)]) {
        seen[static_cast<std::size_t>(adj.node)] = 1;
        ++count;
        stack.push_back(adj.node);
      }
    }
  }
  return count == num_nodes_;
}

namespace {

std::optional<int> find_index(const std::vector<NodeId>& sorted, NodeId v) {
  auto it = std::lower_bound(sorted.begin(), sorted.end(), v);
  if (it == sorted.end() || *it != v) return std::nullopt;
  return static_cast<int>(it - sorted.begin());
}

}  // namespace

std::optional<int> UnitRegistry::source_index(NodeId v) const { return find_index(sources, v); }
std::optional<int> UnitRegistry::sink_index(NodeId v) const { return find_index(sinks, v); }
std::optional<int> UnitRegistry::storage_index(NodeId v) const { return find_index(storages, v); }

namespace {

class Validator {
 public:
  explicit Validator(const Scenario& s) : s_(s) {}

  [[noreturn]] void fail(const std::string& what, NodeId node = 0, int step = -1) const {
    std::ostringstream os;
    os << what;
    if (node > 0) os << " (node " << s_.external(node);
    if (node > 0 && step >= 0) os << ", step " << step;
    if (node > 0) os << ")";
    throw ScenarioError(os.str());
  }

  void length(const std::vector<double>& v, const char* name, NodeId node) const {
    if (static_cast<int>(v.size()) != s_.timeline.num_steps)
      fail(std::string("profile ") + name + " must have exactly N_t entries", node);
    for (std::size_t k = 0; k < v.size(); ++k)
      if (!std::isfinite(v[k])) fail(std::string("profile ") + name + " has a non-finite value", node, static_cast<int>(k));
  }

  void ordered(const std::vector<double>& lo, const std::vector<double>& mid, const std::vector<double>& hi,
               const char* what, NodeId node) const {
    for (std::size_t k = 0; k < lo.size(); ++k)
      if (!(lo[k] <= mid[k] && mid[k] <= hi[k])) fail(std::string("bound violation: ") + what, node, static_cast<int>(k));
  }

 private:
  const Scenario& s_;
};

bool strictly_sorted(const std::vector<NodeId>& v) {
  return std::adjacent_find(v.begin(), v.end(), [](NodeId a, NodeId b) { return a >= b; }) == v.end();
}

}  // namespace

void validate(const Scenario& s) {
  const Validator check(s);
  const Timeline& t = s.timeline;
  const int V = s.graph.num_nodes();
  if (static_cast<int>(s.external_id.size()) != V + 1) check.fail("alias table does not cover every node");
  if (!s.graph.connected()) check.fail("graph is not connected");
  if (!(t.tau_min > 0.0)) check.fail("tau_min must be positive");
  if (t.num_steps < 1 || t.steps_per_period < 1) check.fail("N_t and N_c must be positive");
  if (t.num_steps % t.steps_per_period != 0) check.fail("N_c must divide N_t");
  if (t.num_clusters < 1 || t.num_clusters > V) check.fail("M must lie in 1..V");
  if (t.horizon < 1) check.fail("N_p must be positive");

  const UnitRegistry& u = s.units;
  for (const auto* list : {&u.sources, &u.sinks, &u.storages, &u.dual_role}) {
    if (!strictly_sorted(*list)) check.fail("unit lists must be ascending without duplicates");
    for (NodeId v : *list)
      if (v < 1 || v > V) check.fail("unit references an unknown node");
  }
  for (NodeId v : u.storages)
    if (!u.source_index(v)) check.fail("storage must be located at a source node", v);
  for (NodeId v : u.sources) {
    if (u.sink_index(v) && !std::binary_search(u.dual_role.begin(), u.dual_role.end(), v))
      check.fail("node is both source and sink without a dual_role declaration", v);
  }
  if (s.sources.size() != u.sources.size() || s.sinks.size() != u.sinks.size() || s.storages.size() != u.storages.size())
    check.fail("profile sections do not match the unit lists");

  for (std::size_t i = 0; i < s.sources.size(); ++i) {
    const SourceProfile& p = s.sources[i];
    if (p.node != u.sources[i]) check.fail("source profiles out of order", p.node);
    check.length(p.up, "S_up", p.node);
    check.length(p.dn, "S_dn", p.node);
    check.length(p.nom, "S_nom", p.node);
    check.ordered(p.dn, p.nom, p.up, "S_dn <= S_nom <= S_up", p.node);
  }
  for (std::size_t j = 0; j < s.sinks.size(); ++j) {
    const SinkProfile& p = s.sinks[j];
    if (p.node != u.sinks[j]) check.fail("sink profiles out of order", p.node);
    check.length(p.up, "D_up", p.node);
    check.length(p.dn, "D_dn", p.node);
    check.length(p.nom, "D_nom", p.node);
    check.length(p.actual, "D_actual", p.node);
    check.ordered(p.dn, p.nom, p.up, "D_dn <= D_nom <= D_up", p.node);
    check.ordered(p.dn, p.actual, p.up, "D_dn <= D_actual <= D_up", p.node);
  }
  for (std::size_t b = 0; b < s.storages.size(); ++b) {
    const StorageProfile& p = s.storages[b];
    if (p.node != u.storages[b]) check.fail("storage profiles out of order", p.node);
    check.length(p.b_dn, "b_dn", p.node);
    check.length(p.b_up, "b_up", p.node);
    check.length(p.e_dn, "e_dn", p.node);
    check.length(p.e_up, "e_up", p.node);
    const std::vector<double> zero(static_cast<std::size_t>(t.num_steps), 0.0);
    check.ordered(p.b_dn, zero, p.b_up, "b_dn <= 0 <= b_up", p.node);
    check.ordered(p.e_dn, zero, p.e_up, "e_dn <= 0 <= e_up", p.node);
    if (!(p.e_dn[0] <= p.e0 && p.e0 <= p.e_up[0])) check.fail("bound violation: e_dn(0) <= e0 <= e_up(0)", p.node, 0);
  }
}

VariationBounds compute_variation_bounds(const Scenario& s) {
  VariationBounds vb;
  for (const SourceProfile& p : s.sources) {
    std::vector<double> up(p.up.size()), dn(p.up.size());
    for (std::size_t k = 0; k < p.up.size(); ++k) {
      up[k] = std::max(0.0, p.up[k] - p.nom[k]);
      dn[k] = std::min(0.0, p.dn[k] - p.nom[k]);
    }
    vb.source_up.push_back(std::move(up));
    vb.source_dn.push_back(std::move(dn));
  }
  for (const SinkProfile& p : s.sinks) {
    std::vector<double> up(p.up.size()), dn(p.up.size());
    for (std::size_t k = 0; k < p.up.size(); ++k) {
      up[k] = std::max(0.0, p.up[k] - p.nom[k]);
      dn[k] = std::min(0.0, p.dn[k] - p.nom[k]);
    }
    vb.sink_up.push_back(std::move(up));
    vb.sink_dn.push_back(std::move(dn));
  }
  return vb;
}

std::vector<double> actual_load_deviation(const Scenario& s, int k) {
  std::vector<double> d;
  d.reserve(s.sinks.size());
  for (const SinkProfile& p : s.sinks) {
    const auto kk = static_cast<std::size_t>(k);
    d.push_back(p.actual[kk] - p.nom[kk]);
  }
  return d;
}

}  // namespace gridclust
