#include "gridclust/partitioner.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>

#include "gridclust/csv.hpp"

namespace gridclust {
namespace {

struct Level {
  int n = 0;
  std::vector<int> vw;                                // node weights (fine node counts)
  std::vector<std::vector<std::pair<int, double>>> adj;  // ascending neighbor
  std::vector<int> to_coarse;                         // filled when a coarser level exists
};

Level finest(const NetworkGraph& g, const std::vector<double>& w) {
  Level l;
  l.n = g.num_nodes();
  l.vw.assign(static_cast<std::size_t>(l.n), 1);
  l.adj.resize(static_cast<std::size_t>(l.n));
  for (NodeId v = 1; v <= l.n; ++v)
    for (const Adjacent& a : g.neighbors(v))
      l.adj[static_cast<std::size_t>(v - 1)].emplace_back(a.node - 1, w[static_cast<std::size_t>(a.edge)]);
  return l;
}

// Heavy-edge matching in ascending node order; ties go to the lowest id.
Level coarsen(Level& fine, int max_vw) {
  const auto n = static_cast<std::size_t>(fine.n);
  std::vector<int> match(n, -1);
  fine.to_coarse.assign(n, -1);
  int nc = 0;
  for (std::size_t u = 0; u < n; ++u) {
    if (match[u] >= 0) continue;
    int best = -1;
    double best_w = -1.0;
    for (const auto& [v, w] : fine.adj[u]) {
      const auto vs = static_cast<std::size_t>(v);
      if (match[vs] >= 0 || fine.vw[u] + fine.vw[vs] > max_vw) continue;
      if (w > best_w) {
        best_w = w;
        best = v;
      }
    }
    match[u] = best >= 0 ? best : static_cast<int>(u);
    if (best >= 0) match[static_cast<std::size_t>(best)] = static_cast<int>(u);
    fine.to_coarse[u] = nc;
    if (best >= 0) fine.to_coarse[static_cast<std::size_t>(best)] = nc;
    ++nc;
  }
  Level c;
  c.n = nc;
  c.vw.assign(static_cast<std::size_t>(nc), 0);
  std::vector<std::map<int, double>> acc(static_cast<std::size_t>(nc));
  for (std::size_t u = 0; u < n; ++u) {
    const int cu = fine.to_coarse[u];
    c.vw[static_cast<std::size_t>(cu)] += fine.vw[u];
    for (const auto& [v, w] : fine.adj[u]) {
      const int cv = fine.to_coarse[static_cast<std::size_t>(v)];
      if (cv != cu) acc[static_cast<std::size_t>(cu)][cv] += w;
    }
  }
  c.adj.resize(static_cast<std::size_t>(nc));
  for (std::size_t u = 0; u < acc.size(); ++u) c.adj[u].assign(acc[u].begin(), acc[u].end());
  return c;
}

// Partition state on one level with incremental bookkeeping.
class State {
 public:
  State(const Level& l, int m, BalanceRange range, std::vector<int> part)
      : l_(&l), m_(m), range_(range), part_(std::move(part)), pw_(static_cast<std::size_t>(m), 0), cnt_(static_cast<std::size_t>(m), 0) {
    for (int u = 0; u < l_->n; ++u) {
      pw_[static_cast<std::size_t>(part_[static_cast<std::size_t>(u)])] += vw(u);
      ++cnt_[static_cast<std::size_t>(part_[static_cast<std::size_t>(u)])];
    }
    cut_ = 0.0;
    for (int u = 0; u < l_->n; ++u)
      for (const auto& [v, w] : l_->adj[static_cast<std::size_t>(u)])
        if (u < v && part_of(u) != part_of(v)) cut_ += w;
  }

  int part_of(int u) const { return part_[static_cast<std::size_t>(u)]; }
  int vw(int u) const { return l_->vw[static_cast<std::size_t>(u)]; }
  int weight(int h) const { return pw_[static_cast<std::size_t>(h)]; }
  double cut() const { return cut_; }
  const std::vector<int>& parts() const { return part_; }

  bool balanced() const {
    for (int h = 0; h < m_; ++h)
      if (weight(h) < range_.lo || weight(h) > range_.hi || cnt_[static_cast<std::size_t>(h)] == 0) return false;
    return true;
  }

  // Weight from u into cluster h.
  double link(int u, int h) const {
    double s = 0.0;
    for (const auto& [v, w] : l_->adj[static_cast<std::size_t>(u)])
      if (part_of(v) == h) s += w;
    return s;
  }

  // Whether cluster part_of(u) stays connected and non-empty without u.
  bool removable(int u) const {
    const int h = part_of(u);
    if (cnt_[static_cast<std::size_t>(h)] <= 1) return false;
    int inside = 0, start = -1;
    for (const auto& [v, w] : l_->adj[static_cast<std::size_t>(u)])
      if (part_of(v) == h) {
        ++inside;
        if (start < 0) start = v;
      }
    if (inside == 0) return false;
    if (inside == 1) return true;
    std::vector<char> seen(static_cast<std::size_t>(l_->n), 0);
    seen[static_cast<std::size_t>(u)] = 1;
    seen[static_cast<std::size_t>(start)] = 1;
    std::vector<int> stack{start};
    int reached = 1;
    while (!stack.empty()) {
      const int x = stack.back();
      stack.pop_back();
      for (const auto& [y, w] : l_->adj[static_cast<std::size_t>(x)]) {
        if (seen[static_cast<std::size_t>(y)] || part_of(y) != h) continue;
        seen[static_cast<std::size_t>(y)] = 1;
        ++reached;
        stack.push_back(y);
      }
    }
    return reached == cnt_[static_cast<std::size_t>(h)] - 1;
  }

  void move(int u, int g) {
    const int h = part_of(u);
    cut_ += link(u, h) - link(u, g);
    pw_[static_cast<std::size_t>(h)] -= vw(u);
    pw_[static_cast<std::size_t>(g)] += vw(u);
    --cnt_[static_cast<std::size_t>(h)];
    ++cnt_[static_cast<std::size_t>(g)];
    part_[static_cast<std::size_t>(u)] = g;
  }

  struct Move {
    int u = -1;
    int to = -1;
    double gain = 0.0;
  };

  // Boundary moves into adjacent clusters, best gain first, then lowest node
  // and cluster id.
  std::vector<Move> candidates(const std::vector<char>* locked) const {
    std::vector<Move> out;
    for (int u = 0; u < l_->n; ++u) {
      if (locked && (*locked)[static_cast<std::size_t>(u)]) continue;
      const int h = part_of(u);
      std::vector<int> targets;
      for (const auto& [v, w] : l_->adj[static_cast<std::size_t>(u)])
        if (part_of(v) != h) targets.push_back(part_of(v));
      std::sort(targets.begin(), targets.end());
      targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
      if (targets.empty()) continue;
      const double own = link(u, h);
      for (int g : targets) out.push_back({u, g, link(u, g) - own});
    }
    std::stable_sort(out.begin(), out.end(), [](const Move& a, const Move& b) { return a.gain > b.gain; });
    return out;
  }

  bool fits(const Move& mv) const {
    const int h = part_of(mv.u);
    return weight(h) - vw(mv.u) >= range_.lo && weight(mv.to) + vw(mv.u) <= range_.hi;
  }

  // Moves nodes until every cluster weight lies in range. Each move reduces
  // the total violation, so the loop terminates.
  bool rebalance() {
    auto violation = [&](int h, int delta) {
      const double x = weight(h) + delta;
      return x < range_.lo ? range_.lo - x : x > range_.hi ? x - range_.hi : 0.0;
    };
    for (int guard = 0; guard < 4 * l_->n * m_ && !balanced(); ++guard) {
      bool moved = false;
      for (const Move& mv : candidates(nullptr)) {
        const int h = part_of(mv.u), w = vw(mv.u);
        const double before = violation(h, 0) + violation(mv.to, 0);
        const double after = violation(h, -w) + violation(mv.to, w);
        if (after < before && removable(mv.u)) {
          move(mv.u, mv.to);
          moved = true;
          break;
        }
      }
      if (!moved) return false;
    }
    return balanced();
  }

  // Boundary FM passes: tentative moves in best-gain order, each node moved
  // at most once per pass, then rollback to the best prefix. The cut never
  // increases across a pass.
  void refine(int max_passes) {
    for (int pass = 0; pass < max_passes; ++pass) {
      std::vector<char> locked(static_cast<std::size_t>(l_->n), 0);
      std::vector<std::pair<int, int>> log;  // (node, previous cluster)
      const double start = cut_;
      double best = start;
      std::size_t best_len = 0;
      int since_best = 0;
      while (since_best < 25) {
        bool moved = false;
        for (const Move& mv : candidates(&locked)) {
          if (!fits(mv) || !removable(mv.u)) continue;
          log.emplace_back(mv.u, part_of(mv.u));
          move(mv.u, mv.to);
          locked[static_cast<std::size_t>(mv.u)] = 1;
          moved = true;
          break;
        }
        if (!moved) break;
        if (cut_ < best - 1e-12 * (1.0 + std::abs(best))) {
          best = cut_;
          best_len = log.size();
          since_best = 0;
        } else {
          ++since_best;
        }
      }
      while (log.size() > best_len) {
        move(log.back().first, log.back().second);
        log.pop_back();
      }
      if (best_len == 0) break;
      cut_ = best;
    }
  }

 private:
  const Level* l_;
  int m_;
  BalanceRange range_;
  std::vector<int> part_;
  std::vector<int> pw_, cnt_;
  double cut_ = 0.0;
};

std::vector<int> hop_distances(const Level& l, const std::vector<int>& roots) {
  std::vector<int> d(static_cast<std::size_t>(l.n), -1);
  std::vector<int> queue;
  for (int r : roots) {
    d[static_cast<std::size_t>(r)] = 0;
    queue.push_back(r);
  }
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const int u = queue[head];
    for (const auto& [v, w] : l.adj[static_cast<std::size_t>(u)]) {
      if (d[static_cast<std::size_t>(v)] >= 0) continue;
      d[static_cast<std::size_t>(v)] = d[static_cast<std::size_t>(u)] + 1;
      queue.push_back(v);
    }
  }
  return d;
}

// Greedy graph growing from farthest-first seeds. The lightest region that
// still has a frontier absorbs its most strongly attached frontier node.
std::vector<int> grow(const Level& l, int m, int first_seed, double target) {
  std::vector<int> seeds{first_seed};
  while (static_cast<int>(seeds.size()) < m) {
    const std::vector<int> d = hop_distances(l, seeds);
    int best = -1;
    for (int u = 0; u < l.n; ++u)
      if (d[static_cast<std::size_t>(u)] > 0 && (best < 0 || d[static_cast<std::size_t>(u)] > d[static_cast<std::size_t>(best)])) best = u;
    seeds.push_back(best);
  }
  std::vector<int> part(static_cast<std::size_t>(l.n), -1);
  std::vector<double> weight(static_cast<std::size_t>(m), 0.0);
  for (int h = 0; h < m; ++h) {
    part[static_cast<std::size_t>(seeds[static_cast<std::size_t>(h)])] = h;
    weight[static_cast<std::size_t>(h)] = l.vw[static_cast<std::size_t>(seeds[static_cast<std::size_t>(h)])];
  }
  for (int assigned = m; assigned < l.n; ++assigned) {
    // Per region: best frontier node by attachment weight, lowest id on ties.
    std::vector<int> pick(static_cast<std::size_t>(m), -1);
    std::vector<double> attach(static_cast<std::size_t>(m), -1.0);
    for (int u = 0; u < l.n; ++u) {
      if (part[static_cast<std::size_t>(u)] >= 0) continue;
      std::vector<double> to(static_cast<std::size_t>(m), 0.0);
      std::vector<char> touches(static_cast<std::size_t>(m), 0);
      for (const auto& [v, w] : l.adj[static_cast<std::size_t>(u)]) {
        const int h = part[static_cast<std::size_t>(v)];
        if (h < 0) continue;
        to[static_cast<std::size_t>(h)] += w;
        touches[static_cast<std::size_t>(h)] = 1;
      }
      for (std::size_t h = 0; h < to.size(); ++h)
        if (touches[h] && to[h] > attach[h]) {
          attach[h] = to[h];
          pick[h] = u;
        }
    }
    int region = -1;
    for (int pass = 0; pass < 2 && region < 0; ++pass)
      for (int h = 0; h < m; ++h) {
        const auto hs = static_cast<std::size_t>(h);
        if (pick[hs] < 0 || (pass == 0 && weight[hs] >= target)) continue;
        if (region < 0 || weight[hs] < weight[static_cast<std::size_t>(region)]) region = h;
      }
    const int u = pick[static_cast<std::size_t>(region)];
    part[static_cast<std::size_t>(u)] = region;
    weight[static_cast<std::size_t>(region)] += l.vw[static_cast<std::size_t>(u)];
  }
  return part;
}

// Peels regions off one at a time. A node is taken together with any
// fragments its removal would cut off from the unassigned remainder, so the
// remainder stays connected and the last region is connected too.
std::vector<int> peel(const Level& l, int m, int first_seed, double max_weight) {
  std::vector<int> part(static_cast<std::size_t>(l.n), -1);

  // {u} plus every remainder component that loses touch with the largest
  // one (lowest node on ties) once u is gone.
  auto bundle = [&](int u) {
    std::vector<int> comp(static_cast<std::size_t>(l.n), -1);
    std::vector<std::vector<int>> comps;
    for (int s0 = 0; s0 < l.n; ++s0) {
      if (s0 == u || part[static_cast<std::size_t>(s0)] >= 0 || comp[static_cast<std::size_t>(s0)] >= 0) continue;
      comps.emplace_back();
      const int id = static_cast<int>(comps.size()) - 1;
      std::vector<int> stack{s0};
      comp[static_cast<std::size_t>(s0)] = id;
      while (!stack.empty()) {
        const int x = stack.back();
        stack.pop_back();
        comps.back().push_back(x);
        for (const auto& [y, w] : l.adj[static_cast<std::size_t>(x)]) {
          if (y == u || part[static_cast<std::size_t>(y)] >= 0 || comp[static_cast<std::size_t>(y)] >= 0) continue;
          comp[static_cast<std::size_t>(y)] = id;
          stack.push_back(y);
        }
      }
    }
    std::size_t main = 0;
    for (std::size_t i = 1; i < comps.size(); ++i)
      if (comps[i].size() > comps[main].size()) main = i;
    std::vector<int> out{u};
    for (std::size_t i = 0; i < comps.size(); ++i)
      if (i != main) out.insert(out.end(), comps[i].begin(), comps[i].end());
    return out;
  };
  auto weight_of = [&](const std::vector<int>& nodes) {
    double w = 0.0;
    for (int v : nodes) w += l.vw[static_cast<std::size_t>(v)];
    return w;
  };

  for (int h = 0; h + 1 < m; ++h) {
    int seed = first_seed;
    if (h > 0) {
      // Next seed: the unassigned node farthest from everything assigned
      // whose bundle is a single node.
      std::vector<int> assigned;
      for (int v = 0; v < l.n; ++v)
        if (part[static_cast<std::size_t>(v)] >= 0) assigned.push_back(v);
      const std::vector<int> d = hop_distances(l, assigned);
      seed = -1;
      for (int v = 0; v < l.n; ++v)
        if (part[static_cast<std::size_t>(v)] < 0 && (seed < 0 || d[static_cast<std::size_t>(v)] > d[static_cast<std::size_t>(seed)]) &&
            bundle(v).size() == 1)
          seed = v;
    }
    if (seed < 0) return {};
    const std::vector<int> first = bundle(seed);
    double weight = weight_of(first);
    if (weight > max_weight) return {};
    for (int v : first) part[static_cast<std::size_t>(v)] = h;
    double left = 0.0;
    for (int v = 0; v < l.n; ++v)
      if (part[static_cast<std::size_t>(v)] < 0 || part[static_cast<std::size_t>(v)] == h) left += l.vw[static_cast<std::size_t>(v)];
    const double share = left / (m - h);
    while (weight < share) {
      std::vector<int> pick;
      double attach = -1.0;
      for (int u = 0; u < l.n; ++u) {
        if (part[static_cast<std::size_t>(u)] >= 0) continue;
        double to = 0.0;
        bool touches = false;
        for (const auto& [v, w] : l.adj[static_cast<std::size_t>(u)])
          if (part[static_cast<std::size_t>(v)] == h) {
            to += w;
            touches = true;
          }
        if (!touches || to <= attach) continue;
        std::vector<int> b = bundle(u);
        if (weight + weight_of(b) > max_weight) continue;
        attach = to;
        pick = std::move(b);
      }
      if (pick.empty()) break;
      for (int v : pick) part[static_cast<std::size_t>(v)] = h;
      weight += weight_of(pick);
    }
  }
  for (int& x : part)
    if (x < 0) x = m - 1;
  return part;
}

struct TrialResult {
  std::vector<int> part;  // fine level, 0-based clusters
  double cut = 0.0;
  double initial_cut = 0.0;
};

// Seeds are spread over the node order by rank; a negative rank -1 - u
// grows only on the finest level, from node u.
std::optional<TrialResult> run_trial(std::vector<Level>& levels, int m, BalanceRange range, double target, int seed_rank) {
  // Grow on the coarsest level whose greedy split can be balanced.
  const int coarsest = seed_rank < 0 ? 0 : static_cast<int>(levels.size()) - 1;
  for (int top = coarsest; top >= 0; --top) {
    const Level& coarse = levels[static_cast<std::size_t>(top)];
    const int seed = seed_rank < 0 ? -1 - seed_rank
                                   : static_cast<int>((static_cast<long long>(seed_rank) * coarse.n) / 8) % coarse.n;
    State st(coarse, m, range, grow(coarse, m, seed, target));
    if (!st.rebalance()) {
      std::vector<int> peeled = peel(coarse, m, seed, range.hi);
      if (peeled.empty()) continue;
      st = State(coarse, m, range, std::move(peeled));
      if (!st.rebalance()) continue;
    }
    TrialResult r;
    r.initial_cut = st.cut();
    st.refine(8);
    std::vector<int> part = st.parts();
    r.cut = st.cut();
    for (int lv = top - 1; lv >= 0; --lv) {
      const Level& fine = levels[static_cast<std::size_t>(lv)];
      std::vector<int> projected(static_cast<std::size_t>(fine.n));
      for (int u = 0; u < fine.n; ++u)
        projected[static_cast<std::size_t>(u)] = part[static_cast<std::size_t>(fine.to_coarse[static_cast<std::size_t>(u)])];
      State fs(fine, m, range, std::move(projected));
      fs.refine(8);
      part = fs.parts();
      r.cut = fs.cut();
    }
    r.part = std::move(part);
    return r;
  }
  return std::nullopt;
}

// Reassigns disconnected fragments to the neighboring cluster with the
// largest connecting weight until every cluster is connected.
void restore_connectivity(const NetworkGraph& g, const std::vector<double>& w, std::vector<int>& assign, int m) {
  const int n = g.num_nodes();
  for (bool changed = true; changed;) {
    changed = false;
    for (int h = 1; h <= m && !changed; ++h) {
      std::vector<int> comp(static_cast<std::size_t>(n) + 1, -1);
      std::vector<std::vector<NodeId>> parts;
      for (NodeId s = 1; s <= n; ++s) {
        if (assign[static_cast<std::size_t>(s)] != h || comp[static_cast<std::size_t>(s)] >= 0) continue;
        parts.emplace_back();
        std::vector<NodeId> stack{s};
        comp[static_cast<std::size_t>(s)] = static_cast<int>(parts.size()) - 1;
        while (!stack.empty()) {
          const NodeId v = stack.back();
          stack.pop_back();
          parts.back().push_back(v);
          for (const Adjacent& a : g.neighbors(v))
            if (assign[static_cast<std::size_t>(a.node)] == h && comp[static_cast<std::size_t>(a.node)] < 0) {
              comp[static_cast<std::size_t>(a.node)] = comp[static_cast<std::size_t>(s)];
              stack.push_back(a.node);
            }
        }
      }
      if (parts.size() <= 1) continue;
      // Keep the largest fragment (lowest id on ties); move the smallest.
      std::size_t keep = 0, drop = 0;
      for (std::size_t i = 1; i < parts.size(); ++i) {
        if (parts[i].size() > parts[keep].size()) keep = i;
        if (parts[i].size() < parts[drop].size()) drop = i;
      }
      if (drop == keep) drop = keep == 0 ? 1 : 0;
      std::map<int, double> link;
      for (NodeId v : parts[drop])
        for (const Adjacent& a : g.neighbors(v)) {
          const int c = assign[static_cast<std::size_t>(a.node)];
          if (c != h) link[c] += w[static_cast<std::size_t>(a.edge)];
        }
      int target = -1;
      double best = -1.0;
      for (const auto& [c, lw] : link)
        if (lw > best) {
          best = lw;
          target = c;
        }
      if (target < 0) continue;
      for (NodeId v : parts[drop]) assign[static_cast<std::size_t>(v)] = target;
      changed = true;
    }
  }
}

}  // namespace

std::vector<NodeId> Partition::members(int h) const {
  std::vector<NodeId> out;
  for (std::size_t v = 1; v < assignment.size(); ++v)
    if (assignment[v] == h) out.push_back(static_cast<NodeId>(v));
  return out;
}

std::vector<int> Partition::sizes() const {
  std::vector<int> out(static_cast<std::size_t>(num_clusters), 0);
  for (std::size_t v = 1; v < assignment.size(); ++v) ++out[static_cast<std::size_t>(assignment[v] - 1)];
  return out;
}

BalanceRange balance_range(int num_nodes, int num_clusters, double balance_tol) {
  return {std::floor(static_cast<double>(num_nodes) / num_clusters) / balance_tol,
          balance_tol * std::ceil(static_cast<double>(num_nodes) / num_clusters)};
}

double cut_weight(const NetworkGraph& graph, const std::vector<double>& weights, const std::vector<int>& assignment) {
  double cut = 0.0;
  for (int e = 0; e < graph.num_edges(); ++e) {
    const Edge& ed = graph.edge(e);
    if (assignment[static_cast<std::size_t>(ed.a)] != assignment[static_cast<std::size_t>(ed.b)])
      cut += weights[static_cast<std::size_t>(e)];
  }
  return cut;
}

Partition partition_kway(const NetworkGraph& graph, const std::vector<double>& weights, int m, double balance_tol) {
  const int n = graph.num_nodes();
  if (m < 1 || m > n) throw ScenarioError("number of clusters M = " + std::to_string(m) + " must lie in 1.." + std::to_string(n));
  if (!(balance_tol >= 1.0)) throw ScenarioError("balance tolerance must be at least 1");
  if (static_cast<int>(weights.size()) != graph.num_edges()) throw ScenarioError("edge weight count does not match the graph");
  for (double w : weights)
    if (!(w >= 0.0) || !std::isfinite(w)) throw ScenarioError("edge weights must be finite and non-negative");

  const BalanceRange range = balance_range(n, m, balance_tol);
  const double min_size = std::ceil(range.lo - 1e-9), max_size = std::floor(range.hi + 1e-9);
  const BalanceRange sizes{min_size, max_size};

  Partition p;
  p.num_clusters = m;
  p.assignment.assign(static_cast<std::size_t>(n) + 1, 1);
  p.assignment[0] = 0;
  if (m == 1) return p;

  std::vector<Level> levels{finest(graph, weights)};
  const int coarsen_to = std::max(10, 5 * m);
  const int max_vw = std::max(1, static_cast<int>(std::ceil(static_cast<double>(n) / m)) / 3);
  while (levels.back().n > coarsen_to) {
    Level next = coarsen(levels.back(), max_vw);
    if (next.n > 0.9 * levels.back().n) {
      levels.back().to_coarse.clear();
      break;
    }
    levels.push_back(std::move(next));
  }

  const double target = static_cast<double>(n) / m;
  std::optional<TrialResult> best;
  for (int t = 0; t < 8; ++t) {
    auto r = run_trial(levels, m, sizes, target, t);
    if (r && (!best || r->cut < best->cut - 1e-12 * (1.0 + std::abs(best->cut)))) best = std::move(r);
  }
  for (int u = 0; u < n && !best; ++u) best = run_trial(levels, m, sizes, target, -1 - u);
  if (!best) throw SolverError("partitioner found no balanced connected split");

  // Canonical cluster numbering: by lowest member node.
  std::vector<int> label(static_cast<std::size_t>(m), 0);
  int next_label = 1;
  for (int u = 0; u < n; ++u) {
    int& l = label[static_cast<std::size_t>(best->part[static_cast<std::size_t>(u)])];
    if (l == 0) l = next_label++;
    p.assignment[static_cast<std::size_t>(u) + 1] = l;
  }
  restore_connectivity(graph, weights, p.assignment, m);
  p.cut_weight = cut_weight(graph, weights, p.assignment);
  p.initial_cut = best->initial_cut;

  const std::string problem = check_partition(graph, weights, p, balance_tol);
  if (!problem.empty()) throw SolverError("partitioner: " + problem);
  return p;
}

std::string check_partition(const NetworkGraph& graph, const std::vector<double>& weights, const Partition& p,
                            double balance_tol) {
  const int n = graph.num_nodes(), m = p.num_clusters;
  if (static_cast<int>(p.assignment.size()) != n + 1) return "assignment does not cover every node";
  for (NodeId v = 1; v <= n; ++v)
    if (p.cluster_of(v) < 1 || p.cluster_of(v) > m) return "node " + std::to_string(v) + " has no valid cluster";
  const BalanceRange range = balance_range(n, m, balance_tol);
  const std::vector<int> sizes = p.sizes();
  for (int h = 1; h <= m; ++h) {
    const int size = sizes[static_cast<std::size_t>(h - 1)];
    if (size == 0) return "cluster " + std::to_string(h) + " is empty";
    if (size < range.lo - 1e-9 || size > range.hi + 1e-9)
      return "cluster " + std::to_string(h) + " has " + std::to_string(size) + " nodes, outside the balance range";
    const std::vector<NodeId> nodes = p.members(h);
    std::vector<char> seen(static_cast<std::size_t>(n) + 1, 0);
    std::vector<NodeId> stack{nodes.front()};
    seen[static_cast<std::size_t>(nodes.front())] = 1;
    std::size_t reached = 1;
    while (!stack.empty()) {
      const NodeId v = stack.back();
      stack.pop_back();
      for (const Adjacent& a : graph.neighbors(v))
        if (!seen[static_cast<std::size_t>(a.node)] && p.cluster_of(a.node) == h) {
          seen[static_cast<std::size_t>(a.node)] = 1;
          ++reached;
          stack.push_back(a.node);
        }
    }
    if (reached != nodes.size()) return "cluster " + std::to_string(h) + " is not connected";
  }
  if (std::abs(cut_weight(graph, weights, p.assignment) - p.cut_weight) > 1e-9 * (1.0 + std::abs(p.cut_weight)))
    return "cut weight does not match the assignment";
  return {};
}

UnitRegistry cluster_units(const UnitRegistry& units, const Partition& p, int h) {
  UnitRegistry out;
  auto filter = [&](const std::vector<NodeId>& in, std::vector<NodeId>& dst) {
    for (NodeId v : in)
      if (p.cluster_of(v) == h) dst.push_back(v);
  };
  filter(units.sources, out.sources);
  filter(units.sinks, out.sinks);
  filter(units.storages, out.storages);
  filter(units.dual_role, out.dual_role);
  return out;
}

void write_partition_csv(std::ostream& out, const Partition& p, const Scenario& scenario) {
  out << "node,cluster\n";
  for (std::size_t v = 1; v < p.assignment.size(); ++v)
    CsvRow(out) << static_cast<long long>(scenario.external(static_cast<NodeId>(v))) << p.assignment[v];
}

}  // namespace gridclust
