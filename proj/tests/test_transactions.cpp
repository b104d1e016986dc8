#include <doctest.h>

#include <random>
#include <sstream>

#include "gridclust/transactions.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace gridclust;

namespace {

double oracle_objective(const std::vector<double>& s_dn, const std::vector<double>& s_up, const std::vector<double>& d,
                        const std::vector<std::vector<double>>& cost, double c_s) {
  const auto res = oracle::transaction_lp_objective(s_dn, s_up, d, cost, c_s);
  REQUIRE(res.has_value());
  return *res;
}

// Star graph: every source and sink hangs off hub node 1 with its own length.
Scenario star(int ns, int nd, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> len(0.5, 3.0);
  std::vector<Edge> edges;
  std::vector<NodeId> sources, sinks;
  for (int t = 0; t < ns + nd; ++t) edges.push_back({1, t + 2, len(rng)});
  for (int i = 0; i < ns; ++i) sources.push_back(i + 2);
  for (int j = 0; j < nd; ++j) sinks.push_back(ns + j + 2);
  return fixture::flat_scenario(ns + nd + 1, std::move(edges), sources, sinks, Timeline{5.0, 1, 1, 1, 1});
}

std::vector<std::vector<double>> cost_matrix(const PathTable& t) {
  std::vector<std::vector<double>> c(static_cast<std::size_t>(t.num_sources()));
  for (int i = 0; i < t.num_sources(); ++i)
    for (int j = 0; j < t.num_sinks(); ++j) c[static_cast<std::size_t>(i)].push_back(t.cost(i, j));
  return c;
}

}  // namespace

TEST_CASE("single source, single sink: capacity shortfall goes to slack") {
  const Scenario s = fixture::flat_scenario(2, {{1, 2, 1.0}}, {1}, {2}, Timeline{5.0, 1, 1, 1, 1});
  const PathTable t = all_pairs_source_sink(s.graph, s.units);
  const TransactionLp lp = solve_transaction_lp({-5.0}, {10.0}, {12.0}, t, 100.0);
  CHECK(lp.x[0] == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(lp.slack[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(lp.objective == doctest::Approx(210.0).epsilon(1e-12));
  CHECK(oracle_objective({-5.0}, {10.0}, {12.0}, {{1.0}}, 100.0) == doctest::Approx(210.0));
}

TEST_CASE("zero demand gives zero flows and slack") {
  std::mt19937_64 rng(1);
  const Scenario s = star(3, 3, rng);
  const PathTable t = all_pairs_source_sink(s.graph, s.units);
  const TransactionLp lp = solve_transaction_lp({-4, -4, -4}, {4, 4, 4}, {0, 0, 0}, t, default_slack_penalty(t));
  for (double x : lp.x) CHECK(x == 0.0);
  for (double x : lp.slack) CHECK(x == 0.0);
  CHECK(lp.objective == 0.0);
}

TEST_CASE("x_avg averages absolute up and down flows") {
  Scenario s = fixture::flat_scenario(2, {{1, 2, 1.0}}, {1}, {2}, Timeline{5.0, 1, 1, 1, 1});
  fixture::set_source(s, 1, 0.0, 10.0, -10.0);
  fixture::set_sink(s, 2, 0.0, 4.0, -2.0, 0.0);
  const PathTable t = all_pairs_source_sink(s.graph, s.units);
  const TransactionPlan plan = solve_transactions(compute_variation_bounds(s), t, 0, 1, default_slack_penalty(t));
  CHECK(plan.steps[0].up.x[0] == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(plan.steps[0].dn.x[0] == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(plan.steps[0].x_avg[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(plan.c_s == 10.0);
  CHECK_THROWS_AS(solve_transactions(compute_variation_bounds(s), t, 0, 1, 1.0), std::invalid_argument);
}

TEST_CASE("random instances match the vertex-enumeration oracle; invariants") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int trial = 0; trial < 40; ++trial) {
    const int ns = 1 + static_cast<int>(rng() % 3), nd = 1 + static_cast<int>(rng() % 3);
    const Scenario s = star(ns, nd, rng);
    const PathTable t = all_pairs_source_sink(s.graph, s.units);
    const double c_s = default_slack_penalty(t);
    std::vector<double> s_dn, s_up, d;
    for (int i = 0; i < ns; ++i) {
      const double a = u(rng), b = u(rng);
      s_dn.push_back(std::min({a, b, 0.0}));
      s_up.push_back(std::max({a, b, 0.0}));
    }
    for (int j = 0; j < nd; ++j) d.push_back(u(rng));

    const TransactionLp lp = solve_transaction_lp(s_dn, s_up, d, t, c_s);
    CHECK(lp.objective == doctest::Approx(oracle_objective(s_dn, s_up, d, cost_matrix(t), c_s)).epsilon(1e-9));

    double all_slack = 0.0, total_d = 0.0, cap_up = 0.0, cap_dn = 0.0, slack = 0.0;
    for (int j = 0; j < nd; ++j) {
      double got = lp.slack[static_cast<std::size_t>(j)];
      for (int i = 0; i < ns; ++i) got += lp.x[static_cast<std::size_t>(i * nd + j)];
      CHECK(std::abs(got - d[static_cast<std::size_t>(j)]) <= 1e-8);
      all_slack += c_s * std::abs(d[static_cast<std::size_t>(j)]);
      total_d += d[static_cast<std::size_t>(j)];
      slack += std::abs(lp.slack[static_cast<std::size_t>(j)]);
    }
    for (int i = 0; i < ns; ++i) {
      double out = 0.0;
      for (int j = 0; j < nd; ++j) out += lp.x[static_cast<std::size_t>(i * nd + j)];
      CHECK(out >= s_dn[static_cast<std::size_t>(i)] - 1e-8);
      CHECK(out <= s_up[static_cast<std::size_t>(i)] + 1e-8);
      cap_up += s_up[static_cast<std::size_t>(i)];
      cap_dn += s_dn[static_cast<std::size_t>(i)];
    }
    CHECK(lp.objective <= all_slack + 1e-9);
    const bool all_nonneg = std::all_of(d.begin(), d.end(), [](double x) { return x >= 0.0; });
    if (all_nonneg && cap_up >= total_d) CHECK(slack <= 1e-8);
    (void)cap_dn;
  }
}

TEST_CASE("Figure 3 projection") {
  const Scenario s = fixture::figure3();
  const PathTable t = all_pairs_source_sink(s.graph, s.units);
  const auto contrib = project_path(t.at(0, 0), 10.0);
  REQUIRE(contrib.size() == 3);
  CHECK(contrib[0].value == -10.0);  // [6,4]
  CHECK(contrib[1].value == -10.0);  // [4,2]
  CHECK(contrib[2].value == 10.0);   // [2,7]

  const TransactionPlan plan = solve_transactions(compute_variation_bounds(s), t, 0, 1, default_slack_penalty(t));
  CHECK(plan.steps[0].x_avg[0] == 10.0);
  const std::vector<double> w = project_transactions(plan, t, s.graph);
  for (int e = 0; e < s.graph.num_edges(); ++e) {
    const Edge& edge = s.graph.edge(e);
    const bool on_path = (edge.a == 4 && edge.b == 6) || (edge.a == 2 && edge.b == 4) || (edge.a == 2 && edge.b == 7);
    CHECK(w[static_cast<std::size_t>(e)] == (on_path ? 10.0 : 0.0));
  }
}

TEST_CASE("opposite crossings of the same edge cancel") {
  // 1 -> 3 runs 1-2-4-3 (crosses [2,4] upward); 6 -> 5 runs 6-4-2-5 (downward).
  const Scenario s = fixture::flat_scenario(6, {{1, 2, 1.0}, {2, 4, 1.0}, {3, 4, 1.0}, {4, 6, 1.0}, {2, 5, 1.0}}, {1, 6},
                                            {3, 5}, Timeline{5.0, 1, 1, 1, 1});
  const PathTable t = all_pairs_source_sink(s.graph, s.units);
  TransactionPlan plan;
  plan.num_sources = 2;
  plan.num_sinks = 2;
  plan.steps.resize(1);
  plan.steps[0].x_avg = {5.0, 0.0, 0.0, 5.0};
  const std::vector<double> w = project_transactions(plan, t, s.graph);
  CHECK(w[static_cast<std::size_t>(*s.graph.edge_index(2, 4))] == 0.0);
  CHECK(w[static_cast<std::size_t>(*s.graph.edge_index(1, 2))] == 5.0);
  CHECK(w[static_cast<std::size_t>(*s.graph.edge_index(4, 6))] == 5.0);
}

TEST_CASE("edge weights match a from-scratch recomputation; invariant to edge orientation") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 4 + static_cast<int>(rng() % 5);
    const NetworkGraph g = fixture::random_connected_graph(n, 0.35, rng);
    std::vector<NodeId> nodes;
    for (NodeId v = 1; v <= n; ++v) nodes.push_back(v);
    std::shuffle(nodes.begin(), nodes.end(), rng);
    const int ns = 1 + static_cast<int>(rng() % 3), nd = 1 + static_cast<int>(rng() % std::min(3, n - ns));
    std::vector<NodeId> src(nodes.begin(), nodes.begin() + ns), snk(nodes.begin() + ns, nodes.begin() + ns + nd);
    std::sort(src.begin(), src.end());
    std::sort(snk.begin(), snk.end());
    std::vector<Edge> edges(g.edges().begin(), g.edges().end());
    Scenario s = fixture::flat_scenario(n, edges, src, snk, Timeline{5.0, 3, 3, 1, 1});
    for (auto& p : s.sources)
      for (int k = 0; k < 3; ++k) {
        p.up[static_cast<std::size_t>(k)] = 10.0 * u(rng);
        p.dn[static_cast<std::size_t>(k)] = -10.0 * u(rng);
      }
    for (auto& p : s.sinks)
      for (int k = 0; k < 3; ++k) {
        p.up[static_cast<std::size_t>(k)] = 10.0 * u(rng);
        p.dn[static_cast<std::size_t>(k)] = -10.0 * u(rng);
      }

    const PathTable t = all_pairs_source_sink(s.graph, s.units);
    const TransactionPlan plan = solve_transactions(compute_variation_bounds(s), t, 0, 3, default_slack_penalty(t));
    const std::vector<double> w = project_transactions(plan, t, s.graph);

    std::vector<double> expect(static_cast<std::size_t>(g.num_edges()), 0.0);
    for (const StepTransactions& st : plan.steps) {
      std::vector<double> net(expect.size(), 0.0);
      for (int i = 0; i < ns; ++i)
        for (int j = 0; j < nd; ++j) {
          const double x = st.x_avg[static_cast<std::size_t>(i * nd + j)];
          CHECK(x >= 0.0);
          const std::vector<NodeId> path = oracle::brute_force_path(g, src[static_cast<std::size_t>(i)], snk[static_cast<std::size_t>(j)]);
          for (std::size_t h = 0; h + 1 < path.size(); ++h) {
            const int e = *g.edge_index(path[h], path[h + 1]);
            net[static_cast<std::size_t>(e)] += path[h] < path[h + 1] ? x : -x;
          }
        }
      for (std::size_t e = 0; e < net.size(); ++e) expect[e] += std::abs(net[e]);
    }
    for (std::size_t e = 0; e < w.size(); ++e) CHECK(w[e] == doctest::Approx(expect[e]).epsilon(1e-12));

    std::vector<Edge> flipped = edges;
    for (Edge& e : flipped) std::swap(e.a, e.b);
    Scenario r = s;
    r.graph = NetworkGraph(n, flipped);
    const PathTable tr = all_pairs_source_sink(r.graph, r.units);
    const std::vector<double> wr =
        project_transactions(solve_transactions(compute_variation_bounds(r), tr, 0, 3, default_slack_penalty(tr)), tr, r.graph);
    CHECK(wr == w);
  }
}

TEST_CASE("parallel and serial plans are bit-identical") {
  std::mt19937_64 rng(2);
  const NetworkGraph g = fixture::random_connected_graph(20, 0.15, rng);
  std::vector<Edge> edges(g.edges().begin(), g.edges().end());
  Scenario s = fixture::flat_scenario(20, edges, {2, 5, 9, 14}, {1, 3, 7, 11, 17, 20}, Timeline{5.0, 8, 8, 2, 1});
  std::uniform_real_distribution<double> u(0.0, 8.0);
  for (auto& p : s.sources)
    for (std::size_t k = 0; k < 8; ++k) {
      p.up[k] = u(rng);
      p.dn[k] = -u(rng);
    }
  for (auto& p : s.sinks)
    for (std::size_t k = 0; k < 8; ++k) {
      p.up[k] = u(rng);
      p.dn[k] = -u(rng);
    }
  const PathTable t = all_pairs_source_sink(s.graph, s.units);
  const VariationBounds vb = compute_variation_bounds(s);
  const TransactionPlan a = solve_transactions(vb, t, 0, 8, default_slack_penalty(t), Exec::kSerial);
  const TransactionPlan b = solve_transactions(vb, t, 0, 8, default_slack_penalty(t), Exec::kParallel);
  for (std::size_t k = 0; k < 8; ++k) {
    CHECK(a.steps[k].x_avg == b.steps[k].x_avg);
    CHECK(a.steps[k].up.objective == b.steps[k].up.objective);
  }
  CHECK(project_transactions(a, t, s.graph, Exec::kSerial) == project_transactions(b, t, s.graph, Exec::kParallel));

  std::ostringstream out;
  write_edge_weights_csv(out, project_transactions(a, t, s.graph), s);
  CHECK(out.str().rfind("a,b,w\n", 0) == 0);
}
