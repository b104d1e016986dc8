// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "gridclust/report.hpp"
#include "gridclust/scenario_io.hpp"
#include "gridclust/simulation.hpp"
#include "gridclust/synthetic.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace gridclust;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects the first few failure notes of a criterion.
class Notes {
 public:
  void fail(const std::string& what) {
    ok_ = false;
    if (count_++ < 3) os_ << (os_.tellp() > 0 ? "; " : "") << what;
  }
  bool ok() const { return ok_; }
  std::string text() const {
    std::string s = os_.str();
    if (count_ > 3) s += "; +" + std::to_string(count_ - 3) + " more";
    return s;
  }

 private:
  bool ok_ = true;
  int count_ = 0;
  std::ostringstream os_;
};

std::string num(double v, int precision = 3) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

Outcome figure3_reproduction() {
  Notes n;
  const Scenario s = fixture::figure3();
  const PathTable t = all_pairs_source_sink(s.graph, s.units, Exec::kSerial);
  const Path& p = t.at(0, 0);
  if (p.nodes != std::vector<NodeId>{6, 4, 2, 7}) n.fail("path is not 6-4-2-7");
  if (p.cost != 3.0) n.fail("path cost " + num(p.cost));
  const auto contrib = project_path(p, 10.0);
  std::vector<double> signs;
  for (const auto& c : contrib) signs.push_back(c.value);
  if (signs != std::vector<double>{-10.0, -10.0, 10.0}) n.fail("signed projections differ");
  const TransactionPlan plan =
      solve_transactions(compute_variation_bounds(s), t, 0, 1, default_slack_penalty(t), Exec::kSerial);
  const std::vector<double> w = project_transactions(plan, t, s.graph, Exec::kSerial);
  for (int e = 0; e < s.graph.num_edges(); ++e) {
    const Edge& edge = s.graph.edge(e);
    const bool on_path = (edge.a == 4 && edge.b == 6) || (edge.a == 2 && edge.b == 4) || (edge.a == 2 && edge.b == 7);
    if (w[static_cast<std::size_t>(e)] != (on_path ? 10.0 : 0.0))
      n.fail("w[" + std::to_string(edge.a) + "," + std::to_string(edge.b) + "] = " + num(w[static_cast<std::size_t>(e)], 17));
  }
  return {n.ok(), n.ok() ? "path 6-4-2-7 cost 3, projections (-10,-10,+10), w = 10 on the path and 0 elsewhere" : n.text()};
}

// Star network: every unit hangs off hub 1.
Scenario star(int ns, int nd, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> len(0.5, 3.0);
  std::vector<Edge> edges;
  std::vector<NodeId> sources, sinks;
  for (int t = 0; t < ns + nd; ++t) edges.push_back({1, t + 2, len(rng)});
  for (int i = 0; i < ns; ++i) sources.push_back(i + 2);
  for (int j = 0; j < nd; ++j) sinks.push_back(ns + j + 2);
  return fixture::flat_scenario(ns + nd + 1, std::move(edges), sources, sinks, Timeline{5.0, 1, 1, 1, 1});
}

Outcome transaction_oracle() {
  Notes n;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  double worst = 0.0;
  int slack_checks = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int ns = 1 + static_cast<int>(rng() % 3), nd = 1 + static_cast<int>(rng() % 3);
    const Scenario s = star(ns, nd, rng);
    const PathTable t = all_pairs_source_sink(s.graph, s.units, Exec::kSerial);
    const double c_s = default_slack_penalty(t);
    double max_c = 0.0;
    std::vector<std::vector<double>> cost(static_cast<std::size_t>(ns));
    for (int i = 0; i < ns; ++i)
      for (int j = 0; j < nd; ++j) {
        cost[static_cast<std::size_t>(i)].push_back(t.cost(i, j));
        max_c = std::max(max_c, t.cost(i, j));
      }
    if (c_s != 10.0 * max_c) n.fail("c_s is not 10 max c_ij");
    std::vector<double> s_dn, s_up, d_up, d_dn;
    for (int i = 0; i < ns; ++i) {
      const double a = u(rng), b = u(rng);
      s_dn.push_back(std::min({a, b, 0.0}));
      s_up.push_back(std::max({a, b, 0.0}));
    }
    for (int j = 0; j < nd; ++j) {
      const double a = u(rng), b = u(rng);
      d_dn.push_back(std::min(a, b));
      d_up.push_back(std::max(a, b));
    }
    for (const auto* d : {&d_up, &d_dn}) {
      const TransactionLp lp = solve_transaction_lp(s_dn, s_up, *d, t, c_s);
      const auto ref = oracle::transaction_lp_objective(s_dn, s_up, *d, cost, c_s);
      if (!ref) {
        n.fail("oracle found no vertex in trial " + std::to_string(trial));
        continue;
      }
      const double err = std::abs(lp.objective - *ref);
      worst = std::max(worst, err);
      if (err > 1e-6) n.fail("trial " + std::to_string(trial) + " objective off by " + num(err));
      double total = 0.0, cap_dn = 0.0, cap_up = 0.0, slack = 0.0;
      for (double v : *d) total += v;
      for (int i = 0; i < ns; ++i) {
        cap_dn += s_dn[static_cast<std::size_t>(i)];
        cap_up += s_up[static_cast<std::size_t>(i)];
      }
      for (double v : lp.slack) slack += std::abs(v);
      if (cap_dn <= total && total <= cap_up) {
        ++slack_checks;
        if (slack > 1e-8) n.fail("trial " + std::to_string(trial) + " slack " + num(slack) + " with capacity to spare");
      }
    }
  }
  return {n.ok(), n.ok() ? "400 LPs, max |objective - oracle| " + num(worst) + ", zero slack in all " +
                               std::to_string(slack_checks) + " covered cases"
                         : n.text()};
}

Outcome partitioner_validity() {
  Notes n;
  std::mt19937_64 rng(77);
  int produced = 0, none = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int v = 4 + static_cast<int>(rng() % 9);
    const int m = 2 + static_cast<int>(rng() % 2);
    const double tol = 1.5;
    const NetworkGraph g = fixture::random_connected_graph(v, 0.2, rng);
    std::vector<double> w;
    std::uniform_real_distribution<double> uw(0.0, 10.0);
    for (int e = 0; e < g.num_edges(); ++e) w.push_back(uw(rng));
    try {
      const Partition p = partition_kway(g, w, m, tol);
      ++produced;
      if (const std::string why = check_partition(g, w, p, tol); !why.empty()) n.fail("trial " + std::to_string(trial) + ": " + why);
      if (p.cut_weight > p.initial_cut + 1e-9) n.fail("trial " + std::to_string(trial) + ": refinement raised the cut");
    } catch (const SolverError&) {
      const BalanceRange r = balance_range(v, m, tol);
      if (oracle::brute_force_partition(g, w, m, static_cast<int>(std::ceil(r.lo)), static_cast<int>(std::floor(r.hi))))
        n.fail("trial " + std::to_string(trial) + ": no partition returned although one exists");
      ++none;
    }
  }
  int recovered = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int v = 6 + static_cast<int>(rng() % 7);
    const fixture::WeightedGraph wg = fixture::planted_two_block(v, rng);
    const BalanceRange r = balance_range(v, 2, 1.5);
    const auto best = oracle::brute_force_partition(wg.graph, wg.weights, 2, static_cast<int>(std::ceil(r.lo)),
                                                    static_cast<int>(std::floor(r.hi)));
    const Partition p = partition_kway(wg.graph, wg.weights, 2, 1.5);
    if (p.cut_weight > p.initial_cut + 1e-9) n.fail("planted trial " + std::to_string(trial) + ": refinement raised the cut");
    if (const std::string why = check_partition(wg.graph, wg.weights, p, 1.5); !why.empty()) n.fail(why);
    if (best && std::abs(p.cut_weight - best->first) <= 1e-9) ++recovered;
  }
  if (recovered < 48) n.fail("planted minimum cut recovered in " + std::to_string(recovered) + "/50");
  return {n.ok(), n.ok() ? std::to_string(produced) + " valid partitions (" + std::to_string(none) +
                               " graphs admit none, confirmed by brute force), planted cut recovered " +
                               std::to_string(recovered) + "/50"
                         : n.text()};
}

ClusterModel flat_model(int steps, int horizon, std::vector<double> s_box, std::vector<double> b_box, double e_box) {
  ClusterModel m;
  m.cluster = 1;
  m.steps_per_period = steps;
  m.horizon = horizon;
  m.tau_hours = 5.0 / 60.0;
  for (std::size_t i = 0; i < s_box.size(); ++i) {
    m.sources.push_back(static_cast<NodeId>(i + 1));
    m.s_dn.emplace_back(static_cast<std::size_t>(steps), -s_box[i]);
    m.s_up.emplace_back(static_cast<std::size_t>(steps), s_box[i]);
  }
  for (std::size_t i = 0; i < b_box.size(); ++i) {
    m.storages.push_back(static_cast<NodeId>(i + 1));
    m.b_dn.emplace_back(static_cast<std::size_t>(steps), -b_box[i]);
    m.b_up.emplace_back(static_cast<std::size_t>(steps), b_box[i]);
    m.e_dn.emplace_back(static_cast<std::size_t>(steps) + 1, -e_box);
    m.e_up.emplace_back(static_cast<std::size_t>(steps) + 1, e_box);
  }
  m.sinks.push_back(100);
  return m;
}

MpcInput constant_demand(const ClusterModel& m, double d) {
  MpcInput in;
  in.demand = {{d}};
  in.e_current.assign(m.storages.size(), 0.0);
  in.e_anchor.assign(m.storages.size(), 0.0);
  return in;
}

Outcome mpc_closed_form() {
  Notes n;
  auto near = [&](double got, double want, double tol, const std::string& what) {
    if (!(std::abs(got - want) <= tol)) n.fail(what + " = " + num(got, 12) + ", expected " + num(want, 12));
  };
  {
    const ClusterModel m = flat_model(10, 5, {10}, {}, 0);
    const MpcResult r = solve_local_mpc(m, constant_demand(m, 0.0));
    near(r.s[0], 0.0, 1e-6, "zero case s");
    near(r.r_star, 0.0, 1e-6, "zero case r*");
    if (r.r_tilde != 0.0) n.fail("zero case r~ nonzero");
    near(r.reserve_up, 10.0, 1e-6, "zero case reserve up");
    near(r.reserve_dn, -10.0, 1e-6, "zero case reserve down");
  }
  const double g = MpcWeights{}.gamma_r;
  {
    const ClusterModel m = flat_model(10, 5, {10}, {}, 0);
    const MpcResult r = solve_local_mpc(m, constant_demand(m, 3.0));
    near(r.s[0], 3.0 * g / (1.0 + g), 1e-6, "d=3 s*");
    near(r.r_star, 3.0 / (1.0 + g), 1e-6, "d=3 r*");
    if (r.r_tilde != 0.0) n.fail("d=3 r~ nonzero");
    near(r.reserve_up, 10.0 - 3.0 * g / (1.0 + g), 1e-6, "d=3 reserve up");
    near(r.reserve_dn, -10.0 - 3.0 * g / (1.0 + g), 1e-6, "d=3 reserve down");
  }
  {
    const ClusterModel m = flat_model(10, 5, {10}, {}, 0);
    const MpcResult r = solve_local_mpc(m, constant_demand(m, 15.0));
    near(r.s[0], 10.0, 1e-6, "d=15 s*");
    near(r.r_star, 5.0, 1e-6, "d=15 r*");
    near(r.r_tilde, 5.0, 1e-6, "d=15 r~");
  }
  double terminal = 0.0, sum_b = 0.0;
  {
    const ClusterModel m = flat_model(12, 12, {0.5}, {2}, 1.0);
    MpcInput in = constant_demand(m, 0.0);
    in.demand.clear();
    for (int t = 0; t < 12; ++t) in.demand.push_back({t < 6 ? 1.5 : -1.5});
    in.e_current = {0.2};
    in.e_anchor = {0.2};
    const MpcResult r = solve_local_mpc(m, in);
    if (r.horizon != 12) n.fail("horizon does not span the period");
    terminal = std::abs(r.e_traj.back()[0] - 0.2);
    for (const auto& row : r.b_traj) sum_b += row[0];
    if (terminal > 1e-8) n.fail("terminal energy off by " + num(terminal));
    if (std::abs(sum_b) > 1e-6) n.fail("sum b = " + num(sum_b));
  }
  return {n.ok(), n.ok() ? "zero, d=3 and d=15 cases within 1e-6; terminal energy error " + num(terminal) +
                               ", period sum of b " + num(sum_b)
                         : n.text()};
}

Outcome dcadmm_vs_centralized() {
  Notes n;
  std::mt19937_64 rng(5150);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<int> m4_complete;
  int max_iter_seen = 0, over_budget = 0, off = 0;
  double worst_x = 0.0, worst_cons = 0.0, worst_coup = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const int m = 2 + static_cast<int>(rng() % 5);
    const bool ring = trial % 2 == 1;
    // Cluster reserves around zero and requests from a random subset of
    // clusters, drawn until the total fits the aggregate reserve.
    std::vector<double> dn(static_cast<std::size_t>(m)), up(static_cast<std::size_t>(m)), req(static_cast<std::size_t>(m));
    SupervisorProblem p;
    for (;;) {
      for (int h = 0; h < m; ++h) {
        dn[static_cast<std::size_t>(h)] = -5.0 * u(rng);
        up[static_cast<std::size_t>(h)] = 5.0 * u(rng);
        req[static_cast<std::size_t>(h)] = u(rng) < 0.5 ? 0.0 : 6.0 * u(rng) - 3.0;
      }
      p = make_supervisor_problem(req, dn, up);
      if (p.feasible()) break;
    }
    const CommGraph graph = ring ? CommGraph::ring(m) : CommGraph::complete(m);
    DcadmmOptions opt;
    opt.c = 1.0;
    opt.max_iter = 500;
    opt.exec = Exec::kSerial;
    const DcadmmResult r = run_dcadmm(p, graph, opt);
    const std::vector<double> ref = solve_centralized(p);
    double dx = 0.0;
    for (int h = 0; h < m; ++h) dx = std::max(dx, std::abs(r.x[static_cast<std::size_t>(h)] - ref[static_cast<std::size_t>(h)]));
    worst_x = std::max(worst_x, dx);
    worst_cons = std::max(worst_cons, r.consensus_residual);
    worst_coup = std::max(worst_coup, r.coupling_residual);
    max_iter_seen = std::max(max_iter_seen, r.iterations);
    if (!r.converged || r.consensus_residual > 1e-6 || r.coupling_residual > 1e-6) ++over_budget;
    if (dx > 1e-4) ++off;
    if (m == 4 && !ring) m4_complete.push_back(r.iterations);
  }
  std::sort(m4_complete.begin(), m4_complete.end());
  const int median = m4_complete.empty() ? 0 : m4_complete[m4_complete.size() / 2];
  if (over_budget > 0) n.fail(std::to_string(over_budget) + "/500 not within residual 1e-6 in 500 iterations");
  if (off > 0) n.fail(std::to_string(off) + "/500 farther than 1e-4 from centralized");
  if (median < 5 || median > 200) n.fail("median iterations on M=4 complete " + std::to_string(median) + " outside [5, 200]");
  std::string detail = "max |x - centralized| " + num(worst_x) + ", max residuals " + num(worst_cons) + " / " +
                       num(worst_coup) + ", max iterations " + std::to_string(max_iter_seen) +
                       ", median on M=4 complete " + std::to_string(median) + " (reference average 33)";
  return {n.ok(), n.ok() ? detail : n.text() + "; " + detail};
}

struct DayRun {
  ControlLog log;
  Scenario scenario;
  SimulationConfig config;
  double seconds = 0.0;
};

const DayRun& synthetic_day() {
  static const DayRun run = [] {
    DayRun d;
    d.scenario = load_scenario(fs::path(GRID_DATA_DIR) / "synthetic_118.json");
    const auto t0 = Clock::now();
    d.log = run_simulation(d.scenario, d.config);
    d.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return d;
  }();
  return run;
}

Outcome end_to_end_balance() {
  Notes n;
  const DayRun& d = synthetic_day();
  const ControlLog& log = d.log;
  const Timeline& t = d.scenario.timeline;
  if (t.num_steps != 288 || t.steps_per_period != 72 || t.num_clusters != 4) n.fail("bundled day has the wrong timeline");
  int covered = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < log.steps.size(); ++i) {
    if (!reserves_covered(log, i)) continue;
    ++covered;
    const double total = std::abs(log.steps[i].network_total);
    worst = std::max(worst, total);
    if (total > 1e-2) n.fail("step " + std::to_string(log.steps[i].k) + " |sum y| = " + num(total));
  }
  const int last = t.num_periods();
  const int deficient = log.partitions[static_cast<std::size_t>(last - 1)].cluster_of(1);
  double worst_gap = 0.0;
  for (const StepRecord& r : log.steps) {
    for (const ClusterStep& c : r.clusters) {
      if (c.r_tilde == 0.0) continue;
      if (r.period != last) n.fail("request at step " + std::to_string(r.k) + " outside the last period");
      else if (c.cluster != deficient) n.fail("request from cluster " + std::to_string(c.cluster) + " at step " + std::to_string(r.k));
    }
    if (!r.activation) continue;
    const Activation& a = log.activations[static_cast<std::size_t>(*r.activation)];
    double req = 0.0, com = 0.0;
    for (const ClusterStep& c : r.clusters) {
      req += c.r_tilde;
      com += c.dy_commit;
    }
    worst_gap = std::max(worst_gap, std::abs(req - com));
    if (std::abs(req - com) > 1e-4)
      n.fail("step " + std::to_string(r.k) + " commitments " + num(com, 8) + " vs requests " + num(req, 8) +
             (a.shortfall != 0.0 ? " (clipped)" : ""));
  }
  if (log.activations.empty()) n.fail("the deficient period raised no requests");
  const std::string detail = std::to_string(covered) + "/" + std::to_string(log.steps.size()) +
                             " covered steps, max |sum y| " + num(worst) + "; " +
                             std::to_string(log.activations.size()) + " activations from cluster " +
                             std::to_string(deficient) + " between " +
                             (log.activations.empty() ? "-" : clock_time(t, log.activations.front().k)) + " and " +
                             (log.activations.empty() ? "-" : clock_time(t, log.activations.back().k)) +
                             ", max |sum commitments - sum requests| " + num(worst_gap);
  return {n.ok(), n.ok() ? detail : n.text() + "; " + detail};
}

Outcome performance() {
  Notes n;
  const DayRun& d = synthetic_day();
  double worst_step = 0.0, admm = 0.0;
  for (const StepRecord& r : d.log.steps) worst_step = std::max(worst_step, r.seconds);
  for (const Activation& a : d.log.activations) admm += a.seconds;
  const double avg_admm = d.log.activations.empty() ? 0.0 : admm / static_cast<double>(d.log.activations.size());
  if (d.seconds >= 60.0) n.fail("day took " + num(d.seconds) + " s");
  if (worst_step >= 1.0) n.fail("slowest step " + num(worst_step) + " s");
  const std::string detail = "day " + num(d.seconds) + " s, slowest step " + num(worst_step) +
                             " s, average supervisor activation " + num(avg_admm) + " s (reference 18.6 s)";
  return {n.ok(), n.ok() ? detail : n.text() + "; " + detail};
}

Outcome determinism() {
  Notes n;
  const fs::path base = fs::temp_directory_path() / "gridclust_acceptance";
  fs::remove_all(base);
  const fs::path scenario = fs::path(GRID_DATA_DIR) / "synthetic_118.json";
  for (const char* run : {"a", "b"}) {
    const std::string cmd = std::string("\"") + GRID_EXE + "\" simulate --scenario \"" + scenario.string() +
                            "\" --seed 7 --out \"" + (base / run).string() + "\" > /dev/null";
    const int rc = std::system(cmd.c_str());
    if (rc != 0) n.fail(std::string("run ") + run + " exited with status " + std::to_string(rc));
  }
  int files = 0;
  if (n.ok()) {
    for (const auto& entry : fs::directory_iterator(base / "a")) {
      if (entry.path().extension() != ".csv") continue;
      ++files;
      std::ifstream fa(entry.path(), std::ios::binary), fb(base / "b" / entry.path().filename(), std::ios::binary);
      std::stringstream sa, sb;
      sa << fa.rdbuf();
      sb << fb.rdbuf();
      if (!fb || sa.str() != sb.str()) n.fail(entry.path().filename().string() + " differs");
    }
    if (files == 0) n.fail("no CSV written");
  }
  fs::remove_all(base);
  return {n.ok(), n.ok() ? std::to_string(files) + " CSVs byte-identical across two `grid simulate --seed 7` runs" : n.text()};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "figure-3 reproduction", 1.0, figure3_reproduction},
      {2, "transaction LP oracle", 30.0, transaction_oracle},
      {3, "partitioner validity and planted recovery", 60.0, partitioner_validity},
      {4, "local MPC closed form", 0.0, mpc_closed_form},
      {5, "DC-ADMM vs centralized", 0.0, dcadmm_vs_centralized},
      {6, "end-to-end balancing", 0.0, end_to_end_balance},
      {7, "performance", 0.0, performance},
      {8, "determinism", 0.0, determinism},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (c.budget_seconds > 0.0 && secs >= c.budget_seconds) {
      o.pass = false;
      o.detail += "; took " + num(secs) + " s, budget " + num(c.budget_seconds) + " s";
    }
    failed += !o.pass;
    std::printf("criterion %d %s: %s (%.2f s) %s\n", c.id, c.name, o.pass ? "PASS" : "FAIL", secs, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
