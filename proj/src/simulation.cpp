#include "gridclust/simulation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>

#include "gridclust/synthetic.hpp"

namespace gridclust {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::vector<double> pick(const std::vector<double>& all, const std::vector<NodeId>& nodes,
                         const std::vector<NodeId>& universe) {
  std::vector<double> out;
  out.reserve(nodes.size());
  for (NodeId v : nodes) {
    const auto it = std::lower_bound(universe.begin(), universe.end(), v);
    out.push_back(all[static_cast<std::size_t>(it - universe.begin())]);
  }
  return out;
}

template <typename Error>
[[noreturn]] void rethrow_at_step(const Error& e, const Timeline& t, int k) {
  throw Error("step " + std::to_string(k) + " (" + clock_time(t, k) + "): " + e.what());
}

}  // namespace

int ControlLog::nonconverged() const {
  int n = 0;
  for (const Activation& a : activations) n += !a.converged;
  return n;
}

std::string clock_time(const Timeline& t, int k) {
  const long long minutes = std::llround(k * t.tau_min);
  char buf[48];
  std::snprintf(buf, sizeof buf, "%02lld:%02lld", minutes / 60, minutes % 60);
  return buf;
}

CommGraph make_comm_graph(const std::string& spec, int num_agents) {
  if (spec == "complete") return CommGraph::complete(num_agents);
  if (spec == "ring") return CommGraph::ring(num_agents);
  if (spec.rfind("file:", 0) == 0) return CommGraph::from_file(spec.substr(5), num_agents);
  throw ScenarioError("unknown communication graph '" + spec + "' (expected complete, ring or file:<path>)");
}

PlanningContext make_planning_context(const Scenario& scenario, const SimulationConfig& config, Exec exec) {
  PlanningContext c;
  c.bounds = compute_variation_bounds(scenario);
  c.paths = all_pairs_source_sink(scenario.graph, scenario.units, exec);
  c.c_s = default_slack_penalty(c.paths, config.cs_mult);
  return c;
}

PeriodPlan plan_period(const Scenario& scenario, const PlanningContext& context, int eta, const SimulationConfig& config,
                       Exec exec) {
  const Timeline& t = scenario.timeline;
  if (eta < 1 || eta > t.num_periods())
    throw ScenarioError("period " + std::to_string(eta) + " outside 1.." + std::to_string(t.num_periods()));
  PeriodPlan plan;
  plan.period = eta;
  plan.first_step = t.period_start(eta);
  plan.num_steps = t.steps_per_period;
  plan.transactions = solve_transactions(context.bounds, context.paths, plan.first_step, plan.num_steps, context.c_s, exec);
  plan.edge_weights = project_transactions(plan.transactions, context.paths, scenario.graph, exec);
  plan.partition = partition_kway(scenario.graph, plan.edge_weights, t.num_clusters, config.balance_tol);
  for (int h = 1; h <= t.num_clusters; ++h) {
    plan.cluster_units.push_back(cluster_units(scenario.units, plan.partition, h));
    plan.models.push_back(
        make_cluster_model(scenario, context.bounds, plan.cluster_units.back(), h, eta, config.weights, config.eps_r));
  }
  return plan;
}

ControlLog run_simulation(const Scenario& input, const SimulationConfig& config) {
  const auto t_start = Clock::now();
  Scenario scenario = input;
  if (config.seed) regenerate_actuals(scenario, *config.seed);
  const Timeline& t = scenario.timeline;
  const int m = t.num_clusters;
  const bool par = config.exec == Exec::kParallel;
  const CommGraph comm = make_comm_graph(config.comm, m);
  std::vector<double> cost = config.cluster_cost;
  if (cost.empty()) cost.assign(static_cast<std::size_t>(m), 1.0);
  if (static_cast<int>(cost.size()) != m) throw ScenarioError("cluster cost list does not match the cluster count");
  DcadmmOptions admm = config.admm;
  admm.keep_trace = config.keep_admm_traces;

  const PlanningContext context = make_planning_context(scenario, config, config.exec);
  const UnitRegistry& all = scenario.units;
  std::vector<double> energy;
  for (const StorageProfile& p : scenario.storages) energy.push_back(p.e0);

  ControlLog log;
  for (int eta = 1; eta <= t.num_periods(); ++eta) {
    const PeriodPlan plan = plan_period(scenario, context, eta, config, config.exec);
    log.partitions.push_back(plan.partition);
    // Terminal energy of this period refers to its start.
    const std::vector<double> anchor = energy;
    std::vector<double> dy_prev(static_cast<std::size_t>(m), 0.0);

    for (int rel = 0; rel < plan.num_steps; ++rel) {
      const int k = plan.first_step + rel;
      const auto t_step = Clock::now();
      const std::vector<double> measured = actual_load_deviation(scenario, k);
      std::vector<MpcResult> results(static_cast<std::size_t>(m));
      std::vector<std::exception_ptr> errors(static_cast<std::size_t>(m));

#pragma omp parallel for schedule(dynamic) if (par)
      for (int h = 0; h < m; ++h) {
        const auto hi = static_cast<std::size_t>(h);
        try {
          const UnitRegistry& u = plan.cluster_units[hi];
          MpcInput in;
          in.k = rel;
          const std::vector<double> d = pick(measured, u.sinks, all.sinks);
          const int horizon = plan.models[hi].horizon_at(rel);
          in.demand = config.forecast ? config.forecast(k, u.sinks, d, horizon) : std::vector<std::vector<double>>{d};
          in.dy_prev = dy_prev[hi];
          in.e_current = pick(energy, u.storages, all.storages);
          in.e_anchor = pick(anchor, u.storages, all.storages);
          results[hi] = solve_local_mpc(plan.models[hi], in);
        } catch (...) {
          errors[hi] = std::current_exception();
        }
      }
      for (const auto& e : errors) {
        if (!e) continue;
        try {
          std::rethrow_exception(e);
        } catch (const SolverError& err) {
          rethrow_at_step(err, t, k);
        } catch (const ScenarioError& err) {
          rethrow_at_step(err, t, k);
        }
      }

      StepRecord rec;
      rec.k = k;
      rec.period = eta;
      std::vector<double> requests, dn, up;
      for (int h = 0; h < m; ++h) {
        const auto hi = static_cast<std::size_t>(h);
        const UnitRegistry& u = plan.cluster_units[hi];
        const MpcResult& r = results[hi];
        ClusterStep c;
        c.cluster = h + 1;
        c.sources = u.sources;
        c.storages = u.storages;
        c.sinks = u.sinks;
        c.s = r.s;
        c.b = r.b;
        c.d = pick(measured, u.sinks, all.sinks);
        c.e = r.e_next;
        c.y = cluster_output(c.s, c.b, c.d);
        c.r_star = r.r_star;
        c.r_tilde = r.r_tilde;
        c.reserve_up = r.reserve_up;
        c.reserve_dn = r.reserve_dn;
        c.dy_applied = dy_prev[hi];
        for (std::size_t i = 0; i < u.storages.size(); ++i)
          energy[static_cast<std::size_t>(*all.storage_index(u.storages[i]))] = r.e_next[i];
        rec.network_total += c.y;
        requests.push_back(c.r_tilde);
        dn.push_back(c.reserve_dn);
        up.push_back(c.reserve_up);
        rec.clusters.push_back(std::move(c));
      }

      std::vector<double> commit(static_cast<std::size_t>(m), 0.0);
      if (std::any_of(requests.begin(), requests.end(), [](double r) { return r != 0.0; })) {
        const auto t_admm = Clock::now();
        SupervisorProblem sp = make_supervisor_problem(requests, dn, up, cost);
        Activation a;
        a.k = k;
        a.requested = sp.q;
        a.shortfall = clip_total(sp);
        a.q = sp.q;
        a.result = run_dcadmm(sp, comm, admm);
        a.iterations = a.result.iterations;
        a.converged = a.result.converged;
        a.consensus_residual = a.result.consensus_residual;
        a.coupling_residual = a.result.coupling_residual;
        commit = a.result.x;
        for (double x : commit) a.committed += x;
        a.seconds = seconds_since(t_admm);
        rec.activation = static_cast<int>(log.activations.size());
        log.activations.push_back(std::move(a));
      }
      for (int h = 0; h < m; ++h) rec.clusters[static_cast<std::size_t>(h)].dy_commit = commit[static_cast<std::size_t>(h)];
      dy_prev = commit;
      rec.seconds = seconds_since(t_step);
      log.steps.push_back(std::move(rec));
    }
  }
  log.seconds = seconds_since(t_start);
  return log;
}

}  // namespace gridclust
