#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gridclust/cluster_mpc.hpp"
#include "gridclust/network.hpp"
#include "gridclust/partitioner.hpp"
#include "gridclust/shortest_paths.hpp"
#include "gridclust/supervisor.hpp"
#include "gridclust/transactions.hpp"

namespace gridclust {

/// Sink deviation forecast over the horizon for one cluster: rows [t][j]
/// for t = 0..horizon-1, given the sinks' measured deviations at step k.
/// Fewer rows are extended by holding the last one.
using Forecast = std::function<std::vector<std::vector<double>>(int k, const std::vector<NodeId>& sinks,
                                                                 const std::vector<double>& measured, int horizon)>;

struct SimulationConfig {
  MpcWeights weights;
  double eps_r = 1e-3;
  double cs_mult = 10.0;       // c_s = cs_mult * max path cost
  double balance_tol = 1.3;
  std::string comm = "complete";  // complete | ring | file:<path>
  std::optional<std::uint64_t> seed;  // when set, sink actuals are redrawn
  DcadmmOptions admm;
  std::vector<double> cluster_cost;  // c_h; empty means 1 for every cluster
  double eps_net = 1e-2;
  bool keep_admm_traces = false;
  Forecast forecast;  // empty means persistence
  Exec exec = Exec::kParallel;
};

/// Data shared by every period: bounds, paths and the slack penalty.
struct PlanningContext {
  VariationBounds bounds;
  PathTable paths;
  double c_s = 0.0;
};

PlanningContext make_planning_context(const Scenario& scenario, const SimulationConfig& config, Exec exec = Exec::kParallel);

struct PeriodPlan {
  int period = 0;  // eta, 1-based
  int first_step = 0;
  int num_steps = 0;
  TransactionPlan transactions;
  std::vector<double> edge_weights;
  Partition partition;
  std::vector<UnitRegistry> cluster_units;  // [h - 1]
  std::vector<ClusterModel> models;         // [h - 1]
};

/// Transactions, edge weights and partition for period eta, then one
/// ClusterModel per cluster. Throws ScenarioError when eta is outside
/// 1..gamma.
PeriodPlan plan_period(const Scenario& scenario, const PlanningContext& context, int eta, const SimulationConfig& config,
                       Exec exec = Exec::kParallel);

struct ClusterStep {
  int cluster = 0;
  std::vector<NodeId> sources, storages, sinks;
  std::vector<double> s, b, d;  // applied decisions and measured deviations
  std::vector<double> e;        // battery energy after the step
  double y = 0.0;               // sum s + sum b - sum d
  double r_star = 0.0, r_tilde = 0.0;
  double reserve_up = 0.0, reserve_dn = 0.0;
  double dy_applied = 0.0;  // commitment from step k - 1
  double dy_commit = 0.0;   // commitment computed at step k, applied at k + 1
};

struct Activation {
  int k = 0;
  double requested = 0.0;  // sum of r~
  double q = 0.0;          // after clipping
  double shortfall = 0.0;  // requested - q
  int iterations = 0;
  bool converged = false;
  double consensus_residual = 0.0;
  double coupling_residual = 0.0;
  double committed = 0.0;  // sum of dy*
  double seconds = 0.0;
  DcadmmResult result;     // trace kept only when configured
};

struct StepRecord {
  int k = 0;
  int period = 0;
  std::vector<ClusterStep> clusters;
  double network_total = 0.0;  // sum_h y_h
  std::optional<int> activation;  // index into ControlLog::activations
  double seconds = 0.0;
};

struct ControlLog {
  std::vector<Partition> partitions;  // [eta - 1]
  std::vector<StepRecord> steps;
  std::vector<Activation> activations;
  double seconds = 0.0;

  int nonconverged() const;
};

/// Runs the whole day: per period a fresh plan, then the per-step loop of
/// local MPC solves, supervisor activation and commitment hand-over. Step
/// failures are rethrown with the step index.
ControlLog run_simulation(const Scenario& scenario, const SimulationConfig& config = {});

/// Communication graph named by the configuration for M agents.
CommGraph make_comm_graph(const std::string& spec, int num_agents);

/// Formats an absolute step as hh:mm.
std::string clock_time(const Timeline& timeline, int k);

}  // namespace gridclust
