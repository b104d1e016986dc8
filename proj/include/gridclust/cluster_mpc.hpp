#pragma once

#include <vector>

#include "gridclust/network.hpp"
#include "gridclust/opt/program.hpp"

namespace gridclust {

struct MpcWeights {
  double gamma_s = 1.0;
  double gamma_b = 1.0;
  double gamma_r = 1e6;
};

/// One cluster's local regulator data for one clustering period. Step
/// indices are relative to the period start.
struct ClusterModel {
  int cluster = 0;         // h, 1-based
  int steps_per_period = 1;  // N_c
  int horizon = 1;           // N_p
  double tau_hours = 1.0;
  std::vector<NodeId> sources, sinks, storages;
  std::vector<std::vector<double>> s_dn, s_up;  // [i][k], N_c entries
  std::vector<std::vector<double>> b_dn, b_up;  // [i][k], N_c entries
  std::vector<std::vector<double>> e_dn, e_up;  // [i][k], N_c + 1 entries (box on e(k))
  MpcWeights weights;
  double eps_r = 1e-3;

  /// min(N_p, N_c - k).
  int horizon_at(int k) const;
};

/// Restricts scenario bounds to the given units over period eta (1-based).
/// Energy boxes at the period end use the last available step.
ClusterModel make_cluster_model(const Scenario& scenario, const VariationBounds& bounds, const UnitRegistry& units,
                                int cluster, int eta, const MpcWeights& weights = {}, double eps_r = 1e-3);

struct MpcInput {
  int k = 0;  // relative step, 0..N_c-1
  /// Sink deviations [t][j] over the horizon. Fewer rows than the horizon
  /// are extended by holding the last row (one row = persistence forecast).
  std::vector<std::vector<double>> demand;
  double dy_prev = 0.0;
  std::vector<double> e_current;  // per battery, e(k)
  std::vector<double> e_anchor;   // per battery, e at the period start
};

struct MpcResult {
  int horizon = 0;
  std::vector<double> s, b;      // first-step decisions
  std::vector<double> e_next;    // predicted e(k+1)
  double r_star = 0.0;
  double r_tilde = 0.0;          // r_star thresholded by eps_r
  double reserve_up = 0.0;       // sum_i (s_up_i - s_i) at step k
  double reserve_dn = 0.0;       // sum_i (s_dn_i - s_i) at step k
  double y = 0.0;                // sum s + sum b - sum d at step k
  double objective = 0.0;
  /// Predicted trajectories: [t][i] for t in 0..horizon-1; e has horizon+1
  /// rows starting with e(k).
  std::vector<std::vector<double>> s_traj, b_traj, e_traj;
  std::vector<double> r_traj;
  opt::Solution solution;
};

/// y_h = sum s + sum b - sum d, accumulated in that order.
double cluster_output(const std::vector<double>& s, const std::vector<double>& b, const std::vector<double>& d);

/// Solves the local MPC problem at relative step k. Throws SolverError when
/// the battery boxes cannot meet the terminal energy constraint, naming the
/// battery; throws std::invalid_argument on malformed input.
MpcResult solve_local_mpc(const ClusterModel& model, const MpcInput& input);

/// Builds the program solved by solve_local_mpc (exposed for tests).
opt::ConvexProgram build_local_mpc(const ClusterModel& model, const MpcInput& input);

}  // namespace gridclust
