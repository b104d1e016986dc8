#pragma once

#include <iosfwd>
#include <vector>

#include "gridclust/network.hpp"
#include "gridclust/shortest_paths.hpp"

namespace gridclust {

/// Optimum of one robust transaction LP at one step:
///
///   minimize    sum_ij c_ij |x_ij| + sum_j c_s |slack_j|
///   subject to  s_dn_i <= sum_j x_ij <= s_up_i
///               sum_i x_ij + slack_j = d_j
struct TransactionLp {
  std::vector<double> x;      // [i * num_sinks + j]
  std::vector<double> slack;  // [j]
  double objective = 0.0;
};

TransactionLp solve_transaction_lp(const std::vector<double>& s_dn, const std::vector<double>& s_up,
                                   const std::vector<double>& demand, const PathTable& paths, double c_s);

struct StepTransactions {
  int k = 0;  // absolute step
  TransactionLp up, dn;
  std::vector<double> x_avg;  // (|x_up| + |x_dn|) / 2
};

struct TransactionPlan {
  int num_sources = 0;
  int num_sinks = 0;
  double c_s = 0.0;
  std::vector<StepTransactions> steps;
};

/// 10 x the largest path cost, or `multiplier` when every cost is zero.
double default_slack_penalty(const PathTable& paths, double multiplier = 10.0);

/// Solves the up and down LPs for steps first_step .. first_step+num_steps-1.
/// Throws std::invalid_argument unless c_s exceeds every path cost.
TransactionPlan solve_transactions(const VariationBounds& bounds, const PathTable& paths, int first_step, int num_steps,
                                   double c_s, Exec exec = Exec::kParallel);

struct EdgeContribution {
  int edge = 0;
  double value = 0.0;
};

/// Signed projection of one transaction onto its path: +value on an edge
/// traversed from the lower to the higher node id, -value otherwise.
std::vector<EdgeContribution> project_path(const Path& path, double value);

/// w_e = sum_k |sum_ij x_ij,e(k)|, reduced in step order.
std::vector<double> project_transactions(const TransactionPlan& plan, const PathTable& paths, const NetworkGraph& graph,
                                         Exec exec = Exec::kParallel);

/// CSV `k,source,sink,x_up,x_dn,x_avg,slack_up,slack_dn`. Slack columns
/// repeat per sink row.
void write_transactions_csv(std::ostream& out, const TransactionPlan& plan, const PathTable& paths,
                            const Scenario& scenario);

/// CSV `a,b,w` with external ids.
void write_edge_weights_csv(std::ostream& out, const std::vector<double>& weights, const Scenario& scenario);

}  // namespace gridclust
