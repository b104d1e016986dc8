#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridclust/common.hpp"

namespace gridclust {

/// Splitting of the total request among clusters:
///
///   minimize  sum_h cost_h dy_h^2
///   s.t.      sum_h dy_h = q,  reserve_dn_h <= dy_h <= reserve_up_h
///
/// Vectors are indexed by cluster h - 1.
struct SupervisorProblem {
  std::vector<double> request;     // r~_h
  std::vector<double> reserve_dn;  // <= 0
  std::vector<double> reserve_up;  // >= 0
  std::vector<double> cost;        // c_h > 0
  double q = 0.0;                  // sum of requests, possibly clipped

  int size() const { return static_cast<int>(request.size()); }
  double total_dn() const;
  double total_up() const;
  bool feasible() const { return total_dn() <= q && q <= total_up(); }
};

/// Builds the problem with q = sum of requests (summed in cluster order) and
/// unit costs when `cost` is empty. Throws ScenarioError on size mismatch,
/// boxes that exclude 0, or non-positive costs.
SupervisorProblem make_supervisor_problem(std::vector<double> request, std::vector<double> reserve_dn,
                                          std::vector<double> reserve_up, std::vector<double> cost = {});

/// Moves q to the nearest value inside the aggregate reserve interval and
/// returns the amount removed (q_before - q_after).
double clip_total(SupervisorProblem& problem);

/// Exact solution through the convex-program kernel. Throws SolverError when
/// q lies outside the aggregate reserve interval.
std::vector<double> solve_centralized(const SupervisorProblem& problem);

/// Undirected communication graph over agents 1..M.
class CommGraph {
 public:
  CommGraph() = default;
  /// Throws ScenarioError on ids outside 1..M, self-loops, or when the graph
  /// is disconnected.
  CommGraph(int num_agents, const std::vector<std::pair<int, int>>& links);

  static CommGraph complete(int num_agents);
  /// Cycle 1-2-...-M-1; a single link for M = 2.
  static CommGraph ring(int num_agents);
  /// Reads "a b" link lines; blank lines and lines starting with '#' are
  /// skipped.
  static CommGraph from_file(const std::string& path, int num_agents);

  int num_agents() const { return static_cast<int>(neighbors_.size()) - 1; }
  /// Sorted neighbor ids of agent h.
  const std::vector<int>& neighbors(int h) const { return neighbors_[static_cast<std::size_t>(h)]; }
  std::vector<std::pair<int, int>> links() const;

 private:
  std::vector<std::vector<int>> neighbors_;  // index 0 unused
};

/// In-process message; wave 0 carries lambda^{i-1} before the primal step,
/// wave 1 carries lambda^i before the p update.
struct Message {
  int from = 0;
  int iter = 0;
  int wave = 0;
  double lambda = 0.0;
};

std::string to_json(const Message& m);
Message message_from_json(const std::string& text);

/// A message that is missing, duplicated or out of step.
class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct AgentState {
  int id = 0;
  double lambda = 0.0;
  double p = 0.0;
  double x = 0.0;
  std::vector<int> neighbors;
  double c = 1.0;
  int iter = 1;
};

/// What agent h knows about the problem.
struct AgentSlice {
  double lo = 0.0, hi = 0.0;
  double cost = 1.0;
  double q = 0.0;
  int num_agents = 1;
};

AgentState make_agent(int id, const CommGraph& graph, double c);
AgentSlice slice_for(const SupervisorProblem& problem, int id);

/// The message agent h sends in the given wave of its current iteration.
Message outgoing(const AgentState& state, int wave);

/// Primal update and local dual average from the neighbors' lambda^{i-1}
/// (wave 0). x is the box-clipped minimizer of the scalar quadratic.
void agent_step(AgentState& state, const std::vector<Message>& inbox, const AgentSlice& slice);

/// Auxiliary update from the neighbors' lambda^i (wave 1); advances the
/// iteration counter.
void agent_dual_step(AgentState& state, const std::vector<Message>& inbox);

struct DcadmmOptions {
  double c = 1.0;
  double tol = 1e-6;
  int max_iter = 500;
  Exec exec = Exec::kParallel;
  bool keep_trace = false;
};

struct DcadmmTraceRow {
  int iter = 0;
  int agent = 0;
  double x = 0.0, lambda = 0.0, p = 0.0;
  double consensus_residual = 0.0, coupling_residual = 0.0;
};

struct DcadmmResult {
  std::vector<double> x;  // dy* per cluster
  int iterations = 0;
  bool converged = false;
  double consensus_residual = 0.0;  // max over links |lambda_h - lambda_j|
  double coupling_residual = 0.0;   // |sum_h x_h - q|
  int messages = 0;
  std::vector<DcadmmTraceRow> trace;
};

/// Synchronous rounds until both residuals are within tol or max_iter is
/// reached; on non-convergence the iterate with the smallest residual is
/// returned with converged = false. A single agent solves its box problem
/// directly.
DcadmmResult run_dcadmm(const SupervisorProblem& problem, const CommGraph& graph, const DcadmmOptions& options = {});

/// iter,agent,x,lambda,p,consensus_residual,coupling_residual
void write_dcadmm_trace(std::ostream& out, const DcadmmResult& result);

}  // namespace gridclust
