#include "gridclust/transactions.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "gridclust/csv.hpp"
#include "gridclust/opt/program.hpp"

namespace gridclust {

TransactionLp solve_transaction_lp(const std::vector<double>& s_dn, const std::vector<double>& s_up,
                                   const std::vector<double>& demand, const PathTable& paths, double c_s) {
  const int ns = paths.num_sources(), nd = paths.num_sinks();
  const int nx = ns * nd;
  // Columns: x_ij, then slack_j, then source totals g_i in [s_dn_i, s_up_i].
  const int n = nx + nd + ns;
  opt::AbsProgram p{opt::ConvexProgram::free_variables(n), opt::Vector::Zero(n)};
  for (int i = 0; i < ns; ++i)
    for (int j = 0; j < nd; ++j) p.abs_weight[i * nd + j] = paths.cost(i, j);
  p.abs_weight.segment(nx, nd).setConstant(c_s);
  for (int i = 0; i < ns; ++i) {
    p.base.lo[nx + nd + i] = s_dn[static_cast<std::size_t>(i)];
    p.base.hi[nx + nd + i] = s_up[static_cast<std::size_t>(i)];
  }

  opt::RowBuilder rows(n);
  for (int i = 0; i < ns; ++i) {
    rows.add_row(0.0);
    for (int j = 0; j < nd; ++j) rows.add(i * nd + j, 1.0);
    rows.add(nx + nd + i, -1.0);
  }
  for (int j = 0; j < nd; ++j) {
    rows.add_row(demand[static_cast<std::size_t>(j)]);
    for (int i = 0; i < ns; ++i) rows.add(i * nd + j, 1.0);
    rows.add(nx + j, 1.0);
  }
  p.base.a_eq = rows.matrix();
  p.base.b_eq = rows.rhs();

  const opt::Solution sol = opt::solve_lp_abs(p);
  if (sol.status != opt::Status::kOptimal)
    throw SolverError(std::string("transaction LP reported ") + opt::to_string(sol.status));
  TransactionLp out;
  out.x.assign(sol.x.data(), sol.x.data() + nx);
  out.slack.assign(sol.x.data() + nx, sol.x.data() + nx + nd);
  out.objective = sol.objective_value;
  return out;
}

double default_slack_penalty(const PathTable& paths, double multiplier) {
  const double m = paths.max_cost();
  return m > 0.0 ? multiplier * m : multiplier;
}

TransactionPlan solve_transactions(const VariationBounds& vb, const PathTable& paths, int first_step, int num_steps,
                                   double c_s, Exec exec) {
  if (!(c_s > paths.max_cost())) {
    std::ostringstream os;
    os << "slack penalty c_s = " << c_s << " must exceed the largest path cost " << paths.max_cost();
    throw std::invalid_argument(os.str());
  }
  const int ns = paths.num_sources(), nd = paths.num_sinks();
  TransactionPlan plan;
  plan.num_sources = ns;
  plan.num_sinks = nd;
  plan.c_s = c_s;
  plan.steps.resize(static_cast<std::size_t>(num_steps));

#pragma omp parallel for schedule(dynamic) if (exec == Exec::kParallel)
  for (int t = 0; t < num_steps; ++t) {
    const auto k = static_cast<std::size_t>(first_step + t);
    std::vector<double> s_dn(static_cast<std::size_t>(ns)), s_up(static_cast<std::size_t>(ns));
    std::vector<double> d_up(static_cast<std::size_t>(nd)), d_dn(static_cast<std::size_t>(nd));
    for (std::size_t i = 0; i < s_dn.size(); ++i) {
      s_dn[i] = vb.source_dn[i][k];
      s_up[i] = vb.source_up[i][k];
    }
    for (std::size_t j = 0; j < d_up.size(); ++j) {
      d_up[j] = vb.sink_up[j][k];
      d_dn[j] = vb.sink_dn[j][k];
    }
    StepTransactions& st = plan.steps[static_cast<std::size_t>(t)];
    st.k = first_step + t;
    st.up = solve_transaction_lp(s_dn, s_up, d_up, paths, c_s);
    st.dn = solve_transaction_lp(s_dn, s_up, d_dn, paths, c_s);
    st.x_avg.resize(st.up.x.size());
    for (std::size_t e = 0; e < st.x_avg.size(); ++e) st.x_avg[e] = 0.5 * (std::abs(st.up.x[e]) + std::abs(st.dn.x[e]));
  }
  return plan;
}

std::vector<EdgeContribution> project_path(const Path& path, double value) {
  std::vector<EdgeContribution> out;
  out.reserve(path.edges.size());
  for (std::size_t t = 0; t < path.edges.size(); ++t) {
    const NodeId alpha = path.nodes[t], beta = path.nodes[t + 1];
    out.push_back({path.edges[t], alpha < beta ? value : -value});
  }
  return out;
}

std::vector<double> project_transactions(const TransactionPlan& plan, const PathTable& paths, const NetworkGraph& graph,
                                         Exec exec) {
  const int nk = static_cast<int>(plan.steps.size());
  const auto ne = static_cast<std::size_t>(graph.num_edges());
  std::vector<std::vector<double>> net(static_cast<std::size_t>(nk), std::vector<double>(ne, 0.0));

#pragma omp parallel for schedule(dynamic) if (exec == Exec::kParallel)
  for (int t = 0; t < nk; ++t) {
    const StepTransactions& st = plan.steps[static_cast<std::size_t>(t)];
    std::vector<double>& row = net[static_cast<std::size_t>(t)];
    for (int i = 0; i < plan.num_sources; ++i) {
      for (int j = 0; j < plan.num_sinks; ++j) {
        const double x = st.x_avg[static_cast<std::size_t>(i * plan.num_sinks + j)];
        if (x == 0.0) continue;
        for (const EdgeContribution& c : project_path(paths.at(i, j), x)) row[static_cast<std::size_t>(c.edge)] += c.value;
      }
    }
  }

  std::vector<double> w(ne, 0.0);
  for (const auto& row : net)
    for (std::size_t e = 0; e < ne; ++e) w[e] += std::abs(row[e]);
  return w;
}

void write_transactions_csv(std::ostream& out, const TransactionPlan& plan, const PathTable& paths,
                            const Scenario& scenario) {
  out << "k,source,sink,x_up,x_dn,x_avg,slack_up,slack_dn\n";
  for (const StepTransactions& st : plan.steps) {
    for (int i = 0; i < plan.num_sources; ++i) {
      for (int j = 0; j < plan.num_sinks; ++j) {
        const auto e = static_cast<std::size_t>(i * plan.num_sinks + j);
        const auto sj = static_cast<std::size_t>(j);
        CsvRow(out) << st.k << scenario.external(paths.source(i)) << scenario.external(paths.sink(j)) << st.up.x[e]
                    << st.dn.x[e] << st.x_avg[e] << st.up.slack[sj] << st.dn.slack[sj];
      }
    }
  }
}

void write_edge_weights_csv(std::ostream& out, const std::vector<double>& weights, const Scenario& scenario) {
  out << "a,b,w\n";
  for (int e = 0; e < scenario.graph.num_edges(); ++e) {
    const Edge& edge = scenario.graph.edge(e);
    CsvRow(out) << scenario.external(edge.a) << scenario.external(edge.b) << weights[static_cast<std::size_t>(e)];
  }
}

}  // namespace gridclust
