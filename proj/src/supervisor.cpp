#include "gridclust/supervisor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gridclust/csv.hpp"
#include "gridclust/opt/program.hpp"

namespace gridclust {
namespace {

double sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

// Finds the inbox message from each neighbor, in neighbor order.
std::vector<double> neighbor_lambdas(const AgentState& state, const std::vector<Message>& inbox, int wave) {
  std::vector<double> out(state.neighbors.size());
  std::vector<bool> seen(state.neighbors.size(), false);
  for (const Message& m : inbox) {
    const auto it = std::lower_bound(state.neighbors.begin(), state.neighbors.end(), m.from);
    std::ostringstream os;
    if (it == state.neighbors.end() || *it != m.from) os << "message from non-neighbor " << m.from;
    else if (m.iter != state.iter || m.wave != wave)
      os << "message from " << m.from << " is for iteration " << m.iter << " wave " << m.wave;
    else if (seen[static_cast<std::size_t>(it - state.neighbors.begin())])
      os << "duplicate message from " << m.from;
    if (!os.str().empty()) throw ProtocolError("agent " + std::to_string(state.id) + ": " + os.str());
    const auto k = static_cast<std::size_t>(it - state.neighbors.begin());
    seen[k] = true;
    out[k] = m.lambda;
  }
  for (std::size_t k = 0; k < seen.size(); ++k)
    if (!seen[k])
      throw ProtocolError("agent " + std::to_string(state.id) + ": no message from neighbor " +
                          std::to_string(state.neighbors[k]) + " in iteration " + std::to_string(state.iter) +
                          " wave " + std::to_string(wave));
  return out;
}

struct Residuals {
  double consensus = 0.0;
  double coupling = 0.0;
};

Residuals residuals(const std::vector<AgentState>& agents, double q) {
  Residuals r;
  double total = 0.0;
  for (const AgentState& a : agents) {
    total += a.x;
    for (int j : a.neighbors)
      r.consensus = std::max(r.consensus, std::abs(a.lambda - agents[static_cast<std::size_t>(j - 1)].lambda));
  }
  r.coupling = std::abs(total - q);
  return r;
}

}  // namespace

double SupervisorProblem::total_dn() const { return sum(reserve_dn); }
double SupervisorProblem::total_up() const { return sum(reserve_up); }

SupervisorProblem make_supervisor_problem(std::vector<double> request, std::vector<double> reserve_dn,
                                          std::vector<double> reserve_up, std::vector<double> cost) {
  const std::size_t m = request.size();
  if (cost.empty()) cost.assign(m, 1.0);
  if (reserve_dn.size() != m || reserve_up.size() != m || cost.size() != m)
    throw ScenarioError("supervisor problem: per-cluster vectors differ in length");
  for (std::size_t h = 0; h < m; ++h) {
    if (!(reserve_dn[h] <= 0.0 && 0.0 <= reserve_up[h]))
      throw ScenarioError("supervisor problem: reserve box of cluster " + std::to_string(h + 1) + " excludes 0");
    if (!(cost[h] > 0.0) || !std::isfinite(cost[h]))
      throw ScenarioError("supervisor problem: cost of cluster " + std::to_string(h + 1) + " is not positive");
    if (!std::isfinite(request[h])) throw ScenarioError("supervisor problem: non-finite request");
  }
  SupervisorProblem p;
  p.q = sum(request);
  p.request = std::move(request);
  p.reserve_dn = std::move(reserve_dn);
  p.reserve_up = std::move(reserve_up);
  p.cost = std::move(cost);
  return p;
}

double clip_total(SupervisorProblem& problem) {
  const double before = problem.q;
  problem.q = std::clamp(problem.q, problem.total_dn(), problem.total_up());
  return before - problem.q;
}

std::vector<double> solve_centralized(const SupervisorProblem& problem) {
  const int m = problem.size();
  if (!problem.feasible()) {
    std::ostringstream os;
    os << "supervisor: total request " << problem.q << " outside the aggregate reserve interval ["
       << problem.total_dn() << ", " << problem.total_up() << "]";
    throw SolverError(os.str());
  }
  opt::ConvexProgram p = opt::ConvexProgram::free_variables(m);
  opt::RowBuilder rows(m);
  rows.add_row(problem.q);
  for (int h = 0; h < m; ++h) {
    const auto k = static_cast<std::size_t>(h);
    p.q[h] = 2.0 * problem.cost[k];
    p.lo[h] = problem.reserve_dn[k];
    p.hi[h] = problem.reserve_up[k];
    rows.add(h, 1.0);
  }
  p.a_eq = rows.matrix();
  p.b_eq = rows.rhs();
  const opt::Solution s = opt::solve(p);
  if (s.status != opt::Status::kOptimal) throw SolverError(std::string("supervisor: ") + opt::to_string(s.status));
  return {s.x.data(), s.x.data() + m};
}

CommGraph::CommGraph(int num_agents, const std::vector<std::pair<int, int>>& links) {
  if (num_agents < 1) throw ScenarioError("communication graph needs at least one agent");
  neighbors_.assign(static_cast<std::size_t>(num_agents) + 1, {});
  for (auto [a, b] : links) {
    if (a < 1 || a > num_agents || b < 1 || b > num_agents)
      throw ScenarioError("communication link " + std::to_string(a) + "-" + std::to_string(b) + " names an agent outside 1.." +
                          std::to_string(num_agents));
    if (a == b) throw ScenarioError("communication link " + std::to_string(a) + "-" + std::to_string(b) + " is a self-loop");
    neighbors_[static_cast<std::size_t>(a)].push_back(b);
    neighbors_[static_cast<std::size_t>(b)].push_back(a);
  }
  for (auto& n : neighbors_) {
    std::sort(n.begin(), n.end());
    n.erase(std::unique(n.begin(), n.end()), n.end());
  }
  std::vector<bool> seen(neighbors_.size(), false);
  std::vector<int> stack{1};
  seen[1] = true;
  int reached = 1;
  while (!stack.empty()) {
    const int h = stack.back();
    stack.pop_back();
    for (int j : neighbors_[static_cast<std::size_t>(h)])
      if (!seen[static_cast<std::size_t>(j)]) {
        seen[static_cast<std::size_t>(j)] = true;
        ++reached;
        stack.push_back(j);
      }
  }
  if (reached != num_agents)
    throw ScenarioError("communication graph is disconnected (" + std::to_string(reached) + " of " +
                        std::to_string(num_agents) + " agents reachable from agent 1)");
}

CommGraph CommGraph::complete(int num_agents) {
  std::vector<std::pair<int, int>> links;
  for (int a = 1; a <= num_agents; ++a)
    for (int b = a + 1; b <= num_agents; ++b) links.emplace_back(a, b);
  return CommGraph(num_agents, links);
}

CommGraph CommGraph::ring(int num_agents) {
  std::vector<std::pair<int, int>> links;
  for (int a = 1; a < num_agents; ++a) links.emplace_back(a, a + 1);
  if (num_agents > 2) links.emplace_back(num_agents, 1);
  return CommGraph(num_agents, links);
}

CommGraph CommGraph::from_file(const std::string& path, int num_agents) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open communication graph file " + path);
  std::vector<std::pair<int, int>> links;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream row(line);
    int a = 0, b = 0;
    std::string extra;
    if (!(row >> a >> b) || (row >> extra))
      throw ScenarioError(path + ":" + std::to_string(lineno) + ": expected two agent ids");
    links.emplace_back(a, b);
  }
  return CommGraph(num_agents, links);
}

std::vector<std::pair<int, int>> CommGraph::links() const {
  std::vector<std::pair<int, int>> out;
  for (int a = 1; a <= num_agents(); ++a)
    for (int b : neighbors(a))
      if (a < b) out.emplace_back(a, b);
  return out;
}

std::string to_json(const Message& m) {
  return nlohmann::json{{"from", m.from}, {"iter", m.iter}, {"wave", m.wave}, {"lambda", m.lambda}}.dump();
}

Message message_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  return {j.at("from").get<int>(), j.at("iter").get<int>(), j.at("wave").get<int>(), j.at("lambda").get<double>()};
}

AgentState make_agent(int id, const CommGraph& graph, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("DC-ADMM penalty must be positive");
  AgentState a;
  a.id = id;
  a.neighbors = graph.neighbors(id);
  a.c = c;
  return a;
}

AgentSlice slice_for(const SupervisorProblem& problem, int id) {
  const auto k = static_cast<std::size_t>(id - 1);
  return {problem.reserve_dn[k], problem.reserve_up[k], problem.cost[k], problem.q, problem.size()};
}

Message outgoing(const AgentState& state, int wave) { return {state.id, state.iter, wave, state.lambda}; }

void agent_step(AgentState& a, const std::vector<Message>& inbox, const AgentSlice& s) {
  const std::vector<double> lj = neighbor_lambdas(a, inbox, 0);
  const double n = static_cast<double>(a.neighbors.size());
  double pair_sum = 0.0;
  for (double l : lj) pair_sum += a.lambda + l;
  const double share = s.q / static_cast<double>(s.num_agents);
  // Step 7: minimize cost x^2 + c/(4n) (x/c + u)^2 over the box.
  const double u = pair_sum - a.p / a.c - share / a.c;
  a.x = std::clamp(-a.c * u / (4.0 * n * a.c * s.cost + 1.0), s.lo, s.hi);
  // Step 8.
  a.lambda = (pair_sum - a.p / a.c + (a.x - share) / a.c) / (2.0 * n);
}

void agent_dual_step(AgentState& a, const std::vector<Message>& inbox) {
  const std::vector<double> lj = neighbor_lambdas(a, inbox, 1);
  double diff = 0.0;
  for (double l : lj) diff += a.lambda - l;
  a.p += a.c * diff;
  ++a.iter;
}

DcadmmResult run_dcadmm(const SupervisorProblem& problem, const CommGraph& graph, const DcadmmOptions& opt) {
  const int m = problem.size();
  if (graph.num_agents() != m)
    throw std::invalid_argument("communication graph has " + std::to_string(graph.num_agents()) + " agents for " +
                                std::to_string(m) + " clusters");
  DcadmmResult res;
  if (m == 1) {
    res.x = {std::clamp(problem.q, problem.reserve_dn[0], problem.reserve_up[0])};
    res.coupling_residual = std::abs(res.x[0] - problem.q);
    res.converged = res.coupling_residual <= opt.tol;
    return res;
  }

  std::vector<AgentState> agents;
  std::vector<AgentSlice> slices;
  for (int h = 1; h <= m; ++h) {
    agents.push_back(make_agent(h, graph, opt.c));
    slices.push_back(slice_for(problem, h));
  }
  std::vector<std::vector<Message>> inbox(static_cast<std::size_t>(m));
  // Delivers every agent's message of the given wave to its neighbors.
  auto exchange = [&](int wave) {
    for (auto& box : inbox) box.clear();
    for (const AgentState& a : agents)
      for (int j : a.neighbors) {
        inbox[static_cast<std::size_t>(j - 1)].push_back(outgoing(a, wave));
        ++res.messages;
      }
  };
  const bool par = opt.exec == Exec::kParallel;
  double best = kInf;
  for (int iter = 1; iter <= opt.max_iter; ++iter) {
    exchange(0);
#pragma omp parallel for schedule(static) if (par)
    for (int h = 0; h < m; ++h)
      agent_step(agents[static_cast<std::size_t>(h)], inbox[static_cast<std::size_t>(h)], slices[static_cast<std::size_t>(h)]);
    exchange(1);
#pragma omp parallel for schedule(static) if (par)
    for (int h = 0; h < m; ++h) agent_dual_step(agents[static_cast<std::size_t>(h)], inbox[static_cast<std::size_t>(h)]);

    const Residuals r = residuals(agents, problem.q);
    if (opt.keep_trace)
      for (const AgentState& a : agents)
        res.trace.push_back({iter, a.id, a.x, a.lambda, a.p, r.consensus, r.coupling});
    res.iterations = iter;
    const double score = std::max(r.consensus, r.coupling);
    if (score < best) {
      best = score;
      res.x.clear();
      for (const AgentState& a : agents) res.x.push_back(a.x);
      res.consensus_residual = r.consensus;
      res.coupling_residual = r.coupling;
    }
    if (r.consensus <= opt.tol && r.coupling <= opt.tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

void write_dcadmm_trace(std::ostream& out, const DcadmmResult& result) {
  out << "iter,agent,x,lambda,p,consensus_residual,coupling_residual\n";
  for (const DcadmmTraceRow& t : result.trace)
    CsvRow(out) << t.iter << t.agent << t.x << t.lambda << t.p << t.consensus_residual << t.coupling_residual;
}

}  // namespace gridclust
