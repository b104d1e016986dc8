#include "gridclust/cluster_mpc.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gridclust {
namespace {

// Column layout per horizon step t: sources, batteries, energies e(t+1), r.
struct Layout {
  int ns = 0, nb = 0, horizon = 0;
  int per_step() const { return ns + 2 * nb + 1; }
  int size() const { return horizon * per_step(); }
  int s(int t, int i) const { return t * per_step() + i; }
  int b(int t, int i) const { return t * per_step() + ns + i; }
  int e(int t, int i) const { return t * per_step() + ns + nb + i; }  // e(k + t + 1)
  int r(int t) const { return t * per_step() + ns + 2 * nb; }
};

double total_demand(const MpcInput& in, int t) {
  const auto& row = in.demand[std::min(static_cast<std::size_t>(t), in.demand.size() - 1)];
  double d = 0.0;
  for (double x : row) d += x;
  return d;
}

std::vector<double> slice(const std::vector<double>& v, int from, int count) {
  return {v.begin() + from, v.begin() + from + count};
}

}  // namespace

double cluster_output(const std::vector<double>& s, const std::vector<double>& b, const std::vector<double>& d) {
  double y = 0.0;
  for (double v : s) y += v;
  for (double v : b) y += v;
  for (double v : d) y -= v;
  return y;
}

int ClusterModel::horizon_at(int k) const { return std::min(horizon, steps_per_period - k); }

ClusterModel make_cluster_model(const Scenario& s, const VariationBounds& vb, const UnitRegistry& units, int cluster,
                                int eta, const MpcWeights& weights, double eps_r) {
  ClusterModel m;
  m.cluster = cluster;
  m.steps_per_period = s.timeline.steps_per_period;
  m.horizon = s.timeline.horizon;
  m.tau_hours = s.timeline.tau_hours();
  m.sources = units.sources;
  m.sinks = units.sinks;
  m.storages = units.storages;
  m.weights = weights;
  m.eps_r = eps_r;
  const int start = s.timeline.period_start(eta), nc = m.steps_per_period;
  for (NodeId v : m.sources) {
    const auto i = static_cast<std::size_t>(*s.units.source_index(v));
    m.s_dn.push_back(slice(vb.source_dn[i], start, nc));
    m.s_up.push_back(slice(vb.source_up[i], start, nc));
  }
  const int last = s.timeline.num_steps - 1;
  for (NodeId v : m.storages) {
    const StorageProfile& p = s.storages[static_cast<std::size_t>(*s.units.storage_index(v))];
    m.b_dn.push_back(slice(p.b_dn, start, nc));
    m.b_up.push_back(slice(p.b_up, start, nc));
    std::vector<double> lo, hi;
    for (int k = 0; k <= nc; ++k) {
      const auto a = static_cast<std::size_t>(std::min(start + k, last));
      lo.push_back(p.e_dn[a]);
      hi.push_back(p.e_up[a]);
    }
    m.e_dn.push_back(std::move(lo));
    m.e_up.push_back(std::move(hi));
  }
  return m;
}

opt::ConvexProgram build_local_mpc(const ClusterModel& m, const MpcInput& in) {
  const int ns = static_cast<int>(m.sources.size()), nb = static_cast<int>(m.storages.size());
  if (in.k < 0 || in.k >= m.steps_per_period) throw std::invalid_argument("MPC step outside the clustering period");
  if (in.demand.empty()) throw std::invalid_argument("MPC needs at least one demand row");
  for (const auto& row : in.demand)
    if (row.size() != m.sinks.size()) throw std::invalid_argument("demand row does not match the cluster's sinks");
  if (static_cast<int>(in.e_current.size()) != nb || static_cast<int>(in.e_anchor.size()) != nb)
    throw std::invalid_argument("battery state does not match the cluster's storages");

  const Layout L{ns, nb, m.horizon_at(in.k)};
  opt::ConvexProgram p = opt::ConvexProgram::free_variables(L.size());
  opt::RowBuilder rows(L.size());
  for (int t = 0; t < L.horizon; ++t) {
    const auto k = static_cast<std::size_t>(in.k + t);
    for (int i = 0; i < ns; ++i) {
      const auto is = static_cast<std::size_t>(i);
      p.q[L.s(t, i)] = 2.0 * m.weights.gamma_s;
      p.lo[L.s(t, i)] = m.s_dn[is][k];
      p.hi[L.s(t, i)] = m.s_up[is][k];
    }
    for (int i = 0; i < nb; ++i) {
      const auto is = static_cast<std::size_t>(i);
      p.q[L.b(t, i)] = 2.0 * m.weights.gamma_b;
      p.lo[L.b(t, i)] = m.b_dn[is][k];
      p.hi[L.b(t, i)] = m.b_up[is][k];
      p.lo[L.e(t, i)] = m.e_dn[is][k + 1];
      p.hi[L.e(t, i)] = m.e_up[is][k + 1];
    }
    p.q[L.r(t)] = 2.0 * m.weights.gamma_r;

    // sum s + sum b - sum d + r = dy_prev
    rows.add_row(in.dy_prev + total_demand(in, t));
    for (int i = 0; i < ns; ++i) rows.add(L.s(t, i), 1.0);
    for (int i = 0; i < nb; ++i) rows.add(L.b(t, i), 1.0);
    rows.add(L.r(t), 1.0);

    // e(t+1) - e(t) + tau b(t) = 0
    for (int i = 0; i < nb; ++i) {
      rows.add_row(t == 0 ? in.e_current[static_cast<std::size_t>(i)] : 0.0);
      rows.add(L.e(t, i), 1.0);
      if (t > 0) rows.add(L.e(t - 1, i), -1.0);
      rows.add(L.b(t, i), m.tau_hours);
    }
  }
  if (L.horizon == m.steps_per_period - in.k) {
    for (int i = 0; i < nb; ++i) {
      rows.add_row(in.e_anchor[static_cast<std::size_t>(i)]);
      rows.add(L.e(L.horizon - 1, i), 1.0);
    }
  }
  p.a_eq = rows.matrix();
  p.b_eq = rows.rhs();
  return p;
}

MpcResult solve_local_mpc(const ClusterModel& m, const MpcInput& in) {
  const opt::ConvexProgram p = build_local_mpc(m, in);
  const int ns = static_cast<int>(m.sources.size()), nb = static_cast<int>(m.storages.size());
  const Layout L{ns, nb, m.horizon_at(in.k)};

  opt::Solution sol = opt::solve(p);
  if (sol.status != opt::Status::kOptimal) {
    // Balance is always satisfiable through r, so the batteries are at fault.
    // Re-solve each battery alone to name one.
    for (int i = 0; i < nb; ++i) {
      ClusterModel one = m;
      one.sources.clear();
      one.s_dn.clear();
      one.s_up.clear();
      one.storages = {m.storages[static_cast<std::size_t>(i)]};
      for (auto* v : {&one.b_dn, &one.b_up, &one.e_dn, &one.e_up}) *v = {(*v)[static_cast<std::size_t>(i)]};
      MpcInput single = in;
      single.e_current = {in.e_current[static_cast<std::size_t>(i)]};
      single.e_anchor = {in.e_anchor[static_cast<std::size_t>(i)]};
      if (opt::solve(build_local_mpc(one, single)).status != opt::Status::kOptimal) {
        std::ostringstream os;
        os << "cluster " << m.cluster << ", step " << in.k << ": battery at node " << m.storages[static_cast<std::size_t>(i)]
           << " cannot return to its period-start energy " << in.e_anchor[static_cast<std::size_t>(i)] << " from "
           << in.e_current[static_cast<std::size_t>(i)] << " within its power and energy boxes";
        throw SolverError(os.str());
      }
    }
    throw SolverError("cluster " + std::to_string(m.cluster) + ", step " + std::to_string(in.k) + ": local MPC " +
                      opt::to_string(sol.status));
  }

  MpcResult r;
  r.horizon = L.horizon;
  const opt::Vector& x = sol.x;
  r.s_traj.assign(static_cast<std::size_t>(L.horizon), std::vector<double>(static_cast<std::size_t>(ns)));
  r.b_traj.assign(static_cast<std::size_t>(L.horizon), std::vector<double>(static_cast<std::size_t>(nb)));
  r.e_traj.assign(static_cast<std::size_t>(L.horizon) + 1, std::vector<double>(static_cast<std::size_t>(nb)));
  r.e_traj[0] = in.e_current;
  for (int t = 0; t < L.horizon; ++t) {
    const auto ts = static_cast<std::size_t>(t);
    for (int i = 0; i < ns; ++i) r.s_traj[ts][static_cast<std::size_t>(i)] = x[L.s(t, i)];
    for (int i = 0; i < nb; ++i) {
      // Integrated from b so that the dynamics hold exactly.
      const auto is = static_cast<std::size_t>(i);
      r.b_traj[ts][is] = x[L.b(t, i)];
      r.e_traj[ts + 1][is] = r.e_traj[ts][is] - m.tau_hours * r.b_traj[ts][is];
    }
    r.r_traj.push_back(x[L.r(t)]);
  }
  r.s = r.s_traj[0];
  r.b = r.b_traj[0];
  r.e_next = r.e_traj[1];
  r.r_star = r.r_traj[0];
  r.r_tilde = std::abs(r.r_star) > m.eps_r ? r.r_star : 0.0;
  const auto k = static_cast<std::size_t>(in.k);
  for (int i = 0; i < ns; ++i) {
    const auto is = static_cast<std::size_t>(i);
    r.reserve_up += m.s_up[is][k] - r.s[is];
    r.reserve_dn += m.s_dn[is][k] - r.s[is];
  }
  r.y = cluster_output(r.s, r.b, in.demand[0]);
  r.objective = sol.objective_value;
  r.solution = std::move(sol);
  return r;
}

}  // namespace gridclust
