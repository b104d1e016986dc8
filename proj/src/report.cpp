#include "gridclust/report.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "gridclust/csv.hpp"

namespace gridclust {
namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

// Statistics shared by the in-memory summary and the one rebuilt from files.
struct Digest {
  int steps = 0;
  int clusters = 0;
  std::vector<std::string> activation_times;  // hh:mm
  std::vector<int> iterations;
  int nonconverged = 0;
  int shortfall_steps = 0;
  double max_abs_total = 0.0;
  double max_abs_total_covered = 0.0;
  int covered_violations = 0;  // covered steps with |total| above eps_net
  double max_commit_gap = 0.0;  // max |sum dy* - q| over activations
};

std::string digest_lines(const Digest& d, double eps_net) {
  std::ostringstream os;
  os << "steps=" << d.steps << '\n';
  os << "clusters=" << d.clusters << '\n';
  os << "activations=" << d.activation_times.size() << '\n';
  os << "first_activation=" << (d.activation_times.empty() ? "none" : d.activation_times.front()) << '\n';
  os << "last_activation=" << (d.activation_times.empty() ? "none" : d.activation_times.back()) << '\n';
  if (d.iterations.empty()) {
    os << "admm_iterations_min=0\nadmm_iterations_avg=0\nadmm_iterations_max=0\n";
  } else {
    double sum = 0.0;
    for (int i : d.iterations) sum += i;
    os << "admm_iterations_min=" << *std::min_element(d.iterations.begin(), d.iterations.end()) << '\n';
    os << "admm_iterations_avg=" << fmt(std::round(sum / static_cast<double>(d.iterations.size()) * 100.0) / 100.0) << '\n';
    os << "admm_iterations_max=" << *std::max_element(d.iterations.begin(), d.iterations.end()) << '\n';
  }
  os << "admm_nonconverged=" << d.nonconverged << '\n';
  os << "shortfall_steps=" << d.shortfall_steps << '\n';
  os << "max_abs_network_deviation=" << fmt(d.max_abs_total) << '\n';
  os << "max_abs_network_deviation_covered=" << fmt(d.max_abs_total_covered) << '\n';
  os << "eps_net=" << fmt(eps_net) << '\n';
  os << "covered_steps_above_eps_net=" << d.covered_violations << '\n';
  os << "max_commitment_gap=" << fmt(d.max_commit_gap) << '\n';
  return os.str();
}

Digest digest(const ControlLog& log, const Timeline& timeline, double eps_net) {
  Digest d;
  d.steps = static_cast<int>(log.steps.size());
  d.clusters = log.steps.empty() ? 0 : static_cast<int>(log.steps.front().clusters.size());
  for (const Activation& a : log.activations) {
    d.activation_times.push_back(clock_time(timeline, a.k));
    d.iterations.push_back(a.iterations);
    d.nonconverged += !a.converged;
    d.shortfall_steps += a.shortfall != 0.0;
    d.max_commit_gap = std::max(d.max_commit_gap, std::abs(a.committed - a.q));
  }
  for (std::size_t i = 0; i < log.steps.size(); ++i) {
    const double total = std::abs(log.steps[i].network_total);
    d.max_abs_total = std::max(d.max_abs_total, total);
    if (reserves_covered(log, i)) {
      d.max_abs_total_covered = std::max(d.max_abs_total_covered, total);
      d.covered_violations += total > eps_net;
    }
  }
  return d;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ScenarioError(where + ": bad number '" + s + "'");
  return v;
}

// Rows of a CSV file keyed by header name.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::string name;

  int col(const std::string& key) const {
    const auto it = std::find(header.begin(), header.end(), key);
    if (it == header.end()) throw ScenarioError(name + ": missing column " + key);
    return static_cast<int>(it - header.begin());
  }
  double num(std::size_t row, int c) const {
    return to_double(rows[row][static_cast<std::size_t>(c)], name + " row " + std::to_string(row + 2));
  }
};

Table read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open " + path.string());
  Table t;
  t.name = path.filename().string();
  std::string line;
  if (!std::getline(in, line)) throw ScenarioError(t.name + ": empty file");
  t.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    t.rows.push_back(split(line));
    if (t.rows.back().size() != t.header.size())
      throw ScenarioError(t.name + " row " + std::to_string(t.rows.size() + 1) + ": wrong field count");
  }
  return t;
}

}  // namespace

bool reserves_covered(const ControlLog& log, std::size_t i) {
  auto short_at = [&](std::size_t j) {
    const auto& a = log.steps[j].activation;
    return a && log.activations[static_cast<std::size_t>(*a)].shortfall != 0.0;
  };
  if (short_at(i)) return false;
  return i == 0 || log.steps[i - 1].period != log.steps[i].period || !short_at(i - 1);
}

std::string summary_text(const ControlLog& log, const Scenario& scenario, const SimulationConfig& config) {
  std::ostringstream os;
  os << "periods=" << log.partitions.size() << '\n';
  os << digest_lines(digest(log, scenario.timeline, config.eps_net), config.eps_net);
  os << "comm=" << config.comm << '\n';
  os << "admm_c=" << fmt(config.admm.c) << '\n';
  os << "gamma_r=" << fmt(config.weights.gamma_r) << '\n';
  os << "eps_r=" << fmt(config.eps_r) << '\n';
  os << "seed=" << (config.seed ? std::to_string(*config.seed) : "none") << '\n';
  double max_step = 0.0, admm_total = 0.0;
  for (const StepRecord& s : log.steps) max_step = std::max(max_step, s.seconds);
  for (const Activation& a : log.activations) admm_total += a.seconds;
  os << "wall_clock_seconds=" << fmt(std::round(log.seconds * 1e3) / 1e3) << '\n';
  os << "max_step_seconds=" << fmt(std::round(max_step * 1e4) / 1e4) << '\n';
  os << "avg_activation_seconds="
     << fmt(log.activations.empty() ? 0.0 : std::round(admm_total / static_cast<double>(log.activations.size()) * 1e6) / 1e6)
     << '\n';
  return os.str();
}

void write_report(const ControlLog& log, const Scenario& scenario, const SimulationConfig& config,
                  const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const Timeline& t = scenario.timeline;
  for (std::size_t eta = 0; eta < log.partitions.size(); ++eta) {
    auto out = open_out(dir / ("partition_" + std::to_string(eta + 1) + ".csv"));
    write_partition_csv(out, log.partitions[eta], scenario);
  }

  auto cod = open_out(dir / "cluster_output_deviation.csv");
  auto ntd = open_out(dir / "network_total_deviation.csv");
  auto rac = open_out(dir / "requests_and_commitments.csv");
  auto ud = open_out(dir / "unit_dispatch.csv");
  auto cl = open_out(dir / "control_log.csv");
  cod << "k,time,cluster,y\n";
  ntd << "k,time,total,covered\n";
  rac << "k,time,cluster,r_star,r_tilde,reserve_dn,reserve_up,dy_commit,dy_applied\n";
  ud << "k,cluster,node,kind,value\n";
  cl << "k,time,period,cluster,y,r_star,r_tilde,reserve_up,reserve_dn,dy_applied,dy_commit,activated,"
        "admm_iterations,admm_converged,shortfall\n";
  for (std::size_t i = 0; i < log.steps.size(); ++i) {
    const StepRecord& s = log.steps[i];
    const std::string time = clock_time(t, s.k);
    const Activation* a = s.activation ? &log.activations[static_cast<std::size_t>(*s.activation)] : nullptr;
    CsvRow(ntd) << s.k << time << s.network_total << (reserves_covered(log, i) ? 1 : 0);
    for (const ClusterStep& c : s.clusters) {
      CsvRow(cod) << s.k << time << c.cluster << c.y;
      CsvRow(rac) << s.k << time << c.cluster << c.r_star << c.r_tilde << c.reserve_dn << c.reserve_up << c.dy_commit
                  << c.dy_applied;
      for (std::size_t j = 0; j < c.sources.size(); ++j)
        CsvRow(ud) << s.k << c.cluster << scenario.external(c.sources[j]) << "source" << c.s[j];
      for (std::size_t j = 0; j < c.storages.size(); ++j)
        CsvRow(ud) << s.k << c.cluster << scenario.external(c.storages[j]) << "battery" << c.b[j];
      for (std::size_t j = 0; j < c.sinks.size(); ++j)
        CsvRow(ud) << s.k << c.cluster << scenario.external(c.sinks[j]) << "sink" << c.d[j];
      for (std::size_t j = 0; j < c.storages.size(); ++j)
        CsvRow(ud) << s.k << c.cluster << scenario.external(c.storages[j]) << "energy" << c.e[j];
      CsvRow(cl) << s.k << time << s.period << c.cluster << c.y << c.r_star << c.r_tilde << c.reserve_up << c.reserve_dn
                 << c.dy_applied << c.dy_commit << (a ? 1 : 0) << (a ? a->iterations : 0) << (a && a->converged ? 1 : 0)
                 << (a ? a->shortfall : 0.0);
    }
  }

  auto act = open_out(dir / "activations.csv");
  act << "k,time,requested,q,shortfall,iterations,converged,consensus_residual,coupling_residual,committed\n";
  for (const Activation& a : log.activations) {
    CsvRow(act) << a.k << clock_time(t, a.k) << a.requested << a.q << a.shortfall << a.iterations << (a.converged ? 1 : 0)
                << a.consensus_residual << a.coupling_residual << a.committed;
    if (!a.result.trace.empty()) {
      auto tr = open_out(dir / ("dcadmm_" + std::to_string(a.k) + ".csv"));
      write_dcadmm_trace(tr, a.result);
    }
  }
  auto summary = open_out(dir / "summary.txt");
  summary << summary_text(log, scenario, config);
}

std::string summarize_report_dir(const std::filesystem::path& dir) {
  const Table cl = read_table(dir / "control_log.csv");
  const Table act = read_table(dir / "activations.csv");
  const Table ud = read_table(dir / "unit_dispatch.csv");
  const Table ntd = read_table(dir / "network_total_deviation.csv");

  Digest d;
  const int ck = cl.col("k"), cc = cl.col("cluster"), cy = cl.col("y");
  std::map<std::pair<long long, long long>, double> y_logged;
  std::vector<double> seen_k;
  for (std::size_t r = 0; r < cl.rows.size(); ++r) {
    const auto k = static_cast<long long>(cl.num(r, ck));
    const auto h = static_cast<long long>(cl.num(r, cc));
    y_logged[{k, h}] = cl.num(r, cy);
    d.clusters = std::max(d.clusters, static_cast<int>(h));
    if (seen_k.empty() || seen_k.back() != static_cast<double>(k)) seen_k.push_back(static_cast<double>(k));
  }
  d.steps = static_cast<int>(seen_k.size());

  // y recomputed from the unit rows in the order they were written.
  std::map<std::pair<long long, long long>, std::array<std::vector<double>, 3>> parts;
  const int uk = ud.col("k"), uc = ud.col("cluster"), ukind = ud.col("kind"), uv = ud.col("value");
  for (std::size_t r = 0; r < ud.rows.size(); ++r) {
    auto& p = parts[{static_cast<long long>(ud.num(r, uk)), static_cast<long long>(ud.num(r, uc))}];
    const std::string& kind = ud.rows[r][static_cast<std::size_t>(ukind)];
    if (kind == "source") p[0].push_back(ud.num(r, uv));
    else if (kind == "battery") p[1].push_back(ud.num(r, uv));
    else if (kind == "sink") p[2].push_back(ud.num(r, uv));
  }
  int y_mismatch = 0;
  for (const auto& [key, y] : y_logged) {
    const auto it = parts.find(key);
    const double recomputed = it == parts.end() ? 0.0 : cluster_output(it->second[0], it->second[1], it->second[2]);
    y_mismatch += recomputed != y;
  }

  const int at = act.col("time"), ait = act.col("iterations"), aconv = act.col("converged"), ashort = act.col("shortfall"),
            aq = act.col("q"), acom = act.col("committed");
  for (std::size_t r = 0; r < act.rows.size(); ++r) {
    d.activation_times.push_back(act.rows[r][static_cast<std::size_t>(at)]);
    d.iterations.push_back(static_cast<int>(act.num(r, ait)));
    d.nonconverged += act.num(r, aconv) == 0.0;
    d.shortfall_steps += act.num(r, ashort) != 0.0;
    d.max_commit_gap = std::max(d.max_commit_gap, std::abs(act.num(r, acom) - act.num(r, aq)));
  }
  const int nt = ntd.col("total"), ncov = ntd.col("covered");
  for (std::size_t r = 0; r < ntd.rows.size(); ++r) {
    const double total = std::abs(ntd.num(r, nt));
    d.max_abs_total = std::max(d.max_abs_total, total);
    if (ntd.num(r, ncov) != 0.0) {
      d.max_abs_total_covered = std::max(d.max_abs_total_covered, total);
      d.covered_violations += total > 1e-2;
    }
  }
  std::ostringstream os;
  os << digest_lines(d, 1e-2);
  os << "y_identity_mismatches=" << y_mismatch << '\n';
  return os.str();
}

}  // namespace gridclust
