#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "gridclust/matpower.hpp"
#include "gridclust/report.hpp"
#include "gridclust/scenario_io.hpp"
#include "gridclust/simulation.hpp"
#include "gridclust/synthetic.hpp"

namespace fs = std::filesystem;
using namespace gridclust;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 2;
constexpr int kSolver = 3;
constexpr int kNonConverged = 4;

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw ScenarioError("cannot write " + path.string());
  return out;
}

int cmd_validate(const std::string& path) {
  const Scenario s = load_scenario(path);
  const Timeline& t = s.timeline;
  std::cout << "ok: " << s.graph.num_nodes() << " nodes, " << s.graph.num_edges() << " lines, " << s.units.sources.size()
            << " sources, " << s.units.storages.size() << " storages, " << s.units.sinks.size() << " sinks, "
            << t.num_steps << " steps, " << t.num_periods() << " periods, " << t.num_clusters << " clusters\n";
  return kOk;
}

int cmd_plan(const std::string& path, int eta, const fs::path& out, const SimulationConfig& config) {
  const Scenario s = load_scenario(path);
  const PlanningContext context = make_planning_context(s, config);
  const PeriodPlan plan = plan_period(s, context, eta, config);
  fs::create_directories(out);
  {
    auto f = open_out(out / "paths.csv");
    write_path_table_csv(f, context.paths, s);
  }
  {
    auto f = open_out(out / ("transactions_" + std::to_string(eta) + ".csv"));
    write_transactions_csv(f, plan.transactions, context.paths, s);
  }
  {
    auto f = open_out(out / ("edge_weights_" + std::to_string(eta) + ".csv"));
    write_edge_weights_csv(f, plan.edge_weights, s);
  }
  {
    auto f = open_out(out / ("partition_" + std::to_string(eta) + ".csv"));
    write_partition_csv(f, plan.partition, s);
  }
  std::cout << "period " << eta << ": steps " << plan.first_step << ".." << plan.first_step + plan.num_steps - 1
            << ", cut " << plan.partition.cut_weight << ", sizes";
  for (int n : plan.partition.sizes()) std::cout << ' ' << n;
  std::cout << '\n';
  return kOk;
}

int cmd_simulate(const std::string& path, const fs::path& out, const SimulationConfig& config) {
  const Scenario s = load_scenario(path);
  const ControlLog log = run_simulation(s, config);
  write_report(log, s, config, out);
  std::cout << summary_text(log, s, config);
  if (log.nonconverged() > 0) {
    std::cerr << "warning: " << log.nonconverged() << " supervisor activations did not converge\n";
    return kNonConverged;
  }
  return kOk;
}

int cmd_report(const fs::path& dir) {
  const std::string text = summarize_report_dir(dir);
  std::cout << text;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (line.rfind("admm_nonconverged=", 0) == 0 && line != "admm_nonconverged=0") return kNonConverged;
  return kOk;
}

int cmd_generate(const fs::path& out, std::uint64_t seed, bool deficit) {
  SyntheticDayOptions opt;
  opt.seed = seed;
  opt.deficit_in_last_period = deficit;
  save_scenario(make_synthetic_day(opt), out);
  std::cout << "wrote " << out.string() << '\n';
  return kOk;
}

int cmd_import(const fs::path& case_file, const fs::path& out, const MatpowerOptions& opt) {
  const Scenario s = import_matpower_file(case_file, opt);
  save_scenario(s, out);
  std::cout << "wrote " << out.string() << ": " << s.graph.num_nodes() << " nodes, " << s.units.sources.size()
            << " sources, " << s.units.sinks.size() << " sinks\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-layer cluster control of a power network: clustering, local MPC and distributed supervision"};
  app.require_subcommand(1);

  std::string scenario;
  std::string out;
  SimulationConfig config;
  bool serial = false;

  auto* validate = app.add_subcommand("validate", "Check a scenario file");
  validate->add_option("--scenario", scenario, "Scenario JSON")->required();

  int eta = 1;
  auto* plan = app.add_subcommand("plan", "Run the clustering pipeline for one period");
  plan->add_option("--scenario", scenario, "Scenario JSON")->required();
  plan->add_option("--period", eta, "Clustering period (1-based)")->required();
  plan->add_option("--out", out, "Output directory")->required();
  plan->add_option("--cs-mult", config.cs_mult, "Slack penalty multiple of the largest path cost");
  plan->add_option("--balance-tol", config.balance_tol, "Cluster size balance tolerance");

  std::uint64_t seed = 0;
  auto* simulate = app.add_subcommand("simulate", "Simulate the whole day and write the report");
  simulate->add_option("--scenario", scenario, "Scenario JSON")->required();
  simulate->add_option("--out", out, "Output directory")->required();
  simulate->add_option("--comm", config.comm, "complete, ring or file:<path>");
  auto* seed_opt = simulate->add_option("--seed", seed, "Redraw sink actuals with this seed");
  simulate->add_option("--gamma-r", config.weights.gamma_r, "Penalty on the reserve request");
  simulate->add_option("--eps-r", config.eps_r, "Requests below this magnitude are dropped");
  simulate->add_option("--cs-mult", config.cs_mult, "Slack penalty multiple of the largest path cost");
  simulate->add_option("--balance-tol", config.balance_tol, "Cluster size balance tolerance");
  simulate->add_option("--admm-c", config.admm.c, "DC-ADMM penalty parameter");
  simulate->add_option("--admm-max-iter", config.admm.max_iter, "DC-ADMM iteration limit");
  simulate->add_option("--admm-tol", config.admm.tol, "DC-ADMM residual tolerance");
  simulate->add_flag("--trace", config.keep_admm_traces, "Write per-iteration DC-ADMM traces");
  simulate->add_flag("--serial", serial, "Run the serial reference kernels");

  std::string log_dir;
  auto* report = app.add_subcommand("report", "Summarize a report directory");
  report->add_option("--log", log_dir, "Directory written by simulate")->required();

  std::uint64_t gen_seed = 2020;
  bool no_deficit = false;
  auto* generate = app.add_subcommand("generate", "Write the synthetic 118-node day");
  generate->add_option("--out", out, "Scenario JSON to write")->required();
  generate->add_option("--seed", gen_seed, "Generator seed");
  generate->add_flag("--no-deficit", no_deficit, "Keep every region provisioned in the last period");

  std::string case_file;
  MatpowerOptions mp;
  auto* import = app.add_subcommand("import", "Build a flat-profile scenario from a MATPOWER case file");
  import->add_option("--case", case_file, "MATPOWER .m case")->required();
  import->add_option("--out", out, "Scenario JSON to write")->required();
  import->add_option("--source-band", mp.source_band, "Source band as a fraction of PG");
  import->add_option("--load-band", mp.load_band, "Load band as a fraction of PD");
  import->add_option("--steps", mp.timeline.num_steps, "N_t");
  import->add_option("--period", mp.timeline.steps_per_period, "N_c");
  import->add_option("--clusters", mp.timeline.num_clusters, "M");
  import->add_option("--horizon", mp.timeline.horizon, "N_p");
  import->add_option("--tau", mp.timeline.tau_min, "Sampling time in minutes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kInvalid;
  }

  try {
    if (*seed_opt) config.seed = seed;
    if (serial) {
      config.exec = Exec::kSerial;
      config.admm.exec = Exec::kSerial;
    }
    if (*validate) return cmd_validate(scenario);
    if (*plan) return cmd_plan(scenario, eta, out, config);
    if (*simulate) return cmd_simulate(scenario, out, config);
    if (*report) return cmd_report(log_dir);
    if (*generate) return cmd_generate(out, gen_seed, !no_deficit);
    if (*import) return cmd_import(case_file, out, mp);
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kSolver;
  } catch (const ScenarioError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  }
  return kOk;
}
