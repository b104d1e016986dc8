// Serial reference against OpenMP execution for the parallel kernels.
// The second benchmark argument selects the policy: 0 serial, 1 parallel.

#include <benchmark/benchmark.h>

#include <omp.h>

#include "gridclust/scenario_io.hpp"
#include "gridclust/simulation.hpp"

using namespace gridclust;

namespace {

const Scenario& day() {
  static const Scenario s = load_scenario(GRID_DATA_DIR "/synthetic_118.json");
  return s;
}

const PlanningContext& context() {
  static const PlanningContext c = make_planning_context(day(), SimulationConfig{}, Exec::kSerial);
  return c;
}

Exec policy(const benchmark::State& state) { return state.range(0) == 0 ? Exec::kSerial : Exec::kParallel; }

void label(benchmark::State& state) {
  state.SetLabel(state.range(0) == 0 ? "serial" : "parallel x" + std::to_string(omp_get_max_threads()));
}

void BM_ShortestPaths(benchmark::State& state) {
  const Scenario& s = day();
  for (auto _ : state) benchmark::DoNotOptimize(all_pairs_source_sink(s.graph, s.units, policy(state)));
  label(state);
}

void BM_Transactions(benchmark::State& state) {
  const PlanningContext& c = context();
  for (auto _ : state)
    benchmark::DoNotOptimize(solve_transactions(c.bounds, c.paths, 0, static_cast<int>(state.range(1)), c.c_s, policy(state)));
  label(state);
}

void BM_Projection(benchmark::State& state) {
  const PlanningContext& c = context();
  static const TransactionPlan plan = solve_transactions(c.bounds, c.paths, 0, 12, c.c_s, Exec::kSerial);
  for (auto _ : state) benchmark::DoNotOptimize(project_transactions(plan, c.paths, day().graph, policy(state)));
  label(state);
}

// Short simulated window: local MPC solves run concurrently across clusters.
void BM_SimulationWindow(benchmark::State& state) {
  Scenario s = day();
  s.timeline.num_steps = 12;
  s.timeline.steps_per_period = 12;
  for (auto& p : s.sources) for (auto* v : {&p.up, &p.dn, &p.nom}) v->resize(12);
  for (auto& p : s.sinks) for (auto* v : {&p.up, &p.dn, &p.nom, &p.actual}) v->resize(12);
  for (auto& p : s.storages) {
    for (auto* v : {&p.b_dn, &p.b_up}) v->resize(12);
    for (auto* v : {&p.e_dn, &p.e_up}) v->resize(12);
  }
  SimulationConfig config;
  config.exec = policy(state);
  config.admm.exec = policy(state);
  for (auto _ : state) benchmark::DoNotOptimize(run_simulation(s, config));
  label(state);
}

void BM_Dcadmm(benchmark::State& state) {
  const int m = static_cast<int>(state.range(1));
  std::vector<double> req(static_cast<std::size_t>(m), 0.0), dn(static_cast<std::size_t>(m), -5.0),
      up(static_cast<std::size_t>(m), 5.0);
  req[0] = 3.0;
  const SupervisorProblem p = make_supervisor_problem(req, dn, up);
  const CommGraph g = CommGraph::complete(m);
  DcadmmOptions opt;
  opt.exec = policy(state);
  opt.max_iter = 200;
  for (auto _ : state) benchmark::DoNotOptimize(run_dcadmm(p, g, opt));
  label(state);
}

}  // namespace

BENCHMARK(BM_ShortestPaths)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Transactions)->Args({0, 4})->Args({1, 4})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Projection)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SimulationWindow)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Dcadmm)->Args({0, 4})->Args({1, 4})->Args({0, 32})->Args({1, 32})->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
