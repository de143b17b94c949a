#include <benchmark/benchmark.h>

#include "lvopt/config.hpp"
#include "lvopt/flight_outputs.hpp"
#include "lvopt/optimizer.hpp"
#include "lvopt/staging.hpp"

using namespace lvopt;

namespace {

AscentProblem case_problem(int n) {
  const std::string dir = LVOPT_DATA_DIR;
  const VehicleSpec v = load_vehicle(dir + "/kslv2.yaml");
  const MissionConfig mc = load_mission(dir + "/case" + std::to_string(n) + ".yaml");
  return AscentProblem(bind_mission(mc, v), v, default_schedule(3, mc.schedule));
}

void BM_SimulateReference(benchmark::State& state) {
  const AscentProblem p = case_problem(1);
  const FlightPlan plan = p.plan_for(p.initial_guess());
  for (auto _ : state) benchmark::DoNotOptimize(simulate(plan, p.earth()));
}
BENCHMARK(BM_SimulateReference)->Unit(benchmark::kMillisecond);

void BM_EvaluateCase3(benchmark::State& state) {
  const AscentProblem p = case_problem(3);
  const Eigen::VectorXd x = p.pack(p.initial_guess());
  for (auto _ : state) benchmark::DoNotOptimize(p.evaluate(x));
}
BENCHMARK(BM_EvaluateCase3)->Unit(benchmark::kMillisecond);

void BM_Jacobian(benchmark::State& state) {
  const AscentProblem p = case_problem(2);
  const NlpProblem nlp = p.nlp();
  const Eigen::VectorXd x = p.pack(p.initial_guess());
  const NlpValues v = nlp.evaluate(x);
  for (auto _ : state) {
    benchmark::DoNotOptimize(finite_difference_jacobian(nlp, x, v, 1e-6, static_cast<int>(state.range(0))));
  }
}
BENCHMARK(BM_Jacobian)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

void BM_IipPredict(benchmark::State& state) {
  const EarthModel e;
  const Vec3 r(e.r_eq + 120e3, 1e5, 2e5);
  const Vec3 v(800.0, 3000.0, -1200.0);
  for (auto _ : state) benchmark::DoNotOptimize(iip_predict(r, v, 100.0, e));
}
BENCHMARK(BM_IipPredict);

void BM_OptimalStaging(benchmark::State& state) {
  StagingProblem p;
  p.v_ex = {2923.0, 3093.0, 3188.0};
  p.eps = {0.104, 0.127, 0.143};
  p.dv_req = 9293.0;
  p.m_payload = 3900.0;
  for (auto _ : state) benchmark::DoNotOptimize(optimal_staging(p));
}
BENCHMARK(BM_OptimalStaging);

}  // namespace
BENCHMARK_MAIN();
