#include <benchmark/benchmark.h>

#include "wbcbf/control.hpp"
#include "wbcbf/qp.hpp"
#include "wbcbf/rng.hpp"
#include "wbcbf/sim.hpp"
#include "wbcbf/wasserstein.hpp"

namespace {

using namespace wbcbf;

void BM_SpdSqrt(benchmark::State& state) {
  const SpdMat2 m{2.0, 0.7, 1.5};
  for (auto _ : state) {
    benchmark::DoNotOptimize(spd_sqrt(m));
  }
}
BENCHMARK(BM_SpdSqrt);

void BM_Barycenter(benchmark::State& state) {
  std::vector<std::pair<double, Gaussian2>> in = {
      {0.4, {{0.0, 0.0}, SpdMat2::isotropic(0.01)}},
      {0.4, {{1.0, 0.0}, SpdMat2::isotropic(0.04)}},
      {0.2, {{-1.0, 0.0}, SpdMat2::isotropic(1.0)}},
  };
  for (auto _ : state) {
    benchmark::DoNotOptimize(gaussian_barycenter(in));
  }
}
BENCHMARK(BM_Barycenter);

void BM_BuildCbcSamples(benchmark::State& state) {
  const Gaussian2 ego{{0.0, 0.0}, SpdMat2::isotropic(0.25)};
  const Gaussian2 wb{{12.0, -2.0}, SpdMat2::isotropic(0.1)};
  const VehicleState s{{0.0, 0.0}, 0.0, 8.0};
  const BarrierParams p;
  RngStream rng(7, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        build_cbc_samples(ego, wb, s, {0.0, 0.0}, {0.0, 4.5}, p, 10, 10, 0.1, 2.9, rng));
  }
}
BENCHMARK(BM_BuildCbcSamples);

void BM_CvarFilterQp(benchmark::State& state) {
  const Gaussian2 ego{{0.0, 0.0}, SpdMat2::isotropic(0.25)};
  const Gaussian2 wb{{11.0, -1.0}, SpdMat2::isotropic(0.1)};
  const VehicleState s{{0.0, 0.0}, 0.0, 8.0};
  const BarrierParams p;
  FilterOptions opts;
  QpSolution warm;
  opts.warm = &warm;
  RngStream rng(7, 1);
  for (auto _ : state) {
    RngStream step_rng = rng;  // same draws each repetition
    benchmark::DoNotOptimize(
        filter_wb_cvar_cbf({0.5, 0.0}, s, ego, wb, {0.0, 4.5}, p, 10, 10, step_rng, opts));
  }
}
BENCHMARK(BM_CvarFilterQp);

void BM_MpcNominal(benchmark::State& state) {
  const ReferencePath path({{{-10.0, 0.0}, 8.0}, {{120.0, 0.0}, 8.0}});
  const MpcConfig cfg;
  const VehicleState s{{5.0, 0.4}, 0.02, 7.0};
  QpSolution warm;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mpc_nominal(s, path, cfg, nullptr, &warm));
  }
}
BENCHMARK(BM_MpcNominal);

void BM_Episode(benchmark::State& state) {
  ScenarioConfig cfg = scenario_presets()[1];  // s2: noisy GPS
  cfg.controller = ControllerKind::WbCvarCbf;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_episode(cfg, 0));
  }
}
BENCHMARK(BM_Episode)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
