#include <benchmark/benchmark.h>

#include <cmath>

#include "perpetual/pricer.hpp"
#include "perpetual/solver.hpp"

using namespace perpetual;

namespace {

const MarketParams kMarket{0.1, 100.0};
const SolverConfig kCfg{};

VolatilityModel model_for(int index) {
  switch (index) {
    case 0: return VolatilityModel::constant(0.3);
    case 1: return VolatilityModel::rapm(0.3, 1.0);
    default: return VolatilityModel::barles_soner(0.3, 0.05);
  }
}

}  // namespace

static void BM_beta(benchmark::State& state) {
  const auto m = model_for(static_cast<int>(state.range(0)));
  double w = 1e-3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(m.beta(4.0, w));
    w = w < 1e2 ? w * 1.37 : 1e-3;
  }
}
BENCHMARK(BM_beta)->DenseRange(0, 2);

static void BM_phi(benchmark::State& state) {
  const auto m = model_for(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(phi(m, kMarket, std::log(55.0), kCfg));
}
BENCHMARK(BM_phi)->DenseRange(0, 2)->Unit(benchmark::kMicrosecond);

static void BM_solve(benchmark::State& state) {
  const auto m = VolatilityModel::rapm(0.3, 1.0);
  const auto method = static_cast<Method>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(solve_free_boundary(m, kMarket, kCfg, method).rho);
}
BENCHMARK(BM_solve)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

static void BM_solve_barles_soner(benchmark::State& state) {
  const auto m = VolatilityModel::barles_soner(0.3, 0.05);
  for (auto _ : state) benchmark::DoNotOptimize(solve_free_boundary_general(m, kMarket, kCfg).rho);
}
BENCHMARK(BM_solve_barles_soner)->Unit(benchmark::kMillisecond);

static void BM_build_curve(benchmark::State& state) {
  const auto m = VolatilityModel::rapm(0.3, 1.0);
  const auto sol = solve_free_boundary_h(m, kMarket, kCfg);
  const auto grid = make_grid(sol.rho, 300.0, static_cast<int>(state.range(0)), true);
  for (auto _ : state) benchmark::DoNotOptimize(build_curve(m, kMarket, sol, grid, kCfg).points.data());
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_build_curve)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
