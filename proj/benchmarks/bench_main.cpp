#include <benchmark/benchmark.h>

#include "fracgap/killed_operator.hpp"
#include "fracgap/montecarlo.hpp"
#include "fracgap/spectra.hpp"

using namespace fracgap;

namespace {

// Grid spacing for a given benchmark argument: 1D intervals use h = 2/n,
// 2D disks use a spacing giving about n nodes.
Grid interval_grid(int n) { return rasterize(Domain::interval(-1.0, 1.0), 2.0 / n); }
Grid disk_grid(int n) { return rasterize(Domain::ball(2, {0.0, 0.0}, 1.0), std::sqrt(3.14159265358979 / n)); }

void BM_Assemble1D(benchmark::State& state) {
  const auto grid = interval_grid(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(KilledOperator::assemble(grid, 1.0));
  state.counters["nodes"] = static_cast<double>(grid.size());
}
BENCHMARK(BM_Assemble1D)->Arg(250)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_Assemble2D(benchmark::State& state) {
  const auto grid = disk_grid(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(KilledOperator::assemble(grid, 1.0));
  state.counters["nodes"] = static_cast<double>(grid.size());
}
BENCHMARK(BM_Assemble2D)->Arg(500)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_Eigenpairs(benchmark::State& state) {
  const auto op = KilledOperator::assemble(interval_grid(static_cast<int>(state.range(0))), 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(eigenpairs(op, 4));
  state.counters["nodes"] = static_cast<double>(op.size());
}
BENCHMARK(BM_Eigenpairs)->Arg(250)->Arg(500)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_ExitTime(benchmark::State& state) {
  const auto op = KilledOperator::assemble(disk_grid(static_cast<int>(state.range(0))), 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(exit_time(op));
  state.counters["nodes"] = static_cast<double>(op.size());
}
BENCHMARK(BM_ExitTime)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_VariationalEnergy(benchmark::State& state) {
  const auto op = KilledOperator::assemble(interval_grid(static_cast<int>(state.range(0))), 1.0);
  const auto sol = eigenpairs(op, 2);
  const Vector f = sol.phi(1).cwiseQuotient(sol.phi(0));
  const Vector phi1 = sol.phi(0);
  for (auto _ : state) benchmark::DoNotOptimize(variational_energy(op, f, phi1));
}
BENCHMARK(BM_VariationalEnergy)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_StableIncrement(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  Rng rng = path_rng(1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(sample_stable_increment(1.3, dim, 1e-3, rng));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_StableIncrement)->Arg(1)->Arg(2);

void BM_ExitEstimate(benchmark::State& state) {
  StableSamplerConfig cfg;
  cfg.paths = static_cast<std::size_t>(state.range(0));
  cfg.dt = 1e-3;
  for (auto _ : state) benchmark::DoNotOptimize(estimate_exit(cfg, Domain::interval(-1.0, 1.0), {0.0, 0.0}));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ExitEstimate)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
