// Serial reference vs OpenMP scan kernels on the default grids.

#include <benchmark/benchmark.h>

#include "phasetomo/scan_kernels.hpp"
#include "phasetomo/state_prep.hpp"
#include "phasetomo/tomography.hpp"

namespace {

using namespace phasetomo;

const OscillatorSpec kSpec(AtomicConstants{}.mass, 48.33e3);

DensityMatrix mixture() {
  PreparationConfig c;
  c.contamination = 0.16;
  return prepare_ground(c, 8);
}

void husimi(benchmark::State& state, bool parallel) {
  const ScanGrid grid = ScanGrid::husimi_default();
  const auto ctx = kernels::make_context(mixture(), kSpec, grid, 2, {});
  std::vector<PopulationRecord> records(grid.size());
  for (auto _ : state) {
    if (parallel)
      kernels::scan_omp(ctx, grid, records, static_cast<int>(state.range(0)));
    else
      kernels::scan_serial(ctx, grid, records);
    benchmark::DoNotOptimize(records.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(grid.size()));
}

void wigner(benchmark::State& state, bool parallel) {
  const ScanGrid grid = ScanGrid::wigner_default();
  const OscillatorSpec spec(AtomicConstants{}.mass, 32.2e3);
  const double pops[] = {0.3, 0.7};
  const auto ctx = kernels::make_context(DensityMatrix::diagonal(pops, 8), spec, grid, 2, {});
  std::vector<PopulationRecord> records(grid.size());
  for (auto _ : state) {
    if (parallel)
      kernels::scan_omp(ctx, grid, records, static_cast<int>(state.range(0)));
    else
      kernels::scan_serial(ctx, grid, records);
    benchmark::DoNotOptimize(records.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(grid.size()));
}

void BM_HusimiSerial(benchmark::State& s) { husimi(s, false); }
void BM_HusimiOmp(benchmark::State& s) { husimi(s, true); }
void BM_WignerSerial(benchmark::State& s) { wigner(s, false); }
void BM_WignerOmp(benchmark::State& s) { wigner(s, true); }

void BM_ContextBuild(benchmark::State& state) {
  const ScanGrid grid = ScanGrid::wigner_default();
  const DensityMatrix rho = mixture();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::make_context(rho, kSpec, grid, 2, {}));
}

}  // namespace

BENCHMARK(BM_HusimiSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HusimiOmp)->Arg(0)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WignerSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WignerOmp)->Arg(0)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ContextBuild)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
