// Serial reference vs OpenMP scans. Thread count follows KICKTOP_NUM_THREADS.
#include <benchmark/benchmark.h>

#include "kicktop/analysis.hpp"
#include "kicktop/classical_dynamics.hpp"

namespace {

using kicktop::Execution;
using kicktop::Measure;

template <Measure M>
void BM_Scan(benchmark::State& state) {
  const auto exec = state.range(0) == 0 ? Execution::serial : Execution::parallel;
  const kicktop::ThetaPhiGrid grid(50, 100);
  kicktop::ScanParams params;
  params.kappa = 2.5;
  if constexpr (M == Measure::sq_finite) params.j = 1.5;
  for (auto _ : state) {
    auto map = kicktop::scan_field(M, grid, params, exec);
    benchmark::DoNotOptimize(map.values.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(grid.size()));
  state.SetLabel(exec == Execution::serial ? "serial" : "parallel");
}

void BM_PeriodicOrbits(benchmark::State& state) {
  const auto exec = state.range(0) == 0 ? Execution::serial : Execution::parallel;
  for (auto _ : state) {
    auto orbits = kicktop::find_periodic_orbits(2.5, 2, kicktop::ThetaPhiGrid(40, 80), exec);
    benchmark::DoNotOptimize(orbits.data());
  }
  state.SetLabel(exec == Execution::serial ? "serial" : "parallel");
}

}  // namespace

BENCHMARK(BM_Scan<Measure::sq_exact>)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Scan<Measure::lyapunov>)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Scan<Measure::sq_finite>)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PeriodicOrbits)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
  kicktop::configure_threads_from_env();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
