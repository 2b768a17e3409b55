#include <benchmark/benchmark.h>

#include "eegglt/macs.hpp"
#include "eegglt/pruner.hpp"

using namespace eegglt;

static void BM_ModelMacsOverLadder(benchmark::State& state) {
  const auto spec = net::ModelSpec::from_letter('A');
  const auto ladder = glt::density_schedule();
  for (auto _ : state) {
    long long total = 0;
    for (const auto& step : ladder) total += macs::count_model_macs(spec, step.density).total;
    benchmark::DoNotOptimize(total);
  }
}
BENCHMARK(BM_ModelMacsOverLadder);
BENCHMARK_MAIN();
