#include "lpwan/sweep.hpp"

#include <benchmark/benchmark.h>
#include <omp.h>

using namespace lpwan;

namespace {

SweepSpec bench_spec() {
  SweepSpec s = SweepSpec::defaults();
  s.node_counts = {5, 20, 50};
  s.seeds_per_point = 2;
  return s;
}

void BM_SweepSerial(benchmark::State& state) {
  const SweepSpec spec = bench_spec();
  for (auto _ : state)
    benchmark::DoNotOptimize(execute_serial(spec));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(plan_sweep(spec).size()));
}

void BM_SweepParallel(benchmark::State& state) {
  const SweepSpec spec = bench_spec();
  for (auto _ : state)
    benchmark::DoNotOptimize(execute_parallel(spec, static_cast<int>(state.range(0))));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(plan_sweep(spec).size()));
}

void BM_SingleRun(benchmark::State& state) {
  ScenarioConfig c;
  c.node_count = static_cast<int>(state.range(0));
  c.strategy = Strategy::frag_retx(3, 1);
  for (auto _ : state)
    benchmark::DoNotOptimize(run(c, {false}));
}

} // namespace

BENCHMARK(BM_SweepSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SweepParallel)->DenseRange(1, omp_get_num_procs() > 1 ? 2 : 1)->Arg(0)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SingleRun)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
