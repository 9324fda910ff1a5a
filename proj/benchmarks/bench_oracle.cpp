#include <benchmark/benchmark.h>

#include "spdcbell/fock_oracle.hpp"

namespace {

using namespace spdcbell;

void BM_BuildAndRotate(benchmark::State& state) {
  const int n_max = static_cast<int>(state.range(0));
  const MeasurementSetting alice{0.62, 0.4}, bob{1.1, 0.0};
  for (auto _ : state) {
    const FockState st = build_state(0.25, 0.2, n_max);
    benchmark::DoNotOptimize(rotate(st, alice, bob));
  }
}
BENCHMARK(BM_BuildAndRotate)->Arg(15)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_AllModeTraces(benchmark::State& state) {
  const FockState rotated = rotate(build_state(0.25, 0.2, 30),
                                   MeasurementSetting{0.62, 0.4},
                                   MeasurementSetting{1.1, 0.0});
  for (auto _ : state) {
    benchmark::DoNotOptimize(all_mode_traces(rotated, 0.8));
  }
}
BENCHMARK(BM_AllModeTraces)->Unit(benchmark::kMillisecond);

}  // namespace
