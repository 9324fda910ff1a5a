#include <benchmark/benchmark.h>

#include "spdcbell/optimizer.hpp"

namespace {

using namespace spdcbell;

void BM_EvaluateFixed(benchmark::State& state) {
  ExperimentConfig cfg;
  cfg.source = SourceParams::finite(0.4, 0.44, 25);
  cfg.detectors = {0.75, 0.0};
  cfg.alice = {MeasurementSetting{0.0, 0.0}, MeasurementSetting{0.78, 0.0}};
  cfg.bob = {MeasurementSetting{0.39, 0.0}, MeasurementSetting{-0.39, 0.0}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate_fixed(cfg));
  }
}
BENCHMARK(BM_EvaluateFixed);

void BM_OptimizeSingleMode(benchmark::State& state) {
  OptimizationProblem problem;
  problem.detectors = {0.9, 0.0};
  problem.mode_policy = FixedModesPolicy{1};
  problem.restarts = static_cast<int>(state.range(0));
  problem.threads = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(optimize(problem));
  }
}
BENCHMARK(BM_OptimizeSingleMode)->Arg(4)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace
