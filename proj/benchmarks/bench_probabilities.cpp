#include <benchmark/benchmark.h>

#include "spdcbell/distribution.hpp"

namespace {

using namespace spdcbell;

ExperimentConfig sample_config(int modes) {
  ExperimentConfig cfg;
  cfg.source = SourceParams::finite(0.35, 0.4, modes);
  cfg.detectors = {0.85, 0.001};
  cfg.alice = {MeasurementSetting{0.1, 0.0}, MeasurementSetting{0.86, 0.3}};
  cfg.bob = {MeasurementSetting{0.42, 0.1}, MeasurementSetting{-0.37, 0.0}};
  return cfg;
}

void BM_NoClickTable(benchmark::State& state) {
  const ValidatedConfig cfg = validate(sample_config(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(no_click_table(cfg, 0, 1));
  }
}
BENCHMARK(BM_NoClickTable)->Arg(1)->Arg(25)->Arg(1000);

void BM_NoClickTablePoisson(benchmark::State& state) {
  ExperimentConfig raw = sample_config(1);
  raw.source = SourceParams::poisson_limit(0.7, 0.8);
  const ValidatedConfig cfg = validate(raw);
  for (auto _ : state) {
    benchmark::DoNotOptimize(no_click_table(cfg, 0, 1));
  }
}
BENCHMARK(BM_NoClickTablePoisson);

void BM_JointDistribution(benchmark::State& state) {
  const ValidatedConfig cfg = validate(sample_config(25));
  for (auto _ : state) {
    benchmark::DoNotOptimize(joint_distribution(cfg, 1, 0));
  }
}
BENCHMARK(BM_JointDistribution);

void BM_BestBinning(benchmark::State& state) {
  const ValidatedConfig cfg = validate(sample_config(25));
  for (auto _ : state) {
    benchmark::DoNotOptimize(best_binning(cfg));
  }
}
BENCHMARK(BM_BestBinning);

}  // namespace

BENCHMARK_MAIN();
