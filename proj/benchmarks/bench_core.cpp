#include <benchmark/benchmark.h>

#include "psmlab/harness.hpp"

using namespace psmlab;

namespace {

Dataset paper_scale_dataset(std::uint64_t seed) {
  RandomStream coef_rng = substream(seed, kCoefficientDomain, 0);
  auto [beta2, alpha1] =
      select_coefficient_pair(coef_rng, 5, 1.2, 1.0, 0.8, 1.0);
  RandomStream rng = substream(seed, 0, 0);
  return generate_dataset(rng, 1500, -0.9, alpha1,
                          OutcomeModelSpec::linear(0.0, 0.5, beta2));
}

void FitLogistic(benchmark::State& state) {
  const Dataset ds = paper_scale_dataset(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_logistic(ds.x, ds.a));
  }
}
BENCHMARK(FitLogistic);

void NearestNeighborMatch(benchmark::State& state) {
  const Dataset ds = paper_scale_dataset(2);
  const PropensityFit fit = fit_logistic(ds.x, ds.a);
  const Caliper caliper =
      make_caliper(state.range(0) / 100.0, fit.logit_ps);
  for (auto _ : state) {
    benchmark::DoNotOptimize(nearest_neighbor_match(ds, fit, caliper));
  }
}
BENCHMARK(NearestNeighborMatch)->Arg(2000)->Arg(20)->Arg(2);

void CStatistic(benchmark::State& state) {
  const Dataset ds = paper_scale_dataset(3);
  const PropensityFit fit = fit_logistic(ds.x, ds.a);
  for (auto _ : state) {
    benchmark::DoNotOptimize(c_statistic(fit.ps, ds.a));
  }
}
BENCHMARK(CStatistic);

void FullReplicate(benchmark::State& state) {
  ScenarioConfig config;
  config.seed = 4;
  config.replicates = 1;
  config.n = 1500;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_replicate(config, 0));
  }
}
BENCHMARK(FullReplicate);

}  // namespace

BENCHMARK_MAIN();
