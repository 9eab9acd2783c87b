#include <benchmark/benchmark.h>

#include "grouse/data_model.hpp"
#include "grouse/grouse_core.hpp"
#include "grouse/random.hpp"
#include "grouse/subspace_metrics.hpp"

using namespace grouse;

namespace {

void BM_GrouseStep(benchmark::State& state) {
  const Index n = state.range(0);
  const Index d = state.range(1);
  Rng rng = make_rng(7);
  const PlantedModel model = make_planted(n, d, 0.0, false, rng);
  GrouseEstimator estimator(random_orthonormal(n, d, rng), StepConfig{});
  for (auto _ : state) {
    state.PauseTiming();
    const Sample s = draw_sample(model, rng);
    state.ResumeTiming();
    benchmark::DoNotOptimize(estimator.observe(s.x));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_GrouseStep)->Args({200, 5})->Args({1000, 10})->Args({5000, 10})->Args({2000, 50});

void BM_Measure(benchmark::State& state) {
  const Index n = state.range(0);
  const Index d = state.range(1);
  Rng rng = make_rng(11);
  const OrthonormalBasis u = random_orthonormal(n, d, rng);
  const OrthonormalBasis ubar = random_orthonormal(n, d, rng);
  for (auto _ : state) benchmark::DoNotOptimize(measure(u, ubar));
}
BENCHMARK(BM_Measure)->Args({200, 5})->Args({1000, 10})->Args({5000, 10})->Args({2000, 50});

void BM_DrawSample(benchmark::State& state) {
  const Index n = state.range(0);
  const Index d = state.range(1);
  Rng rng = make_rng(13);
  const PlantedModel model = make_planted(n, d, 1e-4, true, rng);
  for (auto _ : state) benchmark::DoNotOptimize(draw_sample(model, rng));
}
BENCHMARK(BM_DrawSample)->Args({200, 5})->Args({5000, 10});

void BM_Reorthonormalize(benchmark::State& state) {
  Rng rng = make_rng(17);
  const OrthonormalBasis u = random_orthonormal(state.range(0), state.range(1), rng);
  for (auto _ : state) benchmark::DoNotOptimize(reorthonormalize(u));
}
BENCHMARK(BM_Reorthonormalize)->Args({1000, 10})->Args({5000, 10});

}  // namespace

BENCHMARK_MAIN();
