#include <benchmark/benchmark.h>

#include "sparsestab/certificate.hpp"
#include "sparsestab/dictionary.hpp"

using namespace sparsestab;

static void BM_Coherence(benchmark::State& state) {
  const auto d = random_gaussian(state.range(0), 2 * state.range(0), 1);
  for (auto _ : state) benchmark::DoNotOptimize(coherence(d));
}
BENCHMARK(BM_Coherence)->Arg(8)->Arg(32)->Arg(128);

static void BM_SparkGaussian(benchmark::State& state) {
  const Index n = state.range(0);
  const auto d = random_gaussian(n, n + 4, 1);
  for (auto _ : state) benchmark::DoNotOptimize(spark_exact(d));
}
BENCHMARK(BM_SparkGaussian)->Arg(6)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);

static void BM_SparkDiracHadamard(benchmark::State& state) {
  const auto d = dirac_hadamard(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(spark_exact(d));
}
BENCHMARK(BM_SparkDiracHadamard)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_SigmaProfile(benchmark::State& state) {
  const Index n = state.range(0);
  const auto d = random_gaussian(n, n + 4, 1);
  for (auto _ : state) benchmark::DoNotOptimize(sigma_min_profile(d, n));
}
BENCHMARK(BM_SigmaProfile)->Arg(6)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);
