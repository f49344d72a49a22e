#include <benchmark/benchmark.h>

#include "sparsestab/solvers.hpp"
#include "sparsestab/stability_lab.hpp"

using namespace sparsestab;

namespace {

struct Fixture {
  Dictionary dict = random_gaussian(8, 12, 1);
  NoisyInstance inst;
  explicit Fixture(Index k) : inst(make_instance(dict, k, {}, 0.01, 7)) {}
};

void run(benchmark::State& state, SolverKind kind) {
  const Fixture f(state.range(0));
  SolverConfig cfg;
  cfg.delta = 0.01;
  for (auto _ : state) benchmark::DoNotOptimize(run_solver(kind, f.dict, f.inst.noisy_signal, cfg));
}

}  // namespace

static void BM_ExhaustiveP0Delta(benchmark::State& s) { run(s, SolverKind::ExhaustiveP0Delta); }
static void BM_Omp(benchmark::State& s) { run(s, SolverKind::Omp); }
static void BM_Sl0(benchmark::State& s) { run(s, SolverKind::Sl0); }
static void BM_RobustSl0(benchmark::State& s) { run(s, SolverKind::RobustSl0); }
static void BM_L1Delta(benchmark::State& s) { run(s, SolverKind::L1Delta); }
static void BM_L1Eq(benchmark::State& s) { run(s, SolverKind::L1Eq); }

BENCHMARK(BM_ExhaustiveP0Delta)->DenseRange(1, 4)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Omp)->DenseRange(1, 4)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Sl0)->DenseRange(1, 4)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_RobustSl0)->DenseRange(1, 4)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_L1Delta)->DenseRange(1, 4)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_L1Eq)->DenseRange(1, 4)->Unit(benchmark::kMicrosecond);

static void BM_Trial(benchmark::State& state) {
  const auto d = random_gaussian(8, 12, 1);
  const auto cert = certify(d);
  TrialSpec spec;
  spec.k = 2;
  spec.epsilon = 0.01;
  spec.delta = 0.02;
  spec.solvers = {SolverKind::ExhaustiveP0Delta, SolverKind::Omp, SolverKind::Sl0, SolverKind::RobustSl0,
                  SolverKind::L1Delta};
  std::uint64_t seed = 0;
  for (auto _ : state) {
    spec.seed = ++seed;
    benchmark::DoNotOptimize(run_trial(d, cert, spec));
  }
}
BENCHMARK(BM_Trial)->Unit(benchmark::kMillisecond);
