// Serial reference vs OpenMP path fan-out for the Monte Carlo estimator.
#include "psdaffine/montecarlo.hpp"

#include <benchmark/benchmark.h>

using namespace psdaffine;

namespace {

AffineParams bench_model() {
  AffineParams p = AffineParams::zero(2);
  p.alpha = SymMatrix::identity(2);
  p.b = SymMatrix::identity(2) * 2.0;
  p.B = LinearDrift::lyapunov(-0.5 * MatrixXd::Identity(2, 2));
  SymMatrix xi(2);
  xi.set(0, 0, 0.5);
  xi.set(0, 1, 0.2);
  xi.set(1, 1, 0.3);
  p.m.atoms.push_back({xi, 1.0});
  SymMatrix eta(2);
  eta.set(0, 0, 0.3);
  eta.set(0, 1, 0.1);
  eta.set(1, 1, 0.4);
  p.mu.atoms.push_back({eta, SymMatrix::identity(2) * 0.5});
  return p;
}

void run(benchmark::State& state, Execution exec) {
  const AffineParams p = bench_model();
  SimConfig cfg;
  cfg.nPaths = state.range(0);
  cfg.dt = 1.0 / 256.0;
  cfg.execution = exec;
  const CSymMatrix u(SymMatrix::identity(2));
  const SymMatrix x = SymMatrix::identity(2);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_transform(p, u, x, 1.0, cfg));
  state.counters["threads"] = resolve_threads(cfg);
  state.counters["steps/s"] =
      benchmark::Counter(static_cast<double>(cfg.nPaths) * 256.0, benchmark::Counter::kIsIterationInvariantRate);
}

void BM_Serial(benchmark::State& state) { run(state, Execution::Serial); }
void BM_Parallel(benchmark::State& state) { run(state, Execution::Parallel); }

}  // namespace

BENCHMARK(BM_Serial)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Parallel)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
