// Timings of the kernels behind one sweep point.
#include <benchmark/benchmark.h>

#include "stiffspec/harness.hpp"
#include "stiffspec/models_abstract.hpp"

using namespace stiffspec;

namespace {

void BM_TridiagonalLowest(benchmark::State& state) {
  ObstacleConfig cfg;
  cfg.n_elems = state.range(0);
  const SymPencil p = assemble_coupled(build_obstacle(cfg), 50.0);
  for (auto _ : state) benchmark::DoNotOptimize(geig_lowest(p, 3));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_TridiagonalLowest)->RangeMultiplier(2)->Range(500, 4000)->Complexity();

void BM_ObstacleDefects(benchmark::State& state) {
  ObstacleConfig cfg;
  cfg.n_elems = state.range(0);
  const FormPair p = build_obstacle(cfg);
  const LimitSpectrum l = limit_spectrum(p, 1e-8, 3);
  for (auto _ : state) benchmark::DoNotOptimize(defects_kappa(p, 50.0, l, IndexRange{0, 2}));
}
BENCHMARK(BM_ObstacleDefects)->Arg(1000)->Arg(4000);

void BM_DenseGeneralized(benchmark::State& state) {
  const FormPair p = random_spd_pair(state.range(0), state.range(0) / 3, 1);
  const SymPencil s = assemble_coupled(p, 10.0);
  for (auto _ : state) benchmark::DoNotOptimize(geig_sym(s));
}
BENCHMARK(BM_DenseGeneralized)->Arg(40)->Arg(160);

void BM_ArchSweepPoint(benchmark::State& state) {
  Problem pr;
  pr.model = Model::Arch;
  pr.m = 3;
  pr.arch.n_elems = state.range(0);
  const BuiltProblem bp = build_problem(pr);
  for (auto _ : state) benchmark::DoNotOptimize(kappa_sweep(bp, {0.05}));
}
BENCHMARK(BM_ArchSweepPoint)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_SchurTrial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(schur_check(30, 3, 1, 5));
}
BENCHMARK(BM_SchurTrial);

}  // namespace

BENCHMARK_MAIN();
