#include <benchmark/benchmark.h>

#include "kggraph/evolution.hpp"
#include "kggraph/operators.hpp"
#include "kggraph/profiles.hpp"
#include "kggraph/spectrum.hpp"
#include "kggraph/stability.hpp"

namespace {

using namespace kggraph;

PhysParams reference_point() {
  PhysParams q;
  q.N = 3;
  q.k = 1;
  q.alpha = 0.5;
  q.omega = 0.3;
  return q;
}

void BM_DiscreteProfile(benchmark::State& state) {
  const PhysParams q = reference_point();
  const Grid g = Grid::for_params(q, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(discrete_profile(q, g));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DiscreteProfile)->RangeMultiplier(4)->Range(500, 32000)->Complexity(benchmark::oN);

void BM_StarLowestEigenvalues(benchmark::State& state) {
  const PhysParams q = reference_point();
  const Grid g = Grid::for_params(q, static_cast<int>(state.range(0)));
  const OperatorAssembly L1 = assemble_L12(q, g, 1, ProfileSource::Discrete);
  const StarMatrix A = StarMatrix::from_sparse(L1.stiffness, L1.layout);
  for (auto _ : state) benchmark::DoNotOptimize(star_lowest_eigenvalues(A, L1.mass, 5));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_StarLowestEigenvalues)->RangeMultiplier(4)->Range(500, 32000)->Complexity(benchmark::oN);

void BM_DenseL1(benchmark::State& state) {
  const PhysParams q = reference_point();
  const Grid g = Grid::for_params(q, static_cast<int>(state.range(0)));
  const OperatorAssembly L1 = assemble_L12(q, g, 1, ProfileSource::Discrete);
  for (auto _ : state) benchmark::DoNotOptimize(solve_spectrum(L1));
}
BENCHMARK(BM_DenseL1)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_Classify(benchmark::State& state) {
  const PhysParams q = reference_point();
  const Grid g = Grid::for_params(q, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(classify(q, g));
}
BENCHMARK(BM_Classify)->Arg(6000)->Unit(benchmark::kMillisecond);

void BM_StrangStep(benchmark::State& state) {
  const PhysParams q = reference_point();
  const Grid g = Grid::for_params(q, static_cast<int>(state.range(0)));
  const LinearPropagator half(q, g, 0.5e-2);
  StateVector U = standing_wave_state(build_profile(q, g), q.omega);
  for (auto _ : state) {
    U = strang_step(U, half, q);
    benchmark::ClobberMemory();
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_StrangStep)->RangeMultiplier(4)->Range(500, 8000)->Complexity(benchmark::oN);

void BM_RealAxisInstability(benchmark::State& state) {
  const PhysParams q = reference_point();
  const Grid g = Grid::for_params(q, static_cast<int>(state.range(0)));
  FlowOptions o;
  o.restrict_k = q.k;
  for (auto _ : state) benchmark::DoNotOptimize(real_axis_instability(q, g, o));
}
BENCHMARK(BM_RealAxisInstability)->Arg(2000)->Arg(6000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
