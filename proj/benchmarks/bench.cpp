#include <cmath>
#include <random>

#include <benchmark/benchmark.h>

#include "splitstep/decomposition.hpp"
#include "splitstep/integrators.hpp"
#include "splitstep/mesh.hpp"
#include "splitstep/operators.hpp"
#include "splitstep/resolvent.hpp"

using namespace splitstep;

namespace {

constexpr int kNodes = 257;

SpatialMesh bench_mesh() { return build_uniform_mesh(Interval{0.0, 1.0}, kNodes); }

OperatorSpec bench_spec(double p) {
  OperatorSpec spec;
  spec.p = p;
  spec.alpha = Alpha::affine(0.5);
  spec.horizon = 1.0;
  return spec;
}

GridFunction bench_state(const SpatialMesh& mesh) {
  std::mt19937 gen(12345);
  std::uniform_real_distribution<double> noise(-0.05, 0.05);
  GridFunction u(mesh.node_count());
  for (std::size_t i = 0; i < u.size(); ++i)
    u[i] = std::cos(M_PI * mesh.coord(0, int(i))) + noise(gen);
  return u;
}

SplitProblem bench_problem(const SpatialMesh& mesh, double p, int s) {
  const PartitionOfUnity pou =
      build_partition_of_unity(mesh, build_overlapping_subdomains(mesh, s, 0.125));
  SourceDescriptor source; // unforced
  return make_split_problem(mesh, bench_spec(p), pou, source, bench_state(mesh));
}

void BM_ApplyOperator(benchmark::State& state) {
  const SpatialMesh mesh = bench_mesh();
  const OperatorSpec spec = bench_spec(double(state.range(0)));
  const GridFunction u = bench_state(mesh);
  for (auto _ : state)
    benchmark::DoNotOptimize(apply_operator(spec, mesh, 0.5, u));
}
BENCHMARK(BM_ApplyOperator)->Arg(2)->Arg(4);

void BM_SolveResolvent(benchmark::State& state) {
  const SpatialMesh mesh = bench_mesh();
  const OperatorSpec spec = bench_spec(double(state.range(0)));
  const GridFunction b = bench_state(mesh);
  const ResolventConfig cfg;
  for (auto _ : state)
    benchmark::DoNotOptimize(solve_resolvent(spec, mesh, 0.02, 0.5, b, cfg));
}
BENCHMARK(BM_SolveResolvent)->Arg(2)->Arg(4);

void BM_SumStep(benchmark::State& state) {
  const SpatialMesh mesh = bench_mesh();
  const int s = int(state.range(0));
  const int threads = int(state.range(1));
  const SplitProblem problem = bench_problem(mesh, 2.0, s);
  const TimeGrid grid = make_time_grid(1.0, 64);
  const ResolventConfig cfg;
  for (auto _ : state)
    benchmark::DoNotOptimize(sum_splitting_step(problem, grid, 1, problem.u0, cfg, threads));
}
BENCHMARK(BM_SumStep)->Args({2, 1})->Args({2, 2})->Args({4, 1})->Args({4, 2});

void BM_DualNormSurrogate(benchmark::State& state) {
  const SpatialMesh mesh = bench_mesh();
  const GridFunction g = bench_state(mesh);
  for (auto _ : state)
    benchmark::DoNotOptimize(dual_norm_surrogate(mesh, g, 2.0));
}
BENCHMARK(BM_DualNormSurrogate);

} // namespace

BENCHMARK_MAIN();
