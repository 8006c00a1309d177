#include "afem/adapt.hpp"
#include "afem/problems.hpp"

#include <benchmark/benchmark.h>

#include <memory>
#include <random>

using namespace afem;

namespace {

std::shared_ptr<const Mesh> smooth_mesh(int levels)
{
    Mesh m = build_benchmark(BenchmarkId::SmoothLayer).mesh;
    for (int i = 0; i < levels; ++i) {
        m = uniform_refine(m);
    }
    return std::make_shared<const Mesh>(std::move(m));
}

void BM_UniformRefine(benchmark::State& state)
{
    const auto mesh = smooth_mesh(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(uniform_refine(*mesh));
    }
    state.counters["elements"] = mesh->num_elements();
}
BENCHMARK(BM_UniformRefine)->DenseRange(3, 6)->Unit(benchmark::kMillisecond);

void BM_LocalRefine(benchmark::State& state)
{
    const auto mesh = smooth_mesh(static_cast<int>(state.range(0)));
    std::mt19937_64 rng(1);
    std::bernoulli_distribution pick(0.1);
    MarkSet marks;
    for (int e = 0; e < mesh->num_elements(); ++e) {
        if (pick(rng)) {
            marks.push_back(e);
        }
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(refine(*mesh, marks));
    }
    state.counters["elements"] = mesh->num_elements();
}
BENCHMARK(BM_LocalRefine)->DenseRange(3, 6)->Unit(benchmark::kMillisecond);

void BM_Assemble(benchmark::State& state)
{
    const auto bench = build_benchmark(BenchmarkId::SmoothLayer);
    const auto space = build_space(smooth_mesh(static_cast<int>(state.range(0))), static_cast<int>(state.range(1)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(assemble(*space, bench.problem, {}));
    }
    state.counters["dofs"] = space->n_dofs();
}
BENCHMARK(BM_Assemble)->ArgsProduct({{3, 4, 5}, {1, 2}})->Unit(benchmark::kMillisecond);

void BM_SolveDirect(benchmark::State& state)
{
    const auto bench = build_benchmark(BenchmarkId::SmoothLayer);
    const auto space = build_space(smooth_mesh(static_cast<int>(state.range(0))), static_cast<int>(state.range(1)));
    const auto system = assemble(*space, bench.problem, {});
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve(system));
    }
    state.counters["dofs"] = space->n_dofs();
}
BENCHMARK(BM_SolveDirect)->ArgsProduct({{3, 4, 5}, {1, 2}})->Unit(benchmark::kMillisecond);

void BM_SolveKrylov(benchmark::State& state)
{
    const auto bench = build_benchmark(BenchmarkId::SmoothLayer);
    const auto space = build_space(smooth_mesh(static_cast<int>(state.range(0))), 1);
    const auto system = assemble(*space, bench.problem, {});
    SolverOptions options;
    options.method = SolverMethod::Krylov;
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve(system, options));
    }
    state.counters["dofs"] = space->n_dofs();
}
BENCHMARK(BM_SolveKrylov)->DenseRange(3, 5)->Unit(benchmark::kMillisecond);

void BM_Estimate(benchmark::State& state)
{
    const auto bench = build_benchmark(BenchmarkId::SmoothLayer);
    const auto space = build_space(smooth_mesh(static_cast<int>(state.range(0))), static_cast<int>(state.range(1)));
    const auto u = interpolate(space, bench.problem.exact->value);
    EstimatorOptions options;
    options.with_oscillations = true;
    for (auto _ : state) {
        benchmark::DoNotOptimize(estimate(u, bench.problem, options));
    }
    state.counters["elements"] = space->mesh().num_elements();
}
BENCHMARK(BM_Estimate)->ArgsProduct({{3, 4, 5}, {1, 2}})->Unit(benchmark::kMillisecond);

void BM_DoerflerMark(benchmark::State& state)
{
    std::mt19937_64 rng(2);
    std::exponential_distribution<double> d(1.0);
    std::vector<double> eta(static_cast<std::size_t>(state.range(0)));
    for (auto& x : eta) {
        x = d(rng);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(doerfler_mark(eta, 0.5));
    }
}
BENCHMARK(BM_DoerflerMark)->RangeMultiplier(8)->Range(1 << 10, 1 << 19)->Unit(benchmark::kMicrosecond);

} // namespace

BENCHMARK_MAIN();
