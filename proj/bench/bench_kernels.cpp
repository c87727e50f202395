// Serial reference vs OpenMP kernels. Thread count follows OMP_NUM_THREADS.
#include "loras/neighbors.hpp"
#include "loras/samplers.hpp"
#include "loras/synthetic_data.hpp"
#include "loras/theory.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using namespace loras;

Matrix random_points(std::size_t n, std::size_t f) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> normal(0, 1);
    Matrix m(n, f);
    for (auto& v : m.values()) v = normal(rng);
    return m;
}

template <bool Parallel>
void BM_PairwiseDistances(benchmark::State& state) {
    const Matrix pts = random_points(static_cast<std::size_t>(state.range(0)), 16);
    for (auto _ : state) {
        Matrix d = Parallel ? pairwise_distances(pts) : serial::pairwise_distances(pts);
        benchmark::DoNotOptimize(d.values().data());
    }
}

template <bool Parallel>
void BM_KnnIndices(benchmark::State& state) {
    const Matrix pts = random_points(static_cast<std::size_t>(state.range(0)), 16);
    for (auto _ : state) {
        KnnLists nn = Parallel ? knn_indices(pts, 30) : serial::knn_indices(pts, 30);
        benchmark::DoNotOptimize(nn.data());
    }
}

template <bool Parallel>
void BM_LorasOversample(benchmark::State& state) {
    const Dataset d = two_gaussians(4000, static_cast<std::size_t>(state.range(0)), 10, 1.0, 3);
    const ClassSplit s = class_split(d);
    const LorasParams p = resolve_defaults(d, s);
    for (auto _ : state) {
        SyntheticSet out = Parallel ? loras_oversample(d, s, p, 7) : serial::loras_oversample(d, s, p, 7);
        benchmark::DoNotOptimize(out.samples.values().data());
    }
}

template <bool Parallel>
void BM_ValidateTheorem(benchmark::State& state) {
    theory::LocalDistribution dist;
    dist.mu.assign(10, 0.0);
    dist.sigma_b = 0.005;
    const auto trials = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        auto v = Parallel ? theory::validate_theorem(dist, 10, trials, 1)
                          : theory::serial::validate_theorem(dist, 10, trials, 1);
        benchmark::DoNotOptimize(v.loras.empirical_var.data());
    }
}

BENCHMARK(BM_PairwiseDistances<false>)->Name("pairwise_distances/serial")->Arg(500)->Arg(2000);
BENCHMARK(BM_PairwiseDistances<true>)->Name("pairwise_distances/parallel")->Arg(500)->Arg(2000);
BENCHMARK(BM_KnnIndices<false>)->Name("knn_indices/serial")->Arg(500)->Arg(2000);
BENCHMARK(BM_KnnIndices<true>)->Name("knn_indices/parallel")->Arg(500)->Arg(2000);
BENCHMARK(BM_LorasOversample<false>)->Name("loras_oversample/serial")->Arg(100)->Arg(400);
BENCHMARK(BM_LorasOversample<true>)->Name("loras_oversample/parallel")->Arg(100)->Arg(400);
BENCHMARK(BM_ValidateTheorem<false>)->Name("validate_theorem/serial")->Arg(50'000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ValidateTheorem<true>)->Name("validate_theorem/parallel")->Arg(50'000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
