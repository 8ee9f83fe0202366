#include "aafusion/gaussian.hpp"
#include "bench_common.hpp"

#include <benchmark/benchmark.h>

using namespace aafusion;

static void BM_KlMatrix(benchmark::State& state) {
    std::mt19937_64 rng(1);
    const auto size = static_cast<std::size_t>(state.range(0));
    const auto f = bench::random_mixture(rng, 4, size);
    const auto g = bench::random_mixture(rng, 4, size);
    for (auto _ : state) {
        benchmark::DoNotOptimize(kl_matrix(f, g));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_KlMatrix)->RangeMultiplier(2)->Range(8, 128)->Complexity(benchmark::oNSquared);

static void BM_Reduce(benchmark::State& state) {
    std::mt19937_64 rng(2);
    const auto gm = bench::random_mixture(rng, 4, static_cast<std::size_t>(state.range(0)), 50.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(reduce(gm, 1e-5, 4.0, 100));
    }
}
BENCHMARK(BM_Reduce)->Arg(50)->Arg(200)->Arg(800);
