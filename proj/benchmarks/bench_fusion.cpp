#include "aafusion/fusion.hpp"
#include "aafusion/metrics.hpp"
#include "bench_common.hpp"

#include <benchmark/benchmark.h>

using namespace aafusion;

namespace {

PhdAA fused(std::mt19937_64& rng, std::size_t sources, std::size_t per_source) {
    std::vector<GaussianMixture> locals;
    for (std::size_t i = 0; i < sources; ++i) {
        locals.push_back(bench::random_mixture(rng, 4, per_source));
    }
    std::vector<FusionInput> in;
    for (const auto& l : locals) {
        in.push_back({1.0 / static_cast<double>(sources), std::cref(l)});
    }
    return weighted_phd_aa(in);
}

} // namespace

static void BM_GcWeightFit(benchmark::State& state) {
    std::mt19937_64 rng(3);
    const auto local = bench::random_mixture(rng, 4, 20);
    const auto aa = fused(rng, static_cast<std::size_t>(state.range(0)), 20);
    for (auto _ : state) {
        benchmark::DoNotOptimize(gc_weight_fit(local, aa));
    }
}
BENCHMARK(BM_GcWeightFit)->Arg(3)->Arg(6)->Arg(12);

static void BM_GmPhdFit(benchmark::State& state) {
    std::mt19937_64 rng(4);
    const auto local = bench::random_mixture(rng, 4, 20);
    const auto aa = fused(rng, static_cast<std::size_t>(state.range(0)), 20);
    for (auto _ : state) {
        benchmark::DoNotOptimize(gm_phd_fit(local, aa));
    }
}
BENCHMARK(BM_GmPhdFit)->Arg(3)->Arg(6)->Arg(12);

static void BM_Ospa(benchmark::State& state) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd(0.0, 300.0);
    std::vector<Vector> x(static_cast<std::size_t>(state.range(0)));
    std::vector<Vector> y(x.size() + 2);
    for (auto* set : {&x, &y}) {
        for (auto& p : *set) {
            p = Vector(2);
            p << nd(rng), nd(rng);
        }
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(ospa(x, y));
    }
}
BENCHMARK(BM_Ospa)->Arg(4)->Arg(16)->Arg(64);
