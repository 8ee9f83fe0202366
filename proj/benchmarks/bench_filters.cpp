#include "aafusion/local_filter.hpp"
#include "aafusion/scenario.hpp"

#include <benchmark/benchmark.h>

using namespace aafusion;

static void BM_FilterStep(benchmark::State& state) {
    const auto type = static_cast<FilterType>(state.range(0));
    auto config = default_scenario();
    const auto models = make_models(config);
    const auto truth = generate_truth(config, 1);
    std::vector<std::vector<Vector>> scans;
    for (int k = 1; k <= 40; ++k) {
        scans.push_back(generate_measurements(truth, config, k, static_cast<std::uint64_t>(k)));
    }
    // Warm the filter up to a steady state with several confirmed tracks.
    LocalFilter warm(type, 4);
    for (int k = 1; k <= 35; ++k) {
        warm.predict(models, k);
        warm.update(models, scans[static_cast<std::size_t>(k - 1)]);
    }
    for (auto _ : state) {
        LocalFilter f = warm;
        f.predict(models, 36);
        f.update(models, scans[35]);
        benchmark::DoNotOptimize(f.extract());
    }
    state.SetLabel(std::string(to_string(type)));
}
BENCHMARK(BM_FilterStep)->DenseRange(0, 2);
