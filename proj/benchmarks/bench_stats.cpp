#include <benchmark/benchmark.h>

#include "modoma/stats.hpp"

using namespace modoma;

namespace {

// 14 x 14 overlap table with the margins of a typical two-session comparison.
stats::CountTable overlap_table() {
    stats::CountTable t(14, 14);
    for (std::size_t i = 0; i < 14; ++i) {
        t.at(i, i) = 5 + i;
        t.at(i, (i + 3) % 14) = 1 + i % 4;
    }
    return t;
}

void BM_FisherMonteCarlo(benchmark::State& state) {
    const auto t = overlap_table();
    const auto b = static_cast<std::uint64_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(stats::fisher_mc(t, b, 1));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_FisherMonteCarlo)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_Posthoc(benchmark::State& state) {
    const auto t = overlap_table();
    for (auto _ : state) benchmark::DoNotOptimize(stats::posthoc_pairwise(t));
}
BENCHMARK(BM_Posthoc)->Unit(benchmark::kMillisecond);

} // namespace
