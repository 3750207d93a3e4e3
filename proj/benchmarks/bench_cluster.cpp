#include <benchmark/benchmark.h>

#include <random>

#include "modoma/cluster.hpp"
#include "modoma/kwic.hpp"

using namespace modoma;

namespace {

kwic::ContextFrequencyTable random_table(std::size_t rows, std::size_t cols) {
    std::mt19937_64 rng(rows * 31 + cols);
    kwic::ContextFrequencyTable t;
    for (std::size_t r = 0; r < rows; ++r) t.rows.push_back("w" + std::to_string(r));
    for (std::size_t c = 0; c < cols; ++c) t.columns.push_back({"c" + std::to_string(c), 1});
    t.counts.resize(rows * cols);
    // sparse, roughly Zipfian rows like real context tables
    for (auto& x : t.counts) x = rng() % 8 == 0 ? static_cast<std::uint32_t>(1 + rng() % 20) : 0;
    for (std::size_t r = 0; r < rows; ++r) t.counts[r * cols] += 1;
    return t;
}

void BM_Spearman(benchmark::State& state) {
    const auto rows = static_cast<std::size_t>(state.range(0));
    const auto table = random_table(rows, 2000);
    for (auto _ : state) benchmark::DoNotOptimize(cluster::spearman_matrix(table));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Spearman)->Arg(100)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_CompleteLink(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto dist = cluster::to_distance(cluster::spearman_matrix(random_table(n, 300)));
    for (auto _ : state) benchmark::DoNotOptimize(cluster::agglomerate_complete_link(dist));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_CompleteLink)->Arg(250)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond)->Complexity();

void BM_FrequencyTable(benchmark::State& state) {
    std::mt19937_64 rng(1);
    std::vector<Utterance> corpus(10000);
    for (auto& u : corpus) {
        const std::size_t len = 3 + rng() % 8;
        for (std::size_t i = 0; i < len; ++i) u.tokens.push_back("t" + std::to_string(rng() % 1500));
    }
    const auto records = kwic::extract_kwic(corpus, {2, 2});
    for (auto _ : state) benchmark::DoNotOptimize(kwic::build_frequency_table(records, 10));
}
BENCHMARK(BM_FrequencyTable)->Unit(benchmark::kMillisecond);

} // namespace
