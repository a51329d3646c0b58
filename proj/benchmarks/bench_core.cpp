#include <benchmark/benchmark.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "superwriter/dataset.hpp"
#include "superwriter/extract.hpp"
#include "superwriter/forest.hpp"

using namespace superwriter;

namespace {

std::vector<double> shuffled_scores(size_t n, unsigned seed) {
    std::vector<double> scores(n);
    std::iota(scores.begin(), scores.end(), 1.0);
    std::mt19937 rng(seed);
    std::shuffle(scores.begin(), scores.end(), rng);
    return scores;
}

void BM_discretize(benchmark::State & state) {
    const auto scores = shuffled_scores(static_cast<size_t>(state.range(0)), 7);
    for (auto _ : state)
        benchmark::DoNotOptimize(discretize(scores));
}
BENCHMARK(BM_discretize)->Arg(60)->Arg(600)->Arg(6000);

void BM_compute_rewards(benchmark::State & state) {
    const tree_config cfg;
    const auto        scores = shuffled_scores(cfg.leaf_count(), 11);
    for (auto _ : state)
        benchmark::DoNotOptimize(compute_rewards(scores, cfg));
}
BENCHMARK(BM_compute_rewards);

void BM_select_pairs(benchmark::State & state) {
    const tree_config cfg;
    const auto        scores  = shuffled_scores(cfg.leaf_count(), 13);
    const auto        rewards = compute_rewards(scores, cfg);
    for (auto _ : state)
        benchmark::DoNotOptimize(select_pairs(scores, rewards, cfg, {}));
}
BENCHMARK(BM_select_pairs);

void BM_extract_delimited(benchmark::State & state) {
    std::string text = "Preamble before the payload.\n$$";
    text.append(static_cast<size_t>(state.range(0)), 'p');
    text += "$$ trailing commentary";
    for (auto _ : state)
        benchmark::DoNotOptimize(extract_delimited(text));
}
BENCHMARK(BM_extract_delimited)->Arg(256)->Arg(4096)->Arg(65536);

void BM_extract_json_block(benchmark::State & state) {
    std::string body = "{\"scores\": [";
    for (int i = 0; i < state.range(0); ++i)
        body += (i ? "," : "") + std::to_string(i % 10);
    body += "], \"note\": \"dense\"}";
    const std::string text = "Reasoning first.\n```json\n" + body + "\n```\nDone.";
    for (auto _ : state)
        benchmark::DoNotOptimize(extract_json_block(text));
}
BENCHMARK(BM_extract_json_block)->Arg(16)->Arg(256)->Arg(2048);

void BM_estimate_tokens_ascii(benchmark::State & state) {
    const std::string text(static_cast<size_t>(state.range(0)), 'a');
    for (auto _ : state)
        benchmark::DoNotOptimize(estimate_tokens(text));
}
BENCHMARK(BM_estimate_tokens_ascii)->Arg(1024)->Arg(65536);

void BM_estimate_tokens_cjk(benchmark::State & state) {
    std::string text;
    for (int i = 0; i < state.range(0); ++i)
        text += "\xE6\xB5\xB7"; // one ideograph per iteration
    for (auto _ : state)
        benchmark::DoNotOptimize(estimate_tokens(text));
}
BENCHMARK(BM_estimate_tokens_cjk)->Arg(1024)->Arg(65536);

} // namespace

BENCHMARK_MAIN();
