// Microbenchmarks for the per-sample detection path (the latency that counts
// when screening every generated text) and the injection-campaign inner loop.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "cled/campaign.hpp"
#include "cled/corpus.hpp"
#include "cled/forest.hpp"
#include "cled/lingfeat.hpp"
#include "cled/metrics.hpp"
#include "cled/transformer.hpp"

using namespace cled;

namespace {

std::vector<LabeledSample> bench_samples() {
    static const std::vector<LabeledSample> samples = make_synthetic_dataset(250, 250, 99);
    return samples;
}

const RandomForest& bench_forest() {
    static const RandomForest forest = [] {
        const auto samples = bench_samples();
        std::vector<FeatureVector> x;
        std::vector<int> y;
        for (const auto& s : samples) {
            x.push_back(extract_features(s.text));
            y.push_back(s.label);
        }
        return RandomForest::train(x, y, ForestHyperparams{}, 1);
    }();
    return forest;
}

void feature_extraction(benchmark::State& state) {
    const auto samples = bench_samples();
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(extract_features(samples[i].text));
        i = (i + 1) % samples.size();
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(feature_extraction);

void classification(benchmark::State& state) {
    const RandomForest& forest = bench_forest();
    const auto samples = bench_samples();
    std::vector<FeatureVector> rows;
    for (const auto& s : samples) rows.push_back(extract_features(s.text));
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(forest.classify(rows[i]));
        i = (i + 1) % rows.size();
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(classification);

void extract_and_classify(benchmark::State& state) {
    const RandomForest& forest = bench_forest();
    const auto samples = bench_samples();
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(forest.classify(extract_features(samples[i].text)));
        i = (i + 1) % samples.size();
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(extract_and_classify);

void toy_generation(benchmark::State& state) {
    const ModelConfig cfg = ModelConfig::toy(Variant::t5, 1);
    const MiniTransformer model(cfg);
    const auto inputs = make_toy_inputs(cfg, 4, 42);
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(model.generate(inputs[i], cfg.max_seq_len));
        i = (i + 1) % inputs.size();
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(toy_generation);

void sweep_trial(benchmark::State& state) {
    const ModelConfig cfg = ModelConfig::toy(Variant::t5, 1);
    MiniTransformer model(cfg);
    const auto inputs = make_toy_inputs(cfg, 3, 42);
    std::uint64_t seed = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(sweep(model, inputs, BitPosition{9}, 1, seed++));
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(sweep_trial);

void rouge1_words(benchmark::State& state) {
    const auto gen = metric_tokens(
        "the committee published its final report in early spring after a long review");
    const auto ref = metric_tokens(
        "the committee released the final report in spring following a lengthy review");
    for (auto _ : state) {
        benchmark::DoNotOptimize(rouge1(gen, ref));
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(rouge1_words);

} // namespace

BENCHMARK_MAIN();
