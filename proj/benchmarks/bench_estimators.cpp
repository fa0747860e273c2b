#include <benchmark/benchmark.h>

#include "duo/channel.hpp"
#include "duo/denoiser.hpp"
#include "duo/loss.hpp"
#include "duo/smoothing.hpp"

namespace {

duo::Sequence noisy(std::size_t n) {
    const duo::Channel c = duo::make_bsc(0.2);
    duo::RngStream r(1, 1);
    return duo::sample_output(c, duo::Sequence(n, 0), r);
}

void BM_EstimateLossMajority(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const duo::Channel c = duo::make_bsc(0.2);
    const duo::HMatrix h = duo::compute_h(c);
    const duo::LossMatrix lm = duo::LossMatrix::hamming(2);
    const auto d = duo::make_sliding_window(1, duo::majority_rule(1, 2, 2), 2, 2);
    const duo::Sequence z = noisy(n);
    for (auto _ : state) benchmark::DoNotOptimize(duo::estimate_loss(c, h, lm, *d, z));
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n));
}
BENCHMARK(BM_EstimateLossMajority)->RangeMultiplier(4)->Range(256, 16384);

void BM_EstimateLossCounterexample(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const duo::Channel c = duo::make_bsc(0.2);
    const duo::HMatrix h = duo::compute_h(c);
    const duo::LossMatrix lm = duo::LossMatrix::hamming(2);
    const auto pair = duo::make_bsc_counterexample_pair(0.2);
    const duo::Sequence z = noisy(n);
    for (auto _ : state) benchmark::DoNotOptimize(duo::estimate_loss(c, h, lm, *pair.second, z));
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n));
}
BENCHMARK(BM_EstimateLossCounterexample)->RangeMultiplier(4)->Range(256, 16384);

void BM_EstimateSmoothedLoss(benchmark::State& state) {
    const std::size_t n = 4096;
    const duo::Channel c = duo::make_bsc(0.2);
    const duo::HMatrix h = duo::compute_h(c);
    const duo::LossMatrix lm = duo::LossMatrix::hamming(2);
    const auto pair = duo::make_bsc_counterexample_pair(0.2);
    const duo::Sequence z = noisy(n);
    duo::SmoothingConfig cfg;
    cfg.nu = 0.75;
    cfg.m = static_cast<std::size_t>(state.range(0));
    duo::RngStream r(2, 2);
    const duo::MaskEnsemble masks = duo::MaskEnsemble::build(cfg, n, r);
    for (auto _ : state) benchmark::DoNotOptimize(duo::estimate_smoothed_loss(c, h, lm, *pair.first, masks, z));
}
BENCHMARK(BM_EstimateSmoothedLoss)->Arg(16)->Arg(128);

void BM_SubstitutedQuery(benchmark::State& state) {
    const std::size_t n = 4096;
    const auto pair = duo::make_bsc_counterexample_pair(0.2);
    const duo::Sequence z = noisy(n);
    const auto eval = pair.second->evaluate(z);
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(eval->substituted(i, static_cast<duo::Symbol>(i & 1u)));
        i = (i + 1) % n;
    }
}
BENCHMARK(BM_SubstitutedQuery);

void BM_SampledMaskEnsemble(benchmark::State& state) {
    duo::SmoothingConfig cfg;
    cfg.nu = 0.75;
    cfg.m = 128;
    duo::RngStream r(3, 3);
    for (auto _ : state) benchmark::DoNotOptimize(duo::MaskEnsemble::build(cfg, 4096, r));
}
BENCHMARK(BM_SampledMaskEnsemble);

}  // namespace

BENCHMARK_MAIN();
