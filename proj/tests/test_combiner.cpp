#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "duo/combiner.hpp"
#include "duo/error.hpp"
#include "oracle.hpp"

using namespace duo;

namespace {
constexpr Symbol e = 2;
}

TEST(Select, MinAndTies) {
    EXPECT_EQ(select_min_estimate(0.1, 0.2).chosen_index, 1);
    EXPECT_EQ(select_min_estimate(0.2, 0.1).chosen_index, 2);
    const Selection t = select_min_estimate(0.1, 0.1);
    EXPECT_EQ(t.chosen_index, 1);
    EXPECT_TRUE(t.tie);
    EXPECT_FALSE(select_min_estimate(0.1, 0.2).tie);
    EXPECT_THROW(select_min_estimate(std::nan(""), 0.1), ValidationError);
}

TEST(Select, ArgminInvariantUnderShift) {
    RngStream r(1, 1);
    for (int t = 0; t < 1000; ++t) {
        const double a = r.uniform() * 2 - 1;
        const double b = r.uniform() * 2 - 1;
        const double c = r.uniform() * 10 - 5;
        if (std::fabs(a - b) < 1e-9) continue;
        EXPECT_EQ(select_min_estimate(a, b).chosen_index, select_min_estimate(a + c, b + c).chosen_index);
    }
}

TEST(Combined, BecPicksDenoiser2) {
    const Channel c = make_bec(0.5);
    const auto [d1, d2] = make_bec_parity_pair();
    const Sequence z{0, e, 0, e};
    const CombinedOutput out = combined_denoise(*d1, *d2, c, canonical_erasure_h(c), LossMatrix::hamming(2), z);
    EXPECT_EQ(out.selection.chosen_index, 2);
    EXPECT_DOUBLE_EQ(out.selection.estimates[0], 0.5);
    EXPECT_DOUBLE_EQ(out.selection.estimates[1], 0.0);
    EXPECT_EQ(out.output, (Sequence{0, 1, 0, 1}));
}

TEST(Combined, BscOddParityPicksDenoiser1) {
    const double d = 0.2;
    const Channel c = make_bsc(d);
    const auto [d1, d2] = make_bsc_counterexample_pair(d);
    RngStream r(4, 4);
    int checked = 0;
    while (checked < 5) {
        const Sequence z = sample_output(c, Sequence(2000, 0), r);
        if (ones_parity(z) == 0) continue;
        const CombinedOutput out = combined_denoise(*d1, *d2, c, compute_h(c), LossMatrix::hamming(2), z);
        EXPECT_EQ(out.selection.chosen_index, 1);
        EXPECT_LT(out.selection.estimates[0], 0.0);
        ++checked;
    }
}

TEST(Combined, OutputIsOneCandidate) {
    const Channel c = make_bsc(0.1);
    const HMatrix h = compute_h(c);
    const auto maj = make_sliding_window(1, majority_rule(1, 2, 2), 2, 2);
    const auto id = make_identity(2, 2);
    RngStream r(2, 2);
    for (int t = 0; t < 100; ++t) {
        const Sequence z = sample_output(c, oracle::alternating(50), r);
        const CombinedOutput out = combined_denoise(*maj, *id, c, h, LossMatrix::hamming(2), z);
        const Sequence& expected = out.selection.chosen_index == 1 ? maj->denoise(z) : id->denoise(z);
        EXPECT_EQ(out.output, expected);
        const CombinedOutput same = combined_denoise(*maj, *maj, c, h, LossMatrix::hamming(2), z);
        EXPECT_EQ(same.output, maj->denoise(z));
    }
}

TEST(Randomized, ZeroQEqualsPlain) {
    const Channel c = make_bsc(0.2);
    const HMatrix h = compute_h(c);
    const auto [d1, d2] = make_bsc_counterexample_pair(0.2);
    SmoothingConfig cfg;
    cfg.q = 0.0;
    RngStream r(5, 5);
    for (int t = 0; t < 20; ++t) {
        const Sequence z = sample_output(c, Sequence(300, 0), r);
        const CombinedOutput plain = combined_denoise(*d1, *d2, c, h, LossMatrix::hamming(2), z);
        const RandomizedOutput rnd =
            randomized_combined_denoise(*d1, *d2, c, h, LossMatrix::hamming(2), cfg, z, RngStream(9, t));
        EXPECT_EQ(rnd.output, plain.output);
        EXPECT_EQ(rnd.selection.chosen_index, plain.selection.chosen_index);
        EXPECT_EQ(count_symbol(rnd.mask, 1), 0u);
    }
}

TEST(Randomized, ReproducibleAndEmitsChosenOnMaskedInput) {
    const Channel c = make_bsc(0.2);
    const HMatrix h = compute_h(c);
    const auto [d1, d2] = make_bsc_counterexample_pair(0.2);
    SmoothingConfig cfg;
    cfg.nu = 0.5;
    cfg.m = 16;
    RngStream r(6, 6);
    const Sequence z = sample_output(c, Sequence(400, 0), r);
    const RngStream trial(11, 3);
    const RandomizedOutput a = randomized_combined_denoise(*d1, *d2, c, h, LossMatrix::hamming(2), cfg, z, trial);
    const RandomizedOutput b = randomized_combined_denoise(*d1, *d2, c, h, LossMatrix::hamming(2), cfg, z, trial);
    EXPECT_EQ(a.output, b.output);
    EXPECT_EQ(a.mask, b.mask);
    EXPECT_EQ(a.smoothed_estimates, b.smoothed_estimates);
    const Denoiser& chosen = a.selection.chosen_index == 1 ? *d1 : *d2;
    EXPECT_EQ(a.output, chosen.denoise(oracle::xor_seq(z, a.mask)));

    // The output mask comes from its own stream, not from the estimation masks.
    RngStream out_stream = trial.derive(stream_tag::output_mask);
    EXPECT_EQ(a.mask, draw_smoothing_mask(cfg, z.size(), out_stream));
}

TEST(Randomized, IdenticalDenoisers) {
    const Channel c = make_bsc(0.2);
    const auto maj = make_sliding_window(1, majority_rule(1, 2, 2), 2, 2);
    SmoothingConfig cfg;
    cfg.q = 0.1;
    cfg.m = 8;
    const Sequence z{0, 1, 1, 0, 1, 0, 0, 1};
    const RandomizedOutput out = randomized_combined_denoise(*maj, *maj, c, compute_h(c), LossMatrix::hamming(2), cfg,
                                                             z, RngStream(1, 9));
    EXPECT_EQ(out.output, maj->denoise(oracle::xor_seq(z, out.mask)));
}
