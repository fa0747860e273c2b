#include <gtest/gtest.h>

#include <cmath>

#include "duo/denoiser.hpp"
#include "duo/error.hpp"
#include "duo/smoothing.hpp"
#include "oracle.hpp"

using namespace duo;

TEST(SmoothingConfig, ResolveQFromNu) {
    SmoothingConfig cfg;
    cfg.nu = 0.75;
    EXPECT_NEAR(cfg.resolve_q(4096), 1.0 / 512.0, 1e-15);
    cfg.nu.reset();
    cfg.q = 0.1;
    EXPECT_EQ(cfg.resolve_q(4096), 0.1);
}

TEST(SmoothingConfig, Validation) {
    SmoothingConfig cfg;
    cfg.q = 0.5;
    EXPECT_THROW(cfg.validate(), ValidationError);
    cfg.q = 0.1;
    cfg.m = 0;
    EXPECT_THROW(cfg.validate(), ValidationError);
    cfg.m = 4;
    cfg.nu = 1.0;
    EXPECT_THROW(cfg.validate(), ValidationError);
    EXPECT_THROW(smoothing_from_json({{"nu", 0.75}, {"mode", "sometimes"}}), ValidationError);
    EXPECT_THROW(smoothing_from_json({{"nu", 0.75}, {"colour", 1}}), ValidationError);
    const SmoothingConfig parsed = smoothing_from_json({{"q", 0.1}, {"mode", "exact"}});
    EXPECT_EQ(parsed.mode, SmoothingMode::exact);
    EXPECT_EQ(smoothing_from_json(smoothing_to_json(parsed)).q, 0.1);
}

TEST(Mask, DrawIsIidAndDeterministic) {
    SmoothingConfig cfg;
    cfg.nu = 0.75;
    RngStream r1(1, 5);
    RngStream r2(1, 5);
    double total = 0.0;
    const int draws = 2000;
    for (int t = 0; t < draws; ++t) {
        const Sequence w1 = draw_smoothing_mask(cfg, 4096, r1);
        ASSERT_EQ(w1, draw_smoothing_mask(cfg, 4096, r2));
        total += static_cast<double>(count_symbol(w1, 1));
    }
    // Expected weight 8, sd of the mean sqrt(8 * (1 - q) / draws).
    EXPECT_NEAR(total / draws, 8.0, 4.0 * std::sqrt(8.0 / draws));
    SmoothingConfig zero;
    zero.q = 0.0;
    RngStream r(0, 0);
    EXPECT_EQ(count_symbol(draw_smoothing_mask(zero, 100, r), 1), 0u);
}

TEST(Mask, OddWeightProbabilityClosedForm) {
    for (std::size_t n : {1u, 5u, 64u, 4096u}) {
        for (double q : {0.0, 0.001, 0.1, 0.25, 0.4}) {
            EXPECT_NEAR(odd_weight_probability(n, q), oracle::parity_flip(n, q), 1e-14);
        }
    }
}

TEST(MaskEnsemble, ExactWeightsSumToOne) {
    const MaskEnsemble ens = MaskEnsemble::exact(10, 0.15);
    double total = 0.0;
    ens.for_each([&](std::size_t, std::span<const Symbol> w, double p) {
        std::size_t k = count_symbol(w, 1);
        EXPECT_NEAR(p, std::pow(0.15, k) * std::pow(0.85, 10 - k), 1e-15);
        total += p;
    });
    EXPECT_NEAR(total, 1.0, 1e-13);
    EXPECT_EQ(MaskEnsemble::exact(6, 0.0).size(), 1u);
}

TEST(MaskEnsemble, ExactModeBeyondThresholdThrows) {
    SmoothingConfig cfg;
    cfg.q = 0.1;
    cfg.mode = SmoothingMode::exact;
    cfg.exact_threshold = 8;
    RngStream r(0, 0);
    EXPECT_THROW(MaskEnsemble::build(cfg, 9, r), ValidationError);
    EXPECT_NO_THROW(MaskEnsemble::build(cfg, 8, r));
}

TEST(MaskEnsemble, StratifiedWeightsAndParities) {
    RngStream r(4, 4);
    const MaskEnsemble ens = MaskEnsemble::sampled(64, 0.05, 16, MaskSampler::stratified, r);
    double odd = 0.0;
    double total = 0.0;
    ens.for_each([&](std::size_t, std::span<const Symbol> w, double p) {
        total += p;
        if (ones_parity(w)) odd += p;
    });
    EXPECT_NEAR(total, 1.0, 1e-14);
    EXPECT_NEAR(odd, oracle::parity_flip(64, 0.05), 1e-14);
}

// Each stratum is sampled from the exact conditional law, so per-coordinate
// marginals match P(W_j = 1) = q for the weighted ensemble on average.
TEST(MaskEnsemble, StratifiedMarginalsUnbiased) {
    const std::size_t n = 12;
    const double q = 0.2;
    RngStream r(9, 9);
    std::vector<double> marg(n, 0.0);
    const int reps = 4000;
    for (int t = 0; t < reps; ++t) {
        const MaskEnsemble ens = MaskEnsemble::sampled(n, q, 2, MaskSampler::stratified, r);
        ens.for_each([&](std::size_t, std::span<const Symbol> w, double p) {
            for (std::size_t j = 0; j < n; ++j) marg[j] += p * w[j];
        });
    }
    for (std::size_t j = 0; j < n; ++j) EXPECT_NEAR(marg[j] / reps, q, 0.02);
}

TEST(SmoothedOutput, ZeroQIsPlainOutput) {
    const auto maj = make_sliding_window(1, majority_rule(1, 2, 2), 2, 2);
    const Sequence z{0, 1, 1, 0, 1, 0};
    const MaskEnsemble ens = MaskEnsemble::exact(z.size(), 0.0);
    const Sequence out = maj->denoise(z);
    for (std::size_t i = 0; i < z.size(); ++i) EXPECT_EQ(smoothed_expected_output(*maj, ens, z, i), out[i]);
}

TEST(SmoothedOutput, ParityClosedForm) {
    const auto par = make_parity();
    RngStream r(2, 3);
    for (std::size_t n = 1; n <= 12; ++n) {
        for (double q : {0.0, 0.05, 0.1, 0.25, 0.4}) {
            Sequence z(n);
            for (auto& v : z) v = static_cast<Symbol>(r.next_u64() & 1u);
            const MaskEnsemble ens = MaskEnsemble::exact(n, q);
            const double p = oracle::parity_flip(n, q);
            const double expected = p + (1.0 - 2.0 * p) * ones_parity(z);
            for (std::size_t i = 0; i < n; ++i) {
                const double v = smoothed_expected_output(*par, ens, z, i);
                EXPECT_NEAR(v, expected, 1e-12);
                EXPECT_GE(v, 0.0);
                EXPECT_LE(v, 1.0);
            }
        }
    }
}

TEST(SmoothedOutput, ConstantStaysConstant) {
    const auto c = make_constant(2, 2, 1);
    const Sequence z{0, 1, 0, 0, 1};
    EXPECT_NEAR(smoothed_expected_output(*c, MaskEnsemble::exact(5, 0.3), z, 2), 1.0, 1e-15);
}

TEST(SmoothedOutput, MatchesBruteForceForMajority) {
    const auto maj = make_sliding_window(1, majority_rule(1, 2, 2), 2, 2);
    const Sequence z{1, 0, 1, 1, 0, 0, 1};
    const double q = 0.15;
    const MaskEnsemble ens = MaskEnsemble::exact(z.size(), q);
    for (std::size_t i = 0; i < z.size(); ++i) {
        double expected = 0.0;
        oracle::for_each_mask(z.size(), q, [&](const Sequence& w, double p) {
            expected += p * maj->denoise(oracle::xor_seq(z, w))[i];
        });
        EXPECT_NEAR(smoothed_expected_output(*maj, ens, z, i), expected, 1e-13);
    }
}

TEST(SmoothedOutput, RejectsNonBinary) {
    const auto id = make_identity(3, 2);
    EXPECT_THROW(smoothed_expected_output(*id, MaskEnsemble::exact(3, 0.1), Sequence{0, 1, 2}, 0),
                 ValidationError);
}
