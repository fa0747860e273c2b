#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "duo/rng.hpp"

using duo::RngStream;

TEST(Philox, KnownAnswerVectors) {
    // Reference vectors published with the Random123 library.
    auto zero = duo::philox4x32_10({0, 0, 0, 0}, {0, 0});
    EXPECT_EQ(zero[0], 0x6627e8d5u);
    EXPECT_EQ(zero[1], 0xe169c58du);
    EXPECT_EQ(zero[2], 0xbc57ac4cu);
    EXPECT_EQ(zero[3], 0x9b00dbd8u);

    auto ones = duo::philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                   {0xffffffffu, 0xffffffffu});
    EXPECT_EQ(ones[0], 0x408f276du);
    EXPECT_EQ(ones[1], 0x41c83b0eu);
    EXPECT_EQ(ones[2], 0xa20bc7c6u);
    EXPECT_EQ(ones[3], 0x6d5451fdu);

    auto pi = duo::philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                 {0xa4093822u, 0x299f31d0u});
    EXPECT_EQ(pi[0], 0xd16cfe09u);
    EXPECT_EQ(pi[1], 0x94fdccebu);
    EXPECT_EQ(pi[2], 0x5001e420u);
    EXPECT_EQ(pi[3], 0x24126ea1u);
}

TEST(RngStream, SamePairReplays) {
    RngStream a(42, 7);
    RngStream b(42, 7);
    for (int k = 0; k < 1000; ++k) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(RngStream, DistinctStreamsDiffer) {
    RngStream a(42, 7);
    RngStream b(42, 8);
    RngStream c(43, 7);
    int same_ab = 0;
    int same_ac = 0;
    for (int k = 0; k < 1000; ++k) {
        const auto va = a.next_u64();
        same_ab += va == b.next_u64();
        same_ac += va == c.next_u64();
    }
    EXPECT_EQ(same_ab, 0);
    EXPECT_EQ(same_ac, 0);
}

TEST(RngStream, DeriveIsDeterministicAndTagged) {
    const RngStream root(5, 0);
    RngStream a = root.derive(3);
    RngStream b = root.derive(3);
    RngStream c = root.derive(4);
    EXPECT_EQ(a.stream_id(), b.stream_id());
    EXPECT_NE(a.stream_id(), c.stream_id());
    EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(RngStream, UniformMomentsAndRange) {
    RngStream r(1, 1);
    const int n = 200000;
    double sum = 0.0;
    double sum2 = 0.0;
    for (int k = 0; k < n; ++k) {
        const double u = r.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
        sum2 += u * u;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    EXPECT_NEAR(mean, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
    EXPECT_NEAR(var, 1.0 / 12.0, 2e-3);
}

TEST(RngStream, StreamsAreUncorrelated) {
    RngStream a(9, 100);
    RngStream b(9, 101);
    const int n = 100000;
    double sab = 0.0;
    for (int k = 0; k < n; ++k) sab += (a.uniform() - 0.5) * (b.uniform() - 0.5);
    // Correlation of independent uniforms has sd 1/sqrt(n) after scaling by 12.
    EXPECT_LT(std::fabs(12.0 * sab / n), 4.0 / std::sqrt(n));
}

TEST(RngStream, Mix64Spreads) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t k = 0; k < 1000; ++k) seen.insert(duo::mix64(k));
    EXPECT_EQ(seen.size(), 1000u);
}
