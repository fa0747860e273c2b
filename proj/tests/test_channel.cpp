#include <gtest/gtest.h>

#include "duo/channel.hpp"
#include "duo/error.hpp"
#include "oracle.hpp"

using namespace duo;

TEST(Channel, BscMatrix) {
    const Channel c = make_bsc(0.25);
    EXPECT_EQ(c.input_size(), 2u);
    EXPECT_EQ(c.output_size(), 2u);
    EXPECT_DOUBLE_EQ(c(0, 0), 0.75);
    EXPECT_DOUBLE_EQ(c(0, 1), 0.25);
    EXPECT_DOUBLE_EQ(c(1, 0), 0.25);
    EXPECT_DOUBLE_EQ(c(1, 1), 0.75);
    const Channel d = make_bsc(0.2);
    EXPECT_DOUBLE_EQ(d(0, 1), 0.2);
    EXPECT_DOUBLE_EQ(d(1, 0), 0.2);
}

TEST(Channel, BscRejectsDegenerateAndOutOfRange) {
    try {
        make_bsc(0.5);
        FAIL() << "expected an exception";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("degenerate channel"), std::string::npos);
    }
    EXPECT_THROW(make_bsc(0.0), ValidationError);
    EXPECT_THROW(make_bsc(0.6), ValidationError);
    EXPECT_THROW(make_bsc(-0.1), ValidationError);
}

TEST(Channel, BecMatrix) {
    const Channel c = make_bec(0.5);
    EXPECT_EQ(c.output_size(), 3u);
    EXPECT_DOUBLE_EQ(c(0, 0), 0.5);
    EXPECT_DOUBLE_EQ(c(0, 1), 0.0);
    EXPECT_DOUBLE_EQ(c(0, 2), 0.5);
    EXPECT_DOUBLE_EQ(c(1, 0), 0.0);
    EXPECT_EQ(c.erasure_symbol(), 2);
    EXPECT_TRUE(c.is_erasure());
    const Channel q = make_bec(0.25);
    for (std::size_t x = 0; x < 2; ++x) EXPECT_NEAR(q(x, 0) + q(x, 1) + q(x, 2), 1.0, 1e-15);
    EXPECT_THROW(make_bec(0.0), ValidationError);
    EXPECT_THROW(make_bec(1.0), ValidationError);
}

TEST(Channel, FromMatrixValidation) {
    Eigen::MatrixXd bad(2, 2);
    bad << 0.7, 0.2, 0.5, 0.5;
    EXPECT_THROW(Channel::from_matrix(bad), ValidationError);
    Eigen::MatrixXd neg(2, 2);
    neg << 1.2, -0.2, 0.5, 0.5;
    EXPECT_THROW(Channel::from_matrix(neg), ValidationError);
    Eigen::MatrixXd single(1, 2);
    single << 0.5, 0.5;
    EXPECT_THROW(Channel::from_matrix(single), ValidationError);
    Eigen::MatrixXd fewer_outputs(3, 2);
    fewer_outputs << 1, 0, 0, 1, 0.5, 0.5;
    EXPECT_THROW(Channel::from_matrix(fewer_outputs), ValidationError);
    Eigen::MatrixXd ok(2, 3);
    ok << 0.6, 0.0, 0.4, 0.0, 0.6, 0.4;
    EXPECT_TRUE(Channel::from_matrix(ok).is_erasure());
}

TEST(Channel, SampleOutputFrequencyAndDeterminism) {
    const Channel c = make_bsc(0.2);
    const Sequence x(100000, 0);
    RngStream r1(3, 11);
    RngStream r2(3, 11);
    const Sequence z1 = sample_output(c, x, r1);
    const Sequence z2 = sample_output(c, x, r2);
    EXPECT_EQ(z1, z2);
    const double frac = static_cast<double>(count_symbol(z1, 1)) / 100000.0;
    EXPECT_NEAR(frac, 0.2, 0.004);
}

TEST(Channel, SampleOutputDeterministicRow) {
    Eigen::MatrixXd pi(2, 3);
    pi << 0.0, 0.0, 1.0, 0.0, 1.0, 0.0;
    const Channel c = Channel::from_matrix(pi);
    RngStream r(1, 2);
    const Sequence z = sample_output(c, Sequence{0, 1, 0, 1}, r);
    EXPECT_EQ(z, (Sequence{2, 1, 2, 1}));
    EXPECT_THROW(sample_output(c, Sequence{0, 2}, r), ValidationError);
}

TEST(ComputeH, BscMatchesClosedForm) {
    const HMatrix h = compute_h(make_bsc(0.25));
    EXPECT_NEAR(h(0, 0), 1.5, 1e-12);
    EXPECT_NEAR(h(0, 1), -0.5, 1e-12);
    EXPECT_NEAR(h(1, 0), -0.5, 1e-12);
    EXPECT_NEAR(h(1, 1), 1.5, 1e-12);
    for (double delta : {0.05, 0.1, 0.2, 0.3, 0.45}) {
        const Channel c = make_bsc(delta);
        const HMatrix hd = compute_h(c);
        for (std::size_t x = 0; x < 2; ++x) {
            for (std::size_t z = 0; z < 2; ++z) EXPECT_NEAR(hd(x, z), oracle::bsc_h(delta, x, z), 1e-12);
        }
        EXPECT_LE(h_residual(c, hd), 1e-12);
    }
}

TEST(ComputeH, BecMinNorm) {
    const Channel c = make_bec(0.5);
    const HMatrix h = compute_h(c);
    EXPECT_EQ(h.method, "min_norm");
    EXPECT_NEAR(h(0, 0), 4.0 / 3.0, 1e-12);
    EXPECT_NEAR(h(0, 1), -2.0 / 3.0, 1e-12);
    EXPECT_NEAR(h(0, 2), 2.0 / 3.0, 1e-12);
    EXPECT_LE(h_residual(c, h), 1e-9);
}

TEST(ComputeH, RankDeficientRejected) {
    Eigen::MatrixXd pi(2, 2);
    pi << 0.5, 0.5, 0.5, 0.5;
    try {
        compute_h(Channel::from_matrix(pi));
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("no valid h exists"), std::string::npos);
    }
}

TEST(ComputeH, GeneralDmcSatisfiesIdentity) {
    Eigen::MatrixXd pi(3, 4);
    pi << 0.7, 0.1, 0.1, 0.1, 0.1, 0.6, 0.2, 0.1, 0.05, 0.05, 0.8, 0.1;
    const Channel c = Channel::from_matrix(pi);
    EXPECT_LE(h_residual(c, compute_h(c)), 1e-9);
}

TEST(CanonicalH, ErasureValues) {
    const Channel c = make_bec(0.5);
    const HMatrix h = canonical_erasure_h(c);
    EXPECT_EQ(h(0, 0), 2.0);
    EXPECT_EQ(h(0, 1), 0.0);
    EXPECT_EQ(h(0, 2), 0.0);
    EXPECT_EQ(h_residual(c, h), 0.0);
    EXPECT_NEAR(canonical_erasure_h(make_bec(0.25))(0, 0), 4.0 / 3.0, 1e-15);
    // Both choices are valid yet differ.
    EXPECT_GT((h.h - compute_h(c).h).cwiseAbs().maxCoeff(), 0.1);
    EXPECT_THROW(canonical_erasure_h(make_bsc(0.2)), ValidationError);
}

TEST(ChannelJson, RoundTripAndRejects) {
    const Channel c = channel_from_json({{"type", "bsc"}, {"delta", 0.2}});
    EXPECT_DOUBLE_EQ(c(0, 1), 0.2);
    const Channel back = channel_from_json(channel_to_json(c));
    EXPECT_EQ(back.pi(), c.pi());
    const Channel e = channel_from_json({{"type", "bec"}, {"epsilon", 0.5}});
    EXPECT_TRUE(e.is_erasure());
    const Channel d = channel_from_json(nlohmann::json::parse(R"({"type":"dmc","pi":[[0.9,0.1],[0.3,0.7]]})"));
    EXPECT_DOUBLE_EQ(d(1, 0), 0.3);
    EXPECT_THROW(channel_from_json({{"type", "bsc"}, {"delta", 0.2}, {"extra", 1}}), ValidationError);
    EXPECT_THROW(channel_from_json({{"type", "awgn"}}), ValidationError);
    EXPECT_THROW(channel_from_json({{"type", "bsc"}}), ValidationError);
}
