#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "duo/channel.hpp"
#include "duo/denoiser.hpp"
#include "duo/smoothing.hpp"

namespace duo {

/// Per-symbol loss lambda(clean, reconstruction), K x K, nonnegative.
class LossMatrix {
public:
    static LossMatrix hamming(std::size_t k);
    static LossMatrix from_matrix(Eigen::MatrixXd lambda);

    std::size_t size() const { return static_cast<std::size_t>(lambda_.rows()); }
    double operator()(std::size_t x, std::size_t xhat) const {
        return lambda_(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(xhat));
    }
    double max() const { return max_; }
    const Eigen::MatrixXd& matrix() const { return lambda_; }

private:
    explicit LossMatrix(Eigen::MatrixXd lambda);
    Eigen::MatrixXd lambda_;
    double max_;
};

/// {"type":"hamming","k":2} | {"type":"matrix","lambda":[[..]]}
LossMatrix loss_from_json(const nlohmann::json& j);
nlohmann::json loss_to_json(const LossMatrix& lm);

/// (1/n) sum_i lambda(x_i, xhat_i)
double cumulative_loss(const LossMatrix& lm, std::span<const Symbol> x, std::span<const Symbol> xhat);

/// Precomputed c[z_i][a][xhat] = sum_x h(x, z_i) pi(x, a) lambda(x, xhat), so
/// that the per-symbol estimate is sum_a c[z_i][a][X(z[i <- a])[i]].
class EstimatorWeights {
public:
    EstimatorWeights(const Channel& ch, const HMatrix& h, const LossMatrix& lm);
    double operator()(std::size_t zi, std::size_t a, std::size_t xhat) const {
        return c_[(zi * m_ + a) * k_ + xhat];
    }
    std::size_t noisy_alphabet() const { return m_; }
    std::size_t clean_alphabet() const { return k_; }

private:
    std::size_t m_;
    std::size_t k_;
    std::vector<double> c_;
};

/// Single-position loss estimate sum_x h(x,z_i) sum_a lambda(x, X(z[i<-a])[i]) pi(x,a).
double per_symbol_estimate(const Channel& ch, const HMatrix& h, const LossMatrix& lm, const Denoiser& d,
                           std::span<const Symbol> z, std::size_t i);

/// Per-position estimates for the whole sequence (n * M substitution queries).
std::vector<double> per_symbol_estimates(const EstimatorWeights& w, const Evaluation& eval);

/// Unbiased loss estimate: mean of the per-symbol estimates. Unclamped.
double estimate_loss(const Channel& ch, const HMatrix& h, const LossMatrix& lm, const Denoiser& d,
                     std::span<const Symbol> z);

/// Erasure-channel form: (eps / (1 - eps)) / n * sum over unerased i of
/// lambda(z_i, X(z[i <- erasure])[i]). At eps = 1/2 the factor is one.
/// Equals estimate_loss with canonical_erasure_h when d copies unerased symbols.
double erasure_estimate_loss(const Channel& ch, const LossMatrix& lm, const Denoiser& d,
                             std::span<const Symbol> z);

/// (1/n) sum over unerased i of lambda(z_i, X(z)[i]); the term by which
/// estimate_loss with the canonical h exceeds erasure_estimate_loss.
double erasure_copy_residual(const Channel& ch, const LossMatrix& lm, const Denoiser& d,
                             std::span<const Symbol> z);

/// Counts of positions by (z_i, X(z)[i], X(z xor e_i)[i]).
struct JointTypeCounts {
    std::array<std::array<std::array<std::size_t, 2>, 2>, 2> counts{};

    std::size_t operator()(int b0, int b1, int b2) const { return counts[b0][b1][b2]; }
    std::size_t pair(int b0, int b1) const { return counts[b0][b1][0] + counts[b0][b1][1]; }
    std::size_t single(int b0) const { return pair(b0, 0) + pair(b0, 1); }
    std::size_t total() const { return single(0) + single(1); }
};

JointTypeCounts joint_type_counts(std::span<const Symbol> z, const Denoiser& d);

/// Closed-form BSC Hamming-loss estimate from the joint type.
double bsc_estimate_from_type(double delta, const JointTypeCounts& t, std::size_t n);

/// Estimate minus true loss at position i (needs the clean sequence).
double per_symbol_deviation(const Channel& ch, const HMatrix& h, const LossMatrix& lm, const Denoiser& d,
                            std::span<const Symbol> x, std::span<const Symbol> z, std::size_t i);

// Smoothed denoiser X'(z) = X(z xor W). Binary channels only.

/// (1/n) sum_i E_W lambda(x_i, X(z xor W)[i])
double smoothed_conditional_loss(const LossMatrix& lm, const Denoiser& d, const MaskEnsemble& masks,
                                 std::span<const Symbol> x, std::span<const Symbol> z);
double smoothed_conditional_loss(const LossMatrix& lm, const Denoiser& d, const SmoothingConfig& cfg,
                                 std::span<const Symbol> x, std::span<const Symbol> z, RngStream& rng);

/// Per-position smoothed estimates; every (i, a) query uses the same masks.
std::vector<double> smoothed_per_symbol_estimates(const EstimatorWeights& w, const Denoiser& d,
                                                  const MaskEnsemble& masks, std::span<const Symbol> z);
double smoothed_per_symbol_estimate(const Channel& ch, const HMatrix& h, const LossMatrix& lm,
                                    const Denoiser& d, const MaskEnsemble& masks,
                                    std::span<const Symbol> z, std::size_t i);

/// Estimate of the smoothed conditional loss, the mask-averaged analogue of estimate_loss.
double estimate_smoothed_loss(const Channel& ch, const HMatrix& h, const LossMatrix& lm, const Denoiser& d,
                              const MaskEnsemble& masks, std::span<const Symbol> z);
double estimate_smoothed_loss(const Channel& ch, const HMatrix& h, const LossMatrix& lm, const Denoiser& d,
                              const SmoothingConfig& cfg, std::span<const Symbol> z, RngStream& rng);

}  // namespace duo
