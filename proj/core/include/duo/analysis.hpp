#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include "duo/channel.hpp"
#include "duo/denoiser.hpp"
#include "duo/loss.hpp"
#include "duo/smoothing.hpp"

namespace duo {

/// Real-valued functional of a noisy sequence.
using SequenceFunctional = std::function<double(std::span<const Symbol>)>;

inline constexpr double max_enumeration_states = 1e7;

/// Exact E[f(Z^n)] for Z^n the channel output on input x, summing over all
/// M^n outputs. `inner_cost` is the per-output enumeration factor of f
/// itself (2^n for exact-mode smoothed functionals); the product must stay
/// within max_enumeration_states.
double enumerate_expectation(const Channel& ch, std::span<const Symbol> x, const SequenceFunctional& f,
                             double inner_cost = 1.0);

SequenceFunctional true_loss_functional(const LossMatrix& lm, const Denoiser& d, std::span<const Symbol> x);
SequenceFunctional estimate_functional(const Channel& ch, const HMatrix& h, const LossMatrix& lm,
                                       const Denoiser& d);
/// Exact-mode smoothed variants (masks enumerated inside f).
SequenceFunctional smoothed_loss_functional(const LossMatrix& lm, const Denoiser& d, double q,
                                            std::span<const Symbol> x);
SequenceFunctional smoothed_estimate_functional(const Channel& ch, const HMatrix& h, const LossMatrix& lm,
                                                const Denoiser& d, double q);

struct MeanEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
};

/// Monte Carlo estimate of sum_j E|f(Z) - f(Z with coordinate j resampled)|,
/// with (Z, Z~) i.i.d. channel outputs for input x.
MeanEstimate empirical_influence(const SequenceFunctional& f, std::span<const Symbol> x, const Channel& ch,
                                 std::size_t samples, RngStream& rng);

/// sum_j |fbar(z) - fbar(z xor e_j)| for fbar(z) = E_W X(z xor W)[i]. The
/// standard error is a delete-one jackknife over Monte Carlo masks (zero for
/// exact ensembles).
MeanEstimate pointwise_influence(const Denoiser& d, std::size_t i, const MaskEnsemble& masks,
                                 std::span<const Symbol> z);

}  // namespace duo
