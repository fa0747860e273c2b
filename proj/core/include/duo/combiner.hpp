#pragma once

#include <array>

#include "duo/channel.hpp"
#include "duo/denoiser.hpp"
#include "duo/loss.hpp"
#include "duo/smoothing.hpp"

namespace duo {

/// Tags for the sub-streams of one trial. Estimation masks and the emitted
/// output mask are drawn from independent streams.
namespace stream_tag {
inline constexpr std::uint64_t channel_noise = 1;
inline constexpr std::uint64_t estimation_masks = 2;
inline constexpr std::uint64_t output_mask = 3;
inline constexpr std::uint64_t clean_source = 4;
}  // namespace stream_tag

inline constexpr double tie_tolerance = 1e-12;

struct Selection {
    int chosen_index = 1;  // 1 or 2
    std::array<double, 2> estimates{};
    bool tie = false;
};

/// Index of the smaller estimate; ties go to 1. Throws on NaN.
Selection select_min_estimate(double e1, double e2);

struct CombinedOutput {
    Sequence output;
    Selection selection;
};

/// Denoises with whichever of d1, d2 has the smaller estimated loss on z.
CombinedOutput combined_denoise(const Denoiser& d1, const Denoiser& d2, const Channel& ch, const HMatrix& h,
                                const LossMatrix& lm, std::span<const Symbol> z);

struct RandomizedOutput {
    Sequence output;
    Selection selection;
    Sequence mask;
    std::array<double, 2> smoothed_estimates{};
};

/// Selects by the smoothed estimates (one mask ensemble shared by both
/// denoisers, drawn from rng.derive(estimation_masks)), then emits
/// X_chosen(z xor W) for a single fresh mask W from rng.derive(output_mask).
RandomizedOutput randomized_combined_denoise(const Denoiser& d1, const Denoiser& d2, const Channel& ch,
                                             const HMatrix& h, const LossMatrix& lm,
                                             const SmoothingConfig& cfg, std::span<const Symbol> z,
                                             const RngStream& rng);

/// Same, with the estimation masks supplied and the output mask drawn from
/// `output_stream`.
RandomizedOutput randomized_combined_denoise(const Denoiser& d1, const Denoiser& d2, const Channel& ch,
                                             const HMatrix& h, const LossMatrix& lm,
                                             const SmoothingConfig& cfg, const MaskEnsemble& masks,
                                             std::span<const Symbol> z, RngStream& output_stream);

}  // namespace duo
