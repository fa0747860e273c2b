#include "duo/combiner.hpp"

#include <cmath>

#include "duo/error.hpp"

namespace duo {

Selection select_min_estimate(double e1, double e2) {
    if (std::isnan(e1) || std::isnan(e2)) throw ValidationError("select_min_estimate: NaN estimate");
    Selection s;
    s.estimates = {e1, e2};
    s.chosen_index = e1 <= e2 ? 1 : 2;
    s.tie = std::fabs(e1 - e2) <= tie_tolerance;
    return s;
}

CombinedOutput combined_denoise(const Denoiser& d1, const Denoiser& d2, const Channel& ch, const HMatrix& h,
                                const LossMatrix& lm, std::span<const Symbol> z) {
    CombinedOutput out;
    out.selection = select_min_estimate(estimate_loss(ch, h, lm, d1, z), estimate_loss(ch, h, lm, d2, z));
    out.output = (out.selection.chosen_index == 1 ? d1 : d2).denoise(z);
    return out;
}

RandomizedOutput randomized_combined_denoise(const Denoiser& d1, const Denoiser& d2, const Channel& ch,
                                             const HMatrix& h, const LossMatrix& lm, const SmoothingConfig& cfg,
                                             std::span<const Symbol> z, const RngStream& rng) {
    if (!ch.is_binary()) throw ValidationError("randomized_combined_denoise: binary channel required");
    RngStream estimation_stream = rng.derive(stream_tag::estimation_masks);
    RngStream output_stream = rng.derive(stream_tag::output_mask);
    const MaskEnsemble masks = MaskEnsemble::build(cfg, z.size(), estimation_stream);
    return randomized_combined_denoise(d1, d2, ch, h, lm, cfg, masks, z, output_stream);
}

RandomizedOutput randomized_combined_denoise(const Denoiser& d1, const Denoiser& d2, const Channel& ch,
                                             const HMatrix& h, const LossMatrix& lm, const SmoothingConfig& cfg,
                                             const MaskEnsemble& masks, std::span<const Symbol> z,
                                             RngStream& output_stream) {
    if (!ch.is_binary()) throw ValidationError("randomized_combined_denoise: binary channel required");
    RandomizedOutput out;
    out.smoothed_estimates = {estimate_smoothed_loss(ch, h, lm, d1, masks, z),
                              estimate_smoothed_loss(ch, h, lm, d2, masks, z)};
    out.selection = select_min_estimate(out.smoothed_estimates[0], out.smoothed_estimates[1]);
    out.mask = draw_smoothing_mask(cfg, z.size(), output_stream);
    out.output = (out.selection.chosen_index == 1 ? d1 : d2).denoise(xor_mask(z, out.mask));
    return out;
}

}  // namespace duo
