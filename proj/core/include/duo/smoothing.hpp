#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "duo/denoiser.hpp"
#include "duo/rng.hpp"
#include "duo/sequence.hpp"

namespace duo {

enum class SmoothingMode { exact, monte_carlo };

/// How Monte Carlo masks are drawn. `stratified` splits the m masks evenly
/// between even- and odd-weight masks, samples each stratum exactly from the
/// conditional Bernoulli law, and weights them by the closed-form stratum
/// probabilities. `iid` draws m unconditioned masks with weight 1/m.
enum class MaskSampler { stratified, iid };

struct SmoothingConfig {
    double q = 0.0;
    /// When set, q = n^(-nu).
    std::optional<double> nu;
    SmoothingMode mode = SmoothingMode::monte_carlo;
    std::size_t m = 128;
    std::size_t exact_threshold = 20;
    MaskSampler sampler = MaskSampler::stratified;

    void validate() const;
    double resolve_q(std::size_t n) const;
};

/// {"nu":0.75,"mode":"monte_carlo","m":128} or {"q":0.1,"mode":"exact"}; the
/// "type" and "inner" keys are tolerated and left to the caller.
SmoothingConfig smoothing_from_json(const nlohmann::json& j);
nlohmann::json smoothing_to_json(const SmoothingConfig& cfg);

/// Randomized denoiser X(z xor W): {"type":"smoothed","inner":{..},"nu":0.75,
/// "mode":"monte_carlo","m":128}.
struct SmoothedDenoiserSpec {
    DenoiserPtr inner;
    SmoothingConfig smoothing;
};
SmoothedDenoiserSpec smoothed_from_json(const nlohmann::json& j, const Channel& channel);

/// Weighted set of binary masks W^n standing in for the law of
/// i.i.d. Bernoulli-q masks. Either the full enumeration of all 2^n masks
/// or a Monte Carlo sample whose weights sum to one.
class MaskEnsemble {
public:
    static MaskEnsemble exact(std::size_t n, double q);
    static MaskEnsemble sampled(std::size_t n, double q, std::size_t m, MaskSampler sampler,
                                RngStream& rng);
    /// Dispatches on cfg.mode; exact mode beyond cfg.exact_threshold throws.
    static MaskEnsemble build(const SmoothingConfig& cfg, std::size_t n, RngStream& rng);

    std::size_t length() const { return n_; }
    bool is_exact() const { return exact_; }
    double q() const { return q_; }
    /// Number of masks visited by for_each.
    std::size_t size() const;

    /// f(index, mask, weight) for every mask with nonzero weight.
    template <class F>
    void for_each(F&& f) const {
        if (exact_) {
            const std::uint64_t count = std::uint64_t{1} << n_;
            Sequence w(n_, 0);
            for (std::uint64_t code = 0; code < count; ++code) {
                std::size_t weight = 0;
                for (std::size_t b = 0; b < n_; ++b) {
                    w[b] = static_cast<Symbol>((code >> b) & 1u);
                    weight += w[b];
                }
                const double p = exact_weight_[weight];
                if (p == 0.0) continue;
                f(static_cast<std::size_t>(code), std::span<const Symbol>(w), p);
            }
        } else {
            for (std::size_t k = 0; k < masks_.size(); ++k) {
                f(k, std::span<const Symbol>(masks_[k]), weights_[k]);
            }
        }
    }

    /// Sampled ensembles only: weights with mask k removed (delete-one
    /// jackknife), renormalized within its stratum.
    std::vector<double> leave_one_out_weights(std::size_t k) const;

private:
    MaskEnsemble() = default;

    std::size_t n_ = 0;
    double q_ = 0.0;
    bool exact_ = false;
    std::vector<double> exact_weight_;  // probability of one mask of weight w
    std::vector<Sequence> masks_;
    std::vector<double> weights_;
    std::vector<int> stratum_;
    std::vector<double> stratum_probability_;
};

/// I.i.d. Bernoulli-q mask, q resolved from cfg and n.
Sequence draw_smoothing_mask(const SmoothingConfig& cfg, std::size_t n, RngStream& rng);

/// Probability that an i.i.d. Bernoulli-q mask of length n has odd weight.
double odd_weight_probability(std::size_t n, double q);

/// E_W X(z xor W)[i] over the ensemble. Binary denoisers only.
double smoothed_expected_output(const Denoiser& d, const MaskEnsemble& masks,
                                std::span<const Symbol> z, std::size_t i);
double smoothed_expected_output(const Denoiser& d, const SmoothingConfig& cfg,
                                std::span<const Symbol> z, std::size_t i, RngStream& rng);

/// E_W X(z xor W)[i] for all i at once.
std::vector<double> smoothed_expected_outputs(const Denoiser& d, const MaskEnsemble& masks,
                                              std::span<const Symbol> z);

}  // namespace duo
