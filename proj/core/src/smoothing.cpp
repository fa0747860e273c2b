#include "duo/smoothing.hpp"

#include <cmath>

#include "duo/channel.hpp"
#include "duo/error.hpp"
#include "duo/summation.hpp"
#include "json_util.hpp"

namespace duo {

void SmoothingConfig::validate() const {
    if (nu) {
        if (!(*nu > 0.0 && *nu < 1.0)) throw ValidationError("smoothing: nu must lie in (0, 1)");
    } else if (!(q >= 0.0 && q < 0.5)) {
        throw ValidationError("smoothing: q must lie in [0, 1/2)");
    }
    if (m < 1) throw ValidationError("smoothing: m must be at least 1");
    if (exact_threshold < 1 || exact_threshold > 30) throw ValidationError("smoothing: exact_threshold must be in [1, 30]");
}

double SmoothingConfig::resolve_q(std::size_t n) const {
    if (!nu) return q;
    if (n == 0) throw ValidationError("smoothing: cannot resolve q for n = 0");
    return std::pow(static_cast<double>(n), -*nu);
}

SmoothingConfig smoothing_from_json(const nlohmann::json& j) {
    const std::string what = "smoothing";
    if (!j.is_object()) throw ValidationError("smoothing: expected an object");
    detail::reject_unknown_keys(j, {"type", "inner", "nu", "q", "mode", "m", "exact_threshold", "sampler"}, what);
    SmoothingConfig cfg;
    if (j.contains("nu") && j.contains("q")) throw ValidationError("smoothing: give either 'nu' or 'q', not both");
    if (j.contains("nu")) {
        cfg.nu = detail::number_at(j, "nu", what);
    } else if (j.contains("q")) {
        cfg.q = detail::number_at(j, "q", what);
    } else {
        cfg.nu = 0.75;
    }
    if (j.contains("mode")) {
        const std::string mode = detail::string_at(j, "mode", what);
        if (mode == "exact") {
            cfg.mode = SmoothingMode::exact;
        } else if (mode == "monte_carlo") {
            cfg.mode = SmoothingMode::monte_carlo;
        } else {
            throw ValidationError("smoothing: unknown mode '" + mode + "'");
        }
    }
    if (j.contains("m")) cfg.m = detail::count_at(j, "m", what);
    if (j.contains("exact_threshold")) cfg.exact_threshold = detail::count_at(j, "exact_threshold", what);
    if (j.contains("sampler")) {
        const std::string s = detail::string_at(j, "sampler", what);
        if (s == "stratified") {
            cfg.sampler = MaskSampler::stratified;
        } else if (s == "iid") {
            cfg.sampler = MaskSampler::iid;
        } else {
            throw ValidationError("smoothing: unknown sampler '" + s + "'");
        }
    }
    cfg.validate();
    return cfg;
}

nlohmann::json smoothing_to_json(const SmoothingConfig& cfg) {
    nlohmann::json j;
    if (cfg.nu) {
        j["nu"] = *cfg.nu;
    } else {
        j["q"] = cfg.q;
    }
    j["mode"] = cfg.mode == SmoothingMode::exact ? "exact" : "monte_carlo";
    j["m"] = cfg.m;
    j["exact_threshold"] = cfg.exact_threshold;
    j["sampler"] = cfg.sampler == MaskSampler::stratified ? "stratified" : "iid";
    return j;
}

SmoothedDenoiserSpec smoothed_from_json(const nlohmann::json& j, const Channel& channel) {
    const std::string what = "smoothed denoiser";
    detail::reject_unknown_keys(j, {"type", "inner", "nu", "q", "mode", "m", "exact_threshold", "sampler"}, what);
    if (detail::string_at(j, "type", what) != "smoothed") throw ValidationError(what + ": type must be 'smoothed'");
    if (!j.contains("inner")) throw ValidationError(what + ": missing 'inner'");
    if (!channel.is_binary()) throw ValidationError(what + ": smoothing needs a binary channel");
    return {denoiser_from_json(j.at("inner"), channel), smoothing_from_json(j)};
}

namespace {

double power(double base, std::size_t exponent) {
    double result = 1.0;
    while (exponent) {
        if (exponent & 1u) result *= base;
        base *= base;
        exponent >>= 1;
    }
    return result;
}

Sequence iid_mask(std::size_t n, double q, RngStream& rng) {
    Sequence w(n, 0);
    if (q == 0.0) return w;
    for (auto& b : w) b = rng.bernoulli(q) ? 1 : 0;
    return w;
}

/// Exact draw from the Bernoulli-q law conditioned on the mask weight
/// having parity `target`, one uniform per position.
class ConditionalParitySampler {
public:
    ConditionalParitySampler(std::size_t n, double q) : n_(n), q_(q), odd_(n + 1) {
        const double c = 1.0 - 2.0 * q;
        double pw = 1.0;
        for (std::size_t k = 0; k <= n; ++k) {
            odd_[k] = 0.5 * (1.0 - pw);
            pw *= c;
        }
    }

    Sequence draw(int target, RngStream& rng) const {
        Sequence w(n_, 0);
        int t = target;
        for (std::size_t j = 0; j < n_; ++j) {
            const std::size_t k = n_ - j;
            if (k == 1) {
                w[j] = static_cast<Symbol>(t);
                break;
            }
            const double p1 = q_ * prob(k - 1, t ^ 1) / prob(k, t);
            if (rng.uniform() < p1) {
                w[j] = 1;
                t ^= 1;
            }
        }
        return w;
    }

private:
    double prob(std::size_t k, int parity) const { return parity ? odd_[k] : 1.0 - odd_[k]; }

    std::size_t n_;
    double q_;
    std::vector<double> odd_;
};

}  // namespace

double odd_weight_probability(std::size_t n, double q) {
    return 0.5 * (1.0 - power(1.0 - 2.0 * q, n));
}

MaskEnsemble MaskEnsemble::exact(std::size_t n, double q) {
    if (n == 0 || n > 30) throw ValidationError("mask ensemble: exact enumeration needs 1 <= n <= 30");
    if (!(q >= 0.0 && q < 0.5)) throw ValidationError("mask ensemble: q must lie in [0, 1/2)");
    MaskEnsemble e;
    e.n_ = n;
    e.q_ = q;
    e.exact_ = true;
    e.exact_weight_.resize(n + 1);
    for (std::size_t w = 0; w <= n; ++w) e.exact_weight_[w] = power(q, w) * power(1.0 - q, n - w);
    return e;
}

MaskEnsemble MaskEnsemble::sampled(std::size_t n, double q, std::size_t m, MaskSampler sampler, RngStream& rng) {
    if (n == 0) throw ValidationError("mask ensemble: n must be positive");
    if (m == 0) throw ValidationError("mask ensemble: m must be positive");
    if (!(q >= 0.0 && q < 0.5)) throw ValidationError("mask ensemble: q must lie in [0, 1/2)");
    MaskEnsemble e;
    e.n_ = n;
    e.q_ = q;
    if (q == 0.0) {
        e.masks_.assign(1, Sequence(n, 0));
        e.weights_ = {1.0};
        e.stratum_ = {0};
        e.stratum_probability_ = {1.0};
        return e;
    }
    const double p_odd = odd_weight_probability(n, q);
    if (sampler == MaskSampler::iid || m < 2 || p_odd == 0.0) {
        if (sampler == MaskSampler::iid || m < 2) {
            for (std::size_t k = 0; k < m; ++k) e.masks_.push_back(iid_mask(n, q, rng));
        } else {
            const ConditionalParitySampler conditional(n, q);
            for (std::size_t k = 0; k < m; ++k) e.masks_.push_back(conditional.draw(0, rng));
        }
        e.weights_.assign(m, 1.0 / static_cast<double>(m));
        e.stratum_.assign(m, 0);
        e.stratum_probability_ = {1.0};
        return e;
    }
    const ConditionalParitySampler conditional(n, q);
    const std::size_t m_odd = m / 2;
    const std::size_t m_even = m - m_odd;
    e.stratum_probability_ = {1.0 - p_odd, p_odd};
    for (std::size_t k = 0; k < m_even; ++k) {
        e.masks_.push_back(conditional.draw(0, rng));
        e.weights_.push_back((1.0 - p_odd) / static_cast<double>(m_even));
        e.stratum_.push_back(0);
    }
    for (std::size_t k = 0; k < m_odd; ++k) {
        e.masks_.push_back(conditional.draw(1, rng));
        e.weights_.push_back(p_odd / static_cast<double>(m_odd));
        e.stratum_.push_back(1);
    }
    return e;
}

MaskEnsemble MaskEnsemble::build(const SmoothingConfig& cfg, std::size_t n, RngStream& rng) {
    cfg.validate();
    const double q = cfg.resolve_q(n);
    if (cfg.mode == SmoothingMode::exact) {
        if (n > cfg.exact_threshold) {
            throw ValidationError("smoothing: exact mode requested for n = " + std::to_string(n) +
                                  " above exact_threshold = " + std::to_string(cfg.exact_threshold));
        }
        return exact(n, q);
    }
    return sampled(n, q, cfg.m, cfg.sampler, rng);
}

std::size_t MaskEnsemble::size() const {
    if (!exact_) return masks_.size();
    std::size_t count = 0;
    for_each([&](std::size_t, std::span<const Symbol>, double) { ++count; });
    return count;
}

std::vector<double> MaskEnsemble::leave_one_out_weights(std::size_t k) const {
    if (exact_) throw ValidationError("mask ensemble: jackknife applies to sampled ensembles only");
    if (k >= masks_.size()) throw ValidationError("mask ensemble: mask index out of range");
    const int s = stratum_[k];
    std::size_t members = 0;
    for (int t : stratum_) members += t == s ? 1 : 0;
    if (members < 2) throw ValidationError("mask ensemble: jackknife needs two masks per stratum");
    std::vector<double> w = weights_;
    const double share = stratum_probability_[static_cast<std::size_t>(s)] / static_cast<double>(members - 1);
    for (std::size_t t = 0; t < w.size(); ++t) {
        if (stratum_[t] == s) w[t] = t == k ? 0.0 : share;
    }
    return w;
}

Sequence draw_smoothing_mask(const SmoothingConfig& cfg, std::size_t n, RngStream& rng) {
    cfg.validate();
    return iid_mask(n, cfg.resolve_q(n), rng);
}

namespace {

void require_binary(const Denoiser& d, const char* what) {
    if (d.noisy_alphabet() != 2 || d.clean_alphabet() != 2) {
        throw ValidationError(std::string(what) + ": smoothing is defined for binary alphabets only");
    }
}

}  // namespace

std::vector<double> smoothed_expected_outputs(const Denoiser& d, const MaskEnsemble& masks,
                                              std::span<const Symbol> z) {
    require_binary(d, "smoothed_expected_outputs");
    if (z.size() != masks.length()) throw ValidationError("smoothed_expected_outputs: mask length mismatch");
    std::vector<CompensatedSum> acc(z.size());
    Sequence out(z.size());
    masks.for_each([&](std::size_t, std::span<const Symbol> w, double weight) {
        const auto eval = d.evaluate(xor_mask(z, w));
        eval->outputs(out);
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (out[i]) acc[i].add(weight);
        }
    });
    std::vector<double> result(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) result[i] = acc[i].value();
    return result;
}

double smoothed_expected_output(const Denoiser& d, const MaskEnsemble& masks, std::span<const Symbol> z,
                                std::size_t i) {
    require_binary(d, "smoothed_expected_output");
    if (i >= z.size()) throw ValidationError("smoothed_expected_output: index out of range");
    if (z.size() != masks.length()) throw ValidationError("smoothed_expected_output: mask length mismatch");
    CompensatedSum acc;
    masks.for_each([&](std::size_t, std::span<const Symbol> w, double weight) {
        const auto eval = d.evaluate(xor_mask(z, w));
        if (eval->output(i)) acc.add(weight);
    });
    return acc.value();
}

double smoothed_expected_output(const Denoiser& d, const SmoothingConfig& cfg, std::span<const Symbol> z,
                                std::size_t i, RngStream& rng) {
    return smoothed_expected_output(d, MaskEnsemble::build(cfg, z.size(), rng), z, i);
}

}  // namespace duo
