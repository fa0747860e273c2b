#include <cmath>
#include <sstream>

#include "cli.hpp"
#include "duo/analysis.hpp"
#include "duo/channel.hpp"
#include "duo/error.hpp"
#include "duo/loss.hpp"

namespace duo::cli {

namespace {

struct NamedChannel {
    std::string name;
    Channel channel;
    HMatrix h;
};

std::vector<NamedChannel> channels() {
    std::vector<NamedChannel> out;
    for (double delta : {0.1, 0.3}) {
        Channel ch = make_bsc(delta);
        HMatrix h = compute_h(ch);
        std::ostringstream name;
        name << "bsc(" << delta << ")";
        out.push_back({name.str(), std::move(ch), std::move(h)});
    }
    Channel bec = make_bec(0.5);
    HMatrix h = canonical_erasure_h(bec);
    out.push_back({"bec(0.5)", std::move(bec), std::move(h)});
    return out;
}

std::vector<DenoiserPtr> suite_denoisers(const Channel& ch) {
    const std::size_t m = ch.output_size();
    const std::size_t k = ch.input_size();
    std::vector<DenoiserPtr> out = {make_identity(m, k), make_constant(m, k, 0),
                                    make_sliding_window(1, majority_rule(1, m, k), m, k, "majority")};
    const DenoiserPair pair = ch.is_erasure() ? make_bec_parity_pair() : make_bsc_counterexample_pair(ch.parameter());
    out.push_back(pair.first);
    out.push_back(pair.second);
    return out;
}

Sequence alternating(std::size_t n) {
    Sequence x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<Symbol>(i % 2);
    return x;
}

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(3);
    s << v;
    return s.str();
}

CheckResult unbiasedness() {
    const LossMatrix lm = LossMatrix::hamming(2);
    double worst = 0.0;
    std::size_t cases = 0;
    for (const auto& nc : channels()) {
        for (const auto& d : suite_denoisers(nc.channel)) {
            for (std::size_t n = 3; n <= 6; ++n) {
                for (const Sequence& x : {Sequence(n, 0), alternating(n)}) {
                    const double est = enumerate_expectation(nc.channel, x, estimate_functional(nc.channel, nc.h, lm, *d));
                    const double loss = enumerate_expectation(nc.channel, x, true_loss_functional(lm, *d, x));
                    worst = std::max(worst, std::fabs(est - loss));
                    ++cases;
                }
            }
        }
    }
    return {"unbiasedness", worst <= 1e-10, std::to_string(cases) + " cases, max gap " + fmt(worst)};
}

CheckResult conditional() {
    const LossMatrix lm = LossMatrix::hamming(2);
    double worst = 0.0;
    std::size_t cases = 0;
    const std::size_t n = 5;
    for (const auto& nc : channels()) {
        const Channel& ch = nc.channel;
        const std::size_t m = ch.output_size();
        for (const auto& d : suite_denoisers(ch)) {
            const Sequence x = alternating(n);
            for (std::size_t i = 0; i < n; ++i) {
                // One context per (channel, denoiser, i): z = all-zeros elsewhere.
                Sequence z(n, 0);
                double est = 0.0;
                double loss = 0.0;
                for (std::size_t s = 0; s < m; ++s) {
                    z[i] = static_cast<Symbol>(s);
                    const double p = ch(x[i], s);
                    if (p == 0.0) continue;
                    est += p * per_symbol_estimate(ch, nc.h, lm, *d, z, i);
                    loss += p * lm(x[i], d->denoise(z)[i]);
                }
                worst = std::max(worst, std::fabs(est - loss));
                ++cases;
                if (!ch.is_binary()) continue;
                const MaskEnsemble masks = MaskEnsemble::exact(n, 0.1);
                double sm_est = 0.0;
                double sm_loss = 0.0;
                for (std::size_t s = 0; s < 2; ++s) {
                    z[i] = static_cast<Symbol>(s);
                    const double p = ch(x[i], s);
                    sm_est += p * smoothed_per_symbol_estimate(ch, nc.h, lm, *d, masks, z, i);
                    const double one = smoothed_expected_output(*d, masks, z, i);
                    sm_loss += p * (x[i] == 0 ? one : 1.0 - one);
                }
                worst = std::max(worst, std::fabs(sm_est - sm_loss));
                ++cases;
            }
        }
    }
    return {"conditional_unbiasedness", worst <= 1e-10, std::to_string(cases) + " cases, max gap " + fmt(worst)};
}

CheckResult type_identity() {
    const Channel ch = make_bsc(0.2);
    const HMatrix h = compute_h(ch);
    const LossMatrix lm = LossMatrix::hamming(2);
    RngStream rng(7, 1);
    double worst = 0.0;
    const auto denoisers = suite_denoisers(ch);
    for (std::size_t t = 0; t < 200; ++t) {
        Sequence z(64);
        for (auto& s : z) s = rng.bernoulli(0.3) ? 1 : 0;
        const Denoiser& d = *denoisers[t % denoisers.size()];
        const double direct = estimate_loss(ch, h, lm, d, z);
        const double typed = bsc_estimate_from_type(0.2, joint_type_counts(z, d), z.size());
        worst = std::max(worst, std::fabs(direct - typed));
    }
    return {"type_identity", worst <= 1e-12, "200 pairs, max gap " + fmt(worst)};
}

CheckResult erasure() {
    const Channel ch = make_bec(0.5);
    const HMatrix h = canonical_erasure_h(ch);
    const LossMatrix lm = LossMatrix::hamming(2);
    const DenoiserPair pair = make_bec_parity_pair();
    const std::vector<DenoiserPtr> copying = {make_identity(3, 2), pair.first, pair.second};
    RngStream rng(11, 2);
    std::size_t mismatches = 0;
    for (std::size_t t = 0; t < 200; ++t) {
        const Sequence z = sample_output(ch, Sequence(64, 0), rng);
        for (const auto& d : copying) {
            if (erasure_estimate_loss(ch, lm, *d, z) != estimate_loss(ch, h, lm, *d, z)) ++mismatches;
        }
    }
    return {"erasure_specialization", mismatches == 0, std::to_string(mismatches) + " mismatches in 600 cases"};
}

CheckResult influence() {
    const auto parity = make_parity();
    double worst = 0.0;
    for (std::size_t n = 1; n <= 12; ++n) {
        for (double q : {0.0, 0.1, 0.25}) {
            const MaskEnsemble masks = MaskEnsemble::exact(n, q);
            Sequence z(n, 0);
            z[0] = 1;
            const double value = pointwise_influence(*parity, 0, masks, z).mean;
            worst = std::max(worst, std::fabs(value - static_cast<double>(n) * std::pow(1.0 - 2.0 * q, n)));
        }
    }
    return {"smoothed_parity_influence", worst <= 1e-12, "n <= 12, max gap " + fmt(worst)};
}

}  // namespace

std::vector<CheckResult> run_verify_suite(const std::string& suite) {
    std::vector<CheckResult> out;
    const bool all = suite == "all";
    bool known = all;
    if (all || suite == "unbiasedness") out.push_back(unbiasedness()), known = true;
    if (all || suite == "conditional") out.push_back(conditional()), known = true;
    if (all || suite == "type_identity") out.push_back(type_identity()), known = true;
    if (all || suite == "erasure") out.push_back(erasure()), known = true;
    if (all || suite == "influence") out.push_back(influence()), known = true;
    if (!known) throw ValidationError("verify: unknown suite '" + suite + "'");
    return out;
}

}  // namespace duo::cli
