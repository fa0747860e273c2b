#include "duo/analysis.hpp"

#include <cmath>

#include "duo/error.hpp"
#include "duo/summation.hpp"

namespace duo {

double enumerate_expectation(const Channel& ch, std::span<const Symbol> x, const SequenceFunctional& f,
                             double inner_cost) {
    check_alphabet(x, ch.input_size(), "enumerate_expectation");
    const std::size_t n = x.size();
    const std::size_t m = ch.output_size();
    if (n == 0) throw ValidationError("enumerate_expectation: empty input");
    const double states = std::pow(static_cast<double>(m), static_cast<double>(n)) * inner_cost;
    if (states > max_enumeration_states) {
        throw ValidationError("enumerate_expectation: state space too large (" + std::to_string(states) +
                              " > 1e7)");
    }
    Sequence z(n, 0);
    CompensatedSum total;
    while (true) {
        double p = 1.0;
        for (std::size_t i = 0; i < n && p != 0.0; ++i) p *= ch(x[i], z[i]);
        if (p != 0.0) total.add(p * f(z));
        std::size_t pos = 0;
        while (pos < n && ++z[pos] == m) z[pos++] = 0;
        if (pos == n) break;
    }
    return total.value();
}

SequenceFunctional true_loss_functional(const LossMatrix& lm, const Denoiser& d, std::span<const Symbol> x) {
    Sequence clean(x.begin(), x.end());
    return [&lm, &d, clean](std::span<const Symbol> z) { return cumulative_loss(lm, clean, d.denoise(z)); };
}

SequenceFunctional estimate_functional(const Channel& ch, const HMatrix& h, const LossMatrix& lm,
                                       const Denoiser& d) {
    return [&ch, &h, &lm, &d](std::span<const Symbol> z) { return estimate_loss(ch, h, lm, d, z); };
}

SequenceFunctional smoothed_loss_functional(const LossMatrix& lm, const Denoiser& d, double q,
                                            std::span<const Symbol> x) {
    Sequence clean(x.begin(), x.end());
    return [&lm, &d, q, clean](std::span<const Symbol> z) {
        return smoothed_conditional_loss(lm, d, MaskEnsemble::exact(z.size(), q), clean, z);
    };
}

SequenceFunctional smoothed_estimate_functional(const Channel& ch, const HMatrix& h, const LossMatrix& lm,
                                                const Denoiser& d, double q) {
    return [&ch, &h, &lm, &d, q](std::span<const Symbol> z) {
        return estimate_smoothed_loss(ch, h, lm, d, MaskEnsemble::exact(z.size(), q), z);
    };
}

namespace {

Symbol draw_symbol(const Channel& ch, Symbol x, RngStream& rng) {
    const Symbol in[1] = {x};
    return sample_output(ch, in, rng)[0];
}

}  // namespace

MeanEstimate empirical_influence(const SequenceFunctional& f, std::span<const Symbol> x, const Channel& ch,
                                 std::size_t samples, RngStream& rng) {
    if (samples < 2) throw ValidationError("empirical_influence: need at least two samples");
    check_alphabet(x, ch.input_size(), "empirical_influence");
    std::vector<double> totals(samples);
    for (std::size_t s = 0; s < samples; ++s) {
        Sequence z = sample_output(ch, x, rng);
        const double base = f(z);
        CompensatedSum sum;
        for (std::size_t j = 0; j < z.size(); ++j) {
            const Symbol original = z[j];
            z[j] = draw_symbol(ch, x[j], rng);
            sum.add(std::fabs(base - f(z)));
            z[j] = original;
        }
        totals[s] = sum.value();
    }
    const double mean = compensated_sum(totals) / static_cast<double>(samples);
    CompensatedSum squares;
    for (double v : totals) squares.add((v - mean) * (v - mean));
    const double variance = squares.value() / static_cast<double>(samples - 1);
    return {mean, std::sqrt(variance / static_cast<double>(samples))};
}

MeanEstimate pointwise_influence(const Denoiser& d, std::size_t i, const MaskEnsemble& masks,
                                 std::span<const Symbol> z) {
    if (d.noisy_alphabet() != 2 || d.clean_alphabet() != 2) {
        throw ValidationError("pointwise_influence: binary denoiser required");
    }
    const std::size_t n = z.size();
    if (i >= n) throw ValidationError("pointwise_influence: index out of range");
    if (n != masks.length()) throw ValidationError("pointwise_influence: mask length mismatch");

    // Per-mask outputs: base[k] = X(z xor w_k)[i], flipped[k][j] = X(z xor w_k xor e_j)[i].
    std::vector<double> weights;
    std::vector<Symbol> base;
    std::vector<Sequence> flipped;
    masks.for_each([&](std::size_t, std::span<const Symbol> w, double weight) {
        const auto eval = d.evaluate(xor_mask(z, w));
        const auto y = eval->noisy();
        Sequence row(n);
        for (std::size_t j = 0; j < n; ++j) row[j] = eval->output_after(j, static_cast<Symbol>(y[j] ^ 1), i);
        weights.push_back(weight);
        base.push_back(eval->output(i));
        flipped.push_back(std::move(row));
    });

    const auto statistic = [&](const std::vector<double>& w) {
        CompensatedSum fbar;
        for (std::size_t k = 0; k < w.size(); ++k) {
            if (base[k]) fbar.add(w[k]);
        }
        CompensatedSum total;
        for (std::size_t j = 0; j < n; ++j) {
            CompensatedSum shifted;
            for (std::size_t k = 0; k < w.size(); ++k) {
                if (flipped[k][j]) shifted.add(w[k]);
            }
            total.add(std::fabs(fbar.value() - shifted.value()));
        }
        return total.value();
    };

    MeanEstimate result{statistic(weights), 0.0};
    if (masks.is_exact() || weights.size() < 3) return result;
    std::vector<double> replicates(weights.size());
    for (std::size_t k = 0; k < weights.size(); ++k) replicates[k] = statistic(masks.leave_one_out_weights(k));
    const double mean = compensated_sum(replicates) / static_cast<double>(replicates.size());
    CompensatedSum squares;
    for (double r : replicates) squares.add((r - mean) * (r - mean));
    const double count = static_cast<double>(replicates.size());
    result.standard_error = std::sqrt((count - 1.0) / count * squares.value());
    return result;
}

}  // namespace duo
