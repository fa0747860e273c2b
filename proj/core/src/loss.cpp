#include "duo/loss.hpp"

#include <cmath>

#include "duo/error.hpp"
#include "duo/summation.hpp"
#include "json_util.hpp"

namespace duo {

LossMatrix::LossMatrix(Eigen::MatrixXd lambda) : lambda_(std::move(lambda)), max_(0.0) {
    if (lambda_.rows() < 2 || lambda_.rows() != lambda_.cols()) throw ValidationError("loss: matrix must be K x K with K >= 2");
    for (Eigen::Index r = 0; r < lambda_.rows(); ++r) {
        for (Eigen::Index c = 0; c < lambda_.cols(); ++c) {
            const double v = lambda_(r, c);
            if (!std::isfinite(v) || v < 0.0) throw ValidationError("loss: entries must be finite and nonnegative");
            max_ = std::max(max_, v);
        }
    }
}

LossMatrix LossMatrix::hamming(std::size_t k) {
    const auto kk = static_cast<Eigen::Index>(k);
    return LossMatrix(Eigen::MatrixXd::Ones(kk, kk) - Eigen::MatrixXd::Identity(kk, kk));
}

LossMatrix LossMatrix::from_matrix(Eigen::MatrixXd lambda) {
    return LossMatrix(std::move(lambda));
}

LossMatrix loss_from_json(const nlohmann::json& j) {
    const std::string what = "loss";
    const std::string type = detail::string_at(j, "type", what);
    if (type == "hamming") {
        detail::reject_unknown_keys(j, {"type", "k"}, what);
        return LossMatrix::hamming(j.contains("k") ? detail::count_at(j, "k", what) : 2);
    }
    if (type == "matrix") {
        detail::reject_unknown_keys(j, {"type", "lambda"}, what);
        if (!j.contains("lambda") || !j.at("lambda").is_array() || j.at("lambda").empty()) {
            throw ValidationError("loss: 'lambda' must be a nonempty array of rows");
        }
        const auto& rows = j.at("lambda");
        const auto k = static_cast<Eigen::Index>(rows.size());
        Eigen::MatrixXd lambda(k, k);
        for (Eigen::Index r = 0; r < k; ++r) {
            const auto& row = rows[static_cast<std::size_t>(r)];
            if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != k) throw ValidationError("loss: 'lambda' must be square");
            for (Eigen::Index c = 0; c < k; ++c) {
                if (!row[static_cast<std::size_t>(c)].is_number()) throw ValidationError("loss: non-numeric entry");
                lambda(r, c) = row[static_cast<std::size_t>(c)].get<double>();
            }
        }
        return LossMatrix::from_matrix(std::move(lambda));
    }
    throw ValidationError("loss: unknown type '" + type + "'");
}

nlohmann::json loss_to_json(const LossMatrix& lm) {
    const auto k = static_cast<Eigen::Index>(lm.size());
    if (lm.matrix() == Eigen::MatrixXd::Ones(k, k) - Eigen::MatrixXd::Identity(k, k)) {
        return {{"type", "hamming"}, {"k", lm.size()}};
    }
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < k; ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < k; ++c) row.push_back(lm.matrix()(r, c));
        rows.push_back(row);
    }
    return {{"type", "matrix"}, {"lambda", rows}};
}

double cumulative_loss(const LossMatrix& lm, std::span<const Symbol> x, std::span<const Symbol> xhat) {
    if (x.size() != xhat.size()) throw ValidationError("cumulative_loss: length mismatch");
    if (x.empty()) throw ValidationError("cumulative_loss: empty sequences");
    check_alphabet(x, lm.size(), "cumulative_loss clean");
    check_alphabet(xhat, lm.size(), "cumulative_loss reconstruction");
    CompensatedSum sum;
    for (std::size_t i = 0; i < x.size(); ++i) sum.add(lm(x[i], xhat[i]));
    return sum.value() / static_cast<double>(x.size());
}

namespace {

void check_compatible(const Channel& ch, const HMatrix& h, const LossMatrix& lm, const Denoiser& d) {
    if (d.noisy_alphabet() != ch.output_size() || d.clean_alphabet() != ch.input_size()) {
        throw ValidationError(d.name() + ": denoiser alphabets do not match the channel");
    }
    if (static_cast<std::size_t>(h.h.rows()) != ch.input_size() ||
        static_cast<std::size_t>(h.h.cols()) != ch.output_size()) {
        throw ValidationError("h matrix dimensions do not match the channel");
    }
    if (lm.size() != ch.input_size()) throw ValidationError("loss matrix dimensions do not match the channel");
}

void check_binary(const Channel& ch, const char* what) {
    if (!ch.is_binary()) throw ValidationError(std::string(what) + ": binary channel required");
}

double mean_of(const std::vector<double>& values) {
    return compensated_sum(values) / static_cast<double>(values.size());
}

}  // namespace

EstimatorWeights::EstimatorWeights(const Channel& ch, const HMatrix& h, const LossMatrix& lm)
    : m_(ch.output_size()), k_(ch.input_size()), c_(m_ * m_ * k_, 0.0) {
    for (std::size_t zi = 0; zi < m_; ++zi) {
        for (std::size_t a = 0; a < m_; ++a) {
            for (std::size_t xhat = 0; xhat < k_; ++xhat) {
                double v = 0.0;
                for (std::size_t x = 0; x < k_; ++x) v += h(x, zi) * ch(x, a) * lm(x, xhat);
                c_[(zi * m_ + a) * k_ + xhat] = v;
            }
        }
    }
}

std::vector<double> per_symbol_estimates(const EstimatorWeights& w, const Evaluation& eval) {
    const std::size_t n = eval.size();
    const std::size_t m = w.noisy_alphabet();
    std::vector<Sequence> column(m, Sequence(n));
    for (std::size_t a = 0; a < m; ++a) eval.substituted_column(static_cast<Symbol>(a), column[a]);
    const auto z = eval.noisy();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double v = 0.0;
        for (std::size_t a = 0; a < m; ++a) v += w(z[i], a, column[a][i]);
        out[i] = v;
    }
    return out;
}

double per_symbol_estimate(const Channel& ch, const HMatrix& h, const LossMatrix& lm, const Denoiser& d,
                           std::span<const Symbol> z, std::size_t i) {
    check_compatible(ch, h, lm, d);
    if (i >= z.size()) throw ValidationError("per_symbol_estimate: index out of range");
    const EstimatorWeights w(ch, h, lm);
    const auto eval = d.evaluate(z);
    double v = 0.0;
    for (std::size_t a = 0; a < ch.output_size(); ++a) v += w(z[i], a, eval->substituted(i, static_cast<Symbol>(a)));
    return v;
}

double estimate_loss(const Channel& ch, const HMatrix& h, const LossMatrix& lm, const Denoiser& d,
                     std::span<const Symbol> z) {
    check_compatible(ch, h, lm, d);
    const auto eval = d.evaluate(z);
    return mean_of(per_symbol_estimates(EstimatorWeights(ch, h, lm), *eval));
}

double erasure_estimate_loss(const Channel& ch, const LossMatrix& lm, const Denoiser& d, std::span<const Symbol> z) {
    if (!ch.is_erasure()) throw ValidationError("erasure_estimate_loss: channel is not a binary erasure channel");
    if (d.noisy_alphabet() != 3 || d.clean_alphabet() != 2 || lm.size() != 2) {
        throw ValidationError("erasure_estimate_loss: denoiser or loss does not match the channel");
    }
    const auto eval = d.evaluate(z);
    const Symbol erasure = ch.erasure_symbol();
    const double eps = ch.parameter() > 0.0 ? ch.parameter() : ch(0, 2);
    CompensatedSum sum;
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (z[i] == erasure) continue;
        sum.add(lm(z[i], eval->substituted(i, erasure)));
    }
    return eps / (1.0 - eps) * sum.value() / static_cast<double>(z.size());
}

double erasure_copy_residual(const Channel& ch, const LossMatrix& lm, const Denoiser& d, std::span<const Symbol> z) {
    if (!ch.is_erasure()) throw ValidationError("erasure_copy_residual: channel is not a binary erasure channel");
    const auto eval = d.evaluate(z);
    CompensatedSum sum;
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (z[i] == ch.erasure_symbol()) continue;
        sum.add(lm(z[i], eval->output(i)));
    }
    return sum.value() / static_cast<double>(z.size());
}

JointTypeCounts joint_type_counts(std::span<const Symbol> z, const Denoiser& d) {
    if (d.noisy_alphabet() != 2 || d.clean_alphabet() != 2) {
        throw ValidationError("joint_type_counts: binary denoiser required");
    }
    const auto eval = d.evaluate(z);
    JointTypeCounts t;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const Symbol flipped = eval->substituted(i, static_cast<Symbol>(z[i] ^ 1));
        ++t.counts[z[i]][eval->output(i)][flipped];
    }
    return t;
}

double bsc_estimate_from_type(double delta, const JointTypeCounts& t, std::size_t n) {
    if (!(delta > 0.0 && delta < 0.5)) throw ValidationError("bsc_estimate_from_type: delta must lie in (0, 1/2)");
    if (n == 0 || t.total() != n) throw ValidationError("bsc_estimate_from_type: counts do not sum to n");
    const double keep = 1.0 - delta;
    const double gain = 1.0 - 2.0 * delta;
    const auto c = [&](int b0, int b1, int b2) { return static_cast<double>(t(b0, b1, b2)); };
    const double total = -delta / gain * (c(0, 0, 0) + c(1, 1, 1)) + delta * (c(0, 0, 1) + c(1, 1, 0)) +
                         keep * (c(0, 1, 0) + c(1, 0, 1)) + keep / gain * (c(0, 1, 1) + c(1, 0, 0));
    return total / static_cast<double>(n);
}

double per_symbol_deviation(const Channel& ch, const HMatrix& h, const LossMatrix& lm, const Denoiser& d,
                            std::span<const Symbol> x, std::span<const Symbol> z, std::size_t i) {
    if (x.size() != z.size()) throw ValidationError("per_symbol_deviation: length mismatch");
    check_alphabet(x, ch.input_size(), "per_symbol_deviation clean");
    const double estimate = per_symbol_estimate(ch, h, lm, d, z, i);
    return estimate - lm(x[i], d.evaluate(z)->output(i));
}

double smoothed_conditional_loss(const LossMatrix& lm, const Denoiser& d, const MaskEnsemble& masks,
                                 std::span<const Symbol> x, std::span<const Symbol> z) {
    if (d.noisy_alphabet() != 2 || d.clean_alphabet() != 2 || lm.size() != 2) {
        throw ValidationError("smoothed_conditional_loss: binary alphabets required");
    }
    if (x.size() != z.size() || z.size() != masks.length()) throw ValidationError("smoothed_conditional_loss: length mismatch");
    check_alphabet(x, 2, "smoothed_conditional_loss clean");
    std::vector<CompensatedSum> acc(z.size());
    Sequence out(z.size());
    masks.for_each([&](std::size_t, std::span<const Symbol> w, double weight) {
        d.evaluate(xor_mask(z, w))->outputs(out);
        for (std::size_t i = 0; i < out.size(); ++i) acc[i].add(weight * lm(x[i], out[i]));
    });
    CompensatedSum total;
    for (const auto& a : acc) total.add(a.value());
    return total.value() / static_cast<double>(z.size());
}

double smoothed_conditional_loss(const LossMatrix& lm, const Denoiser& d, const SmoothingConfig& cfg,
                                 std::span<const Symbol> x, std::span<const Symbol> z, RngStream& rng) {
    return smoothed_conditional_loss(lm, d, MaskEnsemble::build(cfg, z.size(), rng), x, z);
}

std::vector<double> smoothed_per_symbol_estimates(const EstimatorWeights& w, const Denoiser& d,
                                                  const MaskEnsemble& masks, std::span<const Symbol> z) {
    if (w.noisy_alphabet() != 2 || w.clean_alphabet() != 2 || d.noisy_alphabet() != 2 || d.clean_alphabet() != 2) {
        throw ValidationError("smoothed estimate: binary channel required");
    }
    const std::size_t n = z.size();
    if (n != masks.length()) throw ValidationError("smoothed estimate: mask length mismatch");
    std::vector<CompensatedSum> acc(n);
    Sequence col0(n);
    Sequence col1(n);
    masks.for_each([&](std::size_t, std::span<const Symbol> mask, double weight) {
        // (z[i <- a]) xor W == y[i <- a xor w_i] with y = z xor W.
        const auto eval = d.evaluate(xor_mask(z, mask));
        eval->substituted_column(0, col0);
        eval->substituted_column(1, col1);
        for (std::size_t i = 0; i < n; ++i) {
            const Symbol wi = mask[i];
            const Symbol at0 = wi ? col1[i] : col0[i];
            const Symbol at1 = wi ? col0[i] : col1[i];
            acc[i].add(weight * (w(z[i], 0, at0) + w(z[i], 1, at1)));
        }
    });
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = acc[i].value();
    return out;
}

double smoothed_per_symbol_estimate(const Channel& ch, const HMatrix& h, const LossMatrix& lm, const Denoiser& d,
                                    const MaskEnsemble& masks, std::span<const Symbol> z, std::size_t i) {
    check_compatible(ch, h, lm, d);
    check_binary(ch, "smoothed_per_symbol_estimate");
    if (i >= z.size()) throw ValidationError("smoothed_per_symbol_estimate: index out of range");
    if (z.size() != masks.length()) throw ValidationError("smoothed_per_symbol_estimate: mask length mismatch");
    const EstimatorWeights w(ch, h, lm);
    CompensatedSum acc;
    masks.for_each([&](std::size_t, std::span<const Symbol> mask, double weight) {
        const auto eval = d.evaluate(xor_mask(z, mask));
        const Symbol wi = mask[i];
        const Symbol at0 = eval->substituted(i, wi);
        const Symbol at1 = eval->substituted(i, static_cast<Symbol>(wi ^ 1));
        acc.add(weight * (w(z[i], 0, at0) + w(z[i], 1, at1)));
    });
    return acc.value();
}

double estimate_smoothed_loss(const Channel& ch, const HMatrix& h, const LossMatrix& lm, const Denoiser& d,
                              const MaskEnsemble& masks, std::span<const Symbol> z) {
    check_compatible(ch, h, lm, d);
    check_binary(ch, "estimate_smoothed_loss");
    return mean_of(smoothed_per_symbol_estimates(EstimatorWeights(ch, h, lm), d, masks, z));
}

double estimate_smoothed_loss(const Channel& ch, const HMatrix& h, const LossMatrix& lm, const Denoiser& d,
                              const SmoothingConfig& cfg, std::span<const Symbol> z, RngStream& rng) {
    return estimate_smoothed_loss(ch, h, lm, d, MaskEnsemble::build(cfg, z.size(), rng), z);
}

}  // namespace duo
