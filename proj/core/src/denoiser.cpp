#include "duo/denoiser.hpp"

#include <cmath>

#include "duo/channel.hpp"
#include "duo/error.hpp"
#include "json_util.hpp"

namespace duo {

void Evaluation::substituted_column(Symbol a, std::span<Symbol> out) const {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = substituted(i, a);
}

void Evaluation::outputs(std::span<Symbol> out) const {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = output(i);
}

Denoiser::Denoiser(std::size_t noisy_alphabet, std::size_t clean_alphabet)
    : noisy_alphabet_(noisy_alphabet), clean_alphabet_(clean_alphabet) {
    if (clean_alphabet < 2 || noisy_alphabet < clean_alphabet || noisy_alphabet > 255) {
        throw ValidationError("denoiser: invalid alphabet sizes");
    }
}

std::unique_ptr<Evaluation> Denoiser::evaluate(std::span<const Symbol> z) const {
    if (z.empty()) throw ValidationError(name() + ": empty input sequence");
    check_alphabet(z, noisy_alphabet_, name());
    return make_evaluation(Sequence(z.begin(), z.end()));
}

Sequence Denoiser::denoise(std::span<const Symbol> z) const {
    const auto eval = evaluate(z);
    Sequence out(z.size());
    eval->outputs(out);
    return out;
}

Symbol Denoiser::denoise_substituted(std::span<const Symbol> z, std::size_t i, Symbol a) const {
    if (i >= z.size()) throw ValidationError(name() + ": substitution index out of range");
    if (a >= noisy_alphabet_) throw ValidationError(name() + ": substituted symbol outside alphabet");
    return evaluate(z)->substituted(i, a);
}

namespace {

// ---------------------------------------------------------------- identity

class IdentityEvaluation final : public Evaluation {
public:
    IdentityEvaluation(Sequence z, std::size_t clean) : Evaluation(std::move(z)), clean_(clean) {}
    Symbol output(std::size_t i) const override { return map(z_[i]); }
    Symbol output_after(std::size_t j, Symbol a, std::size_t i) const override {
        return map(i == j ? a : z_[i]);
    }
    void substituted_column(Symbol a, std::span<Symbol> out) const override {
        std::fill(out.begin(), out.end(), map(a));
    }

private:
    Symbol map(Symbol s) const { return s < clean_ ? s : Symbol{0}; }
    std::size_t clean_;
};

class IdentityDenoiser final : public Denoiser {
public:
    IdentityDenoiser(std::size_t noisy, std::size_t clean) : Denoiser(noisy, clean) {}
    std::string name() const override { return "identity"; }
    nlohmann::json to_json() const override { return {{"type", "identity"}}; }

protected:
    std::unique_ptr<Evaluation> make_evaluation(Sequence z) const override {
        return std::make_unique<IdentityEvaluation>(std::move(z), clean_alphabet());
    }
};

// ---------------------------------------------------------------- constant

class ConstantEvaluation final : public Evaluation {
public:
    ConstantEvaluation(Sequence z, Symbol s) : Evaluation(std::move(z)), s_(s) {}
    Symbol output(std::size_t) const override { return s_; }
    Symbol output_after(std::size_t, Symbol, std::size_t) const override { return s_; }

private:
    Symbol s_;
};

class ConstantDenoiser final : public Denoiser {
public:
    ConstantDenoiser(std::size_t noisy, std::size_t clean, Symbol s) : Denoiser(noisy, clean), s_(s) {
        if (s >= clean) throw ValidationError("constant denoiser: symbol outside clean alphabet");
    }
    std::string name() const override { return "constant"; }
    nlohmann::json to_json() const override { return {{"type", "constant"}, {"symbol", s_}}; }

protected:
    std::unique_ptr<Evaluation> make_evaluation(Sequence z) const override {
        return std::make_unique<ConstantEvaluation>(std::move(z), s_);
    }

private:
    Symbol s_;
};

// ---------------------------------------------------------------- parity

class ParityEvaluation final : public Evaluation {
public:
    explicit ParityEvaluation(Sequence z) : Evaluation(std::move(z)), parity_(ones_parity(z_)) {}
    Symbol output(std::size_t) const override { return parity_; }
    Symbol output_after(std::size_t j, Symbol a, std::size_t) const override {
        return static_cast<Symbol>(parity_ ^ (z_[j] != a ? 1 : 0));
    }

private:
    Symbol parity_;
};

class ParityDenoiser final : public Denoiser {
public:
    explicit ParityDenoiser(std::size_t noisy) : Denoiser(noisy, 2) {}
    std::string name() const override { return "parity"; }
    nlohmann::json to_json() const override { return {{"type", "parity"}}; }

protected:
    std::unique_ptr<Evaluation> make_evaluation(Sequence z) const override {
        return std::make_unique<ParityEvaluation>(std::move(z));
    }
};

// ---------------------------------------------------------------- sliding window

class SlidingWindowDenoiser;

class SlidingWindowEvaluation final : public Evaluation {
public:
    SlidingWindowEvaluation(Sequence z, const SlidingWindowDenoiser& d);
    Symbol output(std::size_t i) const override { return out_[i]; }
    Symbol output_after(std::size_t j, Symbol a, std::size_t i) const override;
    void outputs(std::span<Symbol> out) const override { std::copy(out_.begin(), out_.end(), out.begin()); }

private:
    std::size_t window_index(std::size_t i, std::size_t j, Symbol a) const;
    const SlidingWindowDenoiser& d_;
    Sequence out_;
};

class SlidingWindowDenoiser final : public Denoiser {
public:
    SlidingWindowDenoiser(std::size_t k, std::vector<Symbol> rule, std::size_t noisy, std::size_t clean,
                          std::string rule_name)
        : Denoiser(noisy, clean), k_(k), rule_(std::move(rule)), rule_name_(std::move(rule_name)) {
        double expected = std::pow(static_cast<double>(noisy), static_cast<double>(2 * k + 1));
        if (expected > 1 << 24) throw ValidationError("sliding_window: rule table too large");
        if (rule_.size() != static_cast<std::size_t>(expected)) {
            throw ValidationError("sliding_window: incomplete rule table (expected " +
                                  std::to_string(static_cast<std::size_t>(expected)) + " entries, got " +
                                  std::to_string(rule_.size()) + ")");
        }
        check_alphabet(rule_, clean, "sliding_window rule");
    }
    std::string name() const override { return "sliding_window"; }
    nlohmann::json to_json() const override {
        nlohmann::json j = {{"type", "sliding_window"}, {"k", k_}};
        if (rule_name_ == "table") {
            j["rule"] = rule_;
        } else {
            j["rule"] = rule_name_;
        }
        return j;
    }
    std::size_t k() const { return k_; }
    Symbol rule(std::size_t index) const { return rule_[index]; }

protected:
    std::unique_ptr<Evaluation> make_evaluation(Sequence z) const override {
        return std::make_unique<SlidingWindowEvaluation>(std::move(z), *this);
    }

private:
    std::size_t k_;
    std::vector<Symbol> rule_;
    std::string rule_name_;
};

SlidingWindowEvaluation::SlidingWindowEvaluation(Sequence z, const SlidingWindowDenoiser& d)
    : Evaluation(std::move(z)), d_(d), out_(z_.size()) {
    for (std::size_t i = 0; i < z_.size(); ++i) out_[i] = d_.rule(window_index(i, z_.size(), 0));
}

std::size_t SlidingWindowEvaluation::window_index(std::size_t i, std::size_t j, Symbol a) const {
    const std::size_t m = d_.noisy_alphabet();
    const auto k = static_cast<std::ptrdiff_t>(d_.k());
    const auto n = static_cast<std::ptrdiff_t>(z_.size());
    std::size_t index = 0;
    for (std::ptrdiff_t p = static_cast<std::ptrdiff_t>(i) - k; p <= static_cast<std::ptrdiff_t>(i) + k; ++p) {
        Symbol s = 0;
        if (p >= 0 && p < n) s = static_cast<std::size_t>(p) == j ? a : z_[static_cast<std::size_t>(p)];
        index = index * m + s;
    }
    return index;
}

Symbol SlidingWindowEvaluation::output_after(std::size_t j, Symbol a, std::size_t i) const {
    const std::size_t gap = i > j ? i - j : j - i;
    if (gap > d_.k()) return out_[i];
    return d_.rule(window_index(i, j, a));
}

// ---------------------------------------------------------------- BEC parity pair

class BecParityEvaluation final : public Evaluation {
public:
    BecParityEvaluation(Sequence z, int variant)
        : Evaluation(std::move(z)), flip_(variant == 2 ? 1 : 0), zeros_(count_symbol(z_, 0)) {}
    Symbol output(std::size_t i) const override { return emit(z_[i], zeros_); }
    Symbol output_after(std::size_t j, Symbol a, std::size_t i) const override {
        const std::size_t zeros = zeros_ - (z_[j] == 0 ? 1 : 0) + (a == 0 ? 1 : 0);
        return emit(i == j ? a : z_[i], zeros);
    }

private:
    Symbol emit(Symbol s, std::size_t zeros) const {
        if (s != 2) return s;
        return static_cast<Symbol>((zeros & 1u) ^ flip_);
    }
    unsigned flip_;
    std::size_t zeros_;
};

class BecParityDenoiser final : public Denoiser {
public:
    explicit BecParityDenoiser(int variant) : Denoiser(3, 2), variant_(variant) {}
    std::string name() const override { return "bec_parity_" + std::to_string(variant_); }
    nlohmann::json to_json() const override { return {{"type", "bec_parity"}, {"variant", variant_}}; }

protected:
    std::unique_ptr<Evaluation> make_evaluation(Sequence z) const override {
        return std::make_unique<BecParityEvaluation>(std::move(z), variant_);
    }

private:
    int variant_;
};

// ---------------------------------------------------------------- BSC counterexample pair

class BscCounterexampleEvaluation final : public Evaluation {
public:
    BscCounterexampleEvaluation(Sequence z, double delta, int variant)
        : Evaluation(std::move(z)), delta_(delta), variant_(variant), zeros_before_(z_.size()) {
        std::size_t zeros = 0;
        for (std::size_t i = 0; i < z_.size(); ++i) {
            zeros_before_[i] = zeros;
            zeros += z_[i] == 0 ? 1 : 0;
        }
        zeros_ = zeros;
    }

    Symbol output(std::size_t i) const override {
        return emit(z_[i], zeros_, zeros_before_[i], z_.size() - zeros_);
    }

    Symbol output_after(std::size_t j, Symbol a, std::size_t i) const override {
        const std::ptrdiff_t change = (a == 0 ? 1 : 0) - (z_[j] == 0 ? 1 : 0);
        const std::size_t zeros = zeros_ + change;
        const std::size_t before = zeros_before_[i] + (j < i ? change : 0);
        return emit(i == j ? a : z_[i], zeros, before, z_.size() - zeros);
    }

    void substituted_column(Symbol a, std::span<Symbol> out) const override {
        for (std::size_t i = 0; i < out.size(); ++i) {
            const std::size_t zeros = zeros_ + (a == 0 ? 1 : 0) - (z_[i] == 0 ? 1 : 0);
            out[i] = emit(a, zeros, zeros_before_[i], z_.size() - zeros);
        }
    }

private:
    Symbol emit(Symbol s, std::size_t zeros, std::size_t zeros_before, std::size_t ones) const {
        if ((ones & 1u) == 0) return 0;
        if (variant_ == 1) return s;
        if (s == 1) return 0;
        const auto budget = static_cast<std::size_t>(std::floor(delta_ * static_cast<double>(zeros)));
        return zeros_before < budget ? Symbol{1} : Symbol{0};
    }

    double delta_;
    int variant_;
    std::vector<std::size_t> zeros_before_;
    std::size_t zeros_ = 0;
};

class BscCounterexampleDenoiser final : public Denoiser {
public:
    BscCounterexampleDenoiser(double delta, int variant) : Denoiser(2, 2), delta_(delta), variant_(variant) {
        if (!(delta > 0.0 && delta < 0.5)) throw ValidationError("bsc_counterexample: delta must lie in (0, 1/2)");
    }
    std::string name() const override { return "bsc_counterexample_" + std::to_string(variant_); }
    nlohmann::json to_json() const override {
        return {{"type", "bsc_counterexample"}, {"delta", delta_}, {"variant", variant_}};
    }

protected:
    std::unique_ptr<Evaluation> make_evaluation(Sequence z) const override {
        return std::make_unique<BscCounterexampleEvaluation>(std::move(z), delta_, variant_);
    }

private:
    double delta_;
    int variant_;
};

int variant_at(const nlohmann::json& j, const std::string& what) {
    const std::size_t v = detail::count_at(j, "variant", what);
    if (v != 1 && v != 2) throw ValidationError(what + ": variant must be 1 or 2");
    return static_cast<int>(v);
}

}  // namespace

DenoiserPtr make_identity(std::size_t noisy_alphabet, std::size_t clean_alphabet) {
    return std::make_shared<IdentityDenoiser>(noisy_alphabet, clean_alphabet);
}

DenoiserPtr make_constant(std::size_t noisy_alphabet, std::size_t clean_alphabet, Symbol symbol) {
    return std::make_shared<ConstantDenoiser>(noisy_alphabet, clean_alphabet, symbol);
}

DenoiserPtr make_parity(std::size_t noisy_alphabet) {
    if (noisy_alphabet != 2) throw ValidationError("parity denoiser: binary alphabets only");
    return std::make_shared<ParityDenoiser>(noisy_alphabet);
}

DenoiserPtr make_sliding_window(std::size_t k, std::vector<Symbol> rule, std::size_t noisy_alphabet,
                                std::size_t clean_alphabet, std::string rule_name) {
    return std::make_shared<SlidingWindowDenoiser>(k, std::move(rule), noisy_alphabet, clean_alphabet,
                                                   std::move(rule_name));
}

std::vector<Symbol> majority_rule(std::size_t k, std::size_t noisy_alphabet, std::size_t clean_alphabet) {
    const std::size_t width = 2 * k + 1;
    std::size_t entries = 1;
    for (std::size_t w = 0; w < width; ++w) entries *= noisy_alphabet;
    std::vector<Symbol> rule(entries);
    std::vector<std::size_t> votes(clean_alphabet);
    for (std::size_t index = 0; index < entries; ++index) {
        std::fill(votes.begin(), votes.end(), 0);
        std::size_t rest = index;
        for (std::size_t w = 0; w < width; ++w) {
            const std::size_t s = rest % noisy_alphabet;
            rest /= noisy_alphabet;
            if (s < clean_alphabet) ++votes[s];
        }
        std::size_t best = 0;
        for (std::size_t s = 1; s < clean_alphabet; ++s) {
            if (votes[s] > votes[best]) best = s;
        }
        rule[index] = static_cast<Symbol>(best);
    }
    return rule;
}

DenoiserPair make_bec_parity_pair() {
    return {std::make_shared<BecParityDenoiser>(1), std::make_shared<BecParityDenoiser>(2)};
}

DenoiserPair make_bsc_counterexample_pair(double delta) {
    return {std::make_shared<BscCounterexampleDenoiser>(delta, 1),
            std::make_shared<BscCounterexampleDenoiser>(delta, 2)};
}

DenoiserPtr denoiser_from_json(const nlohmann::json& j, const Channel& channel) {
    using detail::reject_unknown_keys;
    const std::string what = "denoiser";
    const std::string type = detail::string_at(j, "type", what);
    const std::size_t noisy = channel.output_size();
    const std::size_t clean = channel.input_size();
    if (type == "identity") {
        reject_unknown_keys(j, {"type"}, what);
        return make_identity(noisy, clean);
    }
    if (type == "constant") {
        reject_unknown_keys(j, {"type", "symbol"}, what);
        const std::size_t s = detail::count_at(j, "symbol", what);
        if (s >= clean) throw ValidationError("denoiser: constant symbol outside clean alphabet");
        return make_constant(noisy, clean, static_cast<Symbol>(s));
    }
    if (type == "parity") {
        reject_unknown_keys(j, {"type"}, what);
        if (!channel.is_binary()) throw ValidationError("denoiser: parity requires a binary channel");
        return make_parity(noisy);
    }
    if (type == "sliding_window") {
        reject_unknown_keys(j, {"type", "k", "rule"}, what);
        const std::size_t k = detail::count_at(j, "k", what);
        if (!j.contains("rule")) throw ValidationError("denoiser: sliding_window needs a 'rule'");
        const auto& rule = j.at("rule");
        if (rule.is_string()) {
            const std::string name = rule.get<std::string>();
            if (name == "majority") return make_sliding_window(k, majority_rule(k, noisy, clean), noisy, clean, name);
            if (name == "identity") {
                // Center digit of the window index, erasures to 0.
                std::size_t entries = 1;
                for (std::size_t w = 0; w < 2 * k + 1; ++w) entries *= noisy;
                std::size_t scale = 1;
                for (std::size_t w = 0; w < k; ++w) scale *= noisy;
                std::vector<Symbol> table(entries);
                for (std::size_t idx = 0; idx < entries; ++idx) {
                    const std::size_t center = (idx / scale) % noisy;
                    table[idx] = static_cast<Symbol>(center < clean ? center : 0);
                }
                return make_sliding_window(k, std::move(table), noisy, clean, name);
            }
            throw ValidationError("denoiser: unknown sliding_window rule '" + name + "'");
        }
        if (!rule.is_array()) throw ValidationError("denoiser: 'rule' must be a name or an array");
        std::vector<Symbol> table;
        for (const auto& v : rule) {
            if (!v.is_number_integer() || v.get<long long>() < 0 || v.get<long long>() > 255) {
                throw ValidationError("denoiser: rule entries must be symbols");
            }
            table.push_back(static_cast<Symbol>(v.get<int>()));
        }
        return make_sliding_window(k, std::move(table), noisy, clean);
    }
    if (type == "bec_parity") {
        reject_unknown_keys(j, {"type", "variant"}, what);
        if (!channel.is_erasure()) throw ValidationError("denoiser: bec_parity requires an erasure channel");
        const int v = variant_at(j, what);
        const auto pair = make_bec_parity_pair();
        return v == 1 ? pair.first : pair.second;
    }
    if (type == "bsc_counterexample") {
        reject_unknown_keys(j, {"type", "delta", "variant"}, what);
        if (!channel.is_binary()) throw ValidationError("denoiser: bsc_counterexample requires a binary channel");
        const int v = variant_at(j, what);
        return std::make_shared<BscCounterexampleDenoiser>(detail::number_at(j, "delta", what), v);
    }
    throw ValidationError("denoiser: unknown type '" + type + "'");
}

DenoiserPair denoiser_pair_from_json(const nlohmann::json& j, const Channel& channel) {
    if (j.is_array()) {
        if (j.size() != 2) throw ValidationError("denoisers: expected exactly two specs");
        return {denoiser_from_json(j[0], channel), denoiser_from_json(j[1], channel)};
    }
    const std::string what = "denoisers";
    const std::string type = detail::string_at(j, "type", what);
    if (type == "bec_parity_pair") {
        detail::reject_unknown_keys(j, {"type"}, what);
        if (!channel.is_erasure()) throw ValidationError("denoisers: bec_parity_pair requires an erasure channel");
        return make_bec_parity_pair();
    }
    if (type == "bsc_counterexample_pair") {
        detail::reject_unknown_keys(j, {"type", "delta"}, what);
        if (!channel.is_binary()) throw ValidationError("denoisers: bsc_counterexample_pair requires a binary channel");
        return make_bsc_counterexample_pair(detail::number_at(j, "delta", what));
    }
    throw ValidationError("denoisers: unknown pair type '" + type + "' (use a pair type or a two-element array)");
}

}  // namespace duo
