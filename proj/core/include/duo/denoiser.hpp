#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "duo/sequence.hpp"

namespace duo {

class Channel;

/// A denoiser applied to one fixed noisy sequence z. Besides the plain
/// outputs X(z)[i] it answers single-substitution queries X(z[j <- a])[i]
/// without re-running the denoiser on the whole sequence where the
/// denoiser's structure allows it.
class Evaluation {
public:
    explicit Evaluation(Sequence z) : z_(std::move(z)) {}
    virtual ~Evaluation() = default;
    Evaluation(const Evaluation&) = delete;
    Evaluation& operator=(const Evaluation&) = delete;

    std::span<const Symbol> noisy() const { return z_; }
    std::size_t size() const { return z_.size(); }

    /// X(z)[i]
    virtual Symbol output(std::size_t i) const = 0;
    /// X(z with position j replaced by a)[i]
    virtual Symbol output_after(std::size_t j, Symbol a, std::size_t i) const = 0;

    /// X(z[i <- a])[i]
    Symbol substituted(std::size_t i, Symbol a) const { return output_after(i, a, i); }

    /// out[i] = X(z[i <- a])[i] for every i.
    virtual void substituted_column(Symbol a, std::span<Symbol> out) const;
    /// out[i] = X(z)[i] for every i.
    virtual void outputs(std::span<Symbol> out) const;

protected:
    Sequence z_;
};

/// Block map from noisy sequences over {0..noisy_alphabet-1} to
/// reconstructions over {0..clean_alphabet-1}. Implementations are
/// immutable and deterministic.
class Denoiser {
public:
    virtual ~Denoiser() = default;

    std::size_t noisy_alphabet() const { return noisy_alphabet_; }
    std::size_t clean_alphabet() const { return clean_alphabet_; }

    virtual std::string name() const = 0;
    virtual nlohmann::json to_json() const = 0;

    /// Validates z and prepares substitution queries.
    std::unique_ptr<Evaluation> evaluate(std::span<const Symbol> z) const;
    Sequence denoise(std::span<const Symbol> z) const;
    /// X(z[i <- a])[i]
    Symbol denoise_substituted(std::span<const Symbol> z, std::size_t i, Symbol a) const;

protected:
    Denoiser(std::size_t noisy_alphabet, std::size_t clean_alphabet);
    virtual std::unique_ptr<Evaluation> make_evaluation(Sequence z) const = 0;

private:
    std::size_t noisy_alphabet_;
    std::size_t clean_alphabet_;
};

using DenoiserPtr = std::shared_ptr<const Denoiser>;
using DenoiserPair = std::pair<DenoiserPtr, DenoiserPtr>;

/// Copies z_i; symbols outside the clean alphabet (erasures) map to 0.
DenoiserPtr make_identity(std::size_t noisy_alphabet, std::size_t clean_alphabet);
DenoiserPtr make_constant(std::size_t noisy_alphabet, std::size_t clean_alphabet, Symbol symbol);

/// Every output equals (number of 1s in z) mod 2. Binary only.
DenoiserPtr make_parity(std::size_t noisy_alphabet = 2);

/// Window rule indexed by the base-`noisy_alphabet` number whose most
/// significant digit is z_{i-k}. Positions outside the sequence read as 0.
DenoiserPtr make_sliding_window(std::size_t k, std::vector<Symbol> rule, std::size_t noisy_alphabet,
                                std::size_t clean_alphabet, std::string rule_name = "table");

/// Most frequent clean symbol in the window (erasures ignored, ties to the
/// smaller symbol, 0 for an all-erased window).
std::vector<Symbol> majority_rule(std::size_t k, std::size_t noisy_alphabet, std::size_t clean_alphabet);

/// Binary erasure channel pair: at erased positions denoiser 1 emits the
/// parity of the number of 0s and denoiser 2 its complement; unerased symbols
/// are copied.
DenoiserPair make_bec_parity_pair();

/// BSC pair keyed on (number of 1s) mod 2. Even: both emit all zeros. Odd:
/// denoiser 1 copies z; denoiser 2 emits 0 where z_i = 1 and 1 at the first
/// floor(delta * N_0) zero positions of z.
DenoiserPair make_bsc_counterexample_pair(double delta);

/// {"type":"identity"} | {"type":"constant","symbol":s} | {"type":"parity"}
/// | {"type":"sliding_window","k":k,"rule":"majority"|"identity"|[..]}
/// Alphabets are taken from the channel.
DenoiserPtr denoiser_from_json(const nlohmann::json& j, const Channel& channel);

/// Pair specs ({"type":"bec_parity_pair"}, {"type":"bsc_counterexample_pair",
/// "delta":d}) or a two-element array of single specs.
DenoiserPair denoiser_pair_from_json(const nlohmann::json& j, const Channel& channel);

}  // namespace duo
