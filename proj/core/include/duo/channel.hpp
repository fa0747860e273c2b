#pragma once

#include <cstddef>
#include <string>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "duo/rng.hpp"
#include "duo/sequence.hpp"

namespace duo {

enum class ChannelKind { bsc, bec, dmc };

/// Discrete memoryless channel with row-stochastic transition matrix pi
/// (clean symbol x K rows, noisy symbol x M columns). For erasure channels
/// the erasure is the last output symbol.
class Channel {
public:
    /// Validates a generic K x M transition matrix. Rows must sum to one
    /// within 1e-12; inputs are never renormalized.
    static Channel from_matrix(Eigen::MatrixXd pi);

    std::size_t input_size() const { return static_cast<std::size_t>(pi_.rows()); }
    std::size_t output_size() const { return static_cast<std::size_t>(pi_.cols()); }
    double operator()(std::size_t x, std::size_t z) const {
        return pi_(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(z));
    }
    const Eigen::MatrixXd& pi() const { return pi_; }
    ChannelKind kind() const { return kind_; }
    /// delta for a BSC, epsilon for a BEC, 0 otherwise.
    double parameter() const { return parameter_; }
    bool is_binary() const { return input_size() == 2 && output_size() == 2; }
    /// Structural check: pi == [[1-e, 0, e], [0, 1-e, e]] for some e in (0,1).
    bool is_erasure() const;
    Symbol erasure_symbol() const { return static_cast<Symbol>(output_size() - 1); }

private:
    Channel(Eigen::MatrixXd pi, ChannelKind kind, double parameter);
    friend Channel make_bsc(double);
    friend Channel make_bec(double);

    Eigen::MatrixXd pi_;
    ChannelKind kind_;
    double parameter_;
};

Channel make_bsc(double delta);
Channel make_bec(double epsilon);

/// Draws each output symbol by inverse CDF on one uniform per position,
/// accumulating the row in symbol order.
Sequence sample_output(const Channel& channel, std::span<const Symbol> x, RngStream& rng);

/// Dual matrix h satisfying sum_z pi(x,z) h(x',z) = 1(x = x').
struct HMatrix {
    Eigen::MatrixXd h;
    std::string method;  // "inverse", "min_norm" or "canonical"

    double operator()(std::size_t x, std::size_t z) const {
        return h(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(z));
    }
};

/// max over (x, x') of |(pi h^T)(x, x') - 1(x = x')|.
double h_residual(const Channel& channel, const HMatrix& h);

/// Transpose-inverse of pi when square, the minimum Frobenius norm solution
/// of pi h^T = I otherwise. Throws if pi is rank deficient.
HMatrix compute_h(const Channel& channel);

/// h(x,z) = 1(x = z) / (1 - epsilon), zero on the erasure column.
HMatrix canonical_erasure_h(const Channel& channel);

enum class HChoice { min_norm, canonical };
HChoice parse_h_choice(const std::string& name);
HMatrix make_h(const Channel& channel, HChoice choice);

/// {"type":"bsc","delta":..} | {"type":"bec","epsilon":..} | {"type":"dmc","pi":[[..]]}
Channel channel_from_json(const nlohmann::json& j);
nlohmann::json channel_to_json(const Channel& channel);

}  // namespace duo
