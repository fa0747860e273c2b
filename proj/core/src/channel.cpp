#include "duo/channel.hpp"

#include <cmath>

#include "duo/error.hpp"
#include "json_util.hpp"

namespace duo {

namespace {

constexpr double kStochasticTolerance = 1e-12;
constexpr double kHTolerance = 1e-9;

void validate_stochastic(const Eigen::MatrixXd& pi) {
    if (pi.rows() < 2) throw ValidationError("channel: input alphabet must have at least 2 symbols");
    if (pi.cols() < pi.rows()) throw ValidationError("channel: output alphabet smaller than input alphabet");
    if (pi.cols() > 255) throw ValidationError("channel: output alphabet too large");
    for (Eigen::Index x = 0; x < pi.rows(); ++x) {
        for (Eigen::Index z = 0; z < pi.cols(); ++z) {
            const double p = pi(x, z);
            if (!(p >= 0.0 && p <= 1.0)) {
                throw ValidationError("channel: transition probability outside [0,1] at row " + std::to_string(x));
            }
        }
        if (std::fabs(pi.row(x).sum() - 1.0) > kStochasticTolerance) {
            throw ValidationError("channel: row " + std::to_string(x) + " does not sum to 1");
        }
    }
}

}  // namespace

Channel::Channel(Eigen::MatrixXd pi, ChannelKind kind, double parameter)
    : pi_(std::move(pi)), kind_(kind), parameter_(parameter) {
    validate_stochastic(pi_);
}

Channel Channel::from_matrix(Eigen::MatrixXd pi) {
    return Channel(std::move(pi), ChannelKind::dmc, 0.0);
}

bool Channel::is_erasure() const {
    if (input_size() != 2 || output_size() != 3) return false;
    const double eps = pi_(0, 2);
    return eps > 0.0 && eps < 1.0 && pi_(1, 2) == eps && pi_(0, 1) == 0.0 && pi_(1, 0) == 0.0 &&
           pi_(0, 0) == 1.0 - eps && pi_(1, 1) == 1.0 - eps;
}

Channel make_bsc(double delta) {
    if (delta == 0.5) throw ValidationError("make_bsc: degenerate channel (delta = 1/2)");
    if (!(delta > 0.0 && delta < 0.5)) throw ValidationError("make_bsc: delta must lie in (0, 1/2)");
    Eigen::MatrixXd pi(2, 2);
    pi << 1.0 - delta, delta, delta, 1.0 - delta;
    return Channel(std::move(pi), ChannelKind::bsc, delta);
}

Channel make_bec(double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("make_bec: epsilon must lie in (0, 1)");
    Eigen::MatrixXd pi(2, 3);
    pi << 1.0 - epsilon, 0.0, epsilon, 0.0, 1.0 - epsilon, epsilon;
    return Channel(std::move(pi), ChannelKind::bec, epsilon);
}

Sequence sample_output(const Channel& channel, std::span<const Symbol> x, RngStream& rng) {
    check_alphabet(x, channel.input_size(), "sample_output");
    const std::size_t m = channel.output_size();
    Sequence z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double u = rng.uniform();
        double cumulative = 0.0;
        std::size_t chosen = m;
        std::size_t last_positive = 0;
        for (std::size_t s = 0; s < m; ++s) {
            const double p = channel(x[i], s);
            if (p > 0.0) last_positive = s;
            cumulative += p;
            if (u < cumulative && p > 0.0) {
                chosen = s;
                break;
            }
        }
        // Row sums may fall a hair short of 1.
        z[i] = static_cast<Symbol>(chosen == m ? last_positive : chosen);
    }
    return z;
}

double h_residual(const Channel& channel, const HMatrix& h) {
    const Eigen::MatrixXd product = channel.pi() * h.h.transpose();
    const auto k = static_cast<Eigen::Index>(channel.input_size());
    return (product - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff();
}

HMatrix compute_h(const Channel& channel) {
    const Eigen::MatrixXd& pi = channel.pi();
    Eigen::FullPivLU<Eigen::MatrixXd> rank_probe(pi);
    if (rank_probe.rank() < pi.rows()) throw ValidationError("compute_h: no valid h exists (pi is rank deficient)");
    HMatrix out;
    if (pi.rows() == pi.cols()) {
        out.h = pi.inverse().transpose();
        out.method = "inverse";
    } else {
        // h^T = pi^T (pi pi^T)^{-1}, the least-norm solution of pi h^T = I.
        const Eigen::MatrixXd gram = pi * pi.transpose();
        out.h = gram.ldlt().solve(pi);
        out.method = "min_norm";
    }
    if (h_residual(channel, out) > kHTolerance) throw ValidationError("compute_h: solve is numerically unstable");
    return out;
}

HMatrix canonical_erasure_h(const Channel& channel) {
    if (!channel.is_erasure()) throw ValidationError("canonical_erasure_h: channel is not a binary erasure channel");
    const double keep = channel(0, 0);
    HMatrix out;
    out.h = Eigen::MatrixXd::Zero(2, 3);
    out.h(0, 0) = 1.0 / keep;
    out.h(1, 1) = 1.0 / keep;
    out.method = "canonical";
    return out;
}

HChoice parse_h_choice(const std::string& name) {
    if (name == "min_norm" || name == "inverse") return HChoice::min_norm;
    if (name == "canonical") return HChoice::canonical;
    throw ValidationError("unknown h choice '" + name + "' (expected min_norm or canonical)");
}

HMatrix make_h(const Channel& channel, HChoice choice) {
    return choice == HChoice::canonical ? canonical_erasure_h(channel) : compute_h(channel);
}

Channel channel_from_json(const nlohmann::json& j) {
    using detail::number_at;
    using detail::reject_unknown_keys;
    if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
        throw ValidationError("channel: expected an object with a string 'type'");
    }
    const std::string type = j.at("type");
    if (type == "bsc") {
        reject_unknown_keys(j, {"type", "delta"}, "channel");
        return make_bsc(number_at(j, "delta", "channel"));
    }
    if (type == "bec") {
        reject_unknown_keys(j, {"type", "epsilon"}, "channel");
        return make_bec(number_at(j, "epsilon", "channel"));
    }
    if (type == "dmc") {
        reject_unknown_keys(j, {"type", "pi"}, "channel");
        if (!j.contains("pi") || !j.at("pi").is_array() || j.at("pi").empty()) {
            throw ValidationError("channel: 'pi' must be a nonempty array of rows");
        }
        const auto& rows = j.at("pi");
        const std::size_t cols = rows.at(0).size();
        Eigen::MatrixXd pi(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (!rows[r].is_array() || rows[r].size() != cols) throw ValidationError("channel: ragged 'pi'");
            for (std::size_t c = 0; c < cols; ++c) {
                if (!rows[r][c].is_number()) throw ValidationError("channel: non-numeric entry in 'pi'");
                pi(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c].get<double>();
            }
        }
        return Channel::from_matrix(std::move(pi));
    }
    throw ValidationError("channel: unknown type '" + type + "'");
}

nlohmann::json channel_to_json(const Channel& channel) {
    switch (channel.kind()) {
    case ChannelKind::bsc:
        return {{"type", "bsc"}, {"delta", channel.parameter()}};
    case ChannelKind::bec:
        return {{"type", "bec"}, {"epsilon", channel.parameter()}};
    case ChannelKind::dmc:
        break;
    }
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index x = 0; x < channel.pi().rows(); ++x) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index z = 0; z < channel.pi().cols(); ++z) row.push_back(channel.pi()(x, z));
        rows.push_back(row);
    }
    return {{"type", "dmc"}, {"pi", rows}};
}

}  // namespace duo
