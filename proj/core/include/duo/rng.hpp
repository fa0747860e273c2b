#pragma once

#include <array>
#include <cstdint>

namespace duo {

/// SplitMix64 finalizer; used to derive keys and stream ids.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Philox4x32-10 counter-based generator addressed by (master_seed, stream_id).
///
/// The key is derived from the master seed; the 128-bit counter is split into
/// the stream id (high half) and a draw index (low half). Streams with the same
/// pair replay identical draws, and streams with different ids occupy disjoint
/// counter ranges. Only integer arithmetic is involved, so output is identical
/// on every platform.
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_id);

    std::uint64_t master_seed() const { return master_seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    /// Independent child stream; the same tag always yields the same child.
    RngStream derive(std::uint64_t tag) const;

    std::uint64_t next_u64();
    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    bool bernoulli(double p) { return uniform() < p; }

private:
    void refill();

    std::uint64_t master_seed_;
    std::uint64_t stream_id_;
    std::array<std::uint32_t, 2> key_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int used_ = 4;
};

/// Philox4x32-10 block function, exposed for known-answer tests.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

}  // namespace duo
