#pragma once

#include <cstdint>
#include <vector>

namespace mcbn {

// xoshiro256** seeded through splitmix64 over (seed, stream_id). Fully
// specified here so identical (seed, stream_id) reproduces the same draw
// sequence on any platform. Single-owner mutable state: parallel callers use
// distinct stream ids, never a shared instance.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

    std::uint64_t next_u64();

    // Uniform on [0, 1), 53-bit resolution.
    double next_double();

    // Standard normal via Box-Muller; the paired value is cached.
    double next_gaussian();

    // Uniform integer on [0, n), rejection sampling (no modulo bias).
    std::uint64_t next_below(std::uint64_t n);

    // Fisher-Yates permutation of 0..n-1.
    std::vector<std::size_t> permutation(std::size_t n);

    // k distinct indices from 0..n-1 (partial Fisher-Yates), sorted
    // ascending. Sorting fixes a canonical order so consumers that are
    // mathematically order-free are order-free in floating point too.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

private:
    std::uint64_t s_[4];
    std::uint64_t seed_ = 0;
    std::uint64_t stream_id_ = 0;
    double cached_gaussian_ = 0.0;
    bool has_cached_gaussian_ = false;
};

}  // namespace mcbn
