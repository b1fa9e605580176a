#pragma once

#include <cstdint>

namespace ehs {

/// SplitMix64 generator (Vigna's mixing constants). Counter-based: output i
/// is a pure function of (seed, i), so streams are bit-reproducible across
/// platforms and compilers. This is the only random source used by the
/// simulation code.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) built from the top 53 bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in {0, ..., n-1} for n >= 1. Multiply-shift mapping;
    /// the residual bias is below 2^-64 per draw.
    std::uint64_t next_below(std::uint64_t n) {
        const auto wide = static_cast<unsigned __int128>(next_u64()) * n;
        return static_cast<std::uint64_t>(wide >> 64);
    }

private:
    std::uint64_t state_;
};

/// Derives an independent stream seed from a base seed and a stream index,
/// so that parallel or repeated runs never share a sequence.
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) {
    SplitMix64 g(seed ^ (0x632be59bd9b4e019ull * (stream + 1)));
    g.next_u64();
    return g.next_u64();
}

}  // namespace ehs
