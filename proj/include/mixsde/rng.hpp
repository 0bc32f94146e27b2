#pragma once

// Reproducible random streams.
//
// Every stream is keyed by (master seed, path index, stream id). The key is
// hashed through SplitMix64 finalizers into the 64-bit seed of an
// std::mt19937_64 engine, so ensembles can be generated in any order and on
// any number of threads with identical results.

#include <cstdint>
#include <random>

namespace mixsde {

/// Stream ids used by the noise generators.
enum class Stream : std::uint64_t {
    Wiener = 1,
    Fractional = 2,
    Oracle = 3,
    Synthetic = 4,
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t path, std::uint64_t stream) noexcept {
    return mix64(mix64(mix64(master) ^ path) ^ (stream * 0xd1b54a32d192ed03ULL));
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t path, Stream stream) noexcept {
    return derive_seed(master, path, static_cast<std::uint64_t>(stream));
}

class Rng {
public:
    using result_type = std::mt19937_64::result_type;

    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    Rng(std::uint64_t master, std::uint64_t path, Stream stream)
        : engine_(derive_seed(master, path, static_cast<std::uint64_t>(stream))) {}

    static constexpr result_type min() { return std::mt19937_64::min(); }
    static constexpr result_type max() { return std::mt19937_64::max(); }
    result_type operator()() { return engine_(); }

    double normal() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace mixsde
