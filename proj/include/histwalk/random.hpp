#pragma once

#include <array>
#include <cstdint>
#include <random>

namespace histwalk {

/// SplitMix64 finalizer. Used only to derive well-separated seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed of the child stream `index` of `master`. Order-independent: every
/// replica can derive its own stream without touching any other.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return mix64(mix64(master) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

/// Deterministic random source owned by exactly one worker.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) { reseed(seed); }
    RandomStream(std::uint64_t master, std::uint64_t index) : RandomStream(derive_seed(master, index)) {}

    void reseed(std::uint64_t seed) {
        base_ = seed;
        std::array<std::uint32_t, 4> words{};
        std::uint64_t s = seed;
        for (std::size_t k = 0; k < words.size(); k += 2) {
            s = mix64(s);
            words[k] = static_cast<std::uint32_t>(s);
            words[k + 1] = static_cast<std::uint32_t>(s >> 32);
        }
        std::seed_seq seq(words.begin(), words.end());
        engine_.seed(seq);
        normal_.reset();
    }

    /// Child stream for sub-task `index`; does not advance this stream.
    [[nodiscard]] RandomStream split(std::uint64_t index) const { return RandomStream(derive_seed(base_, index)); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Standard normal.
    double normal() { return normal_(engine_); }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uint64_t base_ = 0;
};

} // namespace histwalk
