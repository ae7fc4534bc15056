#pragma once

#include <cstdint>
#include <random>
#include <initializer_list>

namespace qrebal {

/// SplitMix64 finaliser; used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Derive a child seed from a master seed and a path of stream ids.
/// Streams with different paths are statistically independent, and a
/// stream's values never depend on how many other streams were drawn.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t s = splitmix64(master);
    for (std::uint64_t id : path) {
        s = splitmix64(s ^ splitmix64(id + 0x632BE59BD9B4E019ULL));
    }
    return s;
}

/// Deterministic random source.
///
/// The standard distributions are implementation-defined, so uniform and
/// normal variates are generated here from raw engine output. That keeps
/// golden outputs identical across standard libraries.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer on [0, n).
    std::uint64_t below(std::uint64_t n) {
        // Lemire-style rejection keeps this unbiased.
        const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    /// Standard normal via Box-Muller; the second variate is cached.
    double normal();

    bool bernoulli(double p) { return uniform() < p; }

  private:
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace qrebal
