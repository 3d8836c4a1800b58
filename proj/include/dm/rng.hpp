#ifndef DM_RNG_HPP
#define DM_RNG_HPP

#include <cstdint>
#include <random>
#include <vector>

namespace dm {

// Deterministic random stream. All draws go through explicit conversions of
// raw mt19937_64 output, so the same seed gives the same sequence on every
// platform (the distributions in <random> make no such promise).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform double in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform double in [lo, hi).
    double next_double(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    // Uniform integer in [0, bound); bound must be > 0.
    std::uint64_t next_below(std::uint64_t bound) {
        // multiply-shift; bias is < 2^-64 per draw which is irrelevant here
        unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * bound;
        return static_cast<std::uint64_t>(m >> 64);
    }

    bool bernoulli(double p) { return next_double() < p; }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // Derives an independent sub-seed for a named stream (fold index, epoch,
    // sweep entry, ...). splitmix64 finalizer over seed xor stream id.
    static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

private:
    std::mt19937_64 engine_;
};

} // namespace dm

#endif
