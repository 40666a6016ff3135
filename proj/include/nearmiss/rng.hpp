#ifndef NEARMISS_RNG_HPP
#define NEARMISS_RNG_HPP

#include <cstdint>
#include <string_view>

namespace nearmiss {

// SplitMix64 generator. The standard <random> engines are portable but the
// distributions are not; every random draw in this project goes through
// this type so that equal seeds give bit-equal results on any platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    // Uniform index in [0, n), n > 0. Multiply-shift; the bias is far below
    // anything observable at the catalog sizes used here.
    std::size_t uniform_index(std::size_t n) {
        return static_cast<std::size_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

private:
    std::uint64_t state_;
};

// FNV-1a over a string, used to fold textual ids into seed derivations.
inline std::uint64_t hash_str(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Deterministic seed derivation: children, perturbations, repetitions etc.
// all get independent streams keyed by (base, salt...).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
    Rng mix(base ^ (salt * 0x9e3779b97f4a7c15ULL + 0x7f4a7c15ULL));
    return mix.next_u64();
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
    return derive_seed(derive_seed(base, a), b);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b,
                                 std::uint64_t c) {
    return derive_seed(derive_seed(base, a, b), c);
}

} // namespace nearmiss

#endif
