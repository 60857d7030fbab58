#pragma once

#include <cstdint>
#include <cstddef>
#include <vector>

namespace gari {

// SplitMix64 finalizer. Full-avalanche: every input bit affects every
// output bit, so nearby (base, salt) pairs give unrelated streams.
constexpr std::uint64_t avalanche64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
}

// Derives an independent stream seed from a base seed and a salt.
// salt is offset by 1 so mix_seed(s, 0) != avalanche64(s).
constexpr std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
    return avalanche64(base + 0x9e3779b97f4a7c15ull * (salt + 1));
}

// xoshiro256** 1.0 (Blackman & Vigna, public domain reference
// implementation), state expanded from the seed with SplitMix64.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) {
            sm += 0x9e3779b97f4a7c15ull;
            word = avalanche64(sm);
        }
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Unbiased draw in [0, n) by masked rejection; n must be > 0.
    std::uint64_t next_below(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t mask = mask_for(n - 1);
        std::uint64_t draw;
        do {
            draw = next() & mask;
        } while (draw >= n);
        return draw;
    }

    // Uniform double in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    // In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    // Smallest all-ones mask covering x.
    static constexpr std::uint64_t mask_for(std::uint64_t x) {
        std::uint64_t m = x;
        m |= m >> 1;
        m |= m >> 2;
        m |= m >> 4;
        m |= m >> 8;
        m |= m >> 16;
        m |= m >> 32;
        return m;
    }

    std::uint64_t state_[4];
};

} // namespace gari
