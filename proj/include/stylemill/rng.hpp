#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "stylemill/errors.hpp"

namespace stylemill {

// Pinned, portable RNG so every seeded result is bit-reproducible across
// platforms and languages: xoshiro256** (Blackman & Vigna) seeded through
// splitmix64. std::mt19937 and std::uniform_* are deliberately avoided
// because their stream and distribution algorithms are not pinned by the
// standard.

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Independent stream derivation: hash (master, stream) through splitmix64.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t s = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
    return splitmix64_next(s);
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : state_) w = splitmix64_next(sm);
    }

    std::uint64_t next_u64() {
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

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Unbiased integer in [0, n) by rejection.
    std::uint64_t bounded(std::uint64_t n) {
        if (n == 0) throw NumericError("bounded(0) is undefined");
        const std::uint64_t threshold = (0ULL - n) % n;
        std::uint64_t r;
        do {
            r = next_u64();
        } while (r < threshold);
        return r % n;
    }

    // Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(bounded(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // Knuth's product-of-uniforms method, exact for any rate; O(lambda) time.
    // Rates above 500 are split using Poisson additivity to avoid exp underflow.
    std::uint64_t poisson(double lambda) {
        if (!(lambda >= 0.0)) throw NumericError("poisson rate must be non-negative");
        std::uint64_t total = 0;
        while (lambda > 500.0) {
            total += poisson_small(500.0);
            lambda -= 500.0;
        }
        return total + poisson_small(lambda);
    }

    // k distinct indices from [0, n), in random order.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
        if (k > n) throw NumericError("cannot sample more items than the population holds");
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        shuffle(idx);
        idx.resize(k);
        return idx;
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t poisson_small(double lambda) {
        const double limit = std::exp(-lambda);
        double p = 1.0;
        std::uint64_t k = 0;
        do {
            ++k;
            p *= uniform01();
        } while (p > limit);
        return k - 1;
    }

    std::uint64_t state_[4];
};

} // namespace stylemill
