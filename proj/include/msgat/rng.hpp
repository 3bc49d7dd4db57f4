#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace msgat {

// splitmix64; used to derive independent per-subsystem streams from one root seed.
inline uint64_t split_seed(uint64_t seed, uint64_t stream) {
    uint64_t z = seed + stream * 0x9e3779b97f4a7c15ULL + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256** with self-contained sampling helpers, so that streams are
// bit-identical across platforms and standard library versions.
class Rng {
public:
    explicit Rng(uint64_t seed) {
        uint64_t s = seed;
        for (auto& w : state_) {
            s = split_seed(s, 0x1234abcdULL);
            w = s;
        }
        // avoid the all-zero state
        if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
    }

    uint64_t u64() {
        const uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // uniform in [0, 1)
    double real() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * real(); }

    // uniform integer in [0, n)
    int index(int n) { return n <= 1 ? 0 : static_cast<int>(real() * n); }

    double gaussian() {
        // Box-Muller; one value per call keeps replay simple.
        double u1 = real();
        double u2 = real();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    template <typename T>
    void shuffle(std::vector<T>& xs) {
        for (int i = static_cast<int>(xs.size()) - 1; i > 0; --i) {
            int j = index(i + 1);
            std::swap(xs[static_cast<size_t>(i)], xs[static_cast<size_t>(j)]);
        }
    }

    // k distinct indices from [0, n), order unspecified but deterministic
    std::vector<int> sample_without_replacement(int n, int k) {
        std::vector<int> pool(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) pool[static_cast<size_t>(i)] = i;
        for (int i = 0; i < k; ++i) {
            int j = i + index(n - i);
            std::swap(pool[static_cast<size_t>(i)], pool[static_cast<size_t>(j)]);
        }
        pool.resize(static_cast<size_t>(k));
        return pool;
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t state_[4];
};

}  // namespace msgat
