#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace lipfd {

/// Deterministic random source. All distributions are derived by hand from
/// the mt19937_64 stream so sequences are identical across standard library
/// implementations (std:: distributions are not pinned by the standard).
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [lo, hi] inclusive.
    int64_t uniform_int(int64_t lo, int64_t hi) {
        uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
        auto wide = static_cast<unsigned __int128>(next_u64());
        return lo + static_cast<int64_t>((wide * span) >> 64);
    }

    /// Standard normal via Box-Muller (one draw per call; no cached state).
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(uniform_int(0, static_cast<int64_t>(i) - 1));
            std::swap(v[i - 1], v[j]);
        }
    }

    /// k distinct values drawn uniformly from [0, n), in draw order.
    std::vector<int> sample_without_replacement(int n, int k);

    /// SplitMix64-style combiner for deriving child seeds.
    static uint64_t mix(uint64_t a, uint64_t b) {
        uint64_t z = a + 0x9e3779b97f4a7c15ULL + (b << 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// FNV-1a, used to fold string identifiers into seeds.
    static uint64_t hash_string(std::string_view s) {
        uint64_t h = 1469598103934665603ULL;
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ULL;
        }
        return h;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace lipfd
