#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace recokit {

/// splitmix64 finalizer. Good avalanche, cheap, and stable across platforms.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives an independent stream seed from a base seed and a stream key.
/// Used for per-group, per-trial, and per-axis RNG streams.
constexpr std::uint64_t mix_seed(std::uint64_t base, std::uint64_t key) {
    return splitmix64(splitmix64(base) ^ (key + 0x9e3779b97f4a7c15ULL));
}

/// FNV-1a over bytes. std::hash is implementation-defined, so string-keyed
/// streams and config hashes go through this instead.
constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// 16-digit lowercase hex, zero-padded.
inline std::string to_hex(std::uint64_t v) {
    static const char* kDigits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = kDigits[v & 0xf];
        v >>= 4;
    }
    return out;
}

/**
 * Deterministic random stream.
 *
 * Wraps mt19937_64 (whose raw output sequence is pinned by the standard) and
 * derives bounded integers, uniforms, and normals with explicit arithmetic.
 * The distribution adapters in <random> are implementation-defined and would
 * break reproducibility between standard libraries, so none are used here.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Unbiased draw from [0, n). Rejection-samples the top partial block.
    std::uint64_t bounded(std::uint64_t n) {
        const std::uint64_t rem = (std::uint64_t(0) - n) % n;  // 2^64 mod n
        std::uint64_t r = gen_();
        if (rem != 0) {
            const std::uint64_t limit = std::uint64_t(0) - rem;  // largest multiple of n
            while (r >= limit) r = gen_();
        }
        return r % n;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return double(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal via the Marsaglia polar method (no trig calls).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

    /// In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(bounded(i));
            std::swap(values[i - 1], values[j]);
        }
    }

private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace recokit
