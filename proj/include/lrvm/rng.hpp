#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace lrvm {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}
}  // namespace detail

/// Deterministic random stream. All simulation code draws through this
/// wrapper so that a (seed, label) pair pins every output bit.
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t bits() { return eng_(); }

    /// uniform in [0,1)
    double uniform() { return double(eng_() >> 11) * 0x1.0p-53; }

    /// uniform in (0,1] (safe as log argument)
    double uniform_pos() { return double((eng_() >> 11) + 1) * 0x1.0p-53; }

    double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

    /// uniform integer in [0, n)
    std::uint64_t below(std::uint64_t n) {
        // Lemire-style rejection; unbiased.
        std::uint64_t x = eng_();
        __uint128_t m = static_cast<__uint128_t>(x) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            std::uint64_t t = -n % n;
            while (lo < t) {
                x = eng_();
                m = static_cast<__uint128_t>(x) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    bool bernoulli(double p) { return uniform() < p; }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

  private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0;
};

/// Label-keyed derivation of independent sub-streams from one master seed.
/// Identical (seed, label) gives an identical stream; the derivation mixes
/// the label hash through splitmix64 so distinct labels decorrelate.
inline RandomStream seed_stream(std::uint64_t master_seed, std::string_view label) {
    std::uint64_t h = detail::splitmix64(master_seed ^ detail::fnv1a(label));
    h = detail::splitmix64(h ^ 0x6a09e667f3bcc909ULL);
    return RandomStream(h);
}

inline RandomStream seed_stream(std::uint64_t master_seed, std::string_view label, std::uint64_t k) {
    std::uint64_t h = detail::splitmix64(master_seed ^ detail::fnv1a(label));
    h = detail::splitmix64(h ^ (0x9e3779b97f4a7c15ULL + k));
    return RandomStream(h);
}

}  // namespace lrvm
