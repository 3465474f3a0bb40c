#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace aida {

namespace detail {

// splitmix64, used to expand one seed into independent stream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace detail

// Derive a stream seed from a root seed and up to two stream indices.
// Used to give every (subsample, repetition) task its own reproducible
// generator, so parallel and serial execution draw identical numbers.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t s = root;
    std::uint64_t x = detail::splitmix64(s);
    s ^= a * 0x9e3779b97f4a7c15ULL;
    x ^= detail::splitmix64(s);
    s ^= b * 0xc2b2ae3d27d4eb4fULL;
    x ^= detail::splitmix64(s);
    return x;
}

// Deterministic generator: xoshiro-free, all transforms hand-rolled so that
// outputs do not depend on the standard library's distribution
// implementations. State evolution is splitmix64 over a 64-bit counter
// stream, which is more than enough for desk-scale statistical work.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ^ 0x5851f42d4c957f2dULL) {
        // burn-in so that small seeds decorrelate quickly
        next();
        next();
    }

    std::uint64_t next() { return detail::splitmix64(state_); }

    // uniform double in [0, 1)
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // uniform double in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [lo, hi] inclusive (multiply-shift; bias < 2^-53
    // for the desk-scale ranges used here)
    std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) {
        const std::uint64_t range = hi - lo + 1;
        const auto wide = static_cast<unsigned __int128>(next());
        return lo + static_cast<std::uint64_t>((wide * range) >> 64);
    }

    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>(uniform_int(0, static_cast<std::uint64_t>(n) - 1));
    }

    // standard normal via Box-Muller, one spare cached
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double ang = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(ang);
        has_spare_ = true;
        return r * std::cos(ang);
    }

    // Fisher-Yates shuffle
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    // k distinct indices from [0, n), in draw order
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
        std::vector<std::size_t> pool(n);
        for (std::size_t i = 0; i < n; ++i) pool[i] = i;
        std::vector<std::size_t> out;
        out.reserve(k);
        for (std::size_t i = 0; i < k; ++i) {
            std::size_t j = i + index(n - i);
            std::swap(pool[i], pool[j]);
            out.push_back(pool[i]);
        }
        return out;
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace aida
