#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "aida/errors.hpp"
#include "aida/metric.hpp"
#include "aida/rng.hpp"

namespace aida {

enum class ScoreFn { Expectation, Variance };
enum class AlphaMode { Fixed, Uniform };

// Gap weights are g(z_i, z_{i+1}) = (z_{i+1} - z_i)^alpha. Uniform mode draws
// one alpha per ensemble member at fit time.
struct ScoreConfig {
    ScoreFn fn = ScoreFn::Variance;
    AlphaMode alpha_mode = AlphaMode::Fixed;
    double alpha = 1.0;
    double alpha_min = 0.5;
    double alpha_max = 1.5;

    void validate() const {
        if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
        if (alpha_mode == AlphaMode::Uniform && !(0.0 < alpha_min && alpha_min <= alpha_max))
            throw ConfigError("alpha range must satisfy 0 < alpha_min <= alpha_max");
    }

    double max_increment() const { return fn == ScoreFn::Expectation ? 1.0 : 0.25; }
};

struct SplitStats {
    double mean = 0.0;
    double variance = 0.0;
    std::size_t trials = 0;
};

namespace detail {

constexpr double kMinGap = 1e-300;  // below this, (gap)^alpha is treated as 0

inline long double gap_weight(double gap, double alpha) {
    if (gap < kMinGap) return 0.0L;
    return alpha == 1.0 ? static_cast<long double>(gap)
                        : static_cast<long double>(std::pow(gap, alpha));
}

// Sorted, with a strictly positive first gap; interior ties are allowed and
// contribute zero-weight intervals.
inline void check_sorted(std::span<const double> z) {
    if (z.size() < 2) throw ConfigError("split statistics need at least two points");
    for (std::size_t i = 1; i < z.size(); ++i)
        if (z[i] < z[i - 1]) throw DataError("input vector is not sorted");
    if (!(z[1] - z[0] >= kMinGap))
        throw DataError("values equal to the left-fringe point must be stripped first");
}

// E[h] - 1 and V[h] in one pass; h is a sum of independent Bernoulli splits
// with q_i = g_i / G_{i+1}, so both statistics accumulate per interval.
inline void split_moments(std::span<const double> z, double alpha, long double& mean_tail,
                          long double& variance) {
    mean_tail = 0.0L;
    variance = 0.0L;
    long double total = gap_weight(z[1] - z[0], alpha);
    for (std::size_t i = 1; i + 1 < z.size(); ++i) {
        const long double g = gap_weight(z[i + 1] - z[i], alpha);
        total += g;
        if (g == 0.0L) continue;
        const long double q = g / total;
        mean_tail += q;
        variance += q * (1.0L - q);
    }
}

}  // namespace detail

// Moment generating function of the split count h at argument u,
// prod_i (e^u g_i + G_i) / G_{i+1} accumulated left to right.
inline double split_mgf(std::span<const double> z, double u, double alpha) {
    detail::check_sorted(z);
    const long double eu = std::exp(static_cast<long double>(u));
    long double prod = 1.0L;
    long double before = 0.0L;  // G_i: weight mass left of interval i
    for (std::size_t i = 0; i + 1 < z.size(); ++i) {
        const long double g = detail::gap_weight(z[i + 1] - z[i], alpha);
        const long double after = before + g;
        prod *= (eu * g + before) / after;
        before = after;
    }
    return static_cast<double>(prod);
}

// 1 + sum_{i=2}^{n-1} g_i / G_{i+1}
inline double expected_splits(std::span<const double> z, double alpha) {
    detail::check_sorted(z);
    long double mean_tail, variance;
    detail::split_moments(z, alpha, mean_tail, variance);
    return static_cast<double>(1.0L + mean_tail);
}

// sum_{i=2}^{n-1} q_i (1 - q_i)
inline double variance_splits(std::span<const double> z, double alpha) {
    detail::check_sorted(z);
    long double mean_tail, variance;
    detail::split_moments(z, alpha, mean_tail, variance);
    return static_cast<double>(variance);
}

struct IsolationScore {
    double score = 0.0;
    bool degenerate = false;  // profile had no positive distances to split
};

// Score a batch of sorted distances (the profile without its leading zero).
// Sample points at distance exactly zero cannot be isolated from the query;
// each one adds the maximum per-observation increment (+1 for the
// expectation, +0.25 for the variance) before negation, so outliers score
// higher.
inline IsolationScore score_sorted_distances(std::span<const double> sorted, ScoreFn fn, double alpha) {
    std::size_t duplicates = 0;
    while (duplicates < sorted.size() && sorted[duplicates] == 0.0) ++duplicates;
    const double penalty = (fn == ScoreFn::Expectation ? 1.0 : 0.25) * static_cast<double>(duplicates);

    const std::size_t tail = sorted.size() - duplicates;
    if (tail == 0) return {-penalty, true};

    long double mean_tail, variance;
    long double total = detail::gap_weight(sorted[duplicates], alpha);  // first gap: 0 -> first positive
    mean_tail = 0.0L;
    variance = 0.0L;
    for (std::size_t i = duplicates; i + 1 < sorted.size(); ++i) {
        const long double g = detail::gap_weight(sorted[i + 1] - sorted[i], alpha);
        total += g;
        if (g == 0.0L) continue;
        const long double q = g / total;
        mean_tail += q;
        variance += q * (1.0L - q);
    }
    const double stat = fn == ScoreFn::Expectation ? static_cast<double>(1.0L + mean_tail)
                                                   : static_cast<double>(variance);
    return {-(stat + penalty), false};
}

inline IsolationScore isolation_score(const DistanceProfile& profile, ScoreFn fn, double alpha) {
    if (profile.distances.empty() || profile.distances[0] != 0.0)
        throw DataError("distance profile must start at 0");
    return score_sorted_distances({profile.distances.data() + 1, profile.distances.size() - 1}, fn,
                                  alpha);
}

inline IsolationScore isolation_score(const DistanceProfile& profile, const ScoreConfig& cfg) {
    return isolation_score(profile, cfg.fn, cfg.alpha);
}

// Monte Carlo realization of the split process: repeatedly split the current
// interval chain with probability proportional to (gap)^alpha, keep the
// piece containing z_1, count splits until it is alone.
inline SplitStats simulate_splits(std::span<const double> z, double alpha, std::size_t trials,
                                  std::uint64_t seed) {
    detail::check_sorted(z);
    if (trials < 1) throw ConfigError("simulate_splits needs at least one trial");
    const std::size_t n_intervals = z.size() - 1;
    std::vector<double> cum(n_intervals);
    long double acc = 0.0L;
    for (std::size_t i = 0; i < n_intervals; ++i) {
        acc += detail::gap_weight(z[i + 1] - z[i], alpha);
        cum[i] = static_cast<double>(acc);
    }

    Rng rng(seed);
    long double sum = 0.0L, sum_sq = 0.0L;
    for (std::size_t t = 0; t < trials; ++t) {
        std::size_t m = n_intervals;
        std::uint64_t h = 0;
        for (;;) {
            ++h;
            const double u = rng.uniform() * cum[m - 1];
            std::size_t k = static_cast<std::size_t>(
                std::upper_bound(cum.begin(), cum.begin() + static_cast<std::ptrdiff_t>(m), u) -
                cum.begin());
            k = std::min(k, m - 1);  // guard the u == cum[m-1] rounding edge
            if (k == 0) break;       // split fell in the first interval: z_1 isolated
            m = k;
        }
        const auto hd = static_cast<long double>(h);
        sum += hd;
        sum_sq += hd * hd;
    }
    SplitStats out;
    out.trials = trials;
    const auto t = static_cast<long double>(trials);
    out.mean = static_cast<double>(sum / t);
    out.variance =
        trials > 1 ? static_cast<double>((sum_sq - sum * sum / t) / (t - 1.0L)) : 0.0;
    return out;
}

}  // namespace aida
