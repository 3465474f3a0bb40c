#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "aida/errors.hpp"
#include "aida/rng.hpp"

namespace aida {

struct SubspaceQuery {
    std::size_t d = 1;      // feature count
    std::size_t r = 1;      // hidden subspace size
    std::size_t h_max = 1;  // maximum tree depth

    void validate() const {
        if (r < 1 || r > d) throw ConfigError("subspace size must satisfy 1 <= r <= d");
        if (h_max < 1) throw ConfigError("tree depth must be at least 1");
    }
};

// Probability that h_max uniform feature draws cover all r designated
// features:
//   p(1, h) = 1 - (1 - 1/d)^h
//   p(r, h) = (r/d) * sum_{i=1..h} (1 - r/d)^(i-1) p(r-1, h-i)
// filled bottom-up over r.
inline double hidden_subspace_probability(const SubspaceQuery& q) {
    q.validate();
    const auto d = static_cast<double>(q.d);
    std::vector<double> prev(q.h_max + 1), cur(q.h_max + 1);
    for (std::size_t h = 0; h <= q.h_max; ++h)
        prev[h] = 1.0 - std::pow(1.0 - 1.0 / d, static_cast<double>(h));
    for (std::size_t r = 2; r <= q.r; ++r) {
        const double hit = static_cast<double>(r) / d;
        const double miss = 1.0 - hit;
        cur[0] = 0.0;
        for (std::size_t h = 1; h <= q.h_max; ++h) {
            double sum = 0.0;
            double miss_pow = 1.0;  // miss^(i-1)
            for (std::size_t i = 1; i <= h; ++i) {
                sum += miss_pow * prev[h - i];
                miss_pow *= miss;
            }
            cur[h] = std::min(hit * sum, 1.0);  // rounding can overshoot by an ulp
        }
        std::swap(prev, cur);
    }
    return prev[q.h_max];
}

// Monte Carlo oracle: draw h_max i.i.d. uniform feature indices and count
// the trials in which all r designated features appear (the first r, by
// symmetry).
inline double simulate_subspace_hit(const SubspaceQuery& q, std::size_t trials, std::uint64_t seed) {
    q.validate();
    if (trials < 1) throw ConfigError("need at least one trial");
    Rng rng(seed);
    std::vector<std::uint8_t> seen(q.r);
    std::size_t hits = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        std::fill(seen.begin(), seen.end(), 0);
        std::size_t found = 0;
        for (std::size_t step = 0; step < q.h_max && found < q.r; ++step) {
            const std::size_t f = rng.index(q.d);
            if (f < q.r && !seen[f]) {
                seen[f] = 1;
                ++found;
            }
        }
        if (found == q.r) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(trials);
}

struct DecayRow {
    std::size_t d = 0;
    double probability = 0.0;
    double scaled = 0.0;  // probability * d^r
};

struct DecayCheck {
    std::vector<DecayRow> rows;
    double last_ratio = 0.0;  // scaled[last] / scaled[last-1]
    bool converged = false;   // last successive ratio within 5% of 1
};

// p(r, h) * d^r along increasing d: bounded with successive ratios tending
// to 1 when the probability decays as d^(-r).
inline DecayCheck decay_rate_check(std::size_t r, std::size_t h_max,
                                   const std::vector<std::size_t>& d_list) {
    if (d_list.empty()) throw ConfigError("need at least one dimensionality");
    DecayCheck out;
    for (std::size_t i = 0; i < d_list.size(); ++i) {
        if (d_list[i] < r) throw ConfigError("every d must be at least r");
        if (i > 0 && d_list[i] <= d_list[i - 1]) throw ConfigError("d_list must be increasing");
        const double p = hidden_subspace_probability({d_list[i], r, h_max});
        out.rows.push_back({d_list[i], p, p * std::pow(static_cast<double>(d_list[i]), static_cast<double>(r))});
    }
    if (out.rows.size() > 1) {
        const double a = out.rows[out.rows.size() - 2].scaled;
        const double b = out.rows.back().scaled;
        out.last_ratio = a == 0.0 ? (b == 0.0 ? 1.0 : std::numeric_limits<double>::infinity()) : b / a;
        out.converged = std::abs(out.last_ratio - 1.0) <= 0.05;
    } else {
        out.last_ratio = 1.0;
        out.converged = true;
    }
    return out;
}

}  // namespace aida
