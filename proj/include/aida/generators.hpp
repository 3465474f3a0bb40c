#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "aida/dataset.hpp"
#include "aida/errors.hpp"
#include "aida/rng.hpp"

namespace aida {

enum class GeneratorKind { TwoClusters2d, Cross, HiddenSubspace };

struct SubspaceSpec {
    std::vector<std::size_t> features;  // 2..5 distinct feature indices
    std::size_t outliers = 0;           // rows deviating inside this subspace
};

struct GeneratorSpec {
    GeneratorKind kind = GeneratorKind::TwoClusters2d;
    std::size_t n = 1000;
    std::size_t d = 2;
    std::vector<SubspaceSpec> subspaces;  // hidden_subspace only
    std::uint64_t seed = 0;
};

// Which rows were planted as outliers and which features make each of them
// anomalous.
struct GroundTruth {
    std::vector<std::size_t> outlier_rows;
    std::vector<std::vector<std::size_t>> relevant_features;  // parallel to outlier_rows
};

struct GeneratedData {
    Dataset data;
    GroundTruth truth;
};

namespace detail {

inline void default_feature_names(Dataset& ds) {
    ds.feature_names.clear();
    for (std::size_t f = 0; f < ds.d_num; ++f) ds.feature_names.push_back("f" + std::to_string(f));
}

// Two dense clusters of unequal size plus ~1% sparse points scattered well
// clear of both. Cluster samples are truncated at 3 sigma so the planted
// sparse points stay isolated.
inline GeneratedData gen_two_clusters(const GeneratorSpec& spec) {
    constexpr double kCenterA[2] = {-2.0, 0.0};
    constexpr double kCenterB[2] = {2.0, 0.5};
    constexpr double kSigmaA = 0.6;
    constexpr double kSigmaB = 0.35;
    constexpr double kTruncSigmas = 3.0;
    constexpr double kExclusionSigmas = 4.5;
    constexpr double kBoxX = 5.5;
    constexpr double kBoxY = 4.5;

    if (spec.d != 2) throw ConfigError("two_clusters_2d is two-dimensional; set d = 2");
    const std::size_t n = spec.n;
    const std::size_t n_out = std::max<std::size_t>(4, (n + 50) / 100);
    if (n_out * 4 > n) throw ConfigError("two_clusters_2d needs n >= 16");
    const std::size_t n_a = (n - n_out) * 2 / 3;
    const std::size_t n_b = n - n_out - n_a;

    Dataset ds;
    ds.n = n;
    ds.d_num = 2;
    ds.numeric.resize(n * 2);
    ds.labels.assign(n, 0);
    default_feature_names(ds);

    Rng rng(derive_seed(spec.seed, 0xc1a5ULL));
    auto truncated_normal = [&](double center, double sigma) {
        for (;;) {
            const double z = rng.normal();
            if (std::abs(z) <= kTruncSigmas) return center + sigma * z;
        }
    };
    GroundTruth truth;
    for (std::size_t i = 0; i < n; ++i) {
        double x = 0.0, y = 0.0;
        if (i < n_a) {
            x = truncated_normal(kCenterA[0], kSigmaA);
            y = truncated_normal(kCenterA[1], kSigmaA);
        } else if (i < n_a + n_b) {
            x = truncated_normal(kCenterB[0], kSigmaB);
            y = truncated_normal(kCenterB[1], kSigmaB);
        } else {
            for (;;) {
                x = rng.uniform(-kBoxX, kBoxX);
                y = rng.uniform(-kBoxY, kBoxY);
                const double da = std::hypot(x - kCenterA[0], y - kCenterA[1]);
                const double db = std::hypot(x - kCenterB[0], y - kCenterB[1]);
                if (da > kExclusionSigmas * kSigmaA && db > kExclusionSigmas * kSigmaB) break;
            }
            ds.labels[i] = 1;
            truth.outlier_rows.push_back(i);
            truth.relevant_features.push_back({0, 1});
        }
        ds.num(i, 0) = x;
        ds.num(i, 1) = y;
    }
    return {std::move(ds), std::move(truth)};
}

// Inliers sit on two thin axis-aligned bars crossing at the origin in the
// last two features and are uniform elsewhere. The single outlier sits at
// the center of the upper-right quadrant: typical in either bar feature
// alone, isolated in their combination. The arms span several times the
// unit scale of the irrelevant features, so the quadrant gap stays visible
// against a moderate number of noise coordinates.
inline GeneratedData gen_cross(const GeneratorSpec& spec) {
    constexpr double kBarHalfLength = 2.0;
    constexpr double kBarHalfWidth = 0.02;
    constexpr double kOutlierCoord = 1.0;  // quadrant center, half the arm length

    const std::size_t n = spec.n;
    const std::size_t d = spec.d;
    if (d < 2) throw ConfigError("cross requires d >= 2");
    if (n < 10) throw ConfigError("cross requires n >= 10");

    Dataset ds;
    ds.n = n;
    ds.d_num = d;
    ds.numeric.resize(n * d);
    ds.labels.assign(n, 0);
    default_feature_names(ds);

    Rng rng(derive_seed(spec.seed, 0xc805ULL));
    const std::size_t outlier_row = rng.index(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t f = 0; f + 2 < d; ++f) ds.num(i, f) = rng.uniform();
        double x, y;
        if (i == outlier_row) {
            x = kOutlierCoord;
            y = kOutlierCoord;
        } else if (rng.uniform() < 0.5) {
            x = rng.uniform(-kBarHalfLength, kBarHalfLength);
            y = rng.uniform(-kBarHalfWidth, kBarHalfWidth);
        } else {
            x = rng.uniform(-kBarHalfWidth, kBarHalfWidth);
            y = rng.uniform(-kBarHalfLength, kBarHalfLength);
        }
        ds.num(i, d - 2) = x;
        ds.num(i, d - 1) = y;
    }
    ds.labels[outlier_row] = 1;
    GroundTruth truth;
    truth.outlier_rows.push_back(outlier_row);
    truth.relevant_features.push_back({d - 2, d - 1});
    return {std::move(ds), std::move(truth)};
}

// Inside each declared subspace the leading features take values on a
// uniform grid and the last feature tracks their mean plus noise. Outlier
// rows break that dependency from the tails: their leading features sit
// together in one tail while the dependent feature sits in the opposite
// one, so every single coordinate stays unremarkable while the subspace as
// a whole puts them far from all inliers. They stay on-pattern in every
// other declared subspace and undeclared features are uniform for everyone.
// The grid keeps nearest-neighbour spacings in the leading projections
// bounded away from zero, which keeps profile diagnostics over growing
// feature prefixes readable.
inline GeneratedData gen_hidden_subspace(const GeneratorSpec& spec) {
    constexpr std::size_t kLatentLevels = 41;
    constexpr std::size_t kTailLevels = 6;  // ~0.15 of the range
    constexpr double kNoiseSigma = 0.015;

    const std::size_t n = spec.n;
    const std::size_t d = spec.d;
    if (spec.subspaces.empty()) throw ConfigError("hidden_subspace requires at least one subspace");
    std::vector<bool> used(d, false);
    std::size_t total_outliers = 0;
    for (const auto& s : spec.subspaces) {
        if (s.features.size() < 2 || s.features.size() > 5)
            throw ConfigError("subspace sizes must be in [2, 5]");
        for (std::size_t f : s.features) {
            if (f >= d) throw ConfigError("subspace feature index out of range: " + std::to_string(f));
            if (used[f]) throw ConfigError("subspaces must be disjoint");
            used[f] = true;
        }
        if (s.outliers == 0) throw ConfigError("each subspace needs at least one outlier");
        total_outliers += s.outliers;
    }
    if (total_outliers * 4 > n) throw ConfigError("too many outliers for n");

    Dataset ds;
    ds.n = n;
    ds.d_num = d;
    ds.numeric.resize(n * d);
    ds.labels.assign(n, 0);
    default_feature_names(ds);

    Rng rng(derive_seed(spec.seed, 0x41d5ULL));
    const auto grid = [&](std::size_t lo, std::size_t count) {
        return static_cast<double>(lo + rng.index(count)) / static_cast<double>(kLatentLevels);
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t f = 0; f < d; ++f) ds.num(i, f) = rng.uniform();
    for (const auto& s : spec.subspaces) {
        const std::size_t last = s.features.back();
        const auto leading = static_cast<double>(s.features.size() - 1);
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t t = 0; t + 1 < s.features.size(); ++t) {
                const double level = grid(0, kLatentLevels);
                ds.num(i, s.features[t]) = level;
                acc += level;
            }
            ds.num(i, last) = acc / leading + kNoiseSigma * rng.normal();
        }
    }

    GroundTruth truth;
    auto rows = rng.sample_without_replacement(n, total_outliers);
    std::size_t next = 0;
    for (const auto& s : spec.subspaces) {
        const std::size_t last = s.features.back();
        for (std::size_t o = 0; o < s.outliers; ++o) {
            const std::size_t row = rows[next++];
            const bool low_tail = rng.uniform() < 0.5;
            for (std::size_t t = 0; t + 1 < s.features.size(); ++t)
                ds.num(row, s.features[t]) =
                    grid(low_tail ? 0 : kLatentLevels - kTailLevels, kTailLevels);
            ds.num(row, last) = low_tail ? rng.uniform(0.85, 0.97) : rng.uniform(0.03, 0.15);
            ds.labels[row] = 1;
            truth.outlier_rows.push_back(row);
            truth.relevant_features.push_back(s.features);
        }
    }
    return {std::move(ds), std::move(truth)};
}

}  // namespace detail

// Deterministic: identical specs (seed included) produce identical data.
inline GeneratedData generate(const GeneratorSpec& spec) {
    if (spec.n < 2) throw ConfigError("generator requires n >= 2");
    switch (spec.kind) {
        case GeneratorKind::TwoClusters2d: return detail::gen_two_clusters(spec);
        case GeneratorKind::Cross: return detail::gen_cross(spec);
        case GeneratorKind::HiddenSubspace: return detail::gen_hidden_subspace(spec);
    }
    throw ConfigError("unknown generator kind");
}

}  // namespace aida
