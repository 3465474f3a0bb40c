#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "aida/dataset.hpp"
#include "aida/errors.hpp"

namespace aida {

// Features are indexed globally: [0, d_num) numeric, [d_num, d_num + d_nom)
// nominal. active_features selects the subspace that contributes to
// distances; weights stay per-feature.
struct MetricConfig {
    double p = 1.0;
    std::vector<double> weights_num;
    std::vector<double> weights_nom;
    std::vector<std::size_t> active_features;  // sorted, unique

    std::size_t d_num() const { return weights_num.size(); }
    std::size_t d_nom() const { return weights_nom.size(); }
    std::size_t d() const { return weights_num.size() + weights_nom.size(); }

    double weight(std::size_t feature) const {
        return feature < d_num() ? weights_num[feature] : weights_nom[feature - d_num()];
    }

    static MetricConfig manhattan(std::size_t d_num, std::size_t d_nom) {
        MetricConfig cfg;
        cfg.p = 1.0;
        cfg.weights_num.assign(d_num, 1.0);
        cfg.weights_nom.assign(d_nom, 1.0);
        cfg.active_features.resize(d_num + d_nom);
        for (std::size_t f = 0; f < cfg.active_features.size(); ++f) cfg.active_features[f] = f;
        return cfg;
    }

    MetricConfig with_active(std::vector<std::size_t> active) const {
        MetricConfig cfg = *this;
        std::sort(active.begin(), active.end());
        cfg.active_features = std::move(active);
        return cfg;
    }

    void validate() const {
        if (!(p > 0.0)) throw ConfigError("metric exponent p must be positive");
        for (double w : weights_num)
            if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("numeric weights must be finite and >= 0");
        for (double w : weights_nom)
            if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("nominal weights must be finite and >= 0");
        if (active_features.empty()) throw ConfigError("active feature set must be non-empty");
        for (std::size_t i = 0; i < active_features.size(); ++i) {
            if (active_features[i] >= d()) throw ConfigError("active feature index out of range");
            if (i > 0 && active_features[i] <= active_features[i - 1])
                throw ConfigError("active features must be sorted and unique");
        }
    }
};

struct RowRef {
    std::span<const double> num;
    std::span<const std::int32_t> nom;
};

inline RowRef row_ref(const Dataset& ds, std::size_t i) {
    return {ds.num_row(i), ds.nom_row(i)};
}

// (sum_l w_l |x_l - y_l|^p)^(1/p) over active numeric features.
inline double lp_distance(std::span<const double> x, std::span<const double> y, const MetricConfig& cfg) {
    if (x.size() != cfg.d_num() || y.size() != cfg.d_num())
        throw DataError("numeric row length does not match metric configuration");
    double acc = 0.0;
    if (cfg.p == 1.0) {
        for (std::size_t f : cfg.active_features) {
            if (f >= cfg.d_num()) break;  // active set is sorted, nominal tail follows
            acc += cfg.weights_num[f] * std::abs(x[f] - y[f]);
        }
        return acc;
    }
    for (std::size_t f : cfg.active_features) {
        if (f >= cfg.d_num()) break;
        acc += cfg.weights_num[f] * std::pow(std::abs(x[f] - y[f]), cfg.p);
    }
    return std::pow(acc, 1.0 / cfg.p);
}

// Similarity of two classes of one nominal feature: 1 on a match, otherwise
// 1 - max(p2(x), p2(y)). Taking the larger of the two pair-probabilities
// keeps the distance symmetric; whenever the query class is unseen or rarer
// than the stored one this is exactly 1 - f(y)(f(y)-1)/((n+1)n). The (n+1)
// denominator bounds the result away from zero, capping the per-feature
// distance at log((n+1)/2).
inline double nominal_similarity(const FrequencyTable& ft, std::size_t feature, std::int32_t x,
                                 std::int32_t y) {
    if (x == y) return 1.0;
    return 1.0 - std::max(ft.p2(feature, x), ft.p2(feature, y));
}

// -sum_l w_l log S_l(x_l, y_l) over active nominal features.
inline double nominal_distance(std::span<const std::int32_t> x, std::span<const std::int32_t> y,
                               const FrequencyTable& ft, const MetricConfig& cfg) {
    if (x.size() != cfg.d_nom() || y.size() != cfg.d_nom())
        throw DataError("nominal row length does not match metric configuration");
    double acc = 0.0;
    for (auto it = cfg.active_features.rbegin(); it != cfg.active_features.rend(); ++it) {
        if (*it < cfg.d_num()) break;
        const std::size_t k = *it - cfg.d_num();
        acc -= cfg.weights_nom[k] * std::log(nominal_similarity(ft, k, x[k], y[k]));
    }
    return acc;
}

inline double total_distance(const RowRef& a, const RowRef& b, const FrequencyTable& ft,
                             const MetricConfig& cfg) {
    double dist = lp_distance(a.num, b.num, cfg);
    if (cfg.d_nom() > 0) dist += nominal_distance(a.nom, b.nom, ft, cfg);
    return dist;
}

// Sorted distances from a query to a sample, prefixed by the query's own
// zero. duplicate_count counts the sample points at distance exactly 0: by
// definition impossible to isolate the query from.
struct DistanceProfile {
    std::vector<double> distances;     // length sample size + 1, distances[0] == 0
    std::size_t duplicate_count = 0;   // entries equal to 0 beyond the leading one

    std::size_t size() const { return distances.size(); }
};

// Contiguous row-major block of rows sharing the dataset schema.
struct SampleView {
    const double* numeric = nullptr;
    const std::int32_t* nominal = nullptr;
    std::size_t rows = 0;
    std::size_t d_num = 0;
    std::size_t d_nom = 0;

    RowRef row(std::size_t i) const {
        return {{numeric + i * d_num, d_num}, {nominal + i * d_nom, d_nom}};
    }
};

inline SampleView view(const Dataset& ds) {
    return {ds.numeric.data(), ds.nominal.data(), ds.n, ds.d_num, ds.d_nom};
}

inline DistanceProfile profile_from_distances(std::vector<double>&& dists) {
    std::sort(dists.begin(), dists.end());
    DistanceProfile p;
    p.distances.resize(dists.size() + 1);
    p.distances[0] = 0.0;
    std::copy(dists.begin(), dists.end(), p.distances.begin() + 1);
    for (double v : dists) {
        if (v != 0.0) break;
        ++p.duplicate_count;
    }
    return p;
}

inline DistanceProfile distance_profile(const RowRef& query, const SampleView& sample,
                                        const FrequencyTable& ft, const MetricConfig& cfg) {
    if (sample.rows == 0) throw DataError("distance profile needs a non-empty sample");
    std::vector<double> dists(sample.rows);
    for (std::size_t i = 0; i < sample.rows; ++i)
        dists[i] = total_distance(query, sample.row(i), ft, cfg);
    return profile_from_distances(std::move(dists));
}

// Per-feature additive contributions of one query against a fixed sample,
// supporting O(rows) removal and re-insertion of single features. Numeric
// contributions are stored before the 1/p root (w |dx|^p), so the update is
// exact for any p; the root is re-applied when distances are read out.
class DistanceCache {
public:
    DistanceCache(const RowRef& query, const SampleView& sample, const FrequencyTable& ft,
                  const MetricConfig& cfg)
        : p_(cfg.p), d_num_(cfg.d_num()), d_(cfg.d()), rows_(sample.rows) {
        // feature-major so that per-feature updates scan contiguously
        contrib_.resize(rows_ * d_, 0.0);
        num_raw_.assign(rows_, 0.0);
        nom_raw_.assign(rows_, 0.0);
        active_.assign(d_, false);
        for (std::size_t f : cfg.active_features) active_[f] = true;
        n_active_ = cfg.active_features.size();
        for (std::size_t f = 0; f < d_num_; ++f) {
            double* c = contrib_.data() + f * rows_;
            for (std::size_t t = 0; t < rows_; ++t) {
                const double diff = std::abs(query.num[f] - sample.row(t).num[f]);
                c[t] = cfg.weights_num[f] * (p_ == 1.0 ? diff : std::pow(diff, p_));
            }
        }
        for (std::size_t k = 0; k < cfg.d_nom(); ++k) {
            double* c = contrib_.data() + (d_num_ + k) * rows_;
            for (std::size_t t = 0; t < rows_; ++t)
                c[t] = -cfg.weights_nom[k] *
                       std::log(nominal_similarity(ft, k, query.nom[k], sample.row(t).nom[k]));
        }
        for (std::size_t f = 0; f < d_; ++f) {
            if (!active_[f]) continue;
            auto& raw = f < d_num_ ? num_raw_ : nom_raw_;
            const double* c = contrib_.data() + f * rows_;
            for (std::size_t t = 0; t < rows_; ++t) raw[t] += c[t];
        }
    }

    std::size_t rows() const { return rows_; }
    std::size_t active_count() const { return n_active_; }
    bool is_active(std::size_t f) const { return active_[f]; }

    std::vector<std::size_t> active_features() const {
        std::vector<std::size_t> out;
        out.reserve(n_active_);
        for (std::size_t f = 0; f < d_; ++f)
            if (active_[f]) out.push_back(f);
        return out;
    }

    void remove(std::size_t feature) {
        check_index(feature);
        if (!active_[feature]) throw ConfigError("feature is not active: " + std::to_string(feature));
        apply(feature, -1.0);
        active_[feature] = false;
        --n_active_;
    }

    void add(std::size_t feature) {
        check_index(feature);
        if (active_[feature]) throw ConfigError("feature is already active: " + std::to_string(feature));
        apply(feature, +1.0);
        active_[feature] = true;
        ++n_active_;
    }

    // Distances over the current active set.
    void current_distances(std::span<double> out) const {
        for (std::size_t t = 0; t < rows_; ++t) out[t] = finish(num_raw_[t], nom_raw_[t]);
    }

    // Distances as if `feature` were removed, without mutating the cache.
    void distances_without(std::size_t feature, std::span<double> out) const {
        check_index(feature);
        if (!active_[feature]) throw ConfigError("feature is not active: " + std::to_string(feature));
        const bool is_num = feature < d_num_;
        const double* c = contrib_.data() + feature * rows_;
        for (std::size_t t = 0; t < rows_; ++t)
            out[t] = is_num ? finish(num_raw_[t] - c[t], nom_raw_[t])
                            : finish(num_raw_[t], nom_raw_[t] - c[t]);
    }

private:
    void check_index(std::size_t f) const {
        if (f >= d_) throw ConfigError("feature index out of range: " + std::to_string(f));
    }

    void apply(std::size_t feature, double sign) {
        auto& raw = feature < d_num_ ? num_raw_ : nom_raw_;
        const double* c = contrib_.data() + feature * rows_;
        for (std::size_t t = 0; t < rows_; ++t) raw[t] += sign * c[t];
    }

    double finish(double num_raw, double nom_raw) const {
        num_raw = std::max(num_raw, 0.0);  // guard tiny negative residue from cancellation
        const double num_part = p_ == 1.0 ? num_raw : std::pow(num_raw, 1.0 / p_);
        return num_part + std::max(nom_raw, 0.0);
    }

    double p_;
    std::size_t d_num_, d_, rows_;
    std::vector<double> contrib_;
    std::vector<double> num_raw_, nom_raw_;
    std::vector<bool> active_;
    std::size_t n_active_ = 0;
};

}  // namespace aida
