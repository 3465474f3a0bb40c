#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aida/dataset.hpp"
#include "aida/errors.hpp"
#include "aida/isolation.hpp"
#include "aida/metric.hpp"
#include "aida/parallel.hpp"
#include "aida/rng.hpp"

namespace aida {

enum class Aggregation { Average, Max, Aom };

struct ModelParams {
    std::size_t n_subsamples = 100;  // N
    std::size_t psi_min = 50;
    std::size_t psi_max = 512;
    std::optional<bool> feature_bagging;  // unset: bagging on iff d > 5
    double p = 1.0;                       // metric exponent, unit weights
    ScoreConfig score;
    Aggregation aggregation = Aggregation::Aom;
    std::size_t aom_q = 5;  // subsamples per AOM bucket
    std::uint64_t seed = 0;

    void validate() const {
        if (n_subsamples < 1) throw ConfigError("need at least one subsample");
        if (psi_min < 2) throw ConfigError("psi_min must be at least 2");
        if (psi_min > psi_max) throw ConfigError("psi_min must not exceed psi_max");
        if (aom_q < 1) throw ConfigError("AOM bucket size must be at least 1");
        score.validate();
        if (!(p > 0.0)) throw ConfigError("metric exponent p must be positive");
    }
};

struct Subsample {
    std::size_t psi = 0;
    std::vector<double> numeric;         // psi x d_num
    std::vector<std::int32_t> nominal;   // psi x d_nom
    std::vector<std::size_t> subspace;   // sorted active features
    double alpha = 1.0;
};

// Trained ensemble: the stored subsamples, their feature subspaces and alpha
// draws, the nominal frequency tables of the full training set, and the
// bucket order used by AOM aggregation. Immutable after fit.
struct Model {
    ModelParams params;
    bool bagging = false;
    std::size_t d_num = 0;
    std::size_t d_nom = 0;
    std::vector<std::string> feature_names;
    std::vector<std::vector<std::string>> nominal_classes;  // training encoding
    FrequencyTable freq;
    std::vector<Subsample> subsamples;
    std::vector<std::size_t> aom_order;  // column permutation fixing bucket assignment
    std::vector<double> zscore_mean;     // set when the training data was Z-scored
    std::vector<double> zscore_std;
    std::vector<std::string> warnings;

    bool has_zscore() const { return !zscore_mean.empty(); }

    std::size_t d() const { return d_num + d_nom; }
    std::size_t n_subsamples() const { return subsamples.size(); }

    SampleView sample_view(std::size_t j) const {
        const auto& s = subsamples[j];
        return {s.numeric.data(), s.nominal.data(), s.psi, d_num, d_nom};
    }

    MetricConfig metric_for(std::size_t j) const {
        MetricConfig cfg = MetricConfig::manhattan(d_num, d_nom);
        cfg.p = params.p;
        cfg.active_features = subsamples[j].subspace;
        return cfg;
    }
};

inline Model fit(const Dataset& train, const ModelParams& params_in) {
    params_in.validate();
    ModelParams params = params_in;
    if (train.n < 2) throw DataError("training data needs at least two rows");
    if (train.d() == 0) throw DataError("training data has no features");

    Model model;
    model.warnings.clear();
    if (params.psi_max > train.n) {
        params.psi_max = train.n;
        params.psi_min = std::min(params.psi_min, params.psi_max);
        model.warnings.push_back("psi range clamped to training size " + std::to_string(train.n));
    }
    model.params = params;
    model.d_num = train.d_num;
    model.d_nom = train.d_nom;
    model.feature_names = train.feature_names;
    model.nominal_classes = train.nominal_classes;
    model.freq = nominal_frequencies(train);
    model.bagging = params.feature_bagging.value_or(train.d() > 5);
    if (model.bagging && train.d() < 2) throw ConfigError("feature bagging requires at least 2 features");

    const std::size_t d = train.d();
    Rng rng(derive_seed(params.seed, 0xf17ULL));
    model.subsamples.resize(params.n_subsamples);
    for (auto& sub : model.subsamples) {
        sub.psi = rng.uniform_int(params.psi_min, params.psi_max);
        const auto rows = rng.sample_without_replacement(train.n, sub.psi);
        sub.numeric.resize(sub.psi * train.d_num);
        sub.nominal.resize(sub.psi * train.d_nom);
        for (std::size_t t = 0; t < sub.psi; ++t) {
            const auto r = rows[t];
            std::copy_n(train.numeric.data() + r * train.d_num, train.d_num,
                        sub.numeric.data() + t * train.d_num);
            std::copy_n(train.nominal.data() + r * train.d_nom, train.d_nom,
                        sub.nominal.data() + t * train.d_nom);
        }
        if (model.bagging) {
            const std::size_t lo = std::max<std::size_t>(1, d / 2);
            const std::size_t hi = std::max(lo, d - 1);
            const std::size_t size = rng.uniform_int(lo, hi);
            sub.subspace = rng.sample_without_replacement(d, size);
            std::sort(sub.subspace.begin(), sub.subspace.end());
        } else {
            sub.subspace.resize(d);
            std::iota(sub.subspace.begin(), sub.subspace.end(), std::size_t{0});
        }
        sub.alpha = params.score.alpha_mode == AlphaMode::Uniform
                        ? rng.uniform(params.score.alpha_min, params.score.alpha_max)
                        : params.score.alpha;
    }
    model.aom_order.resize(params.n_subsamples);
    std::iota(model.aom_order.begin(), model.aom_order.end(), std::size_t{0});
    rng.shuffle(model.aom_order);
    return model;
}

struct ScoreVector {
    std::size_t n = 0;
    std::size_t n_columns = 0;
    std::vector<double> raw;          // n x N, raw per-subsample scores
    std::vector<double> norm;         // n x N, Z-scored per column
    std::vector<double> final_score;  // n, aggregated
    std::vector<double> col_mean;     // batch statistics, reusable for single rows
    std::vector<double> col_std;
    std::vector<std::string> warnings;
};

// Bucket the columns by the stored order, take per-bucket row maxima,
// average the maxima. q larger than the column count degrades to a single
// bucket, i.e. plain max.
inline std::vector<double> aggregate_aom(std::span<const double> norm, std::size_t n, std::size_t cols,
                                         std::size_t q, std::span<const std::size_t> order,
                                         std::vector<std::string>* warnings = nullptr) {
    if (q > cols) {
        q = cols;
        if (warnings) warnings->push_back("AOM bucket size exceeds column count; using a single bucket");
    }
    const std::size_t n_buckets = (cols + q - 1) / q;
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = norm.data() + i * cols;
        double acc = 0.0;
        for (std::size_t b = 0; b < n_buckets; ++b) {
            double best = -std::numeric_limits<double>::infinity();
            const std::size_t end = std::min(cols, (b + 1) * q);
            for (std::size_t t = b * q; t < end; ++t) best = std::max(best, row[order[t]]);
            acc += best;
        }
        out[i] = acc / static_cast<double>(n_buckets);
    }
    return out;
}

inline std::vector<double> aggregate(std::span<const double> norm, std::size_t n, std::size_t cols,
                                     Aggregation method, std::size_t q,
                                     std::span<const std::size_t> order,
                                     std::vector<std::string>* warnings = nullptr) {
    if (cols == 0) throw ConfigError("aggregation needs at least one column");
    std::vector<double> out(n, 0.0);
    switch (method) {
        case Aggregation::Average:
            for (std::size_t i = 0; i < n; ++i) {
                const double* row = norm.data() + i * cols;
                out[i] = std::accumulate(row, row + cols, 0.0) / static_cast<double>(cols);
            }
            return out;
        case Aggregation::Max:
            for (std::size_t i = 0; i < n; ++i) {
                const double* row = norm.data() + i * cols;
                out[i] = *std::max_element(row, row + cols);
            }
            return out;
        case Aggregation::Aom: return aggregate_aom(norm, n, cols, q, order, warnings);
    }
    throw ConfigError("unknown aggregation method");
}

// Map a test dataset's nominal encoding onto the training encoding; labels
// unseen in training get fresh ids with zero frequency.
inline std::vector<std::int32_t> reencode_nominal(const Model& model, const Dataset& test) {
    std::vector<std::int32_t> out(test.nominal.size());
    for (std::size_t k = 0; k < test.d_nom; ++k) {
        std::map<std::string, std::int32_t> to_train;
        for (std::size_t c = 0; c < model.nominal_classes[k].size(); ++c)
            to_train[model.nominal_classes[k][c]] = static_cast<std::int32_t>(c);
        std::vector<std::int32_t> remap(test.nominal_classes[k].size());
        auto next_unseen = static_cast<std::int32_t>(model.nominal_classes[k].size());
        for (std::size_t c = 0; c < test.nominal_classes[k].size(); ++c) {
            auto it = to_train.find(test.nominal_classes[k][c]);
            remap[c] = it != to_train.end() ? it->second : next_unseen++;
        }
        for (std::size_t i = 0; i < test.n; ++i)
            out[i * test.d_nom + k] = remap[static_cast<std::size_t>(test.nom(i, k))];
    }
    return out;
}

// Testing phase: one raw score per (row, subsample) over that subsample's
// subspace, Z-normalization of every column over the batch, then
// aggregation. Scoring draws no random numbers, so any thread count gives
// identical results.
inline ScoreVector score_all(const Model& model, const Dataset& test, unsigned threads = 1) {
    if (test.d_num != model.d_num || test.d_nom != model.d_nom)
        throw DataError("test schema does not match the trained model");
    const std::size_t n = test.n;
    const std::size_t cols = model.n_subsamples();

    ScoreVector sv;
    sv.n = n;
    sv.n_columns = cols;
    sv.raw.resize(n * cols);
    sv.norm.resize(n * cols);

    std::vector<MetricConfig> configs(cols);
    for (std::size_t j = 0; j < cols; ++j) configs[j] = model.metric_for(j);
    const std::vector<std::int32_t> renom = reencode_nominal(model, test);

    parallel_for(n, threads, [&](std::size_t i) {
        std::vector<double> dists;
        const RowRef query{test.num_row(i),
                           {renom.data() + i * test.d_nom, test.d_nom}};
        for (std::size_t j = 0; j < cols; ++j) {
            const SampleView sample = model.sample_view(j);
            dists.resize(sample.rows);
            for (std::size_t t = 0; t < sample.rows; ++t)
                dists[t] = total_distance(query, sample.row(t), model.freq, configs[j]);
            std::sort(dists.begin(), dists.end());
            sv.raw[i * cols + j] =
                score_sorted_distances(dists, model.params.score.fn, model.subsamples[j].alpha).score;
        }
    });

    sv.col_mean.assign(cols, 0.0);
    sv.col_std.assign(cols, 0.0);
    for (std::size_t j = 0; j < cols; ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += sv.raw[i * cols + j];
        const double mean = sum / static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double c = sv.raw[i * cols + j] - mean;
            ss += c * c;
        }
        const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
        sv.col_mean[j] = mean;
        sv.col_std[j] = sd;
        if (sd == 0.0) {
            sv.warnings.push_back("score column " + std::to_string(j) + " is constant");
            for (std::size_t i = 0; i < n; ++i) sv.norm[i * cols + j] = 0.0;
        } else {
            for (std::size_t i = 0; i < n; ++i)
                sv.norm[i * cols + j] = (sv.raw[i * cols + j] - mean) / sd;
        }
    }
    sv.final_score = aggregate(sv.norm, n, cols, model.params.aggregation, model.params.aom_q,
                               model.aom_order, &sv.warnings);
    return sv;
}

// Score one row against stored batch statistics (Z-scores are defined over a
// batch; a single point reuses the mean/std of a previous one).
inline double score_one(const Model& model, const RowRef& query, const ScoreVector& batch) {
    const std::size_t cols = model.n_subsamples();
    if (batch.col_mean.size() != cols) throw DataError("batch statistics do not match the model");
    std::vector<double> norm(cols);
    std::vector<double> dists;
    for (std::size_t j = 0; j < cols; ++j) {
        const MetricConfig cfg = model.metric_for(j);
        const SampleView sample = model.sample_view(j);
        dists.resize(sample.rows);
        for (std::size_t t = 0; t < sample.rows; ++t)
            dists[t] = total_distance(query, sample.row(t), model.freq, cfg);
        std::sort(dists.begin(), dists.end());
        const double raw =
            score_sorted_distances(dists, model.params.score.fn, model.subsamples[j].alpha).score;
        norm[j] = batch.col_std[j] == 0.0 ? 0.0 : (raw - batch.col_mean[j]) / batch.col_std[j];
    }
    return aggregate(norm, 1, cols, model.params.aggregation, model.params.aom_q, model.aom_order)[0];
}

// Area under the ROC curve via the rank statistic; ties contribute half
// through average ranks.
inline double auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw DataError("scores and labels differ in length");
    const std::size_t n = scores.size();
    std::size_t n_out = 0;
    for (int l : labels) {
        if (l != 0 && l != 1) throw DataError("labels must be 0 or 1");
        n_out += static_cast<std::size_t>(l);
    }
    if (n_out == 0 || n_out == n) throw DataError("AUC needs both classes present");

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double rank_sum_out = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[idx[j]] == scores[idx[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
        for (std::size_t t = i; t < j; ++t)
            if (labels[idx[t]] == 1) rank_sum_out += avg_rank;
        i = j;
    }
    const auto no = static_cast<double>(n_out);
    const auto ni = static_cast<double>(n - n_out);
    const double u = rank_sum_out - no * (no + 1.0) / 2.0;
    return u / (no * ni);
}

}  // namespace aida
