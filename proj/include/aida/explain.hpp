#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "aida/detector.hpp"
#include "aida/errors.hpp"
#include "aida/isolation.hpp"
#include "aida/metric.hpp"
#include "aida/parallel.hpp"
#include "aida/rng.hpp"

namespace aida {

enum class TemperatureMode { FixedT, DeltaUniform };

struct TixParams {
    std::size_t repetitions = 10;    // M
    std::size_t max_iterations = 0;  // L; 0 means the default 50 * d
    TemperatureMode t_mode = TemperatureMode::DeltaUniform;
    double temperature = 0.0;  // FixedT only
    double delta_min = 0.01;
    double delta_max = 0.015;
    bool greedy = false;  // drop the stochastic acceptance branch
    std::uint64_t seed = 0;
    unsigned threads = 1;

    void validate() const {
        if (repetitions < 1) throw ConfigError("repetitions must be at least 1");
        if (t_mode == TemperatureMode::FixedT && !(temperature > 0.0))
            throw ConfigError("fixed temperature must be positive");
        if (t_mode == TemperatureMode::DeltaUniform && !(0.0 < delta_min && delta_min <= delta_max))
            throw ConfigError("delta range must satisfy 0 < delta_min <= delta_max");
    }
};

// T such that a relative score drop of exactly delta is accepted with
// probability 0.9.
inline double temperature_from_delta(double delta) {
    if (!(delta > 0.0)) throw ConfigError("delta must be positive");
    return delta / std::log(10.0 / 9.0);
}

namespace detail {
constexpr double kZeroScoreEpsilon = 1e-12;  // stand-in denominator when the current score is 0
}

// Probability of accepting a removal that changes the score from f_with to
// f_without. Improvements are always accepted. Scores here are negated
// isolation statistics, so the relative difference is taken against
// |f_with|; a worsening of relative size delta then maps to exp(-delta / T)
// for either score sign.
inline double acceptance_probability(double f_with, double f_without, double temperature) {
    if (!(temperature > 0.0)) throw ConfigError("temperature must be positive");
    if (f_without >= f_with) return 1.0;
    double denom = std::abs(f_with);
    if (denom == 0.0) denom = detail::kZeroScoreEpsilon;
    return std::exp((f_without - f_with) / (denom * temperature));
}

// Survival record of the elimination process: the iteration at which each
// feature was removed (or the terminal iteration for survivors), per
// subsample and repetition.
struct PathLengthTable {
    std::size_t d = 0;
    std::size_t n_subsamples = 0;  // N
    std::size_t repetitions = 0;   // M
    std::vector<std::uint8_t> participating;  // features included in this run
    std::vector<std::uint32_t> path;          // d x N x M
    std::vector<double> aggregate;            // mean path length per feature (participating only)
    std::vector<std::size_t> order;           // participating features, most relevant first
    std::vector<std::size_t> rank;            // 1-based rank per feature; 0 for non-participants
    std::size_t zero_score_events = 0;        // acceptance fell back to the epsilon denominator

    std::uint32_t path_at(std::size_t j, std::size_t i, std::size_t k) const {
        return path[(j * n_subsamples + i) * repetitions + k];
    }
    std::uint32_t& path_at(std::size_t j, std::size_t i, std::size_t k) {
        return path[(j * n_subsamples + i) * repetitions + k];
    }
};

namespace detail {

inline void rank_by_score(std::span<const double> score, std::span<const std::uint8_t> participating,
                          std::vector<std::size_t>& order, std::vector<std::size_t>& rank) {
    order.clear();
    for (std::size_t j = 0; j < score.size(); ++j)
        if (participating[j]) order.push_back(j);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return score[a] > score[b];
    });
    rank.assign(score.size(), 0);
    for (std::size_t pos = 0; pos < order.size(); ++pos) rank[order[pos]] = pos + 1;
}

}  // namespace detail

// Backward feature elimination with the tempered acceptance rule: per
// subsample and repetition, repeatedly propose a uniformly random active
// feature, score the point without it (variance score, alpha = 1), and
// remove it if the score does not get worse, or with the acceptance
// probability otherwise. Survivors inherit the terminal iteration count.
// Greedy mode keeps only the deterministic branch.
//
// `features` restricts the run to a subset (used by the refinement stages);
// empty means the full feature space. The model must be fitted without
// feature bagging so path lengths aggregate over a consistent space.
inline PathLengthTable tix(const Model& model, const RowRef& x, const TixParams& params,
                           std::span<const std::size_t> features = {}) {
    params.validate();
    if (model.bagging)
        throw ConfigError("explanation requires a model fitted on the full feature space");
    const std::size_t d = model.d();
    std::vector<std::size_t> all;
    if (features.empty()) {
        all.resize(d);
        std::iota(all.begin(), all.end(), std::size_t{0});
        features = all;
    }
    for (std::size_t f : features)
        if (f >= d) throw ConfigError("feature index out of range: " + std::to_string(f));

    const std::size_t n_sub = model.n_subsamples();
    const std::size_t m_reps = params.repetitions;
    const std::size_t max_iter =
        params.max_iterations ? params.max_iterations : 50 * features.size();

    PathLengthTable table;
    table.d = d;
    table.n_subsamples = n_sub;
    table.repetitions = m_reps;
    table.participating.assign(d, 0);
    for (std::size_t f : features) table.participating[f] = 1;
    table.path.assign(d * n_sub * m_reps, 0);

    MetricConfig base = MetricConfig::manhattan(model.d_num, model.d_nom);
    base.p = model.params.p;
    base.active_features.assign(features.begin(), features.end());
    std::sort(base.active_features.begin(), base.active_features.end());
    if (std::adjacent_find(base.active_features.begin(), base.active_features.end()) !=
        base.active_features.end())
        throw ConfigError("feature subset contains duplicates");

    std::vector<std::size_t> zero_events(n_sub, 0);
    parallel_for(n_sub, params.threads, [&](std::size_t i) {
        const SampleView sample = model.sample_view(i);
        std::vector<double> cur(sample.rows), cand(sample.rows);
        for (std::size_t k = 0; k < m_reps; ++k) {
            Rng rng(derive_seed(params.seed, i + 1, k + 1));
            DistanceCache cache(x, sample, model.freq, base);
            double temperature = 1.0;
            if (!params.greedy)
                temperature = params.t_mode == TemperatureMode::FixedT
                                  ? params.temperature
                                  : temperature_from_delta(rng.uniform(params.delta_min, params.delta_max));

            std::vector<std::size_t> active(features.begin(), features.end());
            cache.current_distances(cur);
            std::sort(cur.begin(), cur.end());
            double f_cur = score_sorted_distances(cur, ScoreFn::Variance, 1.0).score;

            std::uint32_t l = 0;
            while (l < max_iter && active.size() > 1) {
                const std::size_t pos = rng.index(active.size());
                const std::size_t j = active[pos];
                cache.distances_without(j, cand);
                std::sort(cand.begin(), cand.end());
                const double f_cand = score_sorted_distances(cand, ScoreFn::Variance, 1.0).score;
                bool accept = f_cand >= f_cur;
                if (!accept && !params.greedy) {
                    if (f_cur == 0.0) ++zero_events[i];
                    accept = acceptance_probability(f_cur, f_cand, temperature) > rng.uniform();
                }
                if (accept) {
                    cache.remove(j);
                    active[pos] = active.back();
                    active.pop_back();
                    table.path_at(j, i, k) = l;
                    f_cur = f_cand;
                }
                ++l;
            }
            for (std::size_t j : active) table.path_at(j, i, k) = l;
        }
    });
    table.zero_score_events = std::accumulate(zero_events.begin(), zero_events.end(), std::size_t{0});

    table.aggregate.assign(d, 0.0);
    const double denom = static_cast<double>(n_sub * m_reps);
    for (std::size_t f : features) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n_sub; ++i)
            for (std::size_t k = 0; k < m_reps; ++k) sum += table.path_at(f, i, k);
        table.aggregate[f] = sum / denom;
    }
    detail::rank_by_score(table.aggregate, table.participating, table.order, table.rank);
    return table;
}

enum class OffsetMode { Additive, Rank };

struct RefineParams {
    double beta = 1.5;       // refinement rate, > 1
    std::size_t k_min = 10;  // terminal feature count
    OffsetMode offset_mode = OffsetMode::Additive;

    void validate() const {
        if (!(beta > 1.0)) throw ConfigError("refinement rate beta must exceed 1");
        if (k_min < 1) throw ConfigError("k_min must be at least 1");
    }
};

// Stage sizes d, max(floor(d/beta), k_min), ... until the shrink stalls.
inline std::vector<std::size_t> refinement_stage_sizes(std::size_t d, double beta, std::size_t k_min) {
    std::vector<std::size_t> sizes{d};
    std::size_t k = d;
    for (;;) {
        const auto next = std::max<std::size_t>(static_cast<std::size_t>(std::floor(k / beta)), k_min);
        if (next >= k) break;
        sizes.push_back(next);
        k = next;
    }
    return sizes;
}

// Repetition count for refined runs so that the summed per-stage iteration
// budgets (50 * stage size each) roughly match the unrefined budget.
inline std::size_t budget_matched_repetitions(std::size_t d, double beta, std::size_t k_min,
                                              std::size_t unrefined_repetitions) {
    const auto sizes = refinement_stage_sizes(d, beta, k_min);
    const auto total = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
    const double m = static_cast<double>(unrefined_repetitions) * static_cast<double>(d) /
                     static_cast<double>(total);
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(m)));
}

struct RefineResult {
    std::size_t d = 0;
    std::vector<double> final_score;          // per feature, offsets applied
    std::vector<std::size_t> stage_size;      // stage size k whose run fixed the feature's score
    std::vector<std::size_t> offset;          // d - k for that stage (Additive mode)
    std::vector<std::size_t> order;           // most relevant first
    std::vector<std::size_t> rank;            // 1-based
    std::vector<std::size_t> stage_sizes;     // the schedule that was run
};

// Iterative re-ranking: run the elimination on the current feature set, keep
// the top max(floor(k/beta), k_min) features, repeat until the set stops
// shrinking. Scores from a stage of size k carry an additive offset of d - k
// (the minimum path already covered to reach that stage); with a single
// stage this is exactly a plain elimination run.
inline RefineResult refine(const Model& model, const RowRef& x, const TixParams& tix_params,
                           const RefineParams& refine_params) {
    refine_params.validate();
    const std::size_t d = model.d();
    RefineResult res;
    res.d = d;
    res.final_score.assign(d, 0.0);
    res.stage_size.assign(d, 0);
    res.offset.assign(d, 0);
    res.stage_sizes = refinement_stage_sizes(d, refine_params.beta, refine_params.k_min);

    std::vector<std::size_t> current(d);
    std::iota(current.begin(), current.end(), std::size_t{0});
    std::vector<std::uint8_t> participating(d, 1);

    for (std::size_t stage = 0; stage < res.stage_sizes.size(); ++stage) {
        const std::size_t k = res.stage_sizes[stage];
        TixParams stage_params = tix_params;
        // stage 0 keeps the caller's seed so a one-stage schedule is the
        // plain elimination run, bit for bit
        if (stage > 0) stage_params.seed = derive_seed(tix_params.seed, 0x5ef1be, stage);
        const PathLengthTable table = tix(model, x, stage_params, current);

        const bool last = stage + 1 == res.stage_sizes.size();
        std::vector<std::size_t> keep;
        if (!last) {
            const std::size_t k_next = res.stage_sizes[stage + 1];
            keep.assign(table.order.begin(), table.order.begin() + static_cast<std::ptrdiff_t>(k_next));
        }
        std::vector<std::uint8_t> kept(d, 0);
        for (std::size_t f : keep) kept[f] = 1;
        for (std::size_t f : current) {
            if (!last && kept[f]) continue;
            res.final_score[f] = table.aggregate[f] + static_cast<double>(d - k);
            res.stage_size[f] = k;
            res.offset[f] = d - k;
        }
        current = std::move(keep);
    }

    if (refine_params.offset_mode == OffsetMode::Rank) {
        // Rank mode: later stages dominate earlier ones outright; within a
        // stage the stage scores order the features. Encode as d..1.
        std::vector<std::size_t> idx(d);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            if (res.stage_size[a] != res.stage_size[b]) return res.stage_size[a] < res.stage_size[b];
            return res.final_score[a] > res.final_score[b];
        });
        for (std::size_t pos = 0; pos < d; ++pos)
            res.final_score[idx[pos]] = static_cast<double>(d - pos);
    }
    detail::rank_by_score(res.final_score, participating, res.order, res.rank);
    return res;
}

// Size of the smallest rank prefix containing every relevant feature; ties
// at the boundary are counted pessimistically.
inline std::size_t minimal_subspace(std::span<const double> score,
                                    std::span<const std::size_t> relevant) {
    if (relevant.empty()) throw ConfigError("minimal_subspace needs at least one relevant feature");
    double weakest = std::numeric_limits<double>::infinity();
    for (std::size_t f : relevant) {
        if (f >= score.size()) throw ConfigError("relevant feature index out of range");
        weakest = std::min(weakest, score[f]);
    }
    std::size_t count = 0;
    for (double s : score)
        if (s >= weakest) ++count;
    return count;
}

// Closed-form score difference for removing a feature that contributes a
// constant shift dx to every pairwise distance, under the expectation score
// with alpha = 1 and p = 1. profile_with holds the sorted distances
// including the shift, led by the query's own zero. Always negative for
// dx > 0: the plain greedy rule never removes such a feature.
inline double shift_removal_score_difference(std::span<const double> profile_with, double dx) {
    if (profile_with.size() < 2 || profile_with[0] != 0.0)
        throw DataError("profile must start at 0");
    if (!(dx >= 0.0)) throw ConfigError("shift must be non-negative");
    if (dx > 0.0 && !(profile_with[1] > dx))
        throw DataError("shift exceeds the smallest distance");
    long double acc = 0.0L;
    for (std::size_t i = 1; i + 1 < profile_with.size(); ++i) {
        const long double gap = profile_with[i + 1] - profile_with[i];
        const long double z = profile_with[i + 1] - profile_with[0];
        acc += gap / (z * (z - dx));
    }
    return static_cast<double>(-static_cast<long double>(dx) * acc);
}

// True when the closed form confirms the score difference is negative for
// every tested shift.
inline bool greedy_never_removes(std::span<const double> profile_with,
                                 std::span<const double> shifts) {
    for (double dx : shifts)
        if (dx > 0.0 && !(shift_removal_score_difference(profile_with, dx) < 0.0)) return false;
    return true;
}

// Boxplot summary of one distance profile prefix. Quartiles interpolate
// linearly (index (count-1) * p) over the distances excluding the query's
// own zero; whiskers sit on the most extreme points within 1.5 IQR of the
// quartiles.
struct BoxStats {
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double lower_whisker = 0.0;
    double upper_whisker = 0.0;
    double isolation_gap = 0.0;  // smallest nonzero distance
};

struct DppSummary {
    std::vector<std::size_t> feature_order;  // the prefixes summarized, in order
    std::vector<BoxStats> per_prefix;        // entry m-1 covers the first m features
};

namespace detail {

inline double quantile_sorted(std::span<const double> v, double p) {
    const double h = (static_cast<double>(v.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(h);
    if (lo + 1 >= v.size()) return v.back();
    return v[lo] + (h - static_cast<double>(lo)) * (v[lo + 1] - v[lo]);
}

inline BoxStats summarize_sorted(std::span<const double> dists) {
    BoxStats b;
    b.min = dists.front();
    b.q1 = quantile_sorted(dists, 0.25);
    b.median = quantile_sorted(dists, 0.5);
    b.q3 = quantile_sorted(dists, 0.75);
    const double iqr = b.q3 - b.q1;
    const double lo_fence = b.q1 - 1.5 * iqr;
    const double hi_fence = b.q3 + 1.5 * iqr;
    b.lower_whisker = b.min;
    for (double v : dists)
        if (v >= lo_fence) {
            b.lower_whisker = v;
            break;
        }
    b.upper_whisker = dists.back();
    for (auto it = dists.rbegin(); it != dists.rend(); ++it)
        if (*it <= hi_fence) {
            b.upper_whisker = *it;
            break;
        }
    b.isolation_gap = 0.0;
    for (double v : dists)
        if (v > 0.0) {
            b.isolation_gap = v;
            break;
        }
    return b;
}

}  // namespace detail

// Profile summaries of x over growing feature-order prefixes: the top entry
// uses only feature_order[0], the next the first two, and so on. Sharp gap
// jumps between consecutive prefixes point at the features that isolate x.
inline DppSummary dpp(const SampleView& sample, const FrequencyTable& ft, const MetricConfig& base,
                      const RowRef& x, std::span<const std::size_t> feature_order,
                      std::size_t m_max) {
    if (sample.rows == 0) throw DataError("distance profile plot needs a non-empty sample");
    if (m_max < 1 || m_max > feature_order.size())
        throw ConfigError("prefix count must be in [1, |feature_order|]");
    std::vector<std::uint8_t> seen(base.d(), 0);
    for (std::size_t f : feature_order) {
        if (f >= base.d()) throw ConfigError("feature index out of range: " + std::to_string(f));
        if (seen[f]++) throw ConfigError("feature order contains duplicates");
    }

    DppSummary out;
    out.feature_order.assign(feature_order.begin(), feature_order.begin() + static_cast<std::ptrdiff_t>(m_max));
    out.per_prefix.resize(m_max);
    std::vector<double> dists(sample.rows);
    for (std::size_t m = 1; m <= m_max; ++m) {
        MetricConfig cfg = base.with_active({feature_order.begin(),
                                             feature_order.begin() + static_cast<std::ptrdiff_t>(m)});
        for (std::size_t t = 0; t < sample.rows; ++t)
            dists[t] = total_distance(x, sample.row(t), ft, cfg);
        std::sort(dists.begin(), dists.end());
        out.per_prefix[m - 1] = detail::summarize_sorted(dists);
    }
    return out;
}

inline DppSummary dpp(const Model& model, std::size_t subsample_index, const RowRef& x,
                      std::span<const std::size_t> feature_order, std::size_t m_max) {
    if (subsample_index >= model.n_subsamples())
        throw ConfigError("subsample index out of range");
    MetricConfig base = MetricConfig::manhattan(model.d_num, model.d_nom);
    base.p = model.params.p;
    return dpp(model.sample_view(subsample_index), model.freq, base, x, feature_order, m_max);
}

}  // namespace aida
