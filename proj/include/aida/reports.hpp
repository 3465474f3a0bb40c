#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "aida/csv.hpp"
#include "aida/detector.hpp"
#include "aida/errors.hpp"
#include "aida/explain.hpp"
#include "aida/generators.hpp"

namespace aida {

// Explanation report: one row per feature, most relevant first.
inline void write_explain_report(const std::string& path, const std::vector<std::string>& feature_names,
                                 std::span<const double> score, std::span<const std::size_t> order,
                                 std::span<const std::size_t> rank,
                                 std::span<const std::size_t> stage_size,
                                 std::span<const std::size_t> offset) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    csv::write_row(out, "feature", "name", "path_length", "rank", "stage_size", "stage_offset");
    for (std::size_t f : order)
        csv::write_row(out, f, feature_names[f], csv::format_double(score[f]), rank[f],
                       stage_size.empty() ? feature_names.size() : stage_size[f],
                       offset.empty() ? 0 : offset[f]);
}

inline void write_explain_report(const std::string& path, const std::vector<std::string>& feature_names,
                                 const PathLengthTable& table) {
    write_explain_report(path, feature_names, table.aggregate, table.order, table.rank, {}, {});
}

inline void write_explain_report(const std::string& path, const std::vector<std::string>& feature_names,
                                 const RefineResult& res) {
    write_explain_report(path, feature_names, res.final_score, res.order, res.rank, res.stage_size,
                         res.offset);
}

// One row per prefix size.
inline void write_dpp_csv(const std::string& path, const std::vector<std::string>& feature_names,
                          const DppSummary& summary) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    csv::write_row(out, "prefix_size", "added_feature", "min", "q1", "median", "q3", "lower_whisker",
                   "upper_whisker", "isolation_gap");
    for (std::size_t m = 0; m < summary.per_prefix.size(); ++m) {
        const auto& b = summary.per_prefix[m];
        const std::size_t f = summary.feature_order[m];
        csv::write_row(out, m + 1, f < feature_names.size() ? feature_names[f] : std::to_string(f),
                       csv::format_double(b.min), csv::format_double(b.q1),
                       csv::format_double(b.median), csv::format_double(b.q3),
                       csv::format_double(b.lower_whisker), csv::format_double(b.upper_whisker),
                       csv::format_double(b.isolation_gap));
    }
}

// Per-row scores: aggregated first, then the normalized and raw per-column
// blocks. An optional label column is appended for labelled data.
inline void write_scores_csv(const std::string& path, const ScoreVector& sv,
                             std::span<const int> labels = {}) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out << "row,score";
    for (std::size_t j = 0; j < sv.n_columns; ++j) out << ",norm_" << j;
    for (std::size_t j = 0; j < sv.n_columns; ++j) out << ",raw_" << j;
    if (!labels.empty()) out << ",label";
    out << '\n';
    for (std::size_t i = 0; i < sv.n; ++i) {
        out << i << ',' << csv::format_double(sv.final_score[i]);
        for (std::size_t j = 0; j < sv.n_columns; ++j)
            out << ',' << csv::format_double(sv.norm[i * sv.n_columns + j]);
        for (std::size_t j = 0; j < sv.n_columns; ++j)
            out << ',' << csv::format_double(sv.raw[i * sv.n_columns + j]);
        if (!labels.empty()) out << ',' << labels[i];
        out << '\n';
    }
    if (!out) throw DataError("short write to " + path);
}

// Ground-truth sidecar for generated data: outlier rows and the features
// that make each of them anomalous.
inline void write_truth_csv(const std::string& path, const GroundTruth& truth) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    csv::write_row(out, "row", "relevant_features");
    for (std::size_t i = 0; i < truth.outlier_rows.size(); ++i) {
        std::string feats;
        for (std::size_t f : truth.relevant_features[i]) {
            if (!feats.empty()) feats += ';';
            feats += std::to_string(f);
        }
        csv::write_row(out, truth.outlier_rows[i], feats);
    }
}

}  // namespace aida
