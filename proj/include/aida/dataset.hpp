#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aida/csv.hpp"
#include "aida/errors.hpp"

namespace aida {

// Column-typed table: numeric features first, nominal features after them.
// Nominal values are dense category ids in [0, #classes) assigned in first
// occurrence order; the original labels are kept for emission.
struct Dataset {
    std::size_t n = 0;
    std::size_t d_num = 0;
    std::size_t d_nom = 0;
    std::vector<double> numeric;                           // row-major, n x d_num
    std::vector<std::int32_t> nominal;                     // row-major, n x d_nom
    std::vector<std::vector<std::string>> nominal_classes; // per nominal feature: id -> label
    std::vector<int> labels;                               // empty, or size n with values {0,1}
    std::vector<std::string> feature_names;                // size d_num + d_nom

    std::size_t d() const { return d_num + d_nom; }
    bool has_labels() const { return !labels.empty(); }

    double num(std::size_t row, std::size_t feat) const { return numeric[row * d_num + feat]; }
    double& num(std::size_t row, std::size_t feat) { return numeric[row * d_num + feat]; }
    std::int32_t nom(std::size_t row, std::size_t feat) const { return nominal[row * d_nom + feat]; }
    std::int32_t& nom(std::size_t row, std::size_t feat) { return nominal[row * d_nom + feat]; }

    std::span<const double> num_row(std::size_t row) const {
        return {numeric.data() + row * d_num, d_num};
    }
    std::span<const std::int32_t> nom_row(std::size_t row) const {
        return {nominal.data() + row * d_nom, d_nom};
    }

    void validate() const {
        if (numeric.size() != n * d_num || nominal.size() != n * d_nom)
            throw DataError("dataset storage does not match its dimensions");
        if (!labels.empty() && labels.size() != n)
            throw DataError("label vector length does not match row count");
        for (int v : labels)
            if (v != 0 && v != 1) throw DataError("labels must be 0 or 1");
        for (double v : numeric)
            if (!std::isfinite(v)) throw DataError("non-finite numeric entry");
        for (std::size_t k = 0; k < d_nom; ++k) {
            const auto n_classes = static_cast<std::int32_t>(nominal_classes[k].size());
            for (std::size_t i = 0; i < n; ++i)
                if (nom(i, k) < 0 || nom(i, k) >= n_classes)
                    throw DataError("nominal id out of range in feature " + std::to_string(k));
        }
    }
};

// Per-feature class counts over the fitting data, used by the nominal
// similarity. Counts always sum to n_train per feature.
struct FrequencyTable {
    std::size_t n_train = 0;
    std::vector<std::vector<std::int64_t>> counts;  // per nominal feature: id -> count

    std::size_t n_features() const { return counts.size(); }

    std::int64_t count(std::size_t feature, std::int32_t cls) const {
        const auto& c = counts[feature];
        if (cls < 0 || static_cast<std::size_t>(cls) >= c.size()) return 0;  // unseen class
        return c[static_cast<std::size_t>(cls)];
    }

    // f(x)(f(x)-1) / ((n+1) n): probability mass of drawing class x twice
    // without replacement, with the +1 in the denominator keeping the
    // derived similarity strictly positive.
    double p2(std::size_t feature, std::int32_t cls) const {
        const auto f = static_cast<double>(count(feature, cls));
        const auto n = static_cast<double>(n_train);
        return f * (f - 1.0) / ((n + 1.0) * n);
    }
};

inline FrequencyTable nominal_frequencies(const Dataset& ds) {
    FrequencyTable ft;
    ft.n_train = ds.n;
    ft.counts.resize(ds.d_nom);
    for (std::size_t k = 0; k < ds.d_nom; ++k) {
        ft.counts[k].assign(ds.nominal_classes[k].size(), 0);
        for (std::size_t i = 0; i < ds.n; ++i)
            ++ft.counts[k][static_cast<std::size_t>(ds.nom(i, k))];
    }
    return ft;
}

// Load a comma-separated file with a mandatory header row. Columns listed in
// nominal_columns are encoded to dense ids in first-occurrence order; the
// label column, when given, is removed from the features. Rows with empty
// cells are rejected.
inline Dataset load_csv(const std::string& path, const std::vector<std::size_t>& nominal_columns = {},
                        std::optional<std::size_t> label_column = std::nullopt) {
    const auto rows = csv::read_file(path);
    const auto& header = rows.front();
    const std::size_t n_cols = header.size();
    for (std::size_t c : nominal_columns)
        if (c >= n_cols) throw ConfigError("nominal column index out of range: " + std::to_string(c));
    if (label_column && *label_column >= n_cols)
        throw ConfigError("label column index out of range: " + std::to_string(*label_column));

    std::vector<bool> is_nominal(n_cols, false);
    for (std::size_t c : nominal_columns) is_nominal[c] = true;
    if (label_column && is_nominal[*label_column])
        throw ConfigError("label column cannot also be nominal");

    std::vector<std::size_t> num_cols, nom_cols;
    for (std::size_t c = 0; c < n_cols; ++c) {
        if (label_column && c == *label_column) continue;
        (is_nominal[c] ? nom_cols : num_cols).push_back(c);
    }

    Dataset ds;
    ds.n = rows.size() - 1;
    if (ds.n == 0) throw DataError("no data rows in " + path);
    ds.d_num = num_cols.size();
    ds.d_nom = nom_cols.size();
    ds.numeric.resize(ds.n * ds.d_num);
    ds.nominal.resize(ds.n * ds.d_nom);
    ds.nominal_classes.resize(ds.d_nom);
    for (std::size_t c : num_cols) ds.feature_names.push_back(header[c]);
    for (std::size_t c : nom_cols) ds.feature_names.push_back(header[c]);
    if (label_column) ds.labels.resize(ds.n);

    std::vector<std::map<std::string, std::int32_t>> class_ids(ds.d_nom);
    for (std::size_t i = 0; i < ds.n; ++i) {
        const auto& cells = rows[i + 1];
        if (cells.size() != n_cols)
            throw DataError("row " + std::to_string(i + 1) + " has " + std::to_string(cells.size()) +
                            " cells, expected " + std::to_string(n_cols));
        for (std::size_t j = 0; j < n_cols; ++j)
            if (cells[j].empty())
                throw DataError("missing value at row " + std::to_string(i + 1) + ", column " +
                                std::to_string(j));
        for (std::size_t f = 0; f < ds.d_num; ++f) {
            const double v = csv::parse_double(cells[num_cols[f]], i + 1, num_cols[f]);
            if (!std::isfinite(v))
                throw DataError("non-finite value at row " + std::to_string(i + 1) + ", column " +
                                std::to_string(num_cols[f]));
            ds.num(i, f) = v;
        }
        for (std::size_t f = 0; f < ds.d_nom; ++f) {
            const std::string& cell = cells[nom_cols[f]];
            auto [it, inserted] = class_ids[f].try_emplace(
                cell, static_cast<std::int32_t>(ds.nominal_classes[f].size()));
            if (inserted) ds.nominal_classes[f].push_back(cell);
            ds.nom(i, f) = it->second;
        }
        if (label_column) {
            const std::string& cell = cells[*label_column];
            if (cell != "0" && cell != "1")
                throw DataError("label at row " + std::to_string(i + 1) + " must be 0 or 1, got '" +
                                cell + "'");
            ds.labels[i] = cell == "1" ? 1 : 0;
        }
    }
    ds.validate();
    return ds;
}

// Emit in stored order: numeric columns, nominal columns, then the label
// column when present. Numeric cells use the shortest exact decimal form, so
// a reload reproduces the values bit for bit.
inline void save_csv(const Dataset& ds, const std::string& path, const std::string& label_name = "label") {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    for (std::size_t f = 0; f < ds.d(); ++f) {
        if (f) out << ',';
        out << ds.feature_names[f];
    }
    if (ds.has_labels()) out << ',' << label_name;
    out << '\n';
    for (std::size_t i = 0; i < ds.n; ++i) {
        for (std::size_t f = 0; f < ds.d_num; ++f) {
            if (f) out << ',';
            out << csv::format_double(ds.num(i, f));
        }
        for (std::size_t f = 0; f < ds.d_nom; ++f) {
            if (ds.d_num || f) out << ',';
            out << ds.nominal_classes[f][static_cast<std::size_t>(ds.nom(i, f))];
        }
        if (ds.has_labels()) out << ',' << ds.labels[i];
        out << '\n';
    }
    if (!out) throw DataError("short write to " + path);
}

struct ZscoreParams {
    std::vector<double> mean;    // per numeric feature
    std::vector<double> stddev;  // sample stddev (ddof = 1); 1.0 for constant features
    std::vector<std::size_t> constant_features;
};

// Center and scale each numeric feature to sample mean 0, sample stddev 1.
// Constant features become all-zero and are reported back instead of
// erroring. Nominal features are untouched.
inline ZscoreParams zscore_normalize(Dataset& ds) {
    if (ds.d_num == 0) throw ConfigError("zscore_normalize requires at least one numeric feature");
    ZscoreParams p;
    p.mean.resize(ds.d_num);
    p.stddev.resize(ds.d_num);
    for (std::size_t f = 0; f < ds.d_num; ++f) {
        double sum = 0.0;
        for (std::size_t i = 0; i < ds.n; ++i) sum += ds.num(i, f);
        const double mean = sum / static_cast<double>(ds.n);
        double ss = 0.0;
        for (std::size_t i = 0; i < ds.n; ++i) {
            const double c = ds.num(i, f) - mean;
            ss += c * c;
        }
        double sd = ds.n > 1 ? std::sqrt(ss / static_cast<double>(ds.n - 1)) : 0.0;
        if (sd == 0.0) {
            p.constant_features.push_back(f);
            sd = 1.0;
        }
        p.mean[f] = mean;
        p.stddev[f] = sd;
        for (std::size_t i = 0; i < ds.n; ++i) ds.num(i, f) = (ds.num(i, f) - mean) / sd;
    }
    return p;
}

// Re-apply a stored transform (e.g. to a test set).
inline void apply_zscore(Dataset& ds, const ZscoreParams& p) {
    if (p.mean.size() != ds.d_num) throw DataError("zscore parameters do not match dataset width");
    for (std::size_t f = 0; f < ds.d_num; ++f)
        for (std::size_t i = 0; i < ds.n; ++i)
            ds.num(i, f) = (ds.num(i, f) - p.mean[f]) / p.stddev[f];
}

}  // namespace aida
