#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

#include "aida/csv.hpp"
#include "aida/detector.hpp"
#include "aida/errors.hpp"

namespace aida {

// Versioned line-oriented text format. Doubles are written in the shortest
// exact decimal form and parsed back with from_chars, so a save/load round
// trip reproduces the model bit for bit.
namespace model_io {

constexpr int kFormatVersion = 1;

namespace detail {

inline std::string expect_token(std::istream& in, const char* what) {
    std::string tok;
    if (!(in >> tok)) throw DataError(std::string("model file truncated, expected ") + what);
    return tok;
}

inline double read_double(std::istream& in, const char* what) {
    const std::string tok = expect_token(in, what);
    double v = 0.0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
        throw DataError(std::string("bad numeric field for ") + what + ": " + tok);
    return v;
}

inline std::uint64_t read_u64(std::istream& in, const char* what) {
    const std::string tok = expect_token(in, what);
    std::uint64_t v = 0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
        throw DataError(std::string("bad integer field for ") + what + ": " + tok);
    return v;
}

inline std::size_t read_size(std::istream& in, const char* what) {
    return static_cast<std::size_t>(read_u64(in, what));
}

inline void expect_keyword(std::istream& in, const std::string& kw) {
    const std::string tok = expect_token(in, kw.c_str());
    if (tok != kw) throw DataError("model file corrupt: expected '" + kw + "', got '" + tok + "'");
}

// The writer emits exactly one separating space, so consume it and take the
// rest verbatim (names may be empty or contain spaces).
inline std::string read_rest_of_line(std::istream& in) {
    if (in.peek() == ' ') in.get();
    std::string line;
    std::getline(in, line);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

}  // namespace detail

inline void save(const Model& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write model file: " + path);
    const auto d = [&](double v) { return csv::format_double(v); };

    out << "aida-model " << kFormatVersion << "\n";
    out << "params " << model.params.n_subsamples << ' ' << model.params.psi_min << ' '
        << model.params.psi_max << ' '
        << (model.params.feature_bagging ? (*model.params.feature_bagging ? "on" : "off") : "auto")
        << ' ' << model.params.seed << ' ' << d(model.params.p) << "\n";
    out << "score " << (model.params.score.fn == ScoreFn::Expectation ? "expectation" : "variance")
        << ' ' << (model.params.score.alpha_mode == AlphaMode::Fixed ? "fixed" : "uniform") << ' '
        << d(model.params.score.alpha) << ' ' << d(model.params.score.alpha_min) << ' '
        << d(model.params.score.alpha_max) << "\n";
    const char* agg = model.params.aggregation == Aggregation::Average ? "average"
                      : model.params.aggregation == Aggregation::Max   ? "max"
                                                                       : "aom";
    out << "aggregation " << agg << ' ' << model.params.aom_q << "\n";
    out << "bagging " << (model.bagging ? 1 : 0) << "\n";
    out << "dims " << model.d_num << ' ' << model.d_nom << "\n";
    for (const auto& name : model.feature_names) out << "feature " << name << "\n";
    for (std::size_t k = 0; k < model.d_nom; ++k) {
        out << "classes " << k << ' ' << model.nominal_classes[k].size() << "\n";
        for (const auto& label : model.nominal_classes[k]) out << "class " << label << "\n";
    }
    out << "freq " << model.freq.n_train << "\n";
    for (std::size_t k = 0; k < model.freq.n_features(); ++k) {
        out << "counts " << model.freq.counts[k].size();
        for (auto c : model.freq.counts[k]) out << ' ' << c;
        out << "\n";
    }
    out << "subsamples " << model.subsamples.size() << "\n";
    for (const auto& sub : model.subsamples) {
        out << "sub " << sub.psi << ' ' << d(sub.alpha) << "\n";
        out << "subspace " << sub.subspace.size();
        for (auto f : sub.subspace) out << ' ' << f;
        out << "\n";
        for (std::size_t t = 0; t < sub.psi; ++t) {
            out << "num";
            for (std::size_t f = 0; f < model.d_num; ++f) out << ' ' << d(sub.numeric[t * model.d_num + f]);
            out << "\n";
            if (model.d_nom) {
                out << "nom";
                for (std::size_t f = 0; f < model.d_nom; ++f) out << ' ' << sub.nominal[t * model.d_nom + f];
                out << "\n";
            }
        }
    }
    out << "aom-order";
    for (auto o : model.aom_order) out << ' ' << o;
    out << "\n";
    out << "zscore " << model.zscore_mean.size();
    for (std::size_t f = 0; f < model.zscore_mean.size(); ++f)
        out << ' ' << d(model.zscore_mean[f]) << ' ' << d(model.zscore_std[f]);
    out << "\nend\n";
    if (!out) throw DataError("short write to model file: " + path);
}

inline Model load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open model file: " + path);
    using namespace detail;

    expect_keyword(in, "aida-model");
    const auto version = read_u64(in, "format version");
    if (version != kFormatVersion)
        throw DataError("unsupported model format version " + std::to_string(version));

    Model model;
    expect_keyword(in, "params");
    model.params.n_subsamples = read_size(in, "N");
    model.params.psi_min = read_size(in, "psi_min");
    model.params.psi_max = read_size(in, "psi_max");
    const std::string bag = expect_token(in, "bagging mode");
    if (bag == "auto")
        model.params.feature_bagging.reset();
    else if (bag == "on" || bag == "off")
        model.params.feature_bagging = bag == "on";
    else
        throw DataError("bad bagging mode: " + bag);
    model.params.seed = read_u64(in, "seed");
    model.params.p = read_double(in, "p");

    expect_keyword(in, "score");
    const std::string fn = expect_token(in, "score function");
    if (fn == "expectation")
        model.params.score.fn = ScoreFn::Expectation;
    else if (fn == "variance")
        model.params.score.fn = ScoreFn::Variance;
    else
        throw DataError("bad score function: " + fn);
    const std::string mode = expect_token(in, "alpha mode");
    if (mode == "fixed")
        model.params.score.alpha_mode = AlphaMode::Fixed;
    else if (mode == "uniform")
        model.params.score.alpha_mode = AlphaMode::Uniform;
    else
        throw DataError("bad alpha mode: " + mode);
    model.params.score.alpha = read_double(in, "alpha");
    model.params.score.alpha_min = read_double(in, "alpha_min");
    model.params.score.alpha_max = read_double(in, "alpha_max");

    expect_keyword(in, "aggregation");
    const std::string agg = expect_token(in, "aggregation kind");
    if (agg == "average")
        model.params.aggregation = Aggregation::Average;
    else if (agg == "max")
        model.params.aggregation = Aggregation::Max;
    else if (agg == "aom")
        model.params.aggregation = Aggregation::Aom;
    else
        throw DataError("bad aggregation kind: " + agg);
    model.params.aom_q = read_size(in, "aom q");

    expect_keyword(in, "bagging");
    model.bagging = read_u64(in, "bagging flag") != 0;
    expect_keyword(in, "dims");
    model.d_num = read_size(in, "d_num");
    model.d_nom = read_size(in, "d_nom");
    for (std::size_t f = 0; f < model.d_num + model.d_nom; ++f) {
        expect_keyword(in, "feature");
        model.feature_names.push_back(read_rest_of_line(in));
    }
    model.nominal_classes.resize(model.d_nom);
    for (std::size_t k = 0; k < model.d_nom; ++k) {
        expect_keyword(in, "classes");
        if (read_size(in, "class feature index") != k) throw DataError("class block out of order");
        const std::size_t count = read_size(in, "class count");
        for (std::size_t c = 0; c < count; ++c) {
            expect_keyword(in, "class");
            model.nominal_classes[k].push_back(read_rest_of_line(in));
        }
    }
    expect_keyword(in, "freq");
    model.freq.n_train = read_size(in, "n_train");
    model.freq.counts.resize(model.d_nom);
    for (std::size_t k = 0; k < model.d_nom; ++k) {
        expect_keyword(in, "counts");
        const std::size_t count = read_size(in, "count size");
        model.freq.counts[k].resize(count);
        for (auto& c : model.freq.counts[k]) c = static_cast<std::int64_t>(read_u64(in, "class count"));
    }
    expect_keyword(in, "subsamples");
    model.subsamples.resize(read_size(in, "subsample count"));
    for (auto& sub : model.subsamples) {
        expect_keyword(in, "sub");
        sub.psi = read_size(in, "psi");
        sub.alpha = read_double(in, "subsample alpha");
        expect_keyword(in, "subspace");
        sub.subspace.resize(read_size(in, "subspace size"));
        for (auto& f : sub.subspace) f = read_size(in, "subspace feature");
        sub.numeric.resize(sub.psi * model.d_num);
        sub.nominal.resize(sub.psi * model.d_nom);
        for (std::size_t t = 0; t < sub.psi; ++t) {
            expect_keyword(in, "num");
            for (std::size_t f = 0; f < model.d_num; ++f)
                sub.numeric[t * model.d_num + f] = read_double(in, "subsample value");
            if (model.d_nom) {
                expect_keyword(in, "nom");
                for (std::size_t f = 0; f < model.d_nom; ++f)
                    sub.nominal[t * model.d_nom + f] =
                        static_cast<std::int32_t>(read_u64(in, "subsample nominal id"));
            }
        }
    }
    expect_keyword(in, "aom-order");
    model.aom_order.resize(model.subsamples.size());
    for (auto& o : model.aom_order) o = read_size(in, "aom order entry");
    expect_keyword(in, "zscore");
    const std::size_t n_z = read_size(in, "zscore count");
    model.zscore_mean.resize(n_z);
    model.zscore_std.resize(n_z);
    for (std::size_t f = 0; f < n_z; ++f) {
        model.zscore_mean[f] = read_double(in, "zscore mean");
        model.zscore_std[f] = read_double(in, "zscore std");
    }
    expect_keyword(in, "end");
    return model;
}

}  // namespace model_io

}  // namespace aida
