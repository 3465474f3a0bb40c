// Command-line front end: data generation, training, scoring, explanation,
// distance profile plots, benchmarks, and the isolation probability table.

#include <chrono>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aida/aida.hpp"
#include "aida/parallel.hpp"

namespace {

using namespace aida;

std::vector<std::size_t> parse_size_list(const std::string& text) {
    std::vector<std::size_t> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t end = std::min(text.find(',', start), text.size());
        const std::string tok = text.substr(start, end - start);
        if (!tok.empty()) out.push_back(static_cast<std::size_t>(std::stoull(tok)));
        start = end + 1;
    }
    if (out.empty()) throw ConfigError("empty list: " + text);
    return out;
}

// "0,1:5;2,3,4:5" -> two subspaces with their outlier counts
std::vector<SubspaceSpec> parse_subspaces(const std::string& text) {
    std::vector<SubspaceSpec> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t end = std::min(text.find(';', start), text.size());
        const std::string group = text.substr(start, end - start);
        if (!group.empty()) {
            const std::size_t colon = group.find(':');
            if (colon == std::string::npos)
                throw ConfigError("subspace group needs 'features:outliers': " + group);
            SubspaceSpec s;
            s.features = parse_size_list(group.substr(0, colon));
            s.outliers = static_cast<std::size_t>(std::stoull(group.substr(colon + 1)));
            out.push_back(std::move(s));
        }
        start = end + 1;
    }
    return out;
}

GeneratorKind parse_kind(const std::string& kind) {
    if (kind == "two_clusters_2d") return GeneratorKind::TwoClusters2d;
    if (kind == "cross") return GeneratorKind::Cross;
    if (kind == "hidden_subspace") return GeneratorKind::HiddenSubspace;
    throw ConfigError("unknown generator kind: " + kind);
}

std::string truth_path_for(const std::string& data_path) {
    const std::size_t dot = data_path.rfind('.');
    const std::string stem = dot == std::string::npos ? data_path : data_path.substr(0, dot);
    return stem + ".truth.csv";
}

struct DataFlags {
    std::string input;
    std::string nominal_cols;
    std::optional<std::size_t> label_col;

    void attach(CLI::App* cmd) {
        cmd->add_option("--input", input, "input dataset CSV")->required();
        cmd->add_option("--nominal-cols", nominal_cols, "comma-separated nominal column indices");
        cmd->add_option("--label-col", label_col, "index of the 0/1 label column");
    }

    Dataset load() const {
        std::vector<std::size_t> noms;
        if (!nominal_cols.empty()) noms = parse_size_list(nominal_cols);
        return load_csv(input, noms, label_col);
    }
};

struct ModelFlags {
    std::size_t n_subsamples = 100;
    std::size_t psi_min = 50;
    std::size_t psi_max = 512;
    double alpha = 1.0;
    std::string alpha_uniform;
    std::string score_fn = "variance";
    double p = 1.0;
    std::string bagging = "auto";
    std::string aggregation = "aom";
    std::size_t q = 5;

    void attach(CLI::App* cmd) {
        cmd->add_option("--N", n_subsamples, "number of subsamples");
        cmd->add_option("--psi-min", psi_min, "minimum subsample size");
        cmd->add_option("--psi-max", psi_max, "maximum subsample size");
        cmd->add_option("--alpha", alpha, "gap weight exponent");
        cmd->add_option("--alpha-uniform", alpha_uniform, "draw alpha per subsample, e.g. 0.5,1.5");
        cmd->add_option("--score", score_fn, "score function: expectation|variance");
        cmd->add_option("--p", p, "distance exponent");
        cmd->add_option("--bagging", bagging, "feature bagging: auto|on|off");
        cmd->add_option("--aggregation", aggregation, "aggregation: average|max|aom");
        cmd->add_option("--q", q, "subsamples per AOM bucket");
    }

    ModelParams params(std::uint64_t seed) const {
        ModelParams mp;
        mp.n_subsamples = n_subsamples;
        mp.psi_min = psi_min;
        mp.psi_max = psi_max;
        mp.p = p;
        mp.aom_q = q;
        mp.seed = seed;
        if (score_fn == "expectation")
            mp.score.fn = ScoreFn::Expectation;
        else if (score_fn == "variance")
            mp.score.fn = ScoreFn::Variance;
        else
            throw ConfigError("unknown score function: " + score_fn);
        mp.score.alpha = alpha;
        if (!alpha_uniform.empty()) {
            const auto comma = alpha_uniform.find(',');
            if (comma == std::string::npos) throw ConfigError("--alpha-uniform needs 'lo,hi'");
            mp.score.alpha_mode = AlphaMode::Uniform;
            mp.score.alpha_min = std::stod(alpha_uniform.substr(0, comma));
            mp.score.alpha_max = std::stod(alpha_uniform.substr(comma + 1));
        }
        if (bagging == "on")
            mp.feature_bagging = true;
        else if (bagging == "off")
            mp.feature_bagging = false;
        else if (bagging != "auto")
            throw ConfigError("unknown bagging mode: " + bagging);
        if (aggregation == "average")
            mp.aggregation = Aggregation::Average;
        else if (aggregation == "max")
            mp.aggregation = Aggregation::Max;
        else if (aggregation == "aom")
            mp.aggregation = Aggregation::Aom;
        else
            throw ConfigError("unknown aggregation: " + aggregation);
        return mp;
    }
};

struct TixFlags {
    std::size_t repetitions = 10;  // M
    std::size_t max_iterations = 0;
    double delta_min = 0.01;
    double delta_max = 0.015;
    double temperature = 0.0;
    bool greedy = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--M", repetitions, "elimination repetitions per subsample");
        cmd->add_option("--L", max_iterations, "iteration cap (0: 50 * d)");
        cmd->add_option("--delta-min", delta_min, "relative drop, lower bound");
        cmd->add_option("--delta-max", delta_max, "relative drop, upper bound");
        cmd->add_option("--T", temperature, "fixed temperature (overrides the delta range)");
        cmd->add_flag("--greedy", greedy, "disable the stochastic acceptance rule");
    }

    TixParams params(std::uint64_t seed, unsigned threads) const {
        TixParams tp;
        tp.repetitions = repetitions;
        tp.max_iterations = max_iterations;
        tp.delta_min = delta_min;
        tp.delta_max = delta_max;
        tp.greedy = greedy;
        tp.seed = seed;
        tp.threads = threads;
        if (temperature > 0.0) {
            tp.t_mode = TemperatureMode::FixedT;
            tp.temperature = temperature;
        }
        return tp;
    }
};

int cmd_gen(const std::string& kind, std::size_t n, std::size_t d, const std::string& subspaces,
            const std::string& out, std::uint64_t seed) {
    GeneratorSpec spec;
    spec.kind = parse_kind(kind);
    spec.n = n;
    spec.d = d;
    spec.seed = seed;
    if (!subspaces.empty()) spec.subspaces = parse_subspaces(subspaces);
    auto gen = generate(spec);
    save_csv(gen.data, out);
    write_truth_csv(truth_path_for(out), gen.truth);
    std::cout << "wrote " << out << " (" << gen.data.n << " rows, " << gen.data.d()
              << " features, " << gen.truth.outlier_rows.size() << " outliers) and "
              << truth_path_for(out) << "\n";
    return 0;
}

int cmd_fit(const DataFlags& data, const ModelFlags& mf, const std::string& model_out, bool zscore,
            std::uint64_t seed) {
    Dataset train = data.load();
    ZscoreParams zp;
    if (zscore) zp = zscore_normalize(train);
    Model model = fit(train, mf.params(seed));
    if (zscore) {
        model.zscore_mean = zp.mean;
        model.zscore_std = zp.stddev;
        for (std::size_t f : zp.constant_features)
            model.warnings.push_back("constant feature " + model.feature_names[f] +
                                     " normalized to all-zero");
    }
    model_io::save(model, model_out);
    for (const auto& w : model.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "wrote " << model_out << " (" << model.n_subsamples() << " subsamples, bagging "
              << (model.bagging ? "on" : "off") << ")\n";
    return 0;
}

int cmd_score(const DataFlags& data, const std::string& model_path, const std::string& out,
              unsigned threads) {
    const Model model = model_io::load(model_path);
    Dataset test = data.load();
    if (model.has_zscore()) {
        ZscoreParams zp;
        zp.mean = model.zscore_mean;
        zp.stddev = model.zscore_std;
        apply_zscore(test, zp);
    }
    const ScoreVector sv = score_all(model, test, threads);
    for (const auto& w : sv.warnings) std::cerr << "warning: " << w << "\n";
    write_scores_csv(out, sv, test.labels);
    std::cout << "wrote " << out << "\n";
    if (test.has_labels()) std::cout << "AUC " << csv::format_double(auc(sv.final_score, test.labels)) << "\n";
    return 0;
}

int cmd_explain(const DataFlags& data, const std::string& model_path, std::size_t row,
                const TixFlags& tf, bool do_refine, double beta, std::size_t k_min,
                const std::string& offset_mode, const std::string& out, std::uint64_t seed,
                unsigned threads) {
    const Model model = model_io::load(model_path);
    Dataset ds = data.load();
    if (model.has_zscore()) {
        ZscoreParams zp;
        zp.mean = model.zscore_mean;
        zp.stddev = model.zscore_std;
        apply_zscore(ds, zp);
    }
    if (row >= ds.n) throw ConfigError("row index out of range");
    const auto renom = reencode_nominal(model, ds);
    const RowRef x{ds.num_row(row), {renom.data() + row * ds.d_nom, ds.d_nom}};
    const TixParams tp = tf.params(seed, threads);
    if (do_refine) {
        RefineParams rp;
        rp.beta = beta;
        rp.k_min = k_min;
        if (offset_mode == "rank")
            rp.offset_mode = OffsetMode::Rank;
        else if (offset_mode != "additive")
            throw ConfigError("unknown offset mode: " + offset_mode);
        const RefineResult res = refine(model, x, tp, rp);
        write_explain_report(out, model.feature_names, res);
        std::cout << "wrote " << out << " (refined, " << res.stage_sizes.size() << " stages)\n";
    } else {
        const PathLengthTable table = tix(model, x, tp);
        write_explain_report(out, model.feature_names, table);
        std::cout << "wrote " << out << "\n";
    }
    return 0;
}

std::vector<std::size_t> order_from_report(const std::string& path) {
    const auto rows = csv::read_file(path);
    std::vector<std::size_t> order;
    for (std::size_t i = 1; i < rows.size(); ++i)
        order.push_back(static_cast<std::size_t>(std::stoull(rows[i].at(0))));
    return order;
}

int cmd_dpp(const DataFlags& data, const std::string& model_path, std::size_t row,
            const std::string& order_text, const std::string& order_from, std::size_t m_max,
            std::size_t subsample, const std::string& out, const std::string& svg_out) {
    Dataset ds = data.load();
    std::vector<std::size_t> order;
    if (!order_text.empty())
        order = parse_size_list(order_text);
    else if (!order_from.empty())
        order = order_from_report(order_from);
    else
        throw ConfigError("dpp needs --order or --order-from");
    if (m_max == 0) m_max = std::min<std::size_t>(order.size(), 20);

    DppSummary summary;
    std::vector<std::string> names;
    if (!model_path.empty()) {
        const Model model = model_io::load(model_path);
        if (model.has_zscore()) {
            ZscoreParams zp;
            zp.mean = model.zscore_mean;
            zp.stddev = model.zscore_std;
            apply_zscore(ds, zp);
        }
        if (row >= ds.n) throw ConfigError("row index out of range");
        const auto renom = reencode_nominal(model, ds);
        const RowRef x{ds.num_row(row), {renom.data() + row * ds.d_nom, ds.d_nom}};
        summary = dpp(model, subsample, x, order, m_max);
        names = model.feature_names;
    } else {
        if (row >= ds.n) throw ConfigError("row index out of range");
        const FrequencyTable ft = nominal_frequencies(ds);
        const MetricConfig base = MetricConfig::manhattan(ds.d_num, ds.d_nom);
        summary = dpp(view(ds), ft, base, row_ref(ds, row), order, m_max);
        names = ds.feature_names;
    }
    write_dpp_csv(out, names, summary);
    std::cout << "wrote " << out << "\n";
    if (!svg_out.empty()) {
        write_dpp_svg(summary, names, svg_out);
        std::cout << "wrote " << svg_out << "\n";
    }
    return 0;
}

int cmd_bench_cross(const std::vector<std::size_t>& dims, const std::string& mode,
                    std::size_t executions, std::size_t n, const ModelFlags& mf, const TixFlags& tf,
                    const std::string& out, std::uint64_t seed, unsigned threads) {
    std::vector<std::string> modes;
    if (mode == "sa" || mode == "both") modes.push_back("sa");
    if (mode == "greedy" || mode == "both") modes.push_back("greedy");
    if (modes.empty()) throw ConfigError("unknown mode: " + mode);

    std::ofstream detail(out);
    if (!detail) throw DataError("cannot write file: " + out);
    csv::write_row(detail, "d", "mode", "execution", "minimal_subspace");
    std::cout << "d,mode,mean_minimal_subspace,std\n";
    for (std::size_t d : dims) {
        for (const auto& m : modes) {
            std::vector<double> sizes;
            for (std::size_t e = 0; e < executions; ++e) {
                GeneratorSpec gspec;
                gspec.kind = GeneratorKind::Cross;
                gspec.n = n;
                gspec.d = d;
                gspec.seed = derive_seed(seed, d, e);
                const auto gen = generate(gspec);
                ModelParams mp = mf.params(derive_seed(seed, d, e) ^ 0xf1);
                mp.feature_bagging = false;  // explanation runs on the full feature space
                const Model model = fit(gen.data, mp);
                TixParams tp = tf.params(derive_seed(seed, d, e) ^ 0x71, threads);
                tp.greedy = m == "greedy";
                const std::size_t row = gen.truth.outlier_rows.front();
                const PathLengthTable table = tix(model, row_ref(gen.data, row), tp);
                const std::size_t ms = minimal_subspace(table.aggregate, gen.truth.relevant_features.front());
                sizes.push_back(static_cast<double>(ms));
                csv::write_row(detail, d, m, e, ms);
            }
            double mean = 0.0;
            for (double s : sizes) mean += s;
            mean /= static_cast<double>(sizes.size());
            double var = 0.0;
            for (double s : sizes) var += (s - mean) * (s - mean);
            const double sd = sizes.size() > 1 ? std::sqrt(var / static_cast<double>(sizes.size() - 1)) : 0.0;
            std::cout << d << ',' << m << ',' << csv::format_double(mean) << ','
                      << csv::format_double(sd) << std::endl;
        }
    }
    return 0;
}

int cmd_bench_runtime(const std::string& out, const ModelFlags& mf, std::uint64_t seed,
                      unsigned threads) {
    // d sweep at n = 1000, n sweep at d = 50, factors 1x / 2x / 4x
    std::ofstream table(out);
    if (!table) throw DataError("cannot write file: " + out);
    csv::write_row(table, "sweep", "n", "d", "seconds");
    const auto run = [&](std::size_t n, std::size_t d, const char* sweep) {
        GeneratorSpec gspec;
        gspec.kind = GeneratorKind::HiddenSubspace;
        gspec.n = n;
        gspec.d = d;
        gspec.subspaces = {{{0, 1}, std::max<std::size_t>(1, n / 100)}};
        gspec.seed = derive_seed(seed, n, d);
        const auto gen = generate(gspec);
        const Model model = fit(gen.data, mf.params(seed));
        const auto t0 = std::chrono::steady_clock::now();
        score_all(model, gen.data, threads);
        const auto t1 = std::chrono::steady_clock::now();
        const double secs = std::chrono::duration<double>(t1 - t0).count();
        csv::write_row(table, sweep, n, d, csv::format_double(secs));
        std::cout << sweep << " n=" << n << " d=" << d << " " << csv::format_double(secs) << "s\n";
        return secs;
    };
    for (std::size_t f : {1, 2, 4}) run(1000, 50 * f, "d");
    for (std::size_t f : {1, 2, 4}) run(1000 * f, 50, "n");
    return 0;
}

int cmd_isoprob(const std::vector<std::size_t>& dims, const std::vector<std::size_t>& rs,
                const std::vector<std::size_t>& hs, const std::string& out) {
    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!out.empty()) {
        file.open(out);
        if (!file) throw DataError("cannot write file: " + out);
        os = &file;
    }
    csv::write_row(*os, "d", "r", "h_max", "probability");
    for (std::size_t d : dims)
        for (std::size_t r : rs)
            for (std::size_t h : hs) {
                if (r > d) continue;
                csv::write_row(*os, d, r, h,
                               csv::format_double(hidden_subspace_probability({d, r, h})));
            }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"AIDA anomaly detection and TIX explanation toolkit"};
    app.require_subcommand(1);
    app.set_config("--config")->description("key=value file supplying any flag");

    std::uint64_t seed = 0;
    unsigned threads = aida::default_thread_count();
    app.add_option("--seed", seed, "root random seed")->capture_default_str();
    app.add_option("--threads", threads, "worker thread count")->capture_default_str();

    // gen
    auto* gen = app.add_subcommand("gen", "generate a synthetic dataset");
    std::string gen_kind, gen_subspaces, gen_out;
    std::size_t gen_n = 1000, gen_d = 2;
    gen->add_option("--kind", gen_kind, "two_clusters_2d|cross|hidden_subspace")->required();
    gen->add_option("--n", gen_n, "rows");
    gen->add_option("--d", gen_d, "features");
    gen->add_option("--subspaces", gen_subspaces, "hidden subspaces, e.g. 0,1:5;2,3,4:5");
    gen->add_option("--out", gen_out, "output CSV (truth sidecar written next to it)")->required();

    // fit
    auto* fitc = app.add_subcommand("fit", "train a detector and persist it");
    DataFlags fit_data;
    ModelFlags fit_model;
    std::string fit_out;
    bool fit_zscore = false;
    fit_data.attach(fitc);
    fit_model.attach(fitc);
    fitc->add_option("--model-out", fit_out, "output model file")->required();
    fitc->add_flag("--zscore", fit_zscore, "Z-score the training data; the transform is stored");

    // score
    auto* scorec = app.add_subcommand("score", "score a dataset with a trained model");
    DataFlags score_data;
    std::string score_model, score_out;
    score_data.attach(scorec);
    scorec->add_option("--model", score_model, "model file")->required();
    scorec->add_option("--out", score_out, "output scores CSV")->required();

    // explain
    auto* explainc = app.add_subcommand("explain", "rank the features behind one row's anomaly");
    DataFlags explain_data;
    TixFlags explain_tix;
    std::string explain_model, explain_out, explain_offsets = "additive";
    std::size_t explain_row = 0, explain_kmin = 10;
    double explain_beta = 1.5;
    bool explain_refine = false;
    explain_data.attach(explainc);
    explain_tix.attach(explainc);
    explainc->add_option("--model", explain_model, "model file (fitted without bagging)")->required();
    explainc->add_option("--row", explain_row, "row to explain")->required();
    explainc->add_flag("--refine", explain_refine, "iterative top-k refinement");
    explainc->add_option("--beta", explain_beta, "refinement rate");
    explainc->add_option("--kmin", explain_kmin, "terminal feature count");
    explainc->add_option("--offset-mode", explain_offsets, "additive|rank");
    explainc->add_option("--out", explain_out, "output report CSV")->required();

    // dpp
    auto* dppc = app.add_subcommand("dpp", "distance profile plot data for one row");
    DataFlags dpp_data;
    std::string dpp_model, dpp_order, dpp_order_from, dpp_out, dpp_svg_out;
    std::size_t dpp_row = 0, dpp_mmax = 0, dpp_sub = 0;
    dpp_data.attach(dppc);
    dppc->add_option("--model", dpp_model, "optional model file; without it the whole input is the sample");
    dppc->add_option("--row", dpp_row, "query row")->required();
    dppc->add_option("--order", dpp_order, "feature order, e.g. 3,4,0");
    dppc->add_option("--order-from", dpp_order_from, "take the order from an explain report CSV");
    dppc->add_option("--m-max", dpp_mmax, "prefix count (0: min(20, |order|))");
    dppc->add_option("--subsample", dpp_sub, "subsample index when --model is given");
    dppc->add_option("--out", dpp_out, "output CSV")->required();
    dppc->add_option("--svg", dpp_svg_out, "optional SVG boxplot output");

    // bench
    auto* benchc = app.add_subcommand("bench", "cross-dataset explanation benchmark / runtime sweep");
    ModelFlags bench_model;
    TixFlags bench_tix;
    bool bench_cross = false, bench_runtime = false;
    std::string bench_d = "5,10,20,30,50", bench_mode = "both", bench_out = "bench.csv";
    std::size_t bench_exec = 10, bench_n = 1000;
    bench_model.attach(benchc);
    bench_tix.attach(benchc);
    benchc->add_flag("--cross", bench_cross, "minimal-subspace benchmark on the cross dataset");
    benchc->add_flag("--runtime", bench_runtime, "scoring wall-time sweep over n and d");
    benchc->add_option("--d", bench_d, "dimensionalities for --cross");
    benchc->add_option("--mode", bench_mode, "sa|greedy|both");
    benchc->add_option("--executions", bench_exec, "independent executions per configuration");
    benchc->add_option("--n", bench_n, "rows for --cross");
    benchc->add_option("--out", bench_out, "output CSV");

    // isoprob
    auto* isoc = app.add_subcommand("isoprob", "hidden-subspace hit probability table");
    isoc->set_help_flag("--help", "print help");  // frees -h for the depth flag
    std::string iso_d, iso_r, iso_h, iso_out;
    isoc->add_option("--d", iso_d, "feature counts, comma separated")->required();
    isoc->add_option("--r", iso_r, "subspace sizes, comma separated")->required();
    isoc->add_option("--h", iso_h, "tree depths, comma separated")->required();
    isoc->add_option("--out", iso_out, "output CSV (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed()) return cmd_gen(gen_kind, gen_n, gen_d, gen_subspaces, gen_out, seed);
        if (fitc->parsed()) return cmd_fit(fit_data, fit_model, fit_out, fit_zscore, seed);
        if (scorec->parsed()) return cmd_score(score_data, score_model, score_out, threads);
        if (explainc->parsed())
            return cmd_explain(explain_data, explain_model, explain_row, explain_tix, explain_refine,
                               explain_beta, explain_kmin, explain_offsets, explain_out, seed, threads);
        if (dppc->parsed())
            return cmd_dpp(dpp_data, dpp_model, dpp_row, dpp_order, dpp_order_from, dpp_mmax, dpp_sub,
                           dpp_out, dpp_svg_out);
        if (benchc->parsed()) {
            if (bench_cross)
                return cmd_bench_cross(parse_size_list(bench_d), bench_mode, bench_exec, bench_n,
                                       bench_model, bench_tix, bench_out, seed, threads);
            if (bench_runtime) return cmd_bench_runtime(bench_out, bench_model, seed, threads);
            throw aida::ConfigError("bench needs --cross or --runtime");
        }
        if (isoc->parsed())
            return cmd_isoprob(parse_size_list(iso_d), parse_size_list(iso_r), parse_size_list(iso_h),
                               iso_out);
        throw aida::ConfigError("no subcommand given");
    } catch (const aida::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const aida::DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
