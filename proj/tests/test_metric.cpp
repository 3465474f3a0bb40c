#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "aida/generators.hpp"
#include "aida/metric.hpp"
#include "aida/rng.hpp"

using namespace aida;

namespace {

FrequencyTable make_freq(std::size_t n_train, std::vector<std::vector<std::int64_t>> counts) {
    FrequencyTable ft;
    ft.n_train = n_train;
    ft.counts = std::move(counts);
    return ft;
}

Dataset random_mixed(std::size_t n, std::size_t d_num, std::size_t d_nom, std::uint64_t seed) {
    Dataset ds;
    ds.n = n;
    ds.d_num = d_num;
    ds.d_nom = d_nom;
    ds.numeric.resize(n * d_num);
    ds.nominal.resize(n * d_nom);
    Rng rng(seed);
    for (auto& v : ds.numeric) v = rng.uniform(-2.0, 2.0);
    ds.nominal_classes.resize(d_nom);
    for (std::size_t k = 0; k < d_nom; ++k) {
        const std::size_t classes = 2 + rng.index(3);
        for (std::size_t c = 0; c < classes; ++c)
            ds.nominal_classes[k].push_back("c" + std::to_string(c));
        for (std::size_t i = 0; i < n; ++i)
            ds.nom(i, k) = static_cast<std::int32_t>(rng.index(classes));
    }
    for (std::size_t f = 0; f < d_num + d_nom; ++f) ds.feature_names.push_back("f" + std::to_string(f));
    return ds;
}

}  // namespace

TEST_CASE("lp distance basics") {
    MetricConfig cfg = MetricConfig::manhattan(2, 0);
    const std::vector<double> origin{0.0, 0.0};
    CHECK(lp_distance(origin, origin, cfg) == 0.0);
    CHECK(lp_distance(origin, std::vector<double>{1.0, 2.0}, cfg) == 3.0);
    cfg.p = 2.0;
    CHECK(lp_distance(origin, std::vector<double>{3.0, 4.0}, cfg) == Catch::Approx(5.0).margin(1e-12));
    CHECK_THROWS_AS(lp_distance(origin, std::vector<double>{1.0}, cfg), DataError);
}

TEST_CASE("nominal similarity follows the pair-probability form") {
    // three training rows: class a twice, class b once
    const FrequencyTable ft = make_freq(3, {{2, 1}});
    CHECK(nominal_similarity(ft, 0, 0, 0) == 1.0);
    // mismatch against class a: 1 - 2*1/(4*3) = 5/6 by direct evaluation
    CHECK(nominal_similarity(ft, 0, 1, 0) == Catch::Approx(5.0 / 6.0).margin(1e-15));
    // singleton class has zero pair probability: similarity stays 1
    const FrequencyTable single = make_freq(4, {{1, 3}});
    CHECK(nominal_similarity(single, 0, 5, 0) == 1.0);  // unseen query vs singleton
}

TEST_CASE("nominal distance and its cap") {
    const FrequencyTable ft = make_freq(3, {{2, 1}});
    MetricConfig cfg = MetricConfig::manhattan(0, 1);
    const std::vector<std::int32_t> xa{0}, xb{1};
    CHECK(nominal_distance(xa, xa, ft, cfg) == 0.0);
    CHECK(nominal_distance(xb, xa, ft, cfg) == Catch::Approx(-std::log(5.0 / 6.0)).margin(1e-15));
    CHECK(-std::log(5.0 / 6.0) == Catch::Approx(0.18232155679).margin(1e-10));

    SECTION("most frequent class mismatch caps at log((n+1)/2)") {
        for (std::size_t n : {3, 10, 100}) {
            const FrequencyTable full = make_freq(n, {{static_cast<std::int64_t>(n)}});
            const std::vector<std::int32_t> unseen{7}, stored{0};
            const double d = nominal_distance(unseen, stored, full, cfg);
            CHECK(std::abs(d - std::log((static_cast<double>(n) + 1.0) / 2.0)) < 1e-12);
        }
        // algebraic simplification checked numerically for n = 10
        const FrequencyTable full10 = make_freq(10, {{10}});
        CHECK(nominal_distance(std::vector<std::int32_t>{3}, std::vector<std::int32_t>{0}, full10, cfg) ==
              Catch::Approx(std::log(5.5)).margin(1e-12));
    }
}

TEST_CASE("exponential similarity-to-distance map dominates the reciprocal one") {
    // the two maps agree at distance 0 and in the limit, with e^-d below
    // 1/(1+d) in between, i.e. a faster decay of similarity
    for (double d : {0.0, 0.1, 1.0, 5.0, 50.0})
        CHECK(std::exp(-d) <= 1.0 / (1.0 + d) + 1e-15);
}

TEST_CASE("total distance splits into numeric and nominal parts") {
    const FrequencyTable ft = make_freq(3, {{2, 1}});
    MetricConfig cfg = MetricConfig::manhattan(1, 1);
    const std::vector<double> xn{0.0}, yn{2.5};
    const std::vector<std::int32_t> xc{1}, yc{0};
    const RowRef x{xn, xc}, y{yn, yc};
    const double expect = 2.5 + -std::log(5.0 / 6.0);
    CHECK(total_distance(x, y, ft, cfg) == Catch::Approx(expect).margin(1e-15));

    MetricConfig num_only = MetricConfig::manhattan(1, 0);
    CHECK(total_distance({xn, {}}, {yn, {}}, ft, num_only) == 2.5);
    MetricConfig nom_only = MetricConfig::manhattan(0, 1);
    CHECK(total_distance({{}, xc}, {{}, yc}, ft, nom_only) ==
          Catch::Approx(-std::log(5.0 / 6.0)).margin(1e-15));
}

TEST_CASE("distance profile sorts and counts duplicates") {
    Dataset ds;
    ds.n = 3;
    ds.d_num = 1;
    ds.numeric = {3.0, 1.0, 2.0};
    const FrequencyTable ft;
    const MetricConfig cfg = MetricConfig::manhattan(1, 0);
    const std::vector<double> q{0.0};
    const DistanceProfile p = distance_profile({q, {}}, view(ds), ft, cfg);
    CHECK(p.distances == std::vector<double>{0.0, 1.0, 2.0, 3.0});
    CHECK(p.duplicate_count == 0);

    const std::vector<double> dup{2.0};
    const DistanceProfile p2 = distance_profile({dup, {}}, view(ds), ft, cfg);
    CHECK(p2.duplicate_count >= 1);
    CHECK(p2.distances[0] == 0.0);
    CHECK(p2.distances[1] == 0.0);
}

TEST_CASE("fringe point of a sparse region has a larger first gap") {
    GeneratorSpec spec;
    spec.n = 1000;
    spec.seed = 5;
    const auto gen = generate(spec);
    const FrequencyTable ft;
    const MetricConfig cfg = MetricConfig::manhattan(2, 0);

    // A: a planted sparse point; B: the point nearest the inlier center
    const std::size_t a = gen.truth.outlier_rows.front();
    double cx = 0.0, cy = 0.0;
    std::size_t n_in = 0;
    for (std::size_t i = 0; i < gen.data.n; ++i) {
        if (gen.data.labels[i]) continue;
        cx += gen.data.num(i, 0);
        cy += gen.data.num(i, 1);
        ++n_in;
    }
    cx /= static_cast<double>(n_in);
    cy /= static_cast<double>(n_in);
    std::size_t b = 0;
    double best = 1e300;
    for (std::size_t i = 0; i < gen.data.n; ++i) {
        if (gen.data.labels[i]) continue;
        const double d = std::abs(gen.data.num(i, 0) - cx) + std::abs(gen.data.num(i, 1) - cy);
        if (d < best) {
            best = d;
            b = i;
        }
    }
    const DistanceProfile pa = distance_profile(row_ref(gen.data, a), view(gen.data), ft, cfg);
    const DistanceProfile pb = distance_profile(row_ref(gen.data, b), view(gen.data), ft, cfg);
    // both profiles contain the query itself once
    REQUIRE(pa.duplicate_count == 1);
    REQUIRE(pb.duplicate_count == 1);
    CHECK(pa.distances[2] > pb.distances[2]);  // first non-self distance
}

TEST_CASE("symmetry and identity hold exactly on random mixed pairs") {
    const Dataset ds = random_mixed(200, 3, 2, 99);
    const FrequencyTable ft = nominal_frequencies(ds);
    const MetricConfig cfg = MetricConfig::manhattan(3, 2);
    Rng rng(7);
    for (int t = 0; t < 10000; ++t) {
        const std::size_t i = rng.index(ds.n), j = rng.index(ds.n);
        const double dij = total_distance(row_ref(ds, i), row_ref(ds, j), ft, cfg);
        const double dji = total_distance(row_ref(ds, j), row_ref(ds, i), ft, cfg);
        REQUIRE(dij == dji);
        if (i == j) REQUIRE(dij == 0.0);
    }
    for (std::size_t i = 0; i < ds.n; ++i)
        REQUIRE(total_distance(row_ref(ds, i), row_ref(ds, i), ft, cfg) == 0.0);
}

TEST_CASE("triangle inequality holds for the numeric part when p >= 1") {
    Rng rng(31);
    for (double p : {1.0, 1.5, 2.0, 3.0}) {
        MetricConfig cfg = MetricConfig::manhattan(4, 0);
        cfg.p = p;
        for (int t = 0; t < 2000; ++t) {
            std::vector<double> a(4), b(4), c(4);
            for (std::size_t f = 0; f < 4; ++f) {
                a[f] = rng.uniform(-1, 1);
                b[f] = rng.uniform(-1, 1);
                c[f] = rng.uniform(-1, 1);
            }
            const double ab = lp_distance(a, b, cfg);
            const double bc = lp_distance(b, c, cfg);
            const double ac = lp_distance(a, c, cfg);
            REQUIRE(ac <= ab + bc + 1e-12);
        }
    }
}

TEST_CASE("distances are weakly monotone in the weights") {
    Rng rng(41);
    for (int t = 0; t < 500; ++t) {
        MetricConfig cfg = MetricConfig::manhattan(3, 0);
        std::vector<double> x(3), y(3);
        for (std::size_t f = 0; f < 3; ++f) {
            x[f] = rng.uniform(-1, 1);
            y[f] = rng.uniform(-1, 1);
        }
        const double base = lp_distance(x, y, cfg);
        cfg.weights_num[1] = 2.0;
        const double boosted = lp_distance(x, y, cfg);
        if (x[1] != y[1])
            REQUIRE(boosted >= base);
        else
            REQUIRE(boosted == base);
    }
}

TEST_CASE("indicator weights reproduce subspace distances") {
    const Dataset ds = random_mixed(50, 4, 1, 17);
    const FrequencyTable ft = nominal_frequencies(ds);
    const std::vector<std::size_t> subspace{1, 3, 4};  // feature 4 is the nominal one

    MetricConfig by_active = MetricConfig::manhattan(4, 1).with_active({1, 3, 4});
    MetricConfig by_weights = MetricConfig::manhattan(4, 1);
    by_weights.weights_num = {0.0, 1.0, 0.0, 1.0};
    by_weights.weights_nom = {1.0};

    Rng rng(3);
    for (int t = 0; t < 1000; ++t) {
        const std::size_t i = rng.index(ds.n), j = rng.index(ds.n);
        const double da = total_distance(row_ref(ds, i), row_ref(ds, j), ft, by_active);
        const double dw = total_distance(row_ref(ds, i), row_ref(ds, j), ft, by_weights);
        REQUIRE(da == Catch::Approx(dw).margin(1e-12));
    }
}

TEST_CASE("distance cache matches fresh recomputation") {
    const Dataset ds = random_mixed(50, 7, 3, 55);
    const FrequencyTable ft = nominal_frequencies(ds);
    for (double p : {1.0, 2.0}) {
        MetricConfig cfg = MetricConfig::manhattan(7, 3);
        cfg.p = p;
        const std::vector<double> qn{0.1, -0.3, 0.8, 0.0, 1.2, -0.7, 0.4};
        const std::vector<std::int32_t> qc{0, 1, 0};
        const RowRef query{qn, qc};
        DistanceCache cache(query, view(ds), ft, cfg);

        std::vector<std::size_t> removal{2, 9, 0, 8, 5};
        std::vector<std::size_t> active{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
        std::vector<double> got(ds.n);
        for (std::size_t j : removal) {
            cache.remove(j);
            std::erase(active, j);
            cache.current_distances(got);
            const MetricConfig sub = cfg.with_active(active);
            for (std::size_t t = 0; t < ds.n; ++t) {
                const double fresh = total_distance(query, row_ref(ds, t), ft, sub);
                REQUIRE(got[t] == Catch::Approx(fresh).epsilon(1e-9).margin(1e-12));
            }
        }

        SECTION("removing then re-adding restores the original distances (p=" +
                std::to_string(p) + ")") {
            for (auto it = removal.rbegin(); it != removal.rend(); ++it) cache.add(*it);
            cache.current_distances(got);
            for (std::size_t t = 0; t < ds.n; ++t) {
                const double fresh = total_distance(query, row_ref(ds, t), ft, cfg);
                REQUIRE(got[t] == Catch::Approx(fresh).epsilon(1e-9).margin(1e-12));
            }
        }
    }
}

TEST_CASE("nominal feature removal subtracts exactly the per-pair log term") {
    const Dataset ds = random_mixed(30, 2, 2, 77);
    const FrequencyTable ft = nominal_frequencies(ds);
    const MetricConfig cfg = MetricConfig::manhattan(2, 2);
    const std::vector<double> qn{0.5, -0.5};
    const std::vector<std::int32_t> qc{1, 0};
    const RowRef query{qn, qc};

    DistanceCache cache(query, view(ds), ft, cfg);
    std::vector<double> before(ds.n), after(ds.n);
    cache.current_distances(before);
    cache.remove(3);  // second nominal feature
    cache.current_distances(after);
    for (std::size_t t = 0; t < ds.n; ++t) {
        const double term = -std::log(nominal_similarity(ft, 1, qc[1], ds.nom(t, 1)));
        REQUIRE(before[t] - after[t] == Catch::Approx(term).margin(1e-12));
    }
}

TEST_CASE("distances_without previews a removal without mutating") {
    const Dataset ds = random_mixed(20, 3, 0, 5);
    const FrequencyTable ft;
    const MetricConfig cfg = MetricConfig::manhattan(3, 0);
    const std::vector<double> qn{0.0, 0.0, 0.0};
    DistanceCache cache({qn, {}}, view(ds), ft, cfg);
    std::vector<double> preview(ds.n), committed(ds.n), current(ds.n);
    cache.distances_without(1, preview);
    cache.current_distances(current);
    cache.remove(1);
    cache.current_distances(committed);
    CHECK(preview == committed);
    CHECK_THROWS_AS(cache.remove(1), ConfigError);  // not active anymore
    CHECK_THROWS_AS(cache.distances_without(1, preview), ConfigError);
    cache.add(1);
    CHECK_THROWS_AS(cache.add(1), ConfigError);
    std::vector<double> restored(ds.n);
    cache.current_distances(restored);
    for (std::size_t t = 0; t < ds.n; ++t)
        CHECK(restored[t] == Catch::Approx(current[t]).margin(1e-12));
}

TEST_CASE("metric config validation") {
    MetricConfig cfg = MetricConfig::manhattan(2, 0);
    cfg.validate();
    cfg.p = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.p = 1.0;
    cfg.active_features.clear();
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.active_features = {0, 5};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = MetricConfig::manhattan(2, 0);
    cfg.weights_num[0] = -1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
