#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <fstream>

#include "aida/dataset.hpp"
#include "aida/generators.hpp"
#include "test_util.hpp"

using namespace aida;
using testutil::TempDir;
using testutil::write_file;

TEST_CASE("load_csv parses a numeric column") {
    TempDir tmp;
    const auto path = tmp.file("a.csv");
    write_file(path, "x\n1.0\n2.0\n3.0\n");
    const Dataset ds = load_csv(path);
    REQUIRE(ds.n == 3);
    REQUIRE(ds.d_num == 1);
    REQUIRE(ds.d_nom == 0);
    CHECK(ds.num(0, 0) == 1.0);
    CHECK(ds.num(2, 0) == 3.0);
    CHECK(ds.feature_names == std::vector<std::string>{"x"});
}

TEST_CASE("nominal columns get first-occurrence ids") {
    TempDir tmp;
    const auto path = tmp.file("a.csv");
    write_file(path, "c\na\nb\na\n");
    const Dataset ds = load_csv(path, {0});
    REQUIRE(ds.d_nom == 1);
    CHECK(ds.nom(0, 0) == 0);
    CHECK(ds.nom(1, 0) == 1);
    CHECK(ds.nom(2, 0) == 0);
    CHECK(ds.nominal_classes[0] == std::vector<std::string>{"a", "b"});
}

TEST_CASE("unparsable numeric cell names row and column") {
    TempDir tmp;
    const auto path = tmp.file("a.csv");
    write_file(path, "x,y\n1.0,2.0\n1.0,abc\n");
    try {
        load_csv(path);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("abc") != std::string::npos);
        CHECK(msg.find("row 2") != std::string::npos);
        CHECK(msg.find("column 1") != std::string::npos);
    }
}

TEST_CASE("empty and degenerate files are rejected") {
    TempDir tmp;
    const auto path = tmp.file("a.csv");
    write_file(path, "");
    CHECK_THROWS_AS(load_csv(path), DataError);
    write_file(path, "x\n");
    CHECK_THROWS_AS(load_csv(path), DataError);  // header only
    write_file(path, "x\n1.0\n\n2.0\n");
    CHECK_THROWS_AS(load_csv(path), DataError);  // blank row = missing value
    write_file(path, "x,y\n1.0\n");
    CHECK_THROWS_AS(load_csv(path), DataError);  // ragged row
    write_file(path, "x\ninf\n");
    CHECK_THROWS_AS(load_csv(path), DataError);  // non-finite
    CHECK_THROWS_AS(load_csv(tmp.file("missing.csv")), DataError);
}

TEST_CASE("label column is extracted and validated") {
    TempDir tmp;
    const auto path = tmp.file("a.csv");
    write_file(path, "x,l\n1.0,0\n2.0,1\n");
    const Dataset ds = load_csv(path, {}, 1);
    REQUIRE(ds.d_num == 1);
    REQUIRE(ds.labels == std::vector<int>{0, 1});
    write_file(path, "x,l\n1.0,2\n");
    CHECK_THROWS_AS(load_csv(path, {}, 1), DataError);
}

TEST_CASE("zscore normalizes to sample statistics") {
    Dataset ds;
    ds.n = 3;
    ds.d_num = 1;
    ds.numeric = {1.0, 2.0, 3.0};
    ds.feature_names = {"x"};
    const ZscoreParams p = zscore_normalize(ds);
    // sample stddev of {1,2,3} is exactly 1, so the result is (x - 2) by hand
    CHECK(ds.numeric == std::vector<double>{-1.0, 0.0, 1.0});
    CHECK(p.mean[0] == 2.0);
    CHECK(p.stddev[0] == 1.0);

    SECTION("idempotent on its own output") {
        Dataset again = ds;
        zscore_normalize(again);
        for (std::size_t i = 0; i < 3; ++i)
            CHECK(std::abs(again.numeric[i] - ds.numeric[i]) < 1e-12);
    }
}

TEST_CASE("constant feature becomes all-zero with a warning") {
    Dataset ds;
    ds.n = 3;
    ds.d_num = 1;
    ds.numeric = {5.0, 5.0, 5.0};
    ds.feature_names = {"x"};
    const ZscoreParams p = zscore_normalize(ds);
    CHECK(ds.numeric == std::vector<double>{0.0, 0.0, 0.0});
    REQUIRE(p.constant_features == std::vector<std::size_t>{0});
}

TEST_CASE("apply_zscore reuses stored parameters") {
    Dataset train;
    train.n = 4;
    train.d_num = 1;
    train.numeric = {0.0, 1.0, 2.0, 3.0};
    train.feature_names = {"x"};
    const ZscoreParams p = zscore_normalize(train);
    Dataset test;
    test.n = 2;
    test.d_num = 1;
    test.numeric = {1.5, 1.5};
    test.feature_names = {"x"};
    apply_zscore(test, p);
    CHECK(test.numeric[0] == test.numeric[1]);
    CHECK(std::abs(test.numeric[0] - (1.5 - p.mean[0]) / p.stddev[0]) < 1e-15);
}

TEST_CASE("nominal frequencies count classes") {
    TempDir tmp;
    const auto path = tmp.file("a.csv");
    write_file(path, "c\na\na\nb\n");
    const Dataset ds = load_csv(path, {0});
    const FrequencyTable ft = nominal_frequencies(ds);
    REQUIRE(ft.n_train == 3);
    CHECK(ft.count(0, 0) == 2);
    CHECK(ft.count(0, 1) == 1);
    CHECK(ft.count(0, 99) == 0);  // unseen class

    SECTION("single class") {
        write_file(path, "c\na\na\na\n");
        const auto ft2 = nominal_frequencies(load_csv(path, {0}));
        CHECK(ft2.count(0, 0) == 3);
    }
    SECTION("empty nominal block") {
        write_file(path, "x\n1\n2\n");
        const auto ft2 = nominal_frequencies(load_csv(path));
        CHECK(ft2.n_features() == 0);
    }
}

TEST_CASE("csv round trip preserves values and ids") {
    GeneratorSpec spec;
    spec.kind = GeneratorKind::Cross;
    spec.n = 64;
    spec.d = 4;
    spec.seed = 11;
    Dataset ds = generate(spec).data;
    // tack on a nominal feature to exercise the mixed path
    ds.d_nom = 1;
    ds.nominal.resize(ds.n);
    ds.nominal_classes = {{"red", "green", "blue"}};
    for (std::size_t i = 0; i < ds.n; ++i) ds.nominal[i] = static_cast<std::int32_t>(i % 3);
    ds.feature_names.push_back("color");

    TempDir tmp;
    const auto path = tmp.file("round.csv");
    save_csv(ds, path);
    const Dataset back = load_csv(path, {4}, 5);
    REQUIRE(back.n == ds.n);
    REQUIRE(back.d_num == ds.d_num);
    REQUIRE(back.d_nom == ds.d_nom);
    CHECK(back.numeric == ds.numeric);  // bitwise, via shortest-exact formatting
    CHECK(back.nominal == ds.nominal);
    CHECK(back.labels == ds.labels);
    CHECK(back.nominal_classes == ds.nominal_classes);
}

TEST_CASE("generators are pure functions of the spec") {
    for (auto kind : {GeneratorKind::TwoClusters2d, GeneratorKind::Cross, GeneratorKind::HiddenSubspace}) {
        GeneratorSpec spec;
        spec.kind = kind;
        spec.n = 200;
        spec.d = kind == GeneratorKind::TwoClusters2d ? 2 : 6;
        spec.seed = 123;
        if (kind == GeneratorKind::HiddenSubspace) spec.subspaces = {{{0, 1}, 4}};
        const auto a = generate(spec);
        const auto b = generate(spec);
        CHECK(a.data.numeric == b.data.numeric);
        CHECK(a.data.labels == b.data.labels);
        CHECK(a.truth.outlier_rows == b.truth.outlier_rows);
    }
}

TEST_CASE("cross plants one outlier in the last two features") {
    GeneratorSpec spec;
    spec.kind = GeneratorKind::Cross;
    spec.n = 1000;
    spec.d = 5;
    spec.seed = 7;
    const auto gen = generate(spec);
    REQUIRE(gen.truth.outlier_rows.size() == 1);
    std::size_t labelled = 0;
    for (int l : gen.data.labels) labelled += static_cast<std::size_t>(l);
    CHECK(labelled == 1);
    CHECK(gen.truth.relevant_features.front() == std::vector<std::size_t>{3, 4});
    // marginally typical in each bar feature alone: strictly inside the
    // range covered by the inlier bars
    const std::size_t row = gen.truth.outlier_rows.front();
    for (std::size_t f : {std::size_t{3}, std::size_t{4}}) {
        double lo = 1e300, hi = -1e300;
        for (std::size_t i = 0; i < gen.data.n; ++i) {
            if (i == row) continue;
            lo = std::min(lo, gen.data.num(i, f));
            hi = std::max(hi, gen.data.num(i, f));
        }
        CHECK(gen.data.num(row, f) > lo);
        CHECK(gen.data.num(row, f) < hi);
    }
}

TEST_CASE("hidden subspace outliers sit outside the inlier correlation band") {
    GeneratorSpec spec;
    spec.kind = GeneratorKind::HiddenSubspace;
    spec.n = 600;
    spec.d = 6;
    spec.seed = 21;
    spec.subspaces = {{{1, 4}, 6}};
    const auto gen = generate(spec);
    REQUIRE(gen.truth.outlier_rows.size() == 6);

    // brute-force nearest-inlier scan within the subspace
    const auto dist2 = [&](std::size_t a, std::size_t b) {
        const double dx = gen.data.num(a, 1) - gen.data.num(b, 1);
        const double dy = gen.data.num(a, 4) - gen.data.num(b, 4);
        return dx * dx + dy * dy;
    };
    std::vector<std::size_t> inliers;
    for (std::size_t i = 0; i < gen.data.n; ++i)
        if (gen.data.labels[i] == 0) inliers.push_back(i);

    std::vector<double> inlier_nn;
    for (std::size_t a : inliers) {
        double best = 1e300;
        for (std::size_t b : inliers)
            if (a != b) best = std::min(best, dist2(a, b));
        inlier_nn.push_back(std::sqrt(best));
    }
    std::sort(inlier_nn.begin(), inlier_nn.end());
    const double p99 = inlier_nn[static_cast<std::size_t>(0.99 * static_cast<double>(inlier_nn.size()))];

    for (std::size_t o : gen.truth.outlier_rows) {
        double best = 1e300;
        for (std::size_t b : inliers) best = std::min(best, dist2(o, b));
        CHECK(std::sqrt(best) > p99);
    }
}

TEST_CASE("generator specs are validated") {
    GeneratorSpec spec;
    spec.kind = GeneratorKind::HiddenSubspace;
    spec.n = 100;
    spec.d = 4;
    spec.subspaces = {{{0, 9}, 2}};  // index out of range
    CHECK_THROWS_AS(generate(spec), ConfigError);
    spec.subspaces = {{{0}, 2}};  // too small
    CHECK_THROWS_AS(generate(spec), ConfigError);
    spec.subspaces = {{{0, 1}, 2}, {{1, 2}, 2}};  // overlap
    CHECK_THROWS_AS(generate(spec), ConfigError);
    spec.subspaces.clear();
    CHECK_THROWS_AS(generate(spec), ConfigError);
    GeneratorSpec tiny;
    tiny.n = 1;
    CHECK_THROWS_AS(generate(tiny), ConfigError);
}
