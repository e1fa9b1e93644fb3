#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <set>

#include "obraf/dataset.hpp"

using namespace obraf;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& content, const std::string& name) {
        path = std::string("obraf_test_") + name + ".csv";
        std::ofstream out(path);
        out << content;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

} // namespace

TEST_CASE("load_csv encodes labels in first-appearance order", "[dataset]") {
    TempFile f("1.0,2.0,a\n3.0,4.0,b\n5.0,6.0,a\n", "labels");
    const Dataset ds = load_csv(f.path);
    REQUIRE(ds.rows() == 3);
    REQUIRE(ds.cols() == 2);
    REQUIRE(ds.num_classes == 2);
    CHECK(ds.labels == std::vector<int>{0, 1, 0});
    CHECK(ds.label_names == std::vector<std::string>{"a", "b"});
    CHECK(ds.feature_names.empty());
}

TEST_CASE("load_csv detects a header row", "[dataset]") {
    TempFile f("x1,x2,class\n1.0,2.0,a\n3.0,4.0,b\n", "header");
    const Dataset ds = load_csv(f.path);
    REQUIRE(ds.rows() == 2);
    CHECK(ds.feature_names == std::vector<std::string>{"x1", "x2"});

    const Dataset by_name = load_csv(f.path, LabelColumn::by_name("class"));
    CHECK(by_name.rows() == 2);
    CHECK(by_name.labels == std::vector<int>{0, 1});
}

TEST_CASE("load_csv supports label column by index", "[dataset]") {
    TempFile f("a,1.0,2.0\nb,3.0,4.0\n", "labelfirst");
    const Dataset ds = load_csv(f.path, LabelColumn::by_index(0));
    REQUIRE(ds.cols() == 2);
    CHECK(ds.labels == std::vector<int>{0, 1});
    CHECK(ds.features(1, 0) == 3.0);
}

TEST_CASE("load_csv reports the failing cell", "[dataset]") {
    TempFile f("1.0,2.0,a\n3.0,oops,b\n", "badcell");
    try {
        load_csv(f.path);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("row 2") != std::string::npos);
        CHECK(msg.find("column 2") != std::string::npos);
        CHECK(msg.find("oops") != std::string::npos);
    }
}

TEST_CASE("load_csv error contracts", "[dataset]") {
    SECTION("ragged rows") {
        TempFile f("1.0,2.0,a\n3.0,b\n", "ragged");
        CHECK_THROWS_AS(load_csv(f.path), DataError);
    }
    SECTION("empty file") {
        TempFile f("", "empty");
        CHECK_THROWS_AS(load_csv(f.path), DataError);
    }
    SECTION("single class refused") {
        TempFile f("1.0,a\n2.0,a\n3.0,a\n", "oneclass");
        CHECK_THROWS_AS(load_csv(f.path), DataError);
    }
    SECTION("missing file") { CHECK_THROWS_AS(load_csv("no_such_file.csv"), DataError); }
}

TEST_CASE("fit_normalizer means and scales", "[dataset]") {
    Dataset ds;
    ds.num_classes = 2;

    SECTION("two-point column") {
        ds.features.resize(2, 1);
        ds.features << 1.0, 3.0;
        ds.labels = {0, 1};
        const auto p = fit_normalizer(ds);
        CHECK(p.means(0) == 2.0);
        CHECK(p.scales(0) == 1.0);
    }
    SECTION("constant column gets scale 1") {
        ds.features.resize(3, 1);
        ds.features << 5.0, 5.0, 5.0;
        ds.labels = {0, 1, 0};
        const auto p = fit_normalizer(ds);
        CHECK(p.means(0) == 5.0);
        CHECK(p.scales(0) == 1.0);
    }
    SECTION("population standard deviation") {
        ds.features.resize(4, 1);
        ds.features << 0.0, 0.0, 3.0, 3.0;
        ds.labels = {0, 1, 0, 1};
        const auto p = fit_normalizer(ds);
        CHECK(p.means(0) == Catch::Approx(1.5));
        CHECK(p.scales(0) == Catch::Approx(1.5));
    }
    SECTION("variance mode divides by the variance instead") {
        ds.features.resize(4, 1);
        ds.features << 0.0, 0.0, 3.0, 3.0;
        ds.labels = {0, 1, 0, 1};
        const auto p = fit_normalizer(ds, NormMode::Variance);
        CHECK(p.scales(0) == Catch::Approx(2.25));
    }
    SECTION("single row refused") {
        ds.features.resize(1, 1);
        ds.features << 1.0;
        ds.labels = {0};
        CHECK_THROWS_AS(fit_normalizer(ds), DataError);
    }
}

TEST_CASE("apply_normalizer centers and scales", "[dataset]") {
    Dataset ds;
    ds.num_classes = 2;
    ds.features.resize(2, 2);
    ds.features << 2.0, 4.0, 2.0, 0.0;
    ds.labels = {0, 1};

    NormalizationParams p;
    p.means.resize(2);
    p.scales.resize(2);
    p.means << 2.0, 2.0;
    p.scales << 1.0, 2.0;

    const Dataset out = apply_normalizer(ds, p);
    CHECK(out.features(0, 0) == 0.0);
    CHECK(out.features(0, 1) == 1.0);
    CHECK(out.features(1, 1) == -1.0);
    CHECK(out.labels == ds.labels);

    SECTION("dimension mismatch") {
        NormalizationParams bad;
        bad.means = Eigen::VectorXd::Zero(3);
        bad.scales = Eigen::VectorXd::Ones(3);
        CHECK_THROWS_AS(apply_normalizer(ds, bad), DataError);
    }
}

TEST_CASE("normalization round-trips and re-fits to identity", "[dataset]") {
    Rng rng(7);
    Dataset ds;
    ds.num_classes = 2;
    ds.features.resize(40, 3);
    for (int i = 0; i < 40; ++i)
        for (int j = 0; j < 3; ++j) ds.features(i, j) = rng.uniform_real(-5.0, 5.0) * (j + 1);
    ds.labels.assign(40, 0);
    for (int i = 0; i < 20; ++i) ds.labels[static_cast<std::size_t>(i)] = 1;

    const auto p = fit_normalizer(ds);
    const Dataset normalized = apply_normalizer(ds, p);

    // Invert and compare.
    for (int i = 0; i < ds.rows(); ++i)
        for (int j = 0; j < ds.cols(); ++j) {
            const double back = normalized.features(i, j) * p.scales(j) + p.means(j);
            REQUIRE(std::abs(back - ds.features(i, j)) < 1e-9);
        }

    // Fitting again on normalized data gives mean 0, scale 1.
    const auto p2 = fit_normalizer(normalized);
    for (int j = 0; j < ds.cols(); ++j) {
        CHECK(std::abs(p2.means(j)) < 1e-9);
        CHECK(std::abs(p2.scales(j) - 1.0) < 1e-9);
    }
}

TEST_CASE("draw_bag contracts", "[dataset]") {
    SECTION("single row") {
        Rng rng(1);
        const BagSample bag = draw_bag(1, rng);
        CHECK(bag.indices == std::vector<int>{0});
        CHECK(bag.oob_indices.empty());
    }
    SECTION("indices and oob partition the rows") {
        Rng rng(42);
        const BagSample bag = draw_bag(200, rng);
        REQUIRE(bag.indices.size() == 200);
        std::set<int> drawn(bag.indices.begin(), bag.indices.end());
        for (int i : bag.indices) {
            REQUIRE(i >= 0);
            REQUIRE(i < 200);
        }
        for (int i : bag.oob_indices) CHECK(drawn.count(i) == 0);
        CHECK(drawn.size() + bag.oob_indices.size() == 200);
    }
    SECTION("distinct fraction is about 1 - 1/e") {
        double total_fraction = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            Rng rng(1000 + static_cast<std::uint64_t>(trial));
            const BagSample bag = draw_bag(1000, rng);
            const std::set<int> distinct(bag.indices.begin(), bag.indices.end());
            total_fraction += static_cast<double>(distinct.size()) / 1000.0;
        }
        const double mean_fraction = total_fraction / 100.0;
        CHECK(std::abs(mean_fraction - (1.0 - std::exp(-1.0))) < 0.05);
    }
    SECTION("same seed gives identical bags") {
        Rng a(99), b(99);
        CHECK(draw_bag(500, a).indices == draw_bag(500, b).indices);
    }
}

namespace {

Dataset two_class_balanced(int n) {
    Dataset ds;
    ds.num_classes = 2;
    ds.features.resize(n, 1);
    ds.labels.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        ds.features(i, 0) = i;
        ds.labels[static_cast<std::size_t>(i)] = i % 2;
    }
    return ds;
}

} // namespace

TEST_CASE("kfold_splits stratifies and partitions", "[dataset]") {
    SECTION("balanced two-class, k=4") {
        const Dataset ds = two_class_balanced(8);
        Rng rng(5);
        const auto folds = kfold_splits(ds, 4, rng);
        REQUIRE(folds.size() == 4);
        for (const auto& f : folds) {
            REQUIRE(f.test.size() == 2);
            const int c0 = ds.labels[static_cast<std::size_t>(f.test[0])];
            const int c1 = ds.labels[static_cast<std::size_t>(f.test[1])];
            CHECK(c0 + c1 == 1); // one row of each class
        }
    }
    SECTION("test folds partition the index set") {
        const Dataset ds = two_class_balanced(22);
        Rng rng(17);
        const auto folds = kfold_splits(ds, 3, rng);
        std::set<int> all;
        std::size_t total = 0;
        for (const auto& f : folds) {
            total += f.test.size();
            for (int i : f.test) all.insert(i);
            CHECK(f.train.size() + f.test.size() == 22);
        }
        CHECK(total == 22);
        CHECK(all.size() == 22);
    }
    SECTION("class counts {7,3} with k=3 give fold sizes {4,3,3}") {
        Dataset ds;
        ds.num_classes = 2;
        ds.features.resize(10, 1);
        ds.labels.resize(10);
        for (int i = 0; i < 10; ++i) {
            ds.features(i, 0) = i;
            ds.labels[static_cast<std::size_t>(i)] = i < 7 ? 0 : 1;
        }
        Rng rng(3);
        const auto folds = kfold_splits(ds, 3, rng);
        // Round-robin assignment: class of 7 contributes {3,2,2}, class of 3
        // contributes {1,1,1}.
        std::multiset<std::size_t> sizes;
        for (const auto& f : folds) sizes.insert(f.test.size());
        CHECK(sizes == std::multiset<std::size_t>{4, 3, 3});
        CHECK(folds[0].test.size() == 4);
    }
    SECTION("class smaller than k is an error") {
        Dataset ds = two_class_balanced(8);
        ds.labels = {0, 0, 0, 0, 0, 0, 1, 1};
        Rng rng(1);
        CHECK_THROWS_AS(kfold_splits(ds, 3, rng), DataError);
    }
    SECTION("deterministic given the seed") {
        const Dataset ds = two_class_balanced(20);
        Rng a(11), b(11);
        const auto fa = kfold_splits(ds, 4, a);
        const auto fb = kfold_splits(ds, 4, b);
        for (std::size_t i = 0; i < fa.size(); ++i) CHECK(fa[i].test == fb[i].test);
    }
}
