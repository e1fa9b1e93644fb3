#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "obraf/forest.hpp"
#include "obraf/serialize.hpp"
#include "synthetic.hpp"

using namespace obraf;

namespace {

// Normalizes in place and returns the params, the usual training preamble.
std::pair<Dataset, NormalizationParams> normalized_copy(const Dataset& ds) {
    const NormalizationParams p = fit_normalizer(ds);
    return {apply_normalizer(ds, p), p};
}

double training_accuracy_forest(const ForestModel& model, const Dataset& raw) {
    int correct = 0;
    for (int i = 0; i < raw.rows(); ++i)
        if (predict_forest(model, raw.features.row(i)) == raw.labels[static_cast<std::size_t>(i)])
            ++correct;
    return static_cast<double>(correct) / raw.rows();
}

std::string file_contents(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct FileGuard {
    std::string path;
    ~FileGuard() { std::remove(path.c_str()); }
};

} // namespace

TEST_CASE("train_forest basics", "[forest]") {
    const auto raw = synthetic::make_separable(40, 3, 21);
    const auto [ds, norm] = normalized_copy(raw);

    SECTION("T=1 reduces to a single bagged tree") {
        ForestParams params;
        params.num_trees = 1;
        const ForestModel model = train_forest(ds, norm, ForestKind::ObRafM, params, 11);
        REQUIRE(model.trees.size() == 1);

        // The same derived seed grown by hand gives the same tree.
        Rng rng(derive_seed(11, 0));
        BagSample bag = draw_bag(ds.rows(), rng);
        TreeParams tp = params.tree;
        tp.split_kind = SplitKind::Oblique;
        const TreePtr tree = grow_tree(ds.features, ds.labels, std::move(bag.indices),
                                       ds.num_classes, tp, rng);
        CHECK(count_nodes(*model.trees[0]) == count_nodes(*tree));
        for (int i = 0; i < ds.rows(); ++i) {
            const int via_model = predict_forest(model, raw.features.row(i));
            const auto p = predict_tree(*tree, ds.features.row(i));
            int direct = 0;
            for (int c = 1; c < ds.num_classes; ++c)
                if (p(c) > p(direct)) direct = c;
            REQUIRE(via_model == direct);
        }
    }
    SECTION("equal master seeds give identical forests") {
        ForestParams params;
        params.num_trees = 8;
        const ForestModel a = train_forest(ds, norm, ForestKind::Raf, params, 5);
        const ForestModel b = train_forest(ds, norm, ForestKind::Raf, params, 5);
        REQUIRE(a.trees.size() == b.trees.size());
        for (std::size_t t = 0; t < a.trees.size(); ++t)
            CHECK(count_nodes(*a.trees[t]) == count_nodes(*b.trees[t]));
    }
    SECTION("training accuracy is perfect on separable data") {
        ForestParams params;
        params.num_trees = 50;
        const ForestModel model = train_forest(ds, norm, ForestKind::Raf, params, 3);
        CHECK(training_accuracy_forest(model, raw) == 1.0);
    }
}

TEST_CASE("forest prediction aggregates votes", "[forest]") {
    const auto raw = synthetic::make_blobs(
        {.samples_per_class = 30, .dims = 4, .classes = 3, .noise = 1.6, .shear = 0.5, .seed = 8});
    const auto [ds, norm] = normalized_copy(raw);
    ForestParams params;
    params.num_trees = 21;
    const ForestModel model = train_forest(ds, norm, ForestKind::ObRafM, params, 17);

    SECTION("soft vote matches the per-tree majority most of the time") {
        int agree = 0;
        Eigen::RowVectorXd xn(ds.cols());
        for (int i = 0; i < raw.rows(); ++i) {
            xn = raw.features.row(i);
            normalize_row_inplace(xn, norm);
            Eigen::VectorXd majority = Eigen::VectorXd::Zero(ds.num_classes);
            for (const auto& tree : model.trees) {
                const auto p = predict_tree(*tree, xn);
                int arg = 0;
                for (int c = 1; c < ds.num_classes; ++c)
                    if (p(c) > p(arg)) arg = c;
                majority(arg) += 1.0;
            }
            int maj = 0;
            for (int c = 1; c < ds.num_classes; ++c)
                if (majority(c) > majority(maj)) maj = c;
            if (maj == predict_forest(model, raw.features.row(i))) ++agree;
        }
        CHECK(static_cast<double>(agree) / raw.rows() >= 0.95);
    }
    SECTION("predictions are valid class ids") {
        for (int i = 0; i < raw.rows(); ++i) {
            const int p = predict_forest(model, raw.features.row(i));
            REQUIRE(p >= 0);
            REQUIRE(p < ds.num_classes);
        }
    }
    SECTION("hard voting is available and valid") {
        ForestParams hard = params;
        hard.vote = VoteRule::Hard;
        const ForestModel hm = train_forest(ds, norm, ForestKind::ObRafM, hard, 17);
        for (int i = 0; i < 20; ++i) {
            const int p = predict_forest(hm, raw.features.row(i));
            REQUIRE(p >= 0);
            REQUIRE(p < ds.num_classes);
        }
    }
}

TEST_CASE("partition_bag routing rules", "[forest]") {
    // A hand-built router whose scores are fully controlled: the output
    // weights read the (normalized) inputs straight through the direct links.
    const int C = 3;
    RvflModel router;
    router.config.hidden_neurons = 1;
    router.config.activation = Activation::Sine;
    router.input_dim = C;
    router.num_classes = C;
    router.hidden_weights = Eigen::MatrixXd::Zero(C, 1);
    router.hidden_bias = Eigen::VectorXd::Zero(1);
    router.output_weights = Eigen::MatrixXd::Zero(1 + C + 1, C);
    for (int c = 0; c < C; ++c) router.output_weights(1 + c, c) = 1.0; // scores = x

    Eigen::MatrixXd X(2, 3);
    X << 0.2, 0.5, 0.3,  // top-2 = {1, 2}
         0.2, 0.5, 0.3;
    const std::vector<int> y{1, 0}; // row 0 hit, row 1 missed

    SECTION("augment mode") {
        const auto parts = partition_bag(router, X, y, PartitionMode::Augment);
        REQUIRE(parts.size() == 3);
        CHECK(parts[0] == std::vector<int>{1});       // true-class fallback
        CHECK(parts[1] == std::vector<int>{0, 1});
        CHECK(parts[2] == std::vector<int>{0, 1});
    }
    SECTION("replace mode keeps two partitions per sample") {
        const auto parts = partition_bag(router, X, y, PartitionMode::Replace);
        CHECK(parts[0] == std::vector<int>{1});
        CHECK(parts[1] == std::vector<int>{0, 1});
        CHECK(parts[2] == std::vector<int>{0}); // second-best replaced by the truth
    }
    SECTION("membership counts stay within [2n, 3n]") {
        const auto raw = synthetic::make_blobs(
            {.samples_per_class = 25, .dims = 5, .classes = 4, .seed = 77});
        const auto [ds, norm] = normalized_copy(raw);
        Rng rng(5);
        const RvflModel trained = train_rvfl(ds.features, ds.labels, 4, sample_config(rng), rng);
        const auto parts = partition_bag(trained, ds.features, ds.labels);
        std::size_t total = 0;
        for (const auto& p : parts) total += p.size();
        CHECK(total >= 2 * static_cast<std::size_t>(ds.rows()));
        CHECK(total <= 3 * static_cast<std::size_t>(ds.rows()));

        // Every sample's true class partition contains it when missed by the
        // router, so partition c always holds all bag rows whose label is c
        // or whose top-2 includes c.
        for (int i = 0; i < ds.rows(); ++i) {
            const auto [t1, t2] = top_two(score(trained, ds.features.row(i)));
            const int truth = ds.labels[static_cast<std::size_t>(i)];
            std::set<int> expected{t1, t2};
            expected.insert(truth);
            for (int c = 0; c < 4; ++c) {
                const bool member =
                    std::find(parts[static_cast<std::size_t>(c)].begin(),
                              parts[static_cast<std::size_t>(c)].end(),
                              i) != parts[static_cast<std::size_t>(c)].end();
                REQUIRE(member == (expected.count(c) > 0));
            }
        }
    }
}

TEST_CASE("train_hybrid structure", "[forest]") {
    const auto raw = synthetic::make_blobs({.samples_per_class = 30,
                                            .dims = 5,
                                            .classes = 4,
                                            .noise = 1.2,
                                            .confusable_pairs = 1,
                                            .seed = 15});
    const auto [ds, norm] = normalized_copy(raw);
    HybridParams params;
    params.num_base_classifiers = 6;
    const HybridModel model = train_hybrid(ds, norm, params, 99);

    REQUIRE(model.base_classifiers.size() == 6);
    for (const auto& base : model.base_classifiers) {
        REQUIRE(base.partition_trees.size() == 4);
        // Rebuild the bag and partitions to audit tree membership.
        Rng rng(base.bag_seed);
        BagSample bag = draw_bag(ds.rows(), rng);
        Eigen::MatrixXd bag_X(ds.rows(), ds.cols());
        std::vector<int> bag_y(static_cast<std::size_t>(ds.rows()));
        for (int i = 0; i < ds.rows(); ++i) {
            bag_X.row(i) = ds.features.row(bag.indices[static_cast<std::size_t>(i)]);
            bag_y[static_cast<std::size_t>(i)] =
                ds.labels[static_cast<std::size_t>(bag.indices[static_cast<std::size_t>(i)])];
        }
        const auto parts = partition_bag(base.router, bag_X, bag_y, params.partition);
        for (int c = 0; c < 4; ++c) {
            const auto& members = parts[static_cast<std::size_t>(c)];
            if (members.empty()) {
                CHECK(base.partition_trees[static_cast<std::size_t>(c)] == nullptr);
                continue;
            }
            REQUIRE(base.partition_trees[static_cast<std::size_t>(c)] != nullptr);
            // The tree's root counts must equal the partition's label tally.
            std::vector<std::int64_t> want(4, 0);
            for (int r : members) ++want[static_cast<std::size_t>(bag_y[static_cast<std::size_t>(r)])];
            std::function<std::vector<std::int64_t>(const TreeNode&)> root_counts =
                [&](const TreeNode& node) -> std::vector<std::int64_t> {
                if (node.is_leaf()) return node.leaf_counts;
                auto l = root_counts(*node.left);
                const auto r = root_counts(*node.right);
                for (std::size_t k = 0; k < l.size(); ++k) l[k] += r[k];
                return l;
            };
            CHECK(root_counts(*base.partition_trees[static_cast<std::size_t>(c)]) == want);
            // Partition c contains every bag sample with true class c.
            for (int i = 0; i < ds.rows(); ++i)
                if (bag_y[static_cast<std::size_t>(i)] == c)
                    REQUIRE(std::find(members.begin(), members.end(), i) != members.end());
        }
    }
}

TEST_CASE("hybrid prediction", "[forest]") {
    const auto raw = synthetic::make_blobs({.samples_per_class = 40,
                                            .dims = 6,
                                            .classes = 4,
                                            .noise = 1.0,
                                            .confusable_pairs = 2,
                                            .seed = 42});
    const auto [ds, norm] = normalized_copy(raw);

    SECTION("predictions are valid and deterministic") {
        HybridParams params;
        params.num_base_classifiers = 10;
        const HybridModel model = train_hybrid(ds, norm, params, 7);
        for (int i = 0; i < 30; ++i) {
            const int p1 = predict_hybrid(model, raw.features.row(i));
            const int p2 = predict_hybrid(model, raw.features.row(i));
            REQUIRE(p1 == p2);
            REQUIRE(p1 >= 0);
            REQUIRE(p1 < 4);
        }
    }
    SECTION("hybrid beats or matches a single oblique tree") {
        HybridParams params;
        params.num_base_classifiers = 10;
        const HybridModel hybrid = train_hybrid(ds, norm, params, 31);

        TreeParams tp;
        tp.split_kind = SplitKind::Oblique;
        Rng rng(31);
        const TreePtr single = grow_tree(ds.features, ds.labels, ds.num_classes, tp, rng);

        // Held-out draw from the same class geometry.
        const auto test_raw = synthetic::make_blobs(synthetic::BlobsSpec{.samples_per_class = 40,
                                                                         .dims = 6,
                                                                         .classes = 4,
                                                                         .noise = 1.0,
                                                                         .confusable_pairs = 2,
                                                                         .seed = 42}
                                                        .test_split(4242));

        int hybrid_ok = 0, single_ok = 0;
        Eigen::RowVectorXd xn(ds.cols());
        for (int i = 0; i < test_raw.rows(); ++i) {
            if (predict_hybrid(hybrid, test_raw.features.row(i)) ==
                test_raw.labels[static_cast<std::size_t>(i)])
                ++hybrid_ok;
            xn = test_raw.features.row(i);
            normalize_row_inplace(xn, norm);
            const auto p = predict_tree(*single, xn);
            int arg = 0;
            for (int c = 1; c < 4; ++c)
                if (p(c) > p(arg)) arg = c;
            if (arg == test_raw.labels[static_cast<std::size_t>(i)]) ++single_ok;
        }
        CHECK(hybrid_ok >= single_ok);
    }
    SECTION("route_all queries every tree") {
        HybridParams params;
        params.num_base_classifiers = 5;
        params.route_all = true;
        const HybridModel model = train_hybrid(ds, norm, params, 13);
        for (int i = 0; i < 10; ++i) {
            const int p = predict_hybrid(model, raw.features.row(i));
            REQUIRE(p >= 0);
            REQUIRE(p < 4);
        }
    }
}

TEST_CASE("training is schedule independent", "[forest]") {
    const auto raw = synthetic::make_blobs(
        {.samples_per_class = 25, .dims = 4, .classes = 3, .confusable_pairs = 1, .seed = 3});
    const auto [ds, norm] = normalized_copy(raw);

    SECTION("forest: 1 thread vs 4 threads") {
        ForestParams params;
        params.num_trees = 9;
        const ForestModel a = train_forest(ds, norm, ForestKind::ObRafM, params, 21, 1);
        const ForestModel b = train_forest(ds, norm, ForestKind::ObRafM, params, 21, 4);
        FileGuard fa{"forest_t1.json"}, fb{"forest_t4.json"};
        save_model(a, fa.path);
        save_model(b, fb.path);
        REQUIRE(file_contents(fa.path) == file_contents(fb.path));
    }
    SECTION("hybrid: 1 thread vs 3 threads") {
        HybridParams params;
        params.num_base_classifiers = 5;
        const HybridModel a = train_hybrid(ds, norm, params, 8, 1);
        const HybridModel b = train_hybrid(ds, norm, params, 8, 3);
        FileGuard fa{"hybrid_t1.json"}, fb{"hybrid_t3.json"};
        save_model(a, fa.path);
        save_model(b, fb.path);
        REQUIRE(file_contents(fa.path) == file_contents(fb.path));
    }
}

TEST_CASE("model serialization round-trips", "[forest]") {
    const auto raw = synthetic::make_blobs(
        {.samples_per_class = 20, .dims = 4, .classes = 3, .confusable_pairs = 1, .seed = 19});
    const auto [ds, norm] = normalized_copy(raw);

    SECTION("forest") {
        ForestParams params;
        params.num_trees = 7;
        const ForestModel model = train_forest(ds, norm, ForestKind::ObRafM, params, 55);
        FileGuard f{"roundtrip_forest.json"};
        save_model(model, f.path);
        const AnyModel loaded = load_model(f.path);
        REQUIRE(std::holds_alternative<ForestModel>(loaded));
        for (int i = 0; i < raw.rows(); ++i)
            REQUIRE(predict_any(loaded, raw.features.row(i)) ==
                    predict_forest(model, raw.features.row(i)));

        // Saving the loaded model reproduces the file byte for byte.
        FileGuard f2{"roundtrip_forest2.json"};
        save_model(std::get<ForestModel>(loaded), f2.path);
        REQUIRE(file_contents(f.path) == file_contents(f2.path));
    }
    SECTION("hybrid") {
        HybridParams params;
        params.num_base_classifiers = 4;
        const HybridModel model = train_hybrid(ds, norm, params, 56);
        FileGuard f{"roundtrip_hybrid.json"};
        save_model(model, f.path);
        const AnyModel loaded = load_model(f.path);
        REQUIRE(std::holds_alternative<HybridModel>(loaded));
        for (int i = 0; i < raw.rows(); ++i)
            REQUIRE(predict_any(loaded, raw.features.row(i)) ==
                    predict_hybrid(model, raw.features.row(i)));
    }
    SECTION("damaged file is a data error") {
        FileGuard f{"not_a_model.json"};
        std::ofstream(f.path) << "{\"format\": \"something else\"}";
        CHECK_THROWS_AS(load_model(f.path), DataError);
        CHECK_THROWS_AS(load_model("missing_model.json"), DataError);
    }
}

TEST_CASE("accuracy variance shrinks as the ensemble grows", "[forest]") {
    // Noisy blobs so single trees disagree; five seeds per ensemble size.
    const synthetic::BlobsSpec spec{.samples_per_class = 60,
                                    .dims = 4,
                                    .classes = 3,
                                    .noise = 2.2,
                                    .shear = 0.4,
                                    .seed = 101};
    const auto raw = synthetic::make_blobs(spec);
    const auto test = synthetic::make_blobs(spec.test_split(202));
    const auto [ds, norm] = normalized_copy(raw);

    auto accuracy_at = [&](int T, std::uint64_t seed) {
        ForestParams params;
        params.num_trees = T;
        const ForestModel model = train_forest(ds, norm, ForestKind::ObRafM, params, seed);
        int ok = 0;
        for (int i = 0; i < test.rows(); ++i)
            if (predict_forest(model, test.features.row(i)) ==
                test.labels[static_cast<std::size_t>(i)])
                ++ok;
        return static_cast<double>(ok) / test.rows();
    };

    auto variance_over_seeds = [&](int T) {
        std::vector<double> accs;
        for (std::uint64_t s = 1; s <= 5; ++s) accs.push_back(accuracy_at(T, s));
        double mean = 0.0;
        for (double a : accs) mean += a;
        mean /= static_cast<double>(accs.size());
        double var = 0.0;
        for (double a : accs) var += (a - mean) * (a - mean);
        return var / static_cast<double>(accs.size());
    };

    const double var_small = variance_over_seeds(10);
    const double var_large = variance_over_seeds(100);
    CHECK(var_large <= var_small + 1e-4); // shrinks, or statistically flat
}
