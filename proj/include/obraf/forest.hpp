#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <exception>
#include <functional>
#include <iostream>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "obraf/dataset.hpp"
#include "obraf/rvfl.hpp"
#include "obraf/tree.hpp"

namespace obraf {

namespace detail {

// Runs fn(0..n-1) over contiguous chunks on num_threads threads (0 means
// hardware concurrency). Each index must be independent; exceptions are
// collected and the first one rethrown after all threads join.
inline void parallel_for(int n, int num_threads, const std::function<void(int)>& fn) {
    if (n <= 0) return;
    int threads = num_threads > 0 ? num_threads
                                  : static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
    if (threads > n) threads = n;
    if (threads == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }

    std::mutex err_mutex;
    std::exception_ptr first_error;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    const int chunk = (n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const int begin = t * chunk;
        const int end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&, begin, end] {
            try {
                for (int i = begin; i < end; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace detail

// =============================================================================
// Plain forests (axis-parallel baseline and oblique)
// =============================================================================

enum class ForestKind { Raf, ObRafM };
enum class VoteRule { Soft, Hard };

inline const char* forest_kind_name(ForestKind k) {
    return k == ForestKind::Raf ? "raf" : "obrafm";
}

struct ForestParams {
    int num_trees = 500;
    TreeParams tree;
    VoteRule vote = VoteRule::Soft;
};

struct ForestModel {
    ForestKind kind = ForestKind::ObRafM;
    std::vector<TreePtr> trees;
    NormalizationParams normalizer;
    std::vector<std::uint64_t> seeds; // per-tree, derived from the master seed
    ForestParams params;
    int num_classes = 0;
    int input_dim = 0;
    std::vector<std::string> label_names;
};

// Trains T bagged trees. Tree t derives its own seed from (master_seed, t)
// and draws its bag and all node-level randomness from it, so the result is
// independent of thread count and schedule.
inline ForestModel train_forest(const Dataset& normalized, const NormalizationParams& normalizer,
                                ForestKind kind, ForestParams params, std::uint64_t master_seed,
                                int num_threads = 0) {
    if (normalized.num_classes < 2) throw DataError("train_forest: need at least 2 classes");
    params.tree.split_kind = kind == ForestKind::Raf ? SplitKind::AxisParallel : SplitKind::Oblique;

    ForestModel model;
    model.kind = kind;
    model.normalizer = normalizer;
    model.params = params;
    model.num_classes = normalized.num_classes;
    model.input_dim = normalized.cols();
    model.label_names = normalized.label_names;
    model.trees.resize(static_cast<std::size_t>(params.num_trees));
    model.seeds.resize(static_cast<std::size_t>(params.num_trees));
    for (int t = 0; t < params.num_trees; ++t)
        model.seeds[static_cast<std::size_t>(t)] = derive_seed(master_seed, static_cast<std::uint64_t>(t));

    const int n = normalized.rows();
    detail::parallel_for(params.num_trees, num_threads, [&](int t) {
        Rng rng(model.seeds[static_cast<std::size_t>(t)]);
        BagSample bag = draw_bag(n, rng);
        model.trees[static_cast<std::size_t>(t)] =
            grow_tree(normalized.features, normalized.labels, std::move(bag.indices),
                      normalized.num_classes, params.tree, rng);
    });
    return model;
}

namespace detail {

inline void accumulate_vote(Eigen::VectorXd& total, const Eigen::VectorXd& probs, VoteRule rule) {
    if (rule == VoteRule::Soft) {
        total += probs;
    } else {
        Eigen::Index best = 0;
        probs.maxCoeff(&best);
        total(best) += 1.0;
    }
}

inline int argmax_lowest(const Eigen::VectorXd& v) {
    int best = 0;
    for (int i = 1; i < v.size(); ++i)
        if (v(i) > v(best)) best = i;
    return best;
}

} // namespace detail

// Mean of the trees' leaf distributions (soft) or vote counts (hard), over
// a raw input row; normalization is applied internally.
inline Eigen::VectorXd forest_scores(const ForestModel& model, const Eigen::RowVectorXd& x_raw) {
    if (x_raw.cols() != model.input_dim) throw DataError("forest_scores: dimension mismatch");
    Eigen::RowVectorXd x = x_raw;
    normalize_row_inplace(x, model.normalizer);
    Eigen::VectorXd total = Eigen::VectorXd::Zero(model.num_classes);
    for (const auto& tree : model.trees)
        detail::accumulate_vote(total, predict_tree(*tree, x), model.params.vote);
    return total / static_cast<double>(model.trees.size());
}

inline int predict_forest(const ForestModel& model, const Eigen::RowVectorXd& x_raw) {
    return detail::argmax_lowest(forest_scores(model, x_raw));
}

// =============================================================================
// Hybrid ensemble: RVFL router + per-class oblique trees
// =============================================================================

// When the router's top-2 misses the true class, Augment adds the true-class
// partition as a third assignment; Replace keeps two partitions by swapping
// the second-best for the true class.
enum class PartitionMode { Augment, Replace };

struct HybridParams {
    int num_base_classifiers = 500;
    TreeParams tree;
    PartitionMode partition = PartitionMode::Augment;
    bool route_all = false; // query every class tree at test time instead of top-2
};

struct HybridBaseClassifier {
    RvflModel router;
    std::vector<TreePtr> partition_trees; // length C; null where the partition was empty
    std::uint64_t bag_seed = 0;
};

struct HybridModel {
    std::vector<HybridBaseClassifier> base_classifiers;
    NormalizationParams normalizer;
    HybridParams params;
    int num_classes = 0;
    int input_dim = 0;
    std::vector<std::string> label_names;
};

// Routes every bag sample to the partitions of its two highest-scoring
// classes; a sample whose true class is missed keeps (or gains, under
// Augment) its true-class partition. Returns per-class lists of bag row
// indices.
inline std::vector<std::vector<int>> partition_bag(const RvflModel& router,
                                                   const Eigen::MatrixXd& X,
                                                   const std::vector<int>& labels,
                                                   PartitionMode mode = PartitionMode::Augment) {
    std::vector<std::vector<int>> parts(static_cast<std::size_t>(router.num_classes));
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const auto [first, second] = top_two(score(router, X.row(i)));
        const int truth = labels[static_cast<std::size_t>(i)];
        const int row = static_cast<int>(i);
        if (truth == first || truth == second) {
            parts[static_cast<std::size_t>(first)].push_back(row);
            parts[static_cast<std::size_t>(second)].push_back(row);
        } else if (mode == PartitionMode::Augment) {
            parts[static_cast<std::size_t>(first)].push_back(row);
            parts[static_cast<std::size_t>(second)].push_back(row);
            parts[static_cast<std::size_t>(truth)].push_back(row);
        } else {
            parts[static_cast<std::size_t>(first)].push_back(row);
            parts[static_cast<std::size_t>(truth)].push_back(row);
        }
    }
    return parts;
}

// Trains T base classifiers, each an RVFL router with a random configuration
// plus one oblique tree per non-empty class partition of the bag.
inline HybridModel train_hybrid(const Dataset& normalized, const NormalizationParams& normalizer,
                                HybridParams params, std::uint64_t master_seed,
                                int num_threads = 0) {
    const int C = normalized.num_classes;
    if (C < 2) throw DataError("train_hybrid: need at least 2 classes");
    if (C == 2)
        std::cerr << "obraf: hybrid with 2 classes: router partitions are duplicates of the "
                     "whole bag; obrafm is the better fit\n";
    params.tree.split_kind = SplitKind::Oblique;

    HybridModel model;
    model.normalizer = normalizer;
    model.params = params;
    model.num_classes = C;
    model.input_dim = normalized.cols();
    model.label_names = normalized.label_names;
    model.base_classifiers.resize(static_cast<std::size_t>(params.num_base_classifiers));

    const int n = normalized.rows();
    detail::parallel_for(params.num_base_classifiers, num_threads, [&](int b) {
        auto& base = model.base_classifiers[static_cast<std::size_t>(b)];
        base.bag_seed = derive_seed(master_seed, static_cast<std::uint64_t>(b));
        Rng rng(base.bag_seed);

        BagSample bag = draw_bag(n, rng);
        Eigen::MatrixXd bag_X(n, normalized.cols());
        std::vector<int> bag_y(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            bag_X.row(i) = normalized.features.row(bag.indices[static_cast<std::size_t>(i)]);
            bag_y[static_cast<std::size_t>(i)] =
                normalized.labels[static_cast<std::size_t>(bag.indices[static_cast<std::size_t>(i)])];
        }

        const RvflConfig config = sample_config(rng);
        base.router = train_rvfl(bag_X, bag_y, C, config, rng);

        const auto parts = partition_bag(base.router, bag_X, bag_y, params.partition);
        base.partition_trees.resize(static_cast<std::size_t>(C));
        for (int c = 0; c < C; ++c) {
            const auto& members = parts[static_cast<std::size_t>(c)];
            if (members.empty()) continue; // recorded as absent, skipped at prediction
            Rng tree_rng(derive_seed(base.bag_seed, 0x7265657eULL, static_cast<std::uint64_t>(c)));
            base.partition_trees[static_cast<std::size_t>(c)] =
                grow_tree(bag_X, bag_y, members, C, params.tree, tree_rng);
        }
    });
    return model;
}

// Per base classifier: score with the router, average the probability
// vectors of the trees for the top-2 classes (all trees under route_all),
// then sum the base votes. A base classifier with no routed tree present
// contributes a zero vote.
inline Eigen::VectorXd hybrid_scores(const HybridModel& model, const Eigen::RowVectorXd& x_raw) {
    if (x_raw.cols() != model.input_dim) throw DataError("hybrid_scores: dimension mismatch");
    Eigen::RowVectorXd x = x_raw;
    normalize_row_inplace(x, model.normalizer);

    Eigen::VectorXd total = Eigen::VectorXd::Zero(model.num_classes);
    Eigen::VectorXd vote(model.num_classes);
    std::vector<int> routed;
    for (const auto& base : model.base_classifiers) {
        routed.clear();
        if (model.params.route_all) {
            for (int c = 0; c < model.num_classes; ++c) routed.push_back(c);
        } else {
            const auto [first, second] = top_two(score(base.router, x));
            routed.push_back(first);
            routed.push_back(second);
        }
        vote.setZero();
        int present = 0;
        for (int c : routed) {
            const auto& tree = base.partition_trees[static_cast<std::size_t>(c)];
            if (!tree) continue;
            vote += predict_tree(*tree, x);
            ++present;
        }
        if (present > 0) total += vote / static_cast<double>(present);
    }
    return total / static_cast<double>(model.base_classifiers.size());
}

inline int predict_hybrid(const HybridModel& model, const Eigen::RowVectorXd& x_raw) {
    return detail::argmax_lowest(hybrid_scores(model, x_raw));
}

// Mean node count per tree; hybrid models average over all partition trees
// that exist.
inline double mean_nodes_per_tree(const ForestModel& model) {
    if (model.trees.empty()) return 0.0;
    std::int64_t total = 0;
    for (const auto& t : model.trees) total += count_nodes(*t);
    return static_cast<double>(total) / static_cast<double>(model.trees.size());
}

inline double mean_nodes_per_tree(const HybridModel& model) {
    std::int64_t total = 0;
    std::int64_t trees = 0;
    for (const auto& base : model.base_classifiers)
        for (const auto& t : base.partition_trees)
            if (t) {
                total += count_nodes(*t);
                ++trees;
            }
    return trees == 0 ? 0.0 : static_cast<double>(total) / static_cast<double>(trees);
}

} // namespace obraf
