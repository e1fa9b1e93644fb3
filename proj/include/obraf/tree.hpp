#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "obraf/errors.hpp"
#include "obraf/numerics.hpp"
#include "obraf/random.hpp"

namespace obraf {

// =============================================================================
// Splits and nodes
// =============================================================================

enum class SplitKind { Oblique, AxisParallel };

// Hyperplane over a feature subset. Routing is sign(w . x[subset] + bias):
// negative goes left, non-negative goes right. Axis-parallel thresholds are
// the degenerate case with a single weight of 1 and bias = -threshold.
struct HyperplaneSplit {
    std::vector<int> feature_subset;
    Eigen::VectorXd weights;
    double bias = 0.0;
    SplitKind kind = SplitKind::Oblique;

    double project(const Eigen::MatrixXd& X, int row) const {
        double s = bias;
        for (std::size_t k = 0; k < feature_subset.size(); ++k)
            s += weights(static_cast<Eigen::Index>(k)) * X(row, feature_subset[k]);
        return s;
    }
    bool goes_right(const Eigen::MatrixXd& X, int row) const { return project(X, row) >= 0.0; }
    bool goes_right(const Eigen::RowVectorXd& x) const {
        double s = bias;
        for (std::size_t k = 0; k < feature_subset.size(); ++k)
            s += weights(static_cast<Eigen::Index>(k)) * x(feature_subset[k]);
        return s >= 0.0;
    }
};

// Internal nodes carry a split and two children; leaves carry the class
// counts of the training samples that reached them.
struct TreeNode {
    std::optional<HyperplaneSplit> split;
    std::unique_ptr<TreeNode> left;
    std::unique_ptr<TreeNode> right;
    std::vector<std::int64_t> leaf_counts;

    bool is_leaf() const { return !split.has_value(); }
};

using TreePtr = std::unique_ptr<TreeNode>;

struct SplitCandidate {
    HyperplaneSplit split;
    double gini_gain = 0.0;
    int target_class = -1; // the "one" of the one-vs-all problem; -1 for axis splits
};

struct TreeParams {
    int q = 0;                        // features per node; 0 means round(sqrt(d)), min 1
    int max_depth = std::numeric_limits<int>::max();
    double top_fraction = 0.5;        // share of classes tried one-vs-all
    int top_k_min_classes = 4;        // restriction applies only when K exceeds this
    SplitKind split_kind = SplitKind::Oblique;
    double min_gain = 1e-12;
    int min_samples_split = 2;
    bool use_second_plane = true;     // fit both proximal planes (bisector split)

    int resolved_q(int d) const {
        int v = q > 0 ? q : static_cast<int>(std::lround(std::sqrt(static_cast<double>(d))));
        return std::clamp(v, 1, d);
    }
};

// =============================================================================
// Gini impurity
// =============================================================================

inline double gini_impurity(std::span<const std::int64_t> counts) {
    std::int64_t total = 0;
    for (auto c : counts) {
        if (c < 0) throw DataError("gini_impurity: negative count");
        total += c;
    }
    if (total == 0) throw DataError("gini_impurity: empty node");
    const double n = static_cast<double>(total);
    double sum_sq = 0.0;
    for (auto c : counts) {
        const double p = static_cast<double>(c) / n;
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

// Parent impurity minus the sample-weighted child impurity. The children
// must partition the parent counts and both be non-empty.
inline double gini_gain(std::span<const std::int64_t> parent, std::span<const std::int64_t> left,
                        std::span<const std::int64_t> right) {
    if (parent.size() != left.size() || parent.size() != right.size())
        throw DataError("gini_gain: count vector size mismatch");
    std::int64_t np = 0, nl = 0, nr = 0;
    for (std::size_t i = 0; i < parent.size(); ++i) {
        if (left[i] + right[i] != parent[i])
            throw DataError("gini_gain: children do not partition the parent");
        np += parent[i];
        nl += left[i];
        nr += right[i];
    }
    if (nl == 0 || nr == 0) throw DataError("gini_gain: empty child");
    const double wl = static_cast<double>(nl) / static_cast<double>(np);
    const double wr = static_cast<double>(nr) / static_cast<double>(np);
    return gini_impurity(parent) - (wl * gini_impurity(left) + wr * gini_impurity(right));
}

// =============================================================================
// MPSVM planes and bisectors
// =============================================================================

// Plane in subset coordinates, as w . x + bias = 0.
struct PlaneEquation {
    Eigen::VectorXd weights;
    double bias = 0.0;
};

namespace detail {

inline Eigen::MatrixXd augment_negative_ones(const Eigen::MatrixXd& M) {
    Eigen::MatrixXd out(M.rows(), M.cols() + 1);
    out << M, Eigen::VectorXd::Constant(M.rows(), -1.0);
    return out;
}

inline PlaneEquation plane_from_eigvec(const Eigen::VectorXd& z) {
    PlaneEquation p;
    const Eigen::Index q = z.size() - 1;
    p.weights = z.head(q);
    p.bias = -z(q); // [A -e] convention: plane is w.x - z_last = 0
    return p;
}

} // namespace detail

// Two proximal planes, each closest to one class, from the pencil of the
// stacked-moment matrices. plane1 hugs A, plane2 hugs B.
inline std::pair<PlaneEquation, PlaneEquation> mpsvm_hyperplane(const Eigen::MatrixXd& A,
                                                                const Eigen::MatrixXd& B) {
    if (A.rows() == 0 || B.rows() == 0) throw DataError("mpsvm_hyperplane: empty class");
    const Eigen::MatrixXd Aa = detail::augment_negative_ones(A);
    const Eigen::MatrixXd Ba = detail::augment_negative_ones(B);
    const Eigen::MatrixXd G = Aa.transpose() * Aa;
    const Eigen::MatrixXd H = Ba.transpose() * Ba;
    return {detail::plane_from_eigvec(gen_eig_smallest(G, H).eigenvector),
            detail::plane_from_eigvec(gen_eig_smallest(H, G).eigenvector)};
}

struct BisectorPair {
    std::optional<PlaneEquation> difference;
    std::optional<PlaneEquation> sum;
};

namespace detail {

// Both angle bisectors of two planes, computed on unit-normalized
// equations. Parallel planes collapse one of them; a degenerate bisector
// (weight norm below 1e-10) is left empty.
inline BisectorPair bisector_pair(const PlaneEquation& p1, const PlaneEquation& p2) {
    const double n1 = p1.weights.norm();
    const double n2 = p2.weights.norm();
    if (n1 <= 1e-12 || n2 <= 1e-12)
        throw NumericError("bisector_splits: plane with zero weight vector");
    const Eigen::VectorXd w1 = p1.weights / n1;
    const Eigen::VectorXd w2 = p2.weights / n2;
    const double b1 = p1.bias / n1;
    const double b2 = p2.bias / n2;

    BisectorPair out;
    PlaneEquation diff{w1 - w2, b1 - b2};
    PlaneEquation sum{w1 + w2, b1 + b2};
    if (diff.weights.norm() >= 1e-10) out.difference = std::move(diff);
    if (sum.weights.norm() >= 1e-10) out.sum = std::move(sum);
    return out;
}

} // namespace detail

// The valid angle bisectors of two planes, difference bisector first.
// Returns one plane when the inputs are parallel; empty only if both
// bisectors degenerate.
inline std::vector<PlaneEquation> bisector_splits(const PlaneEquation& p1,
                                                  const PlaneEquation& p2) {
    auto pair = detail::bisector_pair(p1, p2);
    std::vector<PlaneEquation> out;
    if (pair.difference) out.push_back(std::move(*pair.difference));
    if (pair.sum) out.push_back(std::move(*pair.sum));
    return out;
}

// =============================================================================
// Split search
// =============================================================================

namespace detail {

inline std::vector<std::int64_t> tally(const std::vector<int>& labels,
                                       std::span<const int> rows, int num_classes) {
    std::vector<std::int64_t> counts(static_cast<std::size_t>(num_classes), 0);
    for (int r : rows) ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(r)])];
    return counts;
}

inline int count_present(std::span<const std::int64_t> counts) {
    int k = 0;
    for (auto c : counts)
        if (c > 0) ++k;
    return k;
}

} // namespace detail

// Classes tried one-vs-all at a node: all present classes, unless more than
// min_classes are present, in which case only the ceil(top_fraction * K)
// most frequent (ties broken toward the lower class id).
inline std::vector<int> select_candidate_classes(std::span<const std::int64_t> counts,
                                                 double top_fraction, int min_classes) {
    std::vector<int> present;
    for (std::size_t c = 0; c < counts.size(); ++c)
        if (counts[c] > 0) present.push_back(static_cast<int>(c));
    std::stable_sort(present.begin(), present.end(), [&](int a, int b) {
        return counts[static_cast<std::size_t>(a)] > counts[static_cast<std::size_t>(b)];
    });
    const int k = static_cast<int>(present.size());
    if (k > min_classes) {
        const int keep = std::max(
            1, static_cast<int>(std::ceil(top_fraction * static_cast<double>(k))));
        if (keep < k) present.resize(static_cast<std::size_t>(keep));
    }
    return present;
}

namespace detail {

// Gathers the node rows restricted to the feature subset.
inline Eigen::MatrixXd gather(const Eigen::MatrixXd& X, std::span<const int> rows,
                              std::span<const int> subset) {
    Eigen::MatrixXd S(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(subset.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t k = 0; k < subset.size(); ++k)
            S(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = X(rows[i], subset[k]);
    return S;
}

struct ScoredPlane {
    PlaneEquation plane;
    double gain = 0.0;
    int target_class = -1;
    std::int64_t target_count = 0;
    int bisector_rank = 0; // 0 = difference bisector, 1 = sum
};

// Candidate ordering: gain, then target-class count, then lower class id,
// then the difference bisector.
inline bool better_candidate(const ScoredPlane& a, const ScoredPlane& b) {
    if (a.gain != b.gain) return a.gain > b.gain;
    if (a.target_count != b.target_count) return a.target_count > b.target_count;
    if (a.target_class != b.target_class) return a.target_class < b.target_class;
    return a.bisector_rank < b.bisector_rank;
}

} // namespace detail

// One-vs-all MPSVM split search. Draws a single random feature subset of
// size q for the node, fits proximal planes for each candidate class, scores
// every bisector by Gini gain, and returns the best. Empty when every
// candidate was degenerate or produced an empty child.
inline std::optional<SplitCandidate> best_oblique_split(const Eigen::MatrixXd& X,
                                                        const std::vector<int>& labels,
                                                        std::span<const int> rows, int num_classes,
                                                        const TreeParams& params, Rng& rng) {
    const auto counts = detail::tally(labels, rows, num_classes);
    if (detail::count_present(counts) < 2)
        throw DataError("best_oblique_split: node has fewer than 2 classes");

    const int d = static_cast<int>(X.cols());
    const int q = params.resolved_q(d);
    const std::vector<int> subset = rng.sample_without_replacement(d, q);
    const Eigen::MatrixXd S = detail::gather(X, rows, subset);
    const Eigen::Index n = S.rows();

    const std::vector<int> candidates =
        select_candidate_classes(counts, params.top_fraction, params.top_k_min_classes);

    std::optional<detail::ScoredPlane> best;
    std::vector<std::int64_t> left(static_cast<std::size_t>(num_classes));
    std::vector<std::int64_t> right(static_cast<std::size_t>(num_classes));

    for (int c : candidates) {
        const std::int64_t nc = counts[static_cast<std::size_t>(c)];
        Eigen::MatrixXd A(nc, q);
        Eigen::MatrixXd B(n - nc, q);
        Eigen::Index ia = 0, ib = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (labels[static_cast<std::size_t>(rows[static_cast<std::size_t>(i)])] == c)
                A.row(ia++) = S.row(i);
            else
                B.row(ib++) = S.row(i);
        }

        std::vector<detail::ScoredPlane> trial;
        try {
            auto [p1, p2] = mpsvm_hyperplane(A, B);
            if (params.use_second_plane) {
                auto bis = detail::bisector_pair(p1, p2);
                if (bis.difference) trial.push_back({std::move(*bis.difference), 0.0, c, nc, 0});
                if (bis.sum) trial.push_back({std::move(*bis.sum), 0.0, c, nc, 1});
            } else {
                if (p1.weights.norm() <= 1e-12) continue;
                trial.push_back({p1, 0.0, c, nc, 0});
            }
        } catch (const NumericError&) {
            continue; // degenerate pencil or planes; try the next class
        } catch (const DataError&) {
            continue;
        }

        for (auto& t : trial) {
            std::fill(left.begin(), left.end(), 0);
            for (Eigen::Index i = 0; i < n; ++i) {
                const double proj = S.row(i).dot(t.plane.weights) + t.plane.bias;
                if (proj < 0.0)
                    ++left[static_cast<std::size_t>(
                        labels[static_cast<std::size_t>(rows[static_cast<std::size_t>(i)])])];
            }
            std::int64_t nl = 0;
            for (std::size_t j = 0; j < left.size(); ++j) {
                nl += left[j];
                right[j] = counts[j] - left[j];
            }
            if (nl == 0 || nl == n) continue; // routes everything one way
            t.gain = gini_gain(counts, left, right);
            if (!best || detail::better_candidate(t, *best)) best = std::move(t);
        }
    }

    if (!best) return std::nullopt;
    SplitCandidate out;
    out.split.feature_subset = subset;
    out.split.weights = std::move(best->plane.weights);
    out.split.bias = best->plane.bias;
    out.split.kind = SplitKind::Oblique;
    out.gini_gain = best->gain;
    out.target_class = best->target_class;
    return out;
}

// Exhaustive threshold scan over a random feature subset. Thresholds are the
// midpoints between consecutive distinct sorted values. Ties break toward
// the lower feature index, then the lower threshold. Empty when every
// selected feature is constant at the node.
inline std::optional<SplitCandidate> best_axis_split(const Eigen::MatrixXd& X,
                                                     const std::vector<int>& labels,
                                                     std::span<const int> rows, int num_classes,
                                                     const TreeParams& params, Rng& rng) {
    const auto counts = detail::tally(labels, rows, num_classes);
    if (detail::count_present(counts) < 2)
        throw DataError("best_axis_split: node has fewer than 2 classes");

    const int d = static_cast<int>(X.cols());
    const int q = params.resolved_q(d);
    const std::vector<int> subset = rng.sample_without_replacement(d, q);
    const std::size_t n = rows.size();

    bool found = false;
    double best_gain = -1.0;
    int best_feature = -1;
    double best_threshold = 0.0;

    std::vector<std::pair<double, int>> vals(n); // (value, label)
    std::vector<std::int64_t> left(static_cast<std::size_t>(num_classes));
    std::vector<std::int64_t> right(static_cast<std::size_t>(num_classes));

    for (int f : subset) {
        for (std::size_t i = 0; i < n; ++i)
            vals[i] = {X(rows[i], f), labels[static_cast<std::size_t>(rows[i])]};
        std::sort(vals.begin(), vals.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        if (vals.front().first == vals.back().first) continue; // constant at this node

        std::fill(left.begin(), left.end(), 0);
        for (std::size_t i = 1; i < n; ++i) {
            ++left[static_cast<std::size_t>(vals[i - 1].second)];
            if (vals[i].first <= vals[i - 1].first) continue;
            const double thr = 0.5 * (vals[i - 1].first + vals[i].first);
            // Guard against midpoint rounding onto the lower value, which
            // would desynchronize the scan counts from the routing rule.
            if (!(vals[i - 1].first < thr && thr <= vals[i].first)) continue;
            for (std::size_t j = 0; j < left.size(); ++j) right[j] = counts[j] - left[j];
            const double gain = gini_gain(counts, left, right);
            if (!found || gain > best_gain) {
                found = true;
                best_gain = gain;
                best_feature = f;
                best_threshold = thr;
            }
        }
    }

    if (!found) return std::nullopt;
    SplitCandidate out;
    out.split.feature_subset = {best_feature};
    out.split.weights = Eigen::VectorXd::Ones(1);
    out.split.bias = -best_threshold;
    out.split.kind = SplitKind::AxisParallel;
    out.gini_gain = best_gain;
    return out;
}

// =============================================================================
// Growth and prediction
// =============================================================================

namespace detail {

inline TreePtr make_leaf(std::vector<std::int64_t> counts) {
    auto node = std::make_unique<TreeNode>();
    node->leaf_counts = std::move(counts);
    return node;
}

inline TreePtr grow_node(const Eigen::MatrixXd& X, const std::vector<int>& labels,
                         std::vector<int> rows, int num_classes, const TreeParams& params,
                         Rng& rng, int depth) {
    auto counts = tally(labels, rows, num_classes);
    const bool pure = count_present(counts) < 2;
    if (pure || depth >= params.max_depth ||
        static_cast<int>(rows.size()) < params.min_samples_split)
        return make_leaf(std::move(counts));

    std::optional<SplitCandidate> cand;
    if (params.split_kind == SplitKind::Oblique) {
        cand = best_oblique_split(X, labels, rows, num_classes, params, rng);
        if (!cand) cand = best_axis_split(X, labels, rows, num_classes, params, rng);
    } else {
        cand = best_axis_split(X, labels, rows, num_classes, params, rng);
    }
    if (!cand || cand->gini_gain <= params.min_gain) return make_leaf(std::move(counts));

    std::vector<int> left_rows, right_rows;
    for (int r : rows) {
        if (cand->split.goes_right(X, r))
            right_rows.push_back(r);
        else
            left_rows.push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    auto node = std::make_unique<TreeNode>();
    node->split = std::move(cand->split);
    node->left = grow_node(X, labels, std::move(left_rows), num_classes, params, rng, depth + 1);
    node->right = grow_node(X, labels, std::move(right_rows), num_classes, params, rng, depth + 1);
    return node;
}

} // namespace detail

// Recursive tree construction. Nodes become leaves when pure, at max depth,
// when the best available gain is at most min_gain, or when no valid split
// exists; oblique search failure falls back to an axis-parallel scan first.
inline TreePtr grow_tree(const Eigen::MatrixXd& X, const std::vector<int>& labels,
                         std::vector<int> rows, int num_classes, const TreeParams& params,
                         Rng& rng) {
    if (rows.empty()) throw DataError("grow_tree: empty data view");
    return detail::grow_node(X, labels, std::move(rows), num_classes, params, rng, 0);
}

inline TreePtr grow_tree(const Eigen::MatrixXd& X, const std::vector<int>& labels,
                         int num_classes, const TreeParams& params, Rng& rng) {
    std::vector<int> rows(static_cast<std::size_t>(X.rows()));
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<int>(i);
    return grow_tree(X, labels, std::move(rows), num_classes, params, rng);
}

// Routes to a leaf and returns its class distribution normalized to sum 1.
inline Eigen::VectorXd predict_tree(const TreeNode& tree, const Eigen::RowVectorXd& x) {
    const TreeNode* node = &tree;
    while (!node->is_leaf()) node = node->split->goes_right(x) ? node->right.get() : node->left.get();
    std::int64_t total = 0;
    for (auto c : node->leaf_counts) total += c;
    Eigen::VectorXd probs(static_cast<Eigen::Index>(node->leaf_counts.size()));
    for (Eigen::Index i = 0; i < probs.size(); ++i)
        probs(i) = static_cast<double>(node->leaf_counts[static_cast<std::size_t>(i)]) /
                   static_cast<double>(total);
    return probs;
}

inline int count_nodes(const TreeNode& tree) {
    if (tree.is_leaf()) return 1;
    return 1 + count_nodes(*tree.left) + count_nodes(*tree.right);
}

inline int tree_depth(const TreeNode& tree) {
    if (tree.is_leaf()) return 0;
    return 1 + std::max(tree_depth(*tree.left), tree_depth(*tree.right));
}

} // namespace obraf
