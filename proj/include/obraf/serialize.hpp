#pragma once

#include <fstream>
#include <string>
#include <variant>

#include <json.hpp>

#include "obraf/forest.hpp"

namespace obraf {

// JSON model artifacts. Doubles are emitted with shortest round-trip
// formatting, so save -> load -> predict is bit-identical to the original
// model.

namespace detail {

using json = nlohmann::json;

inline json to_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

inline Eigen::VectorXd vector_from_json(const json& a) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = a[static_cast<std::size_t>(i)].get<double>();
    return v;
}

inline json to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Eigen::MatrixXd matrix_from_json(const json& rows) {
    const auto r = static_cast<Eigen::Index>(rows.size());
    const auto c = r == 0 ? 0 : static_cast<Eigen::Index>(rows[0].size());
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j)
            m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].get<double>();
    return m;
}

inline json to_json(const NormalizationParams& p) {
    return {{"means", to_json(p.means)}, {"scales", to_json(p.scales)}};
}

inline NormalizationParams normalizer_from_json(const json& j) {
    return {vector_from_json(j.at("means")), vector_from_json(j.at("scales"))};
}

inline json to_json(const HyperplaneSplit& s) {
    return {{"features", s.feature_subset},
            {"weights", to_json(s.weights)},
            {"bias", s.bias},
            {"kind", s.kind == SplitKind::Oblique ? "oblique" : "axis"}};
}

inline HyperplaneSplit split_from_json(const json& j) {
    HyperplaneSplit s;
    s.feature_subset = j.at("features").get<std::vector<int>>();
    s.weights = vector_from_json(j.at("weights"));
    s.bias = j.at("bias").get<double>();
    s.kind = j.at("kind").get<std::string>() == "oblique" ? SplitKind::Oblique
                                                          : SplitKind::AxisParallel;
    return s;
}

inline json to_json(const TreeNode& node) {
    if (node.is_leaf()) return {{"counts", node.leaf_counts}};
    return {{"split", to_json(*node.split)},
            {"left", to_json(*node.left)},
            {"right", to_json(*node.right)}};
}

inline TreePtr tree_from_json(const json& j) {
    auto node = std::make_unique<TreeNode>();
    if (j.contains("counts")) {
        node->leaf_counts = j.at("counts").get<std::vector<std::int64_t>>();
    } else {
        node->split = split_from_json(j.at("split"));
        node->left = tree_from_json(j.at("left"));
        node->right = tree_from_json(j.at("right"));
    }
    return node;
}

inline json to_json(const TreeParams& p) {
    return {{"q", p.q},
            {"max_depth", p.max_depth},
            {"top_fraction", p.top_fraction},
            {"top_k_min_classes", p.top_k_min_classes},
            {"split_kind", p.split_kind == SplitKind::Oblique ? "oblique" : "axis"},
            {"min_gain", p.min_gain},
            {"min_samples_split", p.min_samples_split},
            {"use_second_plane", p.use_second_plane}};
}

inline TreeParams tree_params_from_json(const json& j) {
    TreeParams p;
    p.q = j.at("q").get<int>();
    p.max_depth = j.at("max_depth").get<int>();
    p.top_fraction = j.at("top_fraction").get<double>();
    p.top_k_min_classes = j.at("top_k_min_classes").get<int>();
    p.split_kind = j.at("split_kind").get<std::string>() == "oblique" ? SplitKind::Oblique
                                                                      : SplitKind::AxisParallel;
    p.min_gain = j.at("min_gain").get<double>();
    p.min_samples_split = j.at("min_samples_split").get<int>();
    p.use_second_plane = j.at("use_second_plane").get<bool>();
    return p;
}

inline json to_json(const RvflConfig& c) {
    return {{"hidden_neurons", c.hidden_neurons},
            {"ridge_exponent", c.ridge_exponent},
            {"activation", activation_name(c.activation)},
            {"scale_exponent", c.scale_exponent}};
}

inline RvflConfig rvfl_config_from_json(const json& j) {
    RvflConfig c;
    c.hidden_neurons = j.at("hidden_neurons").get<int>();
    c.ridge_exponent = j.at("ridge_exponent").get<int>();
    const std::string a = j.at("activation").get<std::string>();
    c.activation = a == "radbas" ? Activation::Radbas
                                 : (a == "sine" ? Activation::Sine : Activation::Tribas);
    c.scale_exponent = j.at("scale_exponent").get<double>();
    return c;
}

inline json to_json(const RvflModel& m) {
    return {{"hidden_weights", to_json(m.hidden_weights)},
            {"hidden_bias", to_json(m.hidden_bias)},
            {"output_weights", to_json(m.output_weights)},
            {"output_layout", "hidden|direct|bias"},
            {"config", to_json(m.config)},
            {"input_dim", m.input_dim},
            {"num_classes", m.num_classes}};
}

inline RvflModel rvfl_from_json(const json& j) {
    RvflModel m;
    m.hidden_weights = matrix_from_json(j.at("hidden_weights"));
    m.hidden_bias = vector_from_json(j.at("hidden_bias"));
    m.output_weights = matrix_from_json(j.at("output_weights"));
    m.config = rvfl_config_from_json(j.at("config"));
    m.input_dim = j.at("input_dim").get<int>();
    m.num_classes = j.at("num_classes").get<int>();
    return m;
}

} // namespace detail

inline void save_model(const ForestModel& model, const std::string& path) {
    detail::json j;
    j["format"] = "obraf-model";
    j["version"] = 1;
    j["type"] = "forest";
    j["kind"] = forest_kind_name(model.kind);
    j["num_trees"] = model.params.num_trees;
    j["vote"] = model.params.vote == VoteRule::Soft ? "soft" : "hard";
    j["tree_params"] = detail::to_json(model.params.tree);
    j["normalizer"] = detail::to_json(model.normalizer);
    j["seeds"] = model.seeds;
    j["num_classes"] = model.num_classes;
    j["input_dim"] = model.input_dim;
    j["label_names"] = model.label_names;
    detail::json trees = detail::json::array();
    for (const auto& t : model.trees) trees.push_back(detail::to_json(*t));
    j["trees"] = std::move(trees);

    std::ofstream out(path);
    if (!out) throw DataError("cannot write model file: " + path);
    out << j.dump() << '\n';
}

inline void save_model(const HybridModel& model, const std::string& path) {
    detail::json j;
    j["format"] = "obraf-model";
    j["version"] = 1;
    j["type"] = "hybrid";
    j["num_base_classifiers"] = model.params.num_base_classifiers;
    j["partition"] = model.params.partition == PartitionMode::Augment ? "augment" : "replace";
    j["route_all"] = model.params.route_all;
    j["tree_params"] = detail::to_json(model.params.tree);
    j["normalizer"] = detail::to_json(model.normalizer);
    j["num_classes"] = model.num_classes;
    j["input_dim"] = model.input_dim;
    j["label_names"] = model.label_names;
    detail::json bases = detail::json::array();
    for (const auto& base : model.base_classifiers) {
        detail::json b;
        b["bag_seed"] = base.bag_seed;
        b["router"] = detail::to_json(base.router);
        detail::json trees = detail::json::array();
        for (const auto& t : base.partition_trees)
            trees.push_back(t ? detail::to_json(*t) : detail::json(nullptr));
        b["partition_trees"] = std::move(trees);
        bases.push_back(std::move(b));
    }
    j["base_classifiers"] = std::move(bases);

    std::ofstream out(path);
    if (!out) throw DataError("cannot write model file: " + path);
    out << j.dump() << '\n';
}

using AnyModel = std::variant<ForestModel, HybridModel>;

inline AnyModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open model file: " + path);
    detail::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw DataError("model file " + path + " is not valid JSON: " + e.what());
    }
    if (j.value("format", "") != "obraf-model")
        throw DataError("model file " + path + " has unknown format");

    const std::string type = j.at("type").get<std::string>();
    if (type == "forest") {
        ForestModel m;
        m.kind = j.at("kind").get<std::string>() == "raf" ? ForestKind::Raf : ForestKind::ObRafM;
        m.params.num_trees = j.at("num_trees").get<int>();
        m.params.vote = j.at("vote").get<std::string>() == "soft" ? VoteRule::Soft : VoteRule::Hard;
        m.params.tree = detail::tree_params_from_json(j.at("tree_params"));
        m.normalizer = detail::normalizer_from_json(j.at("normalizer"));
        m.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        m.num_classes = j.at("num_classes").get<int>();
        m.input_dim = j.at("input_dim").get<int>();
        m.label_names = j.at("label_names").get<std::vector<std::string>>();
        for (const auto& t : j.at("trees")) m.trees.push_back(detail::tree_from_json(t));
        return m;
    }
    if (type == "hybrid") {
        HybridModel m;
        m.params.num_base_classifiers = j.at("num_base_classifiers").get<int>();
        m.params.partition = j.at("partition").get<std::string>() == "augment"
                                 ? PartitionMode::Augment
                                 : PartitionMode::Replace;
        m.params.route_all = j.at("route_all").get<bool>();
        m.params.tree = detail::tree_params_from_json(j.at("tree_params"));
        m.normalizer = detail::normalizer_from_json(j.at("normalizer"));
        m.num_classes = j.at("num_classes").get<int>();
        m.input_dim = j.at("input_dim").get<int>();
        m.label_names = j.at("label_names").get<std::vector<std::string>>();
        for (const auto& b : j.at("base_classifiers")) {
            HybridBaseClassifier base;
            base.bag_seed = b.at("bag_seed").get<std::uint64_t>();
            base.router = detail::rvfl_from_json(b.at("router"));
            for (const auto& t : b.at("partition_trees"))
                base.partition_trees.push_back(t.is_null() ? nullptr : detail::tree_from_json(t));
            m.base_classifiers.push_back(std::move(base));
        }
        return m;
    }
    throw DataError("model file " + path + " has unknown type '" + type + "'");
}

inline int predict_any(const AnyModel& model, const Eigen::RowVectorXd& x_raw) {
    if (std::holds_alternative<ForestModel>(model))
        return predict_forest(std::get<ForestModel>(model), x_raw);
    return predict_hybrid(std::get<HybridModel>(model), x_raw);
}

} // namespace obraf
