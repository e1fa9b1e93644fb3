#pragma once

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "obraf/dataset.hpp"
#include "obraf/forest.hpp"
#include "obraf/serialize.hpp"

namespace obraf {

// =============================================================================
// Experiment configuration
// =============================================================================

// Classifier names accepted throughout: "raf" (axis-parallel forest),
// "obrafm" (oblique forest), "obrafl" (hybrid RVFL + oblique forest).
inline bool is_known_classifier(const std::string& name) {
    return name == "raf" || name == "obrafm" || name == "obrafl";
}

struct ExperimentConfig {
    std::vector<std::string> dataset_paths;
    std::vector<std::string> classifiers;
    int num_trees = 500;
    int folds = 4;
    std::uint64_t master_seed = 1;
    int threads = 0;
    std::string label_column = "last"; // "last", a 0-based index, or a header name
    NormMode normalization = NormMode::StdDev;

    // Shared tree/ensemble parameters; per-classifier overrides win.
    TreeParams tree;
    VoteRule vote = VoteRule::Soft;
    PartitionMode partition = PartitionMode::Augment;
    bool route_all = false;

    // Raw "classifier.key" -> value entries from the config file or CLI.
    std::map<std::string, std::map<std::string, std::string>> overrides;
};

// Parameters for one classifier after applying its overrides.
struct ResolvedClassifier {
    std::string name;
    int num_trees = 500;
    TreeParams tree;
    VoteRule vote = VoteRule::Soft;
    PartitionMode partition = PartitionMode::Augment;
    bool route_all = false;
};

namespace detail {

inline bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config key '" + key + "': expected a boolean, got '" + v + "'");
}

inline int parse_int(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        const int out = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected an integer, got '" + v + "'");
    }
}

inline double parse_real(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double out = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
    }
}

inline std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const std::string t = trim(item);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

} // namespace detail

// Applies one key=value pair to the shared part of the config. Keys of the
// form "<classifier>.<key>" are stored as overrides.
inline void apply_config_key(ExperimentConfig& config, const std::string& key,
                             const std::string& value) {
    const auto dot = key.find('.');
    if (dot != std::string::npos) {
        const std::string cls = key.substr(0, dot);
        if (!is_known_classifier(cls))
            throw ConfigError("unknown classifier '" + cls + "' in config key '" + key + "'");
        config.overrides[cls][key.substr(dot + 1)] = value;
        return;
    }
    if (key == "datasets") config.dataset_paths = detail::split_list(value);
    else if (key == "classifiers") config.classifiers = detail::split_list(value);
    else if (key == "trees" || key == "T") config.num_trees = detail::parse_int(value, key);
    else if (key == "folds") config.folds = detail::parse_int(value, key);
    else if (key == "seed") config.master_seed = static_cast<std::uint64_t>(std::stoull(value));
    else if (key == "threads") config.threads = detail::parse_int(value, key);
    else if (key == "label_column") config.label_column = value;
    else if (key == "normalization") {
        if (value == "std") config.normalization = NormMode::StdDev;
        else if (value == "variance") config.normalization = NormMode::Variance;
        else throw ConfigError("normalization must be 'std' or 'variance', got '" + value + "'");
    } else if (key == "q") config.tree.q = detail::parse_int(value, key);
    else if (key == "max_depth") config.tree.max_depth = detail::parse_int(value, key);
    else if (key == "top_fraction") config.tree.top_fraction = detail::parse_real(value, key);
    else if (key == "top_k_min_classes") config.tree.top_k_min_classes = detail::parse_int(value, key);
    else if (key == "use_second_plane") config.tree.use_second_plane = detail::parse_bool(value, key);
    else if (key == "vote") {
        if (value == "soft") config.vote = VoteRule::Soft;
        else if (value == "hard") config.vote = VoteRule::Hard;
        else throw ConfigError("vote must be 'soft' or 'hard', got '" + value + "'");
    } else if (key == "partition") {
        if (value == "augment") config.partition = PartitionMode::Augment;
        else if (value == "replace") config.partition = PartitionMode::Replace;
        else throw ConfigError("partition must be 'augment' or 'replace', got '" + value + "'");
    } else if (key == "route_all") config.route_all = detail::parse_bool(value, key);
    else throw ConfigError("unknown config key '" + key + "'");
}

// Plain key = value file; '#' starts a comment, blank lines are skipped.
inline ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    ExperimentConfig config;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(path + ":" + std::to_string(line_no) + ": empty key");
        apply_config_key(config, key, value);
    }
    return config;
}

inline void validate_config(const ExperimentConfig& config) {
    if (config.dataset_paths.empty()) throw ConfigError("no datasets configured");
    if (config.classifiers.empty()) throw ConfigError("no classifiers configured");
    for (const auto& c : config.classifiers)
        if (!is_known_classifier(c))
            throw ConfigError("unknown classifier '" + c + "' (expected raf, obrafm or obrafl)");
    if (config.folds < 2) throw ConfigError("folds must be at least 2");
    if (config.num_trees < 1) throw ConfigError("trees must be at least 1");
}

inline ResolvedClassifier resolve_classifier(const ExperimentConfig& config,
                                             const std::string& name) {
    ResolvedClassifier r;
    r.name = name;
    r.num_trees = config.num_trees;
    r.tree = config.tree;
    r.vote = config.vote;
    r.partition = config.partition;
    r.route_all = config.route_all;

    const auto it = config.overrides.find(name);
    if (it != config.overrides.end()) {
        for (const auto& [key, value] : it->second) {
            if (key == "trees" || key == "T") r.num_trees = detail::parse_int(value, key);
            else if (key == "q") r.tree.q = detail::parse_int(value, key);
            else if (key == "max_depth") r.tree.max_depth = detail::parse_int(value, key);
            else if (key == "top_fraction") r.tree.top_fraction = detail::parse_real(value, key);
            else if (key == "top_k_min_classes")
                r.tree.top_k_min_classes = detail::parse_int(value, key);
            else if (key == "use_second_plane")
                r.tree.use_second_plane = detail::parse_bool(value, key);
            else if (key == "vote") r.vote = value == "hard" ? VoteRule::Hard : VoteRule::Soft;
            else if (key == "route_all") r.route_all = detail::parse_bool(value, key);
            else if (key == "partition")
                r.partition = value == "replace" ? PartitionMode::Replace : PartitionMode::Augment;
            else throw ConfigError("unknown override key '" + name + "." + key + "'");
        }
    }
    if (r.tree.max_depth <= 0) r.tree.max_depth = std::numeric_limits<int>::max();
    return r;
}

inline LabelColumn parse_label_column(const std::string& spec) {
    if (spec.empty() || spec == "last") return LabelColumn::last();
    // All-digit (optionally negative) specs are treated as indices.
    bool numeric = !spec.empty();
    for (std::size_t i = (spec[0] == '-' ? 1 : 0); i < spec.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(spec[i]))) numeric = false;
    if (spec.size() == 1 && spec[0] == '-') numeric = false;
    if (numeric) return LabelColumn::by_index(std::stoi(spec));
    return LabelColumn::by_name(spec);
}

// =============================================================================
// Training helpers
// =============================================================================

struct TrainedClassifier {
    AnyModel model;
    double seconds = 0.0;
    double mean_nodes = 0.0;
};

// Wall-clock measurement around training only; the caller normalizes first.
template <typename Builder>
TrainedClassifier measure_training(Builder&& build) {
    const auto t0 = std::chrono::steady_clock::now();
    auto model = build();
    const auto t1 = std::chrono::steady_clock::now();
    TrainedClassifier out{std::move(model), std::chrono::duration<double>(t1 - t0).count(), 0.0};
    if (std::holds_alternative<ForestModel>(out.model))
        out.mean_nodes = mean_nodes_per_tree(std::get<ForestModel>(out.model));
    else
        out.mean_nodes = mean_nodes_per_tree(std::get<HybridModel>(out.model));
    return out;
}

// Trains one classifier on an already-normalized dataset.
inline AnyModel train_classifier(const ResolvedClassifier& spec, const Dataset& normalized,
                                 const NormalizationParams& normalizer, std::uint64_t seed,
                                 int threads) {
    if (spec.name == "raf" || spec.name == "obrafm") {
        ForestParams p;
        p.num_trees = spec.num_trees;
        p.tree = spec.tree;
        p.vote = spec.vote;
        return train_forest(normalized, normalizer,
                            spec.name == "raf" ? ForestKind::Raf : ForestKind::ObRafM, p, seed,
                            threads);
    }
    HybridParams p;
    p.num_base_classifiers = spec.num_trees;
    p.tree = spec.tree;
    p.partition = spec.partition;
    p.route_all = spec.route_all;
    return train_hybrid(normalized, normalizer, p, seed, threads);
}

// =============================================================================
// Friedman ranks
// =============================================================================

// Per-dataset ranks (1 = highest accuracy; ties share the average rank).
inline std::vector<double> rank_row(const std::vector<double>& accuracies) {
    const std::size_t m = accuracies.size();
    std::vector<double> ranks(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        int better = 0, equal = 0;
        for (std::size_t j = 0; j < m; ++j) {
            if (accuracies[j] > accuracies[i]) ++better;
            if (accuracies[j] == accuracies[i]) ++equal;
        }
        // equal includes i itself; tied entries average the ranks they span.
        ranks[i] = better + 0.5 * static_cast<double>(equal + 1);
    }
    return ranks;
}

inline std::vector<double> friedman_mean_ranks(const std::vector<std::vector<double>>& accuracy) {
    if (accuracy.empty()) throw ConfigError("friedman_mean_ranks: empty table");
    const std::size_t m = accuracy.front().size();
    std::vector<double> mean(m, 0.0);
    for (const auto& row : accuracy) {
        if (row.size() != m) throw ConfigError("friedman_mean_ranks: ragged table");
        const auto r = rank_row(row);
        for (std::size_t j = 0; j < m; ++j) mean[j] += r[j];
    }
    for (auto& v : mean) v /= static_cast<double>(accuracy.size());
    return mean;
}

// =============================================================================
// Evaluation report
// =============================================================================

struct DatasetInfo {
    std::string name;
    std::string path;
    int rows = 0;
    int features = 0;
    int classes = 0;
    std::vector<std::string> label_names; // id -> original token
};

struct CellResult {
    std::string dataset;
    std::string classifier;
    std::vector<double> fold_accuracies; // percent
    double mean_accuracy = 0.0;          // percent
    double train_seconds = 0.0;          // summed over folds
    double mean_nodes = 0.0;             // averaged over folds
};

struct EvaluationReport {
    std::vector<DatasetInfo> datasets;
    std::vector<std::string> classifiers;
    std::vector<CellResult> cells;             // dataset-major, classifier-minor
    std::vector<std::vector<double>> ranks;    // [dataset][classifier]
    std::vector<double> mean_accuracy;         // per classifier
    std::vector<double> mean_ranks;            // per classifier
    int folds = 0;
    int num_trees = 0;
    std::uint64_t master_seed = 0;
    std::string normalization = "std";

    const CellResult& cell(const std::string& dataset, const std::string& classifier) const {
        for (const auto& c : cells)
            if (c.dataset == dataset && c.classifier == classifier) return c;
        throw ConfigError("report has no cell (" + dataset + ", " + classifier + ")");
    }
};

namespace detail {

inline std::string dataset_display_name(const std::string& path) {
    std::string name = path;
    const auto slash = name.find_last_of("/\\");
    if (slash != std::string::npos) name = name.substr(slash + 1);
    const auto dot = name.find_last_of('.');
    if (dot != std::string::npos && dot > 0) name = name.substr(0, dot);
    return name;
}

} // namespace detail

// Runs the full protocol: stratified k-fold per dataset, shared folds across
// classifiers, normalizer fit on each training fold only, accuracy on the
// held-out fold, ranks per dataset from mean accuracies.
inline EvaluationReport run_experiment(const ExperimentConfig& config) {
    validate_config(config);
    const LabelColumn label_col = parse_label_column(config.label_column);

    EvaluationReport report;
    report.classifiers = config.classifiers;
    report.folds = config.folds;
    report.num_trees = config.num_trees;
    report.master_seed = config.master_seed;
    report.normalization = config.normalization == NormMode::StdDev ? "std" : "variance";

    std::vector<std::vector<double>> accuracy_table;

    for (std::size_t di = 0; di < config.dataset_paths.size(); ++di) {
        const std::string& path = config.dataset_paths[di];
        Dataset ds;
        try {
            ds = load_csv(path, label_col);
        } catch (const DataError& e) {
            throw DataError("dataset '" + path + "' failed to load: " + e.what());
        }

        DatasetInfo info;
        info.name = detail::dataset_display_name(path);
        info.path = path;
        info.rows = ds.rows();
        info.features = ds.cols();
        info.classes = ds.num_classes;
        info.label_names = ds.label_names;
        report.datasets.push_back(info);

        Rng fold_rng(derive_seed(config.master_seed, 0xf01d5ULL, di));
        const auto folds = kfold_splits(ds, config.folds, fold_rng);

        std::vector<double> dataset_accuracies;
        for (std::size_t ci = 0; ci < config.classifiers.size(); ++ci) {
            const auto spec = resolve_classifier(config, config.classifiers[ci]);
            CellResult cell;
            cell.dataset = info.name;
            cell.classifier = spec.name;

            double nodes_sum = 0.0;
            for (std::size_t fi = 0; fi < folds.size(); ++fi) {
                const Dataset train = subset(ds, folds[fi].train);
                const NormalizationParams norm = fit_normalizer(train, config.normalization);
                const Dataset train_n = apply_normalizer(train, norm);
                const std::uint64_t seed = derive_seed(
                    derive_seed(config.master_seed, di, ci), static_cast<std::uint64_t>(fi));

                const auto trained = measure_training([&] {
                    return train_classifier(spec, train_n, norm, seed, config.threads);
                });
                cell.train_seconds += trained.seconds;
                nodes_sum += trained.mean_nodes;

                int correct = 0;
                for (int row : folds[fi].test) {
                    const int pred = predict_any(trained.model, ds.features.row(row));
                    if (pred == ds.labels[static_cast<std::size_t>(row)]) ++correct;
                }
                cell.fold_accuracies.push_back(
                    100.0 * static_cast<double>(correct) /
                    static_cast<double>(folds[fi].test.size()));
            }
            cell.mean_accuracy = 0.0;
            for (double a : cell.fold_accuracies) cell.mean_accuracy += a;
            cell.mean_accuracy /= static_cast<double>(cell.fold_accuracies.size());
            cell.mean_nodes = nodes_sum / static_cast<double>(folds.size());
            dataset_accuracies.push_back(cell.mean_accuracy);
            report.cells.push_back(std::move(cell));
        }
        accuracy_table.push_back(std::move(dataset_accuracies));
        report.ranks.push_back(rank_row(accuracy_table.back()));
    }

    report.mean_accuracy.assign(config.classifiers.size(), 0.0);
    for (std::size_t di = 0; di < accuracy_table.size(); ++di)
        for (std::size_t ci = 0; ci < config.classifiers.size(); ++ci)
            report.mean_accuracy[ci] += accuracy_table[di][ci];
    for (auto& v : report.mean_accuracy) v /= static_cast<double>(accuracy_table.size());
    report.mean_ranks = friedman_mean_ranks(accuracy_table);
    return report;
}

// =============================================================================
// Report emission
// =============================================================================

namespace detail {

inline json report_to_json(const EvaluationReport& r) {
    json j;
    j["format"] = "obraf-report";
    j["version"] = 1;
    j["protocol"] = {{"folds", r.folds},
                     {"trees", r.num_trees},
                     {"seed", r.master_seed},
                     {"normalization", r.normalization},
                     {"cv", "stratified k-fold, accuracy averaged over folds"}};
    json ds = json::array();
    for (const auto& d : r.datasets)
        ds.push_back({{"name", d.name},
                      {"path", d.path},
                      {"rows", d.rows},
                      {"features", d.features},
                      {"classes", d.classes},
                      {"label_names", d.label_names}});
    j["datasets"] = std::move(ds);
    j["classifiers"] = r.classifiers;
    json cells = json::array();
    for (const auto& c : r.cells)
        cells.push_back({{"dataset", c.dataset},
                         {"classifier", c.classifier},
                         {"fold_accuracies", c.fold_accuracies},
                         {"mean_accuracy", c.mean_accuracy},
                         {"train_seconds", c.train_seconds},
                         {"mean_nodes", c.mean_nodes}});
    j["cells"] = std::move(cells);
    j["ranks"] = r.ranks;
    j["mean_accuracy"] = r.mean_accuracy;
    j["mean_ranks"] = r.mean_ranks;
    return j;
}

inline EvaluationReport report_from_json(const json& j) {
    if (j.value("format", "") != "obraf-report") throw DataError("not a report file");
    EvaluationReport r;
    r.folds = j.at("protocol").at("folds").get<int>();
    r.num_trees = j.at("protocol").at("trees").get<int>();
    r.master_seed = j.at("protocol").at("seed").get<std::uint64_t>();
    r.normalization = j.at("protocol").at("normalization").get<std::string>();
    for (const auto& d : j.at("datasets")) {
        DatasetInfo info;
        info.name = d.at("name").get<std::string>();
        info.path = d.at("path").get<std::string>();
        info.rows = d.at("rows").get<int>();
        info.features = d.at("features").get<int>();
        info.classes = d.at("classes").get<int>();
        info.label_names = d.at("label_names").get<std::vector<std::string>>();
        r.datasets.push_back(std::move(info));
    }
    r.classifiers = j.at("classifiers").get<std::vector<std::string>>();
    for (const auto& c : j.at("cells")) {
        CellResult cell;
        cell.dataset = c.at("dataset").get<std::string>();
        cell.classifier = c.at("classifier").get<std::string>();
        cell.fold_accuracies = c.at("fold_accuracies").get<std::vector<double>>();
        cell.mean_accuracy = c.at("mean_accuracy").get<double>();
        cell.train_seconds = c.at("train_seconds").get<double>();
        cell.mean_nodes = c.at("mean_nodes").get<double>();
        r.cells.push_back(std::move(cell));
    }
    r.ranks = j.at("ranks").get<std::vector<std::vector<double>>>();
    r.mean_accuracy = j.at("mean_accuracy").get<std::vector<double>>();
    r.mean_ranks = j.at("mean_ranks").get<std::vector<double>>();
    return r;
}

} // namespace detail

// Accuracy table with a Mean Acc. row and a Rank row, plus a timing/size
// table, mirroring how the results are normally tabulated.
inline std::string format_report_text(const EvaluationReport& r) {
    std::ostringstream out;
    out << "Protocol: " << r.folds << "-fold stratified CV, T=" << r.num_trees
        << ", seed=" << r.master_seed << ", normalization=" << r.normalization << "\n\n";

    std::size_t name_w = 12;
    for (const auto& d : r.datasets) name_w = std::max(name_w, d.name.size() + 2);

    out << "Accuracy (%)\n";
    out << std::left << std::setw(static_cast<int>(name_w)) << "Dataset";
    for (const auto& c : r.classifiers) out << std::right << std::setw(10) << c;
    out << "\n";
    out << std::fixed << std::setprecision(2);
    for (const auto& d : r.datasets) {
        out << std::left << std::setw(static_cast<int>(name_w)) << d.name;
        for (const auto& c : r.classifiers)
            out << std::right << std::setw(10) << r.cell(d.name, c).mean_accuracy;
        out << "\n";
    }
    out << std::left << std::setw(static_cast<int>(name_w)) << "Mean Acc.";
    for (double v : r.mean_accuracy) out << std::right << std::setw(10) << v;
    out << "\n";
    out << std::left << std::setw(static_cast<int>(name_w)) << "Rank";
    for (double v : r.mean_ranks) out << std::right << std::setw(10) << v;
    out << "\n\n";

    out << "Training time (s) / mean nodes per tree\n";
    out << std::left << std::setw(static_cast<int>(name_w)) << "Dataset";
    for (const auto& c : r.classifiers) out << std::right << std::setw(20) << c;
    out << "\n";
    for (const auto& d : r.datasets) {
        out << std::left << std::setw(static_cast<int>(name_w)) << d.name;
        for (const auto& c : r.classifiers) {
            const auto& cell = r.cell(d.name, c);
            std::ostringstream v;
            v << std::fixed << std::setprecision(2) << cell.train_seconds << " / "
              << std::setprecision(1) << cell.mean_nodes;
            out << std::right << std::setw(20) << v.str();
        }
        out << "\n";
    }
    return out.str();
}

inline void emit_report(const EvaluationReport& report, const std::string& json_path,
                        const std::string& text_path = "") {
    if (report.classifiers.empty()) throw ConfigError("refusing to emit a report with no classifiers");
    {
        std::ofstream out(json_path);
        if (!out) throw DataError("cannot write report: " + json_path);
        out << detail::report_to_json(report).dump(2) << '\n';
    }
    if (!text_path.empty()) {
        std::ofstream out(text_path);
        if (!out) throw DataError("cannot write report: " + text_path);
        out << format_report_text(report);
    }
}

inline EvaluationReport load_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open report: " + path);
    detail::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw DataError("report file " + path + " is not valid JSON: " + e.what());
    }
    return detail::report_from_json(j);
}

// =============================================================================
// Parameter sweeps
// =============================================================================

enum class SweepParameter { MaxDepth, NumTrees, SubspaceSize };

inline SweepParameter parse_sweep_parameter(const std::string& name) {
    if (name == "max_depth") return SweepParameter::MaxDepth;
    if (name == "T" || name == "trees") return SweepParameter::NumTrees;
    if (name == "q") return SweepParameter::SubspaceSize;
    throw ConfigError("unknown sweep parameter '" + name + "' (expected max_depth, trees or q)");
}

struct SweepPoint {
    int value = 0;
    double accuracy = 0.0; // percent, on the held-out fold
};

// Trains once per value on the first stratified fold and evaluates on its
// held-out part. The seed is fixed across values so only the swept
// parameter changes.
inline std::vector<SweepPoint> sweep_parameter(const ExperimentConfig& config,
                                               SweepParameter parameter,
                                               const std::vector<int>& values) {
    validate_config(config);
    if (config.dataset_paths.size() != 1 || config.classifiers.size() != 1)
        throw ConfigError("sweep requires exactly one dataset and one classifier");
    if (values.empty()) throw ConfigError("sweep requires at least one value");

    const Dataset ds = load_csv(config.dataset_paths[0], parse_label_column(config.label_column));
    for (int v : values) {
        if (v < 1) throw ConfigError("sweep values must be positive");
        if (parameter == SweepParameter::SubspaceSize && v > ds.cols())
            throw ConfigError("q = " + std::to_string(v) + " exceeds feature count " +
                              std::to_string(ds.cols()));
    }

    Rng fold_rng(derive_seed(config.master_seed, 0xf01d5ULL, 0));
    const auto folds = kfold_splits(ds, config.folds, fold_rng);
    const Dataset train = subset(ds, folds[0].train);
    const NormalizationParams norm = fit_normalizer(train, config.normalization);
    const Dataset train_n = apply_normalizer(train, norm);

    std::vector<SweepPoint> series;
    for (int v : values) {
        auto spec = resolve_classifier(config, config.classifiers[0]);
        switch (parameter) {
            case SweepParameter::MaxDepth: spec.tree.max_depth = v; break;
            case SweepParameter::NumTrees: spec.num_trees = v; break;
            case SweepParameter::SubspaceSize: spec.tree.q = v; break;
        }
        const std::uint64_t seed = derive_seed(config.master_seed, 0x53eebULL);
        const AnyModel model = train_classifier(spec, train_n, norm, seed, config.threads);
        int correct = 0;
        for (int row : folds[0].test)
            if (predict_any(model, ds.features.row(row)) == ds.labels[static_cast<std::size_t>(row)])
                ++correct;
        series.push_back(
            {v, 100.0 * static_cast<double>(correct) / static_cast<double>(folds[0].test.size())});
    }
    return series;
}

} // namespace obraf
