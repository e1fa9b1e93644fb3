// Command-line front end: train/predict single models, run benchmark
// experiments, parameter sweeps, and re-rank existing reports.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "obraf/obraf.hpp"

namespace {

using namespace obraf;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

struct CommonTrainOptions {
    std::string data_path;
    std::string classifier = "obrafm";
    int trees = 500;
    std::uint64_t seed = 1;
    int threads = 0;
    std::string label_column = "last";
    std::string normalization = "std";
    int q = 0;
    int max_depth = 0;
    double top_fraction = 0.5;
    std::string vote = "soft";
    bool route_all = false;
    std::string partition = "augment";
};

void add_train_options(CLI::App* cmd, CommonTrainOptions& opt) {
    cmd->add_option("--data", opt.data_path, "training CSV file")->required();
    cmd->add_option("--classifier", opt.classifier, "raf, obrafm or obrafl")
        ->check(CLI::IsMember({"raf", "obrafm", "obrafl"}));
    cmd->add_option("--trees,-T", opt.trees, "ensemble size");
    cmd->add_option("--seed", opt.seed, "master seed");
    cmd->add_option("--threads", opt.threads, "worker threads (0 = all cores)");
    cmd->add_option("--label-column", opt.label_column, "label column: 'last', index or name");
    cmd->add_option("--normalization", opt.normalization, "std or variance")
        ->check(CLI::IsMember({"std", "variance"}));
    cmd->add_option("--q", opt.q, "features per node (0 = round(sqrt(d)))");
    cmd->add_option("--max-depth", opt.max_depth, "maximum tree depth (0 = unlimited)");
    cmd->add_option("--top-fraction", opt.top_fraction, "share of classes tried one-vs-all");
    cmd->add_option("--vote", opt.vote, "soft or hard")->check(CLI::IsMember({"soft", "hard"}));
    cmd->add_flag("--route-all", opt.route_all, "hybrid: query all class trees at test time");
    cmd->add_option("--partition", opt.partition, "hybrid: augment or replace")
        ->check(CLI::IsMember({"augment", "replace"}));
}

ExperimentConfig config_from_train_options(const CommonTrainOptions& opt) {
    ExperimentConfig config;
    config.dataset_paths = {opt.data_path};
    config.classifiers = {opt.classifier};
    config.num_trees = opt.trees;
    config.master_seed = opt.seed;
    config.threads = opt.threads;
    config.label_column = opt.label_column;
    config.normalization = opt.normalization == "variance" ? NormMode::Variance : NormMode::StdDev;
    config.tree.q = opt.q;
    config.tree.max_depth = opt.max_depth > 0 ? opt.max_depth : std::numeric_limits<int>::max();
    config.tree.top_fraction = opt.top_fraction;
    config.vote = opt.vote == "hard" ? VoteRule::Hard : VoteRule::Soft;
    config.route_all = opt.route_all;
    config.partition = opt.partition == "replace" ? PartitionMode::Replace
                                                  : PartitionMode::Augment;
    return config;
}

int run_train(const CommonTrainOptions& opt, const std::string& model_path) {
    const ExperimentConfig config = config_from_train_options(opt);
    const Dataset ds = load_csv(opt.data_path, parse_label_column(opt.label_column));
    const NormalizationParams norm = fit_normalizer(ds, config.normalization);
    const Dataset normalized = apply_normalizer(ds, norm);
    const auto spec = resolve_classifier(config, opt.classifier);

    const auto trained = measure_training(
        [&] { return train_classifier(spec, normalized, norm, opt.seed, opt.threads); });
    std::visit([&](const auto& model) { save_model(model, model_path); }, trained.model);

    std::cout << "trained " << opt.classifier << " on " << ds.rows() << " samples ("
              << ds.num_classes << " classes) in " << trained.seconds << " s; mean nodes/tree "
              << trained.mean_nodes << "\nmodel written to " << model_path << "\n";
    return kExitOk;
}

int run_predict(const std::string& model_path, const std::string& data_path,
                const std::string& output_path, bool no_labels,
                const std::string& label_column) {
    const AnyModel model = load_model(model_path);
    const auto& label_names = std::holds_alternative<ForestModel>(model)
                                  ? std::get<ForestModel>(model).label_names
                                  : std::get<HybridModel>(model).label_names;
    const int input_dim = std::holds_alternative<ForestModel>(model)
                              ? std::get<ForestModel>(model).input_dim
                              : std::get<HybridModel>(model).input_dim;

    Eigen::MatrixXd features;
    std::vector<int> truth; // empty when the file has no labels
    std::vector<std::string> truth_names;
    if (no_labels) {
        // Whole file is features; reuse the CSV reader by appending a label
        // column is not possible, so parse directly.
        std::ifstream in(data_path);
        if (!in) throw DataError("cannot open file: " + data_path);
        std::vector<std::vector<double>> rows;
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const std::string t = detail::trim(line);
            if (t.empty()) continue;
            const auto cells = detail::split_csv_line(t);
            std::vector<double> row;
            bool numeric = true;
            for (const auto& cell : cells) {
                double v;
                if (!detail::parse_double(cell, v)) {
                    numeric = false;
                    break;
                }
                row.push_back(v);
            }
            if (!numeric) {
                if (line_no == 1 && rows.empty()) continue; // header
                throw DataError(data_path + ": row " + std::to_string(line_no) +
                                ": non-numeric cell in label-free input");
            }
            rows.push_back(std::move(row));
        }
        if (rows.empty()) throw DataError(data_path + ": no data rows");
        features.resize(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(rows[0].size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (static_cast<Eigen::Index>(rows[i].size()) != features.cols())
                throw DataError(data_path + ": ragged rows");
            for (std::size_t j = 0; j < rows[i].size(); ++j)
                features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    } else {
        const Dataset ds = load_csv(data_path, parse_label_column(label_column));
        features = ds.features;
        truth = ds.labels;
        truth_names = ds.label_names;
    }
    if (features.cols() != input_dim)
        throw DataError("input has " + std::to_string(features.cols()) +
                        " features but the model expects " + std::to_string(input_dim));

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!output_path.empty()) {
        file.open(output_path);
        if (!file) throw DataError("cannot write: " + output_path);
        out = &file;
    }

    int correct = 0;
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
        const int pred = predict_any(model, features.row(i));
        (*out) << label_names[static_cast<std::size_t>(pred)] << "\n";
        if (!truth.empty() &&
            truth_names[static_cast<std::size_t>(truth[static_cast<std::size_t>(i)])] ==
                label_names[static_cast<std::size_t>(pred)])
            ++correct;
    }
    if (!truth.empty())
        std::cerr << "accuracy " << 100.0 * correct / static_cast<double>(features.rows())
                  << "% on " << features.rows() << " rows\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"oblique random forests with an RVFL-routed hybrid ensemble"};
    app.require_subcommand(1);

    // train
    auto* train_cmd = app.add_subcommand("train", "fit a classifier and serialize it");
    CommonTrainOptions train_opt;
    std::string model_out;
    add_train_options(train_cmd, train_opt);
    train_cmd->add_option("--model", model_out, "output model file")->required();

    // predict
    auto* predict_cmd = app.add_subcommand("predict", "predict labels for a CSV");
    std::string predict_model, predict_data, predict_out, predict_label_col = "last";
    bool predict_no_labels = false;
    predict_cmd->add_option("--model", predict_model, "model file")->required();
    predict_cmd->add_option("--data", predict_data, "input CSV")->required();
    predict_cmd->add_option("--output", predict_out, "write predictions here (default stdout)");
    predict_cmd->add_flag("--no-labels", predict_no_labels, "input has no label column");
    predict_cmd->add_option("--label-column", predict_label_col,
                            "label column of the input, for accuracy reporting");

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "run a cross-validated benchmark");
    std::string bench_config, bench_json = "report.json", bench_text;
    std::vector<std::string> bench_sets;
    bench_cmd->add_option("--config", bench_config, "experiment config file");
    bench_cmd->add_option("--out", bench_json, "JSON report path");
    bench_cmd->add_option("--text", bench_text, "also write a plain-text table");
    bench_cmd->add_option("--set", bench_sets, "override a config key, key=value")
        ->take_all();

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "vary one parameter and record accuracy");
    CommonTrainOptions sweep_opt;
    std::string sweep_param, sweep_values_arg, sweep_out;
    int sweep_folds = 4;
    add_train_options(sweep_cmd, sweep_opt);
    sweep_cmd->add_option("--param", sweep_param, "max_depth, trees or q")->required();
    sweep_cmd->add_option("--values", sweep_values_arg, "comma-separated values")->required();
    sweep_cmd->add_option("--folds", sweep_folds, "folds used to carve the holdout split");
    sweep_cmd->add_option("--out", sweep_out, "write the series as JSON");

    // rank
    auto* rank_cmd = app.add_subcommand("rank", "recompute ranks from an existing report");
    std::string rank_report;
    rank_cmd->add_option("--report", rank_report, "report JSON file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (*train_cmd) return run_train(train_opt, model_out);

        if (*predict_cmd)
            return run_predict(predict_model, predict_data, predict_out, predict_no_labels,
                               predict_label_col);

        if (*bench_cmd) {
            ExperimentConfig config;
            if (!bench_config.empty()) config = parse_config_file(bench_config);
            for (const auto& kv : bench_sets) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos)
                    throw ConfigError("--set expects key=value, got '" + kv + "'");
                apply_config_key(config, obraf::detail::trim(kv.substr(0, eq)),
                                 obraf::detail::trim(kv.substr(eq + 1)));
            }
            validate_config(config);
            const EvaluationReport report = run_experiment(config);
            emit_report(report, bench_json, bench_text);
            std::cout << format_report_text(report);
            std::cout << "report written to " << bench_json << "\n";
            return kExitOk;
        }

        if (*sweep_cmd) {
            ExperimentConfig config = config_from_train_options(sweep_opt);
            config.folds = sweep_folds;
            std::vector<int> values;
            for (const auto& tok : obraf::detail::split_list(sweep_values_arg))
                values.push_back(obraf::detail::parse_int(tok, "values"));
            const auto series = sweep_parameter(config, parse_sweep_parameter(sweep_param), values);

            nlohmann::json j;
            j["format"] = "obraf-sweep";
            j["parameter"] = sweep_param;
            j["dataset"] = sweep_opt.data_path;
            j["classifier"] = sweep_opt.classifier;
            nlohmann::json pts = nlohmann::json::array();
            std::cout << sweep_param << "  accuracy%\n";
            for (const auto& p : series) {
                pts.push_back({{"value", p.value}, {"accuracy", p.accuracy}});
                std::cout << p.value << "  " << p.accuracy << "\n";
            }
            j["series"] = std::move(pts);
            if (!sweep_out.empty()) {
                std::ofstream out(sweep_out);
                if (!out) throw DataError("cannot write: " + sweep_out);
                out << j.dump(2) << '\n';
            }
            return kExitOk;
        }

        if (*rank_cmd) {
            EvaluationReport report = load_report(rank_report);
            std::vector<std::vector<double>> table;
            for (const auto& d : report.datasets) {
                std::vector<double> row;
                for (const auto& c : report.classifiers)
                    row.push_back(report.cell(d.name, c).mean_accuracy);
                table.push_back(std::move(row));
            }
            report.ranks.clear();
            for (const auto& row : table) report.ranks.push_back(rank_row(row));
            report.mean_ranks = friedman_mean_ranks(table);
            std::cout << format_report_text(report);
            return kExitOk;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitUsage;
}
