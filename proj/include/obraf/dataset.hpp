#pragma once

#include <Eigen/Dense>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "obraf/errors.hpp"
#include "obraf/random.hpp"

namespace obraf {

// =============================================================================
// Types
// =============================================================================

// In-memory tabular dataset. Rows are samples; labels are contiguous class
// ids in [0, num_classes). label_names maps each id back to the original
// token in first-appearance order.
struct Dataset {
    Eigen::MatrixXd features; // n x d
    std::vector<int> labels;  // length n, values in [0, num_classes)
    int num_classes = 0;
    std::vector<std::string> feature_names; // empty when the file had no header
    std::vector<std::string> label_names;   // id -> original label token

    int rows() const { return static_cast<int>(features.rows()); }
    int cols() const { return static_cast<int>(features.cols()); }
};

enum class NormMode {
    StdDev,  // z-score: (x - mean) / population std
    Variance // literal variance division, selectable for comparison runs
};

struct NormalizationParams {
    Eigen::VectorXd means;  // length d
    Eigen::VectorXd scales; // length d, strictly positive
};

struct BagSample {
    std::vector<int> indices;     // n draws with replacement
    std::vector<int> oob_indices; // rows never drawn, ascending
};

struct FoldSplit {
    std::vector<int> train;
    std::vector<int> test;
};

// Selects which CSV column holds the label: by header name, by 0-based
// index, or the last column (default).
struct LabelColumn {
    std::optional<std::string> name;
    std::optional<int> index;

    static LabelColumn last() { return {}; }
    static LabelColumn by_index(int i) {
        LabelColumn c;
        c.index = i;
        return c;
    }
    static LabelColumn by_name(std::string n) {
        LabelColumn c;
        c.name = std::move(n);
        return c;
    }
};

// =============================================================================
// CSV loading
// =============================================================================

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return s.substr(b, e - b);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

inline bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

} // namespace detail

// Loads a comma-separated file. A header row is assumed present iff any
// first-row cell outside the label column fails to parse as a number (label
// cells are allowed to be categorical in every row). Selecting the label by
// name requires a header.
inline Dataset load_csv(const std::string& path, const LabelColumn& label = LabelColumn::last()) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);

    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        const std::string t = detail::trim(line);
        if (!t.empty()) lines.push_back(t);
    }
    if (lines.empty()) throw DataError("empty file: " + path);

    const std::vector<std::string> first = detail::split_csv_line(lines[0]);
    const int ncols = static_cast<int>(first.size());
    if (ncols < 2) throw DataError(path + ": need at least one feature column and one label column");

    // Resolve the label column position. By-name resolution happens against
    // the first row, which is then necessarily a header.
    int label_col;
    bool has_header;
    if (label.name) {
        label_col = -1;
        for (int j = 0; j < ncols; ++j)
            if (first[static_cast<std::size_t>(j)] == *label.name) label_col = j;
        if (label_col < 0) throw DataError(path + ": no header column named '" + *label.name + "'");
        has_header = true;
    } else {
        label_col = label.index ? *label.index : ncols - 1;
        if (label_col < 0) label_col += ncols; // negative index counts from the end
        if (label_col < 0 || label_col >= ncols)
            throw DataError(path + ": label column index out of range");
        has_header = false;
        for (int j = 0; j < ncols; ++j) {
            double v;
            if (j != label_col && !detail::parse_double(first[static_cast<std::size_t>(j)], v)) {
                has_header = true;
                break;
            }
        }
    }

    const std::size_t data_begin = has_header ? 1 : 0;
    const std::size_t n = lines.size() - data_begin;
    if (n == 0) throw DataError(path + ": header only, no data rows");
    const int d = ncols - 1;

    Dataset ds;
    ds.features.resize(static_cast<Eigen::Index>(n), d);
    ds.labels.resize(n);
    if (has_header) {
        for (int j = 0; j < ncols; ++j)
            if (j != label_col) ds.feature_names.push_back(first[static_cast<std::size_t>(j)]);
    }

    std::unordered_map<std::string, int> label_ids;
    for (std::size_t r = 0; r < n; ++r) {
        const std::size_t file_row = r + data_begin + 1; // 1-based, for messages
        const auto cells = detail::split_csv_line(lines[r + data_begin]);
        if (static_cast<int>(cells.size()) != ncols)
            throw DataError(path + ": row " + std::to_string(file_row) + " has " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(ncols));
        int fj = 0;
        for (int j = 0; j < ncols; ++j) {
            const std::string& cell = cells[static_cast<std::size_t>(j)];
            if (j == label_col) {
                auto [it, inserted] = label_ids.try_emplace(cell, static_cast<int>(ds.label_names.size()));
                if (inserted) ds.label_names.push_back(cell);
                ds.labels[r] = it->second;
            } else {
                double v;
                if (!detail::parse_double(cell, v))
                    throw DataError(path + ": row " + std::to_string(file_row) + ", column " +
                                    std::to_string(j + 1) + ": cannot parse '" + cell +
                                    "' as a number");
                if (!std::isfinite(v))
                    throw DataError(path + ": row " + std::to_string(file_row) + ", column " +
                                    std::to_string(j + 1) + ": non-finite value");
                ds.features(static_cast<Eigen::Index>(r), fj++) = v;
            }
        }
    }

    ds.num_classes = static_cast<int>(ds.label_names.size());
    if (ds.num_classes < 2)
        throw DataError(path + ": only one class present; multi-class input required");
    return ds;
}

// Extracts the given rows into a new dataset. Class alphabet is preserved.
inline Dataset subset(const Dataset& ds, std::span<const int> rows) {
    Dataset out;
    out.features.resize(static_cast<Eigen::Index>(rows.size()), ds.cols());
    out.labels.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.features.row(static_cast<Eigen::Index>(i)) = ds.features.row(rows[i]);
        out.labels[i] = ds.labels[static_cast<std::size_t>(rows[i])];
    }
    out.num_classes = ds.num_classes;
    out.feature_names = ds.feature_names;
    out.label_names = ds.label_names;
    return out;
}

// =============================================================================
// Normalization
// =============================================================================

// Per-feature centering/scaling parameters. Scale is the population standard
// deviation (or variance under NormMode::Variance); values below 1e-12 are
// replaced by 1 so constant features pass through unchanged.
inline NormalizationParams fit_normalizer(const Dataset& ds, NormMode mode = NormMode::StdDev) {
    const int n = ds.rows();
    if (n < 2) throw DataError("fit_normalizer requires at least 2 rows");
    NormalizationParams p;
    p.means = ds.features.colwise().mean();
    Eigen::VectorXd var(ds.cols());
    for (int j = 0; j < ds.cols(); ++j) {
        const Eigen::ArrayXd centered = ds.features.col(j).array() - p.means(j);
        var(j) = centered.square().sum() / n;
    }
    p.scales = (mode == NormMode::StdDev) ? var.array().sqrt().matrix() : var;
    for (int j = 0; j < ds.cols(); ++j)
        if (p.scales(j) < 1e-12) p.scales(j) = 1.0;
    return p;
}

inline void normalize_row_inplace(Eigen::Ref<Eigen::RowVectorXd> x, const NormalizationParams& p) {
    if (x.cols() != p.means.size()) throw DataError("normalizer dimension mismatch");
    x.array() = (x.array() - p.means.transpose().array()) / p.scales.transpose().array();
}

inline Dataset apply_normalizer(const Dataset& ds, const NormalizationParams& p) {
    if (ds.cols() != p.means.size()) throw DataError("normalizer dimension mismatch");
    Dataset out = ds;
    out.features = (ds.features.rowwise() - p.means.transpose()).array().rowwise() /
                   p.scales.transpose().array();
    return out;
}

// =============================================================================
// Resampling
// =============================================================================

inline BagSample draw_bag(int n, Rng& rng) {
    if (n < 1) throw DataError("draw_bag requires a non-empty dataset");
    BagSample bag;
    bag.indices.resize(static_cast<std::size_t>(n));
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
        const int r = rng.uniform_int(n);
        bag.indices[static_cast<std::size_t>(i)] = r;
        seen[static_cast<std::size_t>(r)] = 1;
    }
    for (int i = 0; i < n; ++i)
        if (!seen[static_cast<std::size_t>(i)]) bag.oob_indices.push_back(i);
    return bag;
}

inline BagSample draw_bag(const Dataset& ds, Rng& rng) { return draw_bag(ds.rows(), rng); }

// Stratified k-fold split. Within each class, rows are shuffled and then
// dealt round-robin to folds 0..k-1, so fold sizes differ by at most one per
// class. Test folds partition {0..n-1}.
inline std::vector<FoldSplit> kfold_splits(const Dataset& ds, int k, Rng& rng) {
    if (k < 2) throw ConfigError("kfold_splits requires k >= 2");
    const int n = ds.rows();

    std::vector<std::vector<int>> by_class(static_cast<std::size_t>(ds.num_classes));
    for (int i = 0; i < n; ++i) by_class[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(i)])].push_back(i);

    for (int c = 0; c < ds.num_classes; ++c) {
        auto& members = by_class[static_cast<std::size_t>(c)];
        if (static_cast<int>(members.size()) < k)
            throw DataError("class " + std::to_string(c) + " has " +
                            std::to_string(members.size()) + " members, fewer than k=" +
                            std::to_string(k));
        rng.shuffle(members);
    }

    std::vector<std::vector<int>> test(static_cast<std::size_t>(k));
    for (const auto& members : by_class)
        for (std::size_t i = 0; i < members.size(); ++i)
            test[i % static_cast<std::size_t>(k)].push_back(members[i]);

    std::vector<FoldSplit> folds(static_cast<std::size_t>(k));
    std::vector<int> fold_of(static_cast<std::size_t>(n), -1);
    for (int f = 0; f < k; ++f)
        for (int row : test[static_cast<std::size_t>(f)]) fold_of[static_cast<std::size_t>(row)] = f;
    for (int f = 0; f < k; ++f) {
        auto& fs = folds[static_cast<std::size_t>(f)];
        fs.test = std::move(test[static_cast<std::size_t>(f)]);
        std::sort(fs.test.begin(), fs.test.end());
        for (int i = 0; i < n; ++i)
            if (fold_of[static_cast<std::size_t>(i)] != f) fs.train.push_back(i);
    }
    return folds;
}

} // namespace obraf
