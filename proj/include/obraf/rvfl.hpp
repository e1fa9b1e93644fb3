#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <utility>
#include <vector>

#include "obraf/errors.hpp"
#include "obraf/numerics.hpp"
#include "obraf/random.hpp"

namespace obraf {

// =============================================================================
// Random vector functional link network
// =============================================================================

enum class Activation { Radbas, Sine, Tribas };

inline const char* activation_name(Activation a) {
    switch (a) {
        case Activation::Radbas: return "radbas";
        case Activation::Sine: return "sine";
        default: return "tribas";
    }
}

inline double activate(double x, Activation kind) {
    switch (kind) {
        case Activation::Radbas: return std::exp(-x * x);
        case Activation::Sine: return std::sin(x);
        default: return std::max(0.0, 1.0 - std::abs(x)); // tribas
    }
}

// Randomization grid for one network. Hidden weights are drawn from
// [-S, +S] and biases from [0, S] with S = 2^scale_exponent; the ridge
// penalty is 2^-ridge_exponent.
struct RvflConfig {
    int hidden_neurons = 50;    // N in [3, 203]
    int ridge_exponent = 6;     // in [-5, 14]
    Activation activation = Activation::Radbas;
    double scale_exponent = 0.0; // in {-1.5, -1.0, ..., 1.5}

    double lambda() const { return std::pow(2.0, -ridge_exponent); }
    double weight_scale() const { return std::pow(2.0, scale_exponent); }
};

inline RvflConfig sample_config(Rng& rng) {
    RvflConfig c;
    c.hidden_neurons = 3 + rng.uniform_int(201);  // 3..203
    c.ridge_exponent = -5 + rng.uniform_int(20);  // -5..14
    switch (rng.uniform_int(3)) {
        case 0: c.activation = Activation::Radbas; break;
        case 1: c.activation = Activation::Sine; break;
        default: c.activation = Activation::Tribas; break;
    }
    c.scale_exponent = -1.5 + 0.5 * rng.uniform_int(7);
    return c;
}

// Trained network. The output layer consumes [hidden | direct | bias], in
// that column order, so output_weights has N + d + 1 rows.
struct RvflModel {
    Eigen::MatrixXd hidden_weights; // d x N
    Eigen::VectorXd hidden_bias;    // N
    Eigen::MatrixXd output_weights; // (N + d + 1) x C
    RvflConfig config;
    int input_dim = 0;
    int num_classes = 0;
};

namespace detail {

inline Eigen::MatrixXd rvfl_design(const Eigen::MatrixXd& X, const RvflModel& m) {
    const Eigen::Index n = X.rows();
    const Eigen::Index N = m.hidden_weights.cols();
    const Eigen::Index d = X.cols();
    Eigen::MatrixXd D(n, N + d + 1);
    Eigen::MatrixXd H = X * m.hidden_weights;
    H.rowwise() += m.hidden_bias.transpose();
    for (Eigen::Index j = 0; j < N; ++j)
        for (Eigen::Index i = 0; i < n; ++i) H(i, j) = activate(H(i, j), m.config.activation);
    D << H, X, Eigen::VectorXd::Ones(n);
    return D;
}

} // namespace detail

// Fits output weights by ridge regression against one-hot targets. Hidden
// parameters depend only on (rng state, config, feature count); weights are
// drawn column by column, biases afterwards.
inline RvflModel train_rvfl(const Eigen::MatrixXd& X, const std::vector<int>& labels,
                            int num_classes, const RvflConfig& config, Rng& rng,
                            RidgeForm form = RidgeForm::Auto) {
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    if (n == 0) throw DataError("train_rvfl: empty input");
    if (num_classes < 2) throw DataError("train_rvfl: need at least 2 classes");

    RvflModel m;
    m.config = config;
    m.input_dim = static_cast<int>(d);
    m.num_classes = num_classes;

    const double S = config.weight_scale();
    m.hidden_weights.resize(d, config.hidden_neurons);
    for (int j = 0; j < config.hidden_neurons; ++j)
        for (Eigen::Index i = 0; i < d; ++i) m.hidden_weights(i, j) = rng.uniform_real(-S, S);
    m.hidden_bias.resize(config.hidden_neurons);
    for (int j = 0; j < config.hidden_neurons; ++j) m.hidden_bias(j) = rng.uniform_real(0.0, S);

    const Eigen::MatrixXd D = detail::rvfl_design(X, m);
    Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(n, num_classes);
    for (Eigen::Index i = 0; i < n; ++i) Y(i, labels[static_cast<std::size_t>(i)]) = 1.0;

    m.output_weights = ridge_solve(D, Y, config.lambda(), form).weights;
    return m;
}

// Raw class scores for one sample; only the ordering is meaningful.
inline Eigen::VectorXd score(const RvflModel& m, const Eigen::RowVectorXd& x) {
    if (x.cols() != m.input_dim) throw DataError("score: feature dimension mismatch");
    const Eigen::Index N = m.hidden_weights.cols();
    Eigen::RowVectorXd row(N + x.cols() + 1);
    Eigen::RowVectorXd h = x * m.hidden_weights + m.hidden_bias.transpose();
    for (Eigen::Index j = 0; j < N; ++j) h(j) = activate(h(j), m.config.activation);
    row << h, x, 1.0;
    return (row * m.output_weights).transpose();
}

inline int predict(const RvflModel& m, const Eigen::RowVectorXd& x) {
    Eigen::Index best = 0;
    score(m, x).maxCoeff(&best);
    return static_cast<int>(best);
}

// Indices of the largest and second-largest scores; ties resolve to the
// lower class id.
inline std::pair<int, int> top_two(const Eigen::VectorXd& scores) {
    if (scores.size() < 2) throw DataError("top_two: need at least 2 classes");
    int first = 0;
    for (int i = 1; i < scores.size(); ++i)
        if (scores(i) > scores(first)) first = i;
    int second = first == 0 ? 1 : 0;
    for (int i = 0; i < scores.size(); ++i) {
        if (i == first) continue;
        if (scores(i) > scores(second)) second = i;
    }
    return {first, second};
}

} // namespace obraf
