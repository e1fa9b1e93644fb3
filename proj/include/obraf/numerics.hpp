#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "obraf/errors.hpp"

namespace obraf {

// =============================================================================
// Ridge regression
// =============================================================================

enum class RidgeForm {
    Auto,   // primal when unknowns <= samples, dual otherwise
    Primal, // w = (D'D + lambda I)^-1 D'Y
    Dual    // w = D'(DD' + lambda I)^-1 Y
};

struct LinearSystemSolution {
    Eigen::MatrixXd weights; // m x C
    double residual_norm = 0.0;      // ||D'D w + lambda w - D'Y||_F
    bool used_pseudo_inverse = false; // lambda == 0 fell back to minimum-norm
};

// Solves min ||Dw - Y||^2 + lambda ||w||^2 in closed form. The primal and
// dual routes agree for lambda > 0. At lambda == 0 a rank-deficient system
// falls back to the minimum-norm least-squares solution and flags it.
inline LinearSystemSolution ridge_solve(const Eigen::MatrixXd& D, const Eigen::MatrixXd& Y,
                                        double lambda, RidgeForm form = RidgeForm::Auto) {
    const Eigen::Index n = D.rows();
    const Eigen::Index m = D.cols();
    if (n < 1 || m < 1) throw NumericError("ridge_solve: empty design matrix");
    if (Y.rows() != n) throw NumericError("ridge_solve: target row count mismatch");
    if (!D.allFinite() || !Y.allFinite()) throw NumericError("ridge_solve: non-finite input");
    if (lambda < 0.0) throw NumericError("ridge_solve: negative regularization");

    LinearSystemSolution sol;
    if (lambda == 0.0 && form == RidgeForm::Auto) {
        // Rank-revealing path; exact least squares when full rank, minimum
        // norm otherwise.
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(D);
        sol.weights = cod.solve(Y);
        sol.used_pseudo_inverse = cod.rank() < m; // normal equations were singular
    } else {
        if (form == RidgeForm::Auto) form = (m <= n) ? RidgeForm::Primal : RidgeForm::Dual;
        if (form == RidgeForm::Primal) {
            Eigen::MatrixXd A = D.transpose() * D;
            A.diagonal().array() += lambda;
            Eigen::LLT<Eigen::MatrixXd> llt(A);
            if (llt.info() != Eigen::Success) {
                if (lambda == 0.0)
                    throw NumericError("ridge_solve: singular normal equations at lambda=0");
                throw NumericError("ridge_solve: factorization failed");
            }
            sol.weights = llt.solve(D.transpose() * Y);
        } else {
            Eigen::MatrixXd A = D * D.transpose();
            A.diagonal().array() += lambda;
            Eigen::LLT<Eigen::MatrixXd> llt(A);
            if (llt.info() != Eigen::Success) {
                if (lambda == 0.0)
                    throw NumericError("ridge_solve: singular gram matrix at lambda=0");
                throw NumericError("ridge_solve: factorization failed");
            }
            sol.weights = D.transpose() * llt.solve(Y);
        }
    }

    sol.residual_norm = (D.transpose() * (D * sol.weights - Y) + lambda * sol.weights).norm();
    return sol;
}

// =============================================================================
// Generalized symmetric-definite eigenproblem
// =============================================================================

struct GenEigenResult {
    Eigen::VectorXd eigenvector; // unit norm, largest-|entry| positive
    double eigenvalue = 0.0;     // >= 0
};

namespace detail {

inline void check_symmetric(const Eigen::MatrixXd& M, const char* name) {
    const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
    const double asym = (M - M.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10 * scale)
        throw NumericError(std::string("gen_eig_smallest: ") + name + " is not symmetric");
}

} // namespace detail

// Smallest eigenpair of G z = lambda H z for symmetric PSD G, H. H is
// Tikhonov-regularized by 1e-6 times its mean diagonal before the Cholesky
// reduction to a standard symmetric problem, so a singular H (fewer samples
// than dimensions in the caller) stays solvable.
inline GenEigenResult gen_eig_smallest(Eigen::MatrixXd G, Eigen::MatrixXd H) {
    const Eigen::Index q1 = G.rows();
    if (q1 == 0 || G.cols() != q1 || H.rows() != q1 || H.cols() != q1)
        throw NumericError("gen_eig_smallest: inputs must be square and equally sized");
    if (!G.allFinite() || !H.allFinite()) throw NumericError("gen_eig_smallest: non-finite input");
    detail::check_symmetric(G, "G");
    detail::check_symmetric(H, "H");
    G = 0.5 * (G + G.transpose().eval());
    H = 0.5 * (H + H.transpose().eval());

    const double trace = H.trace();
    if (!(trace > 0.0)) throw NumericError("gen_eig_smallest: H has zero trace");
    H.diagonal().array() += 1e-6 * trace / static_cast<double>(q1);

    Eigen::LLT<Eigen::MatrixXd> llt(H);
    if (llt.info() != Eigen::Success)
        throw NumericError("gen_eig_smallest: regularized H is not positive definite");
    const Eigen::MatrixXd L = llt.matrixL();

    // C = L^-1 G L^-T shares the pencil's eigenvalues; eigenvectors map back
    // through L^-T.
    Eigen::MatrixXd C = L.triangularView<Eigen::Lower>().solve(G);
    C = L.triangularView<Eigen::Lower>().solve(C.transpose().eval());
    C = 0.5 * (C + C.transpose().eval());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
    if (es.info() != Eigen::Success) throw NumericError("gen_eig_smallest: eigensolver failed");

    GenEigenResult out;
    out.eigenvalue = std::max(es.eigenvalues()(0), 0.0);
    Eigen::VectorXd z =
        L.transpose().triangularView<Eigen::Upper>().solve(es.eigenvectors().col(0));
    z.normalize();
    Eigen::Index imax = 0;
    z.cwiseAbs().maxCoeff(&imax);
    if (z(imax) < 0.0) z = -z;
    out.eigenvector = std::move(z);
    return out;
}

} // namespace obraf
