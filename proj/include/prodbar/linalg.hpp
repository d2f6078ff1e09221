#pragma once

#include "errors.hpp"
#include "types.hpp"

#include <algorithm>
#include <sstream>
#include <string>

namespace prodbar::linalg {

/// Numerical null-space policy: values <= cutoff * scale count as zero, and
/// the smallest retained value must exceed the largest discarded one by
/// `min_gap`.
struct NullCutoff {
    double cutoff = 1e-10;
    double min_gap = 1e3;
};

inline void check_gap(const Eigen::VectorXd& values, double threshold, const NullCutoff& policy,
                      const std::string& where) {
    double largest_zero = -1.0, smallest_kept = -1.0;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        const double v = std::abs(values[i]);
        if (v <= threshold)
            largest_zero = std::max(largest_zero, v);
        else if (smallest_kept < 0 || v < smallest_kept)
            smallest_kept = v;
    }
    if (largest_zero <= 0.0 || smallest_kept < 0) return;
    const double ratio = smallest_kept / largest_zero;
    if (ratio < policy.min_gap) {
        std::ostringstream os;
        os << "ambiguous null space at " << where << ": gap ratio " << ratio << " between " << largest_zero
           << " and " << smallest_kept;
        throw SpectralGapError(os.str());
    }
}

/// Thin wrapper around a full SVD with a rank decision.
struct RankRevealingSvd {
    Matrix U;  // rows x rows
    Matrix V;  // cols x cols
    Eigen::VectorXd sigma;
    Eigen::Index rank = 0;

    RankRevealingSvd(const Matrix& a, double scale, const NullCutoff& policy, const std::string& where) {
        if (a.rows() == 0 || a.cols() == 0) {
            U = Matrix::Identity(a.rows(), a.rows());
            V = Matrix::Identity(a.cols(), a.cols());
            return;
        }
        Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
        U = svd.matrixU();
        V = svd.matrixV();
        sigma = svd.singularValues();
        const double threshold = policy.cutoff * scale;
        check_gap(sigma, threshold, policy, where);
        rank = 0;
        while (rank < sigma.size() && sigma[rank] > threshold) ++rank;
    }

    /// Moore-Penrose pseudoinverse restricted to the retained singular values.
    Matrix pseudoinverse() const {
        Matrix out = Matrix::Zero(V.rows(), U.rows());
        for (Eigen::Index i = 0; i < rank; ++i) out += V.col(i) * (1.0 / sigma[i]) * U.col(i).adjoint();
        return out;
    }
    Matrix kernel_basis() const { return V.rightCols(V.cols() - rank); }
    Matrix cokernel_basis() const { return U.rightCols(U.cols() - rank); }
};

/// Eigen-decomposition of a hermitian positive semidefinite matrix with a
/// null-space decision.
struct PsdSplit {
    Eigen::VectorXd eigenvalues;  // ascending
    Matrix eigenvectors;
    Eigen::Index null_dim = 0;

    PsdSplit(const Matrix& a, double scale, const NullCutoff& policy, const std::string& where) {
        if (a.rows() == 0) return;
        Eigen::SelfAdjointEigenSolver<Matrix> eig(a);
        eigenvalues = eig.eigenvalues();
        eigenvectors = eig.eigenvectors();
        const double threshold = policy.cutoff * scale;
        check_gap(eigenvalues, threshold, policy, where);
        null_dim = 0;
        while (null_dim < eigenvalues.size() && std::abs(eigenvalues[null_dim]) <= threshold) ++null_dim;
    }

    Matrix pseudoinverse() const {
        const Eigen::Index n = eigenvectors.rows();
        Matrix out = Matrix::Zero(n, n);
        for (Eigen::Index i = null_dim; i < eigenvalues.size(); ++i)
            out += eigenvectors.col(i) * (1.0 / eigenvalues[i]) * eigenvectors.col(i).adjoint();
        return out;
    }
    Matrix null_projector() const {
        const Eigen::Index n = eigenvectors.rows();
        if (n == 0) return Matrix(0, 0);
        const Matrix z = eigenvectors.leftCols(null_dim);
        return z * z.adjoint();
    }
};

}  // namespace prodbar::linalg
