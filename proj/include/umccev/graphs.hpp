#pragma once

// Graph construction and graph-side updates: k-NN initialization,
// Laplacians, the per-row weights of the S update and spectral embeddings.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "umccev/errors.hpp"
#include "umccev/operators.hpp"

namespace umccev {

struct AffinityGraph {
    Matrix W;
    bool symmetric = false;
};

struct GraphLaplacian {
    Matrix L;
};

/// Squared Euclidean distances between the columns of X, computed directly
/// (no Gram-matrix shortcut, which loses precision for nearby points).
inline Matrix pairwise_sq_distances(const Matrix& X) {
    const Eigen::Index n = X.cols();
    Matrix D = Matrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = j + 1; i < n; ++i) {
            const double d = (X.col(i) - X.col(j)).squaredNorm();
            D(i, j) = d;
            D(j, i) = d;
        }
    return D;
}

/// Gaussian-weighted k-NN graph over the columns of X.
///
/// Each sample keeps its k nearest neighbours with weight exp(-d^2 / (2 sigma^2)),
/// sigma being the median distance over all selected neighbour pairs. The
/// support is symmetrized, (W + W^T)/2, and every row is then rescaled to sum
/// to one, so the result is row-stochastic with zero diagonal but in general
/// not symmetric. With `self_exclude` false a sample may occupy one of its own
/// k slots; that slot is dropped with the diagonal.
inline AffinityGraph knn_affinity(const Matrix& X, int k, bool self_exclude = true) {
    const Eigen::Index n = X.cols();
    if (k <= 0 || k >= n) throw InvalidInput("knn_affinity requires 0 < k < n");
    if (!X.allFinite()) throw InvalidInput("knn_affinity: non-finite features");

    const Matrix D2 = pairwise_sq_distances(X);
    std::vector<std::vector<Eigen::Index>> neighbours(static_cast<std::size_t>(n));
    std::vector<double> selected;
    selected.reserve(static_cast<std::size_t>(n * k));

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        order.resize(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        if (self_exclude) order.erase(order.begin() + i);
        // ties broken by index so the graph is a deterministic function of X
        std::partial_sort(order.begin(), order.begin() + k, order.end(),
                          [&](Eigen::Index a, Eigen::Index b) {
                              if (D2(i, a) != D2(i, b)) return D2(i, a) < D2(i, b);
                              if ((a == i) != (b == i)) return a == i;
                              return a < b;
                          });
        auto& nb = neighbours[static_cast<std::size_t>(i)];
        for (int r = 0; r < k; ++r) {
            const Eigen::Index j = order[static_cast<std::size_t>(r)];
            if (j == i) continue;
            nb.push_back(j);
            selected.push_back(std::sqrt(D2(i, j)));
        }
    }

    double sigma = 1.0;
    if (!selected.empty()) {
        auto mid = selected.begin() + static_cast<std::ptrdiff_t>(selected.size() / 2);
        std::nth_element(selected.begin(), mid, selected.end());
        if (*mid > 0.0) sigma = *mid;
    }

    Matrix W = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j : neighbours[static_cast<std::size_t>(i)])
            W(i, j) = std::exp(-D2(i, j) / (2.0 * sigma * sigma));
    for (Eigen::Index i = 0; i < n; ++i) {
        const double s = W.row(i).sum();
        if (s > 0.0) W.row(i) /= s;
    }
    W = (0.5 * (W + W.transpose())).eval();
    for (Eigen::Index i = 0; i < n; ++i) {
        W(i, i) = 0.0;
        const double s = W.row(i).sum();
        if (s > 0.0) W.row(i) /= s;
    }
    return {std::move(W), false};
}

/// L = D - (S + S^T)/2 with D_ii = sum_j (s_ij + s_ji)/2.
inline GraphLaplacian laplacian(const Matrix& S) {
    if (S.rows() != S.cols()) throw InvalidInput("laplacian requires a square matrix");
    if ((S.array() < 0.0).any()) throw InvalidInput("laplacian requires nonnegative weights");
    Matrix W = 0.5 * (S + S.transpose());
    Matrix L = -W;
    L.diagonal() += W.rowwise().sum();
    return {std::move(L)};
}

/// g_ij = ||x_i - x_j||^2 + lambda2 ||f_i - f_j||^2 from precomputed feature distances.
inline Matrix row_weights_from_distances(const Matrix& feature_sq_dist, const Matrix& F, double lambda2) {
    if (feature_sq_dist.rows() != F.rows() || feature_sq_dist.cols() != F.rows())
        throw InvalidInput("row_weights: distance matrix and embedding disagree on sample count");
    Matrix G = feature_sq_dist;
    if (lambda2 != 0.0) G += lambda2 * pairwise_sq_distances(F.transpose());
    G.diagonal().setZero();
    return G;
}

inline Matrix row_weights(const Matrix& Xv, const Matrix& F, double lambda2) {
    if (Xv.cols() != F.rows())
        throw InvalidInput("row_weights: view has " + std::to_string(Xv.cols()) +
                           " samples but embedding has " + std::to_string(F.rows()));
    return row_weights_from_distances(pairwise_sq_distances(Xv), F, lambda2);
}

/// Eigenvectors of L for its c smallest eigenvalues, as columns.
inline Matrix spectral_embedding(const GraphLaplacian& L, int c) {
    const Eigen::Index n = L.L.rows();
    if (c <= 0 || c > n) throw InvalidInput("spectral_embedding requires 0 < c <= n");
    if (!L.L.allFinite()) throw NumericalError("spectral_embedding: non-finite Laplacian");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(L.L);
    if (eig.info() != Eigen::Success) throw NumericalError("Laplacian eigendecomposition failed");
    return eig.eigenvectors().leftCols(c);
}

}  // namespace umccev
