#pragma once

// Final stage: fused affinity and normalized spectral clustering.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "umccev/errors.hpp"
#include "umccev/operators.hpp"

namespace umccev {

/// A = (|Z| + |Z^T|)/2 + mean_v (|U_v| + |U_v^T|)/2. An empty `us` drops the second term.
inline Matrix fuse_affinity(const Matrix& Z, const std::vector<Matrix>& us) {
    if (Z.rows() != Z.cols()) throw InvalidInput("fuse_affinity: Z must be square");
    const Matrix absZ = Z.cwiseAbs();
    Matrix A = 0.5 * (absZ + absZ.transpose());
    if (!us.empty()) {
        Matrix acc = Matrix::Zero(Z.rows(), Z.cols());
        for (const Matrix& U : us) {
            if (U.rows() != Z.rows() || U.cols() != Z.cols())
                throw InvalidInput("fuse_affinity: view matrix is " + std::to_string(U.rows()) + "x" +
                                   std::to_string(U.cols()) + ", expected " + std::to_string(Z.rows()) + "x" +
                                   std::to_string(Z.cols()));
            const Matrix absU = U.cwiseAbs();
            acc += 0.5 * (absU + absU.transpose());
        }
        A += acc / static_cast<double>(us.size());
    }
    // bitwise symmetry regardless of summation order
    const Matrix upper = A.triangularView<Eigen::Upper>();
    A = upper;
    A.triangularView<Eigen::StrictlyLower>() = upper.transpose();
    return A;
}

struct KMeansResult {
    std::vector<int> labels;
    double wcss = 0.0;
};

namespace detail {

inline KMeansResult lloyd(const Matrix& points, int k, std::mt19937_64& rng, int max_iter) {
    const Eigen::Index n = points.rows();
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // k-means++ seeding
    Matrix centers(k, points.cols());
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    centers.row(0) = points.row(pick(rng));
    Vector d2 = (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
    for (int c = 1; c < k; ++c) {
        const double total = d2.sum();
        Eigen::Index chosen = 0;
        if (total > 0.0) {
            double target = unit(rng) * total;
            chosen = n - 1;
            for (Eigen::Index i = 0; i < n; ++i) {
                target -= d2[i];
                if (target < 0.0 && d2[i] > 0.0) {
                    chosen = i;
                    break;
                }
            }
        } else {
            chosen = pick(rng);
        }
        centers.row(c) = points.row(chosen);
        d2 = d2.cwiseMin((points.rowwise() - centers.row(c)).rowwise().squaredNorm());
    }

    std::vector<int> labels(static_cast<std::size_t>(n), -1);
    Vector best_d(n);
    for (int it = 0; it < max_iter; ++it) {
        bool changed = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            int best = 0;
            double bd = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                const double d = (points.row(i) - centers.row(c)).squaredNorm();
                if (d < bd) {
                    bd = d;
                    best = c;
                }
            }
            best_d[i] = bd;
            if (labels[static_cast<std::size_t>(i)] != best) {
                labels[static_cast<std::size_t>(i)] = best;
                changed = true;
            }
        }

        Matrix sums = Matrix::Zero(k, points.cols());
        std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            sums.row(labels[static_cast<std::size_t>(i)]) += points.row(i);
            ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) {
                centers.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
                continue;
            }
            // empty cluster: move it onto the point farthest from its center
            Eigen::Index far = 0;
            best_d.maxCoeff(&far);
            centers.row(c) = points.row(far);
            best_d[far] = 0.0;
            labels[static_cast<std::size_t>(far)] = c;
            changed = true;
        }
        if (!changed) break;
    }

    KMeansResult r{std::move(labels), 0.0};
    for (Eigen::Index i = 0; i < n; ++i)
        r.wcss += (points.row(i) - centers.row(r.labels[static_cast<std::size_t>(i)])).squaredNorm();
    return r;
}

}  // namespace detail

/// k-means on the rows of `points`: k-means++ seeding, Lloyd iterations
/// (at most 300), best within-cluster sum of squares over `restarts`.
inline KMeansResult kmeans(const Matrix& points, int k, std::uint64_t seed, int restarts = 20) {
    if (k <= 0) throw InvalidInput("kmeans requires k > 0");
    if (k > points.rows()) throw InvalidInput("kmeans requires k <= number of points");
    if (restarts <= 0) throw InvalidInput("kmeans requires at least one restart");
    if (!points.allFinite()) throw InvalidInput("kmeans: non-finite points");
    KMeansResult best{{}, std::numeric_limits<double>::infinity()};
    for (int r = 0; r < restarts; ++r) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(r)};
        std::mt19937_64 rng(seq);
        KMeansResult cur = detail::lloyd(points, k, rng, 300);
        if (cur.wcss < best.wcss) best = std::move(cur);
    }
    return best;
}

/// Row-normalized eigenvectors of the c smallest eigenvalues of
/// I - D^{-1/2} W D^{-1/2}, W = (A + A^T)/2. Zero-degree samples get an
/// all-zero Laplacian row, so each spans its own null direction.
inline Matrix normalized_spectral_embedding(const Matrix& A, int c) {
    if (A.rows() != A.cols()) throw InvalidInput("spectral embedding requires a square affinity");
    if (c <= 0 || c > A.rows()) throw InvalidInput("spectral clustering requires 0 < c <= n");
    if (!A.allFinite() || (A.array() < 0.0).any())
        throw InvalidInput("spectral clustering requires a finite nonnegative affinity");
    const Eigen::Index n = A.rows();
    const Matrix W = 0.5 * (A + A.transpose());
    const Vector deg = W.rowwise().sum();
    Vector inv_sqrt(n);
    for (Eigen::Index i = 0; i < n; ++i) inv_sqrt[i] = deg[i] > 0.0 ? 1.0 / std::sqrt(deg[i]) : 0.0;
    Matrix L = -(inv_sqrt.asDiagonal() * W * inv_sqrt.asDiagonal());
    for (Eigen::Index i = 0; i < n; ++i) L(i, i) += deg[i] > 0.0 ? 1.0 : 0.0;
    L = (0.5 * (L + L.transpose())).eval();

    Eigen::SelfAdjointEigenSolver<Matrix> eig(L);
    if (eig.info() != Eigen::Success) throw NumericalError("normalized Laplacian eigendecomposition failed");
    Matrix Y = eig.eigenvectors().leftCols(c);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double norm = Y.row(i).norm();
        if (norm > 0.0) Y.row(i) /= norm;
    }
    return Y;
}

inline std::vector<int> spectral_cluster(const Matrix& A, int c, std::uint64_t seed, int restarts = 20) {
    return kmeans(normalized_spectral_embedding(A, c), c, seed, restarts).labels;
}

}  // namespace umccev
