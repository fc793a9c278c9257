#pragma once

// Brute-force reference computations used only by the test suites. None of
// these call into the library routine they are compared against.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// argmin of f over the lattice step*Z intersected with [lo, hi]; returns {x, f(x)}.
/// The lattice always contains 0, where the nonsmooth penalties have their kink.
template <class F>
std::pair<double, double> grid_min(F&& f, double lo, double hi, double step) {
    double best_x = 0.0;
    double best_f = std::numeric_limits<double>::infinity();
    const long first = static_cast<long>(std::floor(lo / step));
    const long last = static_cast<long>(std::ceil(hi / step));
    for (long i = first; i <= last; ++i) {
        const double x = static_cast<double>(i) * step;
        const double fx = f(x);
        if (fx < best_f) {
            best_f = fx;
            best_x = x;
        }
    }
    return {best_x, best_f};
}

/// Scalar MCP-type penalty whose proximal map is the firm threshold with knees (lam, a), a > lam.
inline double mcp(double x, double lam, double a) {
    const double ax = std::abs(x);
    return ax <= a ? lam * ax - lam * x * x / (2.0 * a) : 0.5 * lam * a;
}

/// inf_v |v| + b^2/2 (u - v)^2 by grid search over v.
inline double huber_grid(double u, double b, double step = 1e-4) {
    const double lo = std::min(u, 0.0) - 1.0;
    const double hi = std::max(u, 0.0) + 1.0;
    return grid_min([&](double v) { return std::abs(v) + 0.5 * b * b * (u - v) * (u - v); }, lo, hi, step).second;
}

/// min ||o - v||^2 over o >= 0, sum o = 1, o[banned] = 0, for v of length 3 or 4,
/// by enumerating the simplex on a lattice of the given resolution.
inline double simplex_grid_objective(const Vector& v, Eigen::Index banned, double step = 1e-3) {
    std::vector<Eigen::Index> free;
    for (Eigen::Index j = 0; j < v.size(); ++j)
        if (j != banned) free.push_back(j);
    const long steps = std::lround(1.0 / step);
    double best = std::numeric_limits<double>::infinity();
    const double vb2 = v[banned] * v[banned];
    if (free.size() == 2) {
        for (long i = 0; i <= steps; ++i) {
            const double a = static_cast<double>(i) / static_cast<double>(steps);
            const double b = 1.0 - a;
            best = std::min(best, vb2 + (a - v[free[0]]) * (a - v[free[0]]) + (b - v[free[1]]) * (b - v[free[1]]));
        }
    } else if (free.size() == 3) {
        for (long i = 0; i <= steps; ++i) {
            const double a = static_cast<double>(i) / static_cast<double>(steps);
            const double da = (a - v[free[0]]) * (a - v[free[0]]);
            for (long j = 0; j <= steps - i; ++j) {
                const double b = static_cast<double>(j) / static_cast<double>(steps);
                const double c = 1.0 - a - b;
                best = std::min(best, vb2 + da + (b - v[free[1]]) * (b - v[free[1]]) +
                                          (c - v[free[2]]) * (c - v[free[2]]));
            }
        }
    }
    return best;
}

/// Singular values via the Jacobi SVD (the library uses the divide-and-conquer one).
inline Vector singular_values(const Matrix& m) {
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues();
}

/// Central-difference gradient of f at X.
template <class F>
Matrix fd_gradient(F&& f, const Matrix& X, double h = 1e-5) {
    Matrix G(X.rows(), X.cols());
    Matrix Y = X;
    for (Eigen::Index j = 0; j < X.cols(); ++j)
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            const double x0 = Y(i, j);
            Y(i, j) = x0 + h;
            const double fp = f(Y);
            Y(i, j) = x0 - h;
            const double fm = f(Y);
            Y(i, j) = x0;
            G(i, j) = (fp - fm) / (2.0 * h);
        }
    return G;
}

inline Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> nd(0.0, scale);
    Matrix M(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
        for (Eigen::Index i = 0; i < r; ++i) M(i, j) = nd(rng);
    return M;
}

inline Matrix random_orthonormal(Eigen::Index n, Eigen::Index c, std::mt19937_64& rng) {
    Eigen::HouseholderQR<Matrix> qr(random_matrix(n, c, rng));
    return qr.householderQ() * Matrix::Identity(n, c);
}

/// All labelings of n items into at most k blocks, as restricted growth strings.
inline std::vector<std::vector<int>> set_partitions(int n, int k) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(static_cast<std::size_t>(n), 0);
    auto rec = [&](auto&& self, int i, int used) -> void {
        if (i == n) {
            out.push_back(cur);
            return;
        }
        for (int b = 0; b <= std::min(used, k - 1); ++b) {
            cur[static_cast<std::size_t>(i)] = b;
            self(self, i + 1, std::max(used, b + 1));
        }
    };
    rec(rec, 0, 0);
    return out;
}

struct PairConfusion {
    double same_same = 0, same_diff = 0, diff_same = 0, diff_diff = 0;  // (pred, truth)
};

inline PairConfusion pair_confusion(const std::vector<int>& pred, const std::vector<int>& truth) {
    PairConfusion pc;
    for (std::size_t i = 0; i < pred.size(); ++i)
        for (std::size_t j = i + 1; j < pred.size(); ++j) {
            const bool sp = pred[i] == pred[j];
            const bool st = truth[i] == truth[j];
            if (sp && st) ++pc.same_same;
            else if (sp) ++pc.same_diff;
            else if (st) ++pc.diff_same;
            else ++pc.diff_diff;
        }
    return pc;
}

/// Accuracy maximized over every injective relabeling of the predicted clusters.
inline double accuracy_bruteforce(const std::vector<int>& pred, const std::vector<int>& truth) {
    const int kp = *std::max_element(pred.begin(), pred.end()) + 1;
    const int kt = *std::max_element(truth.begin(), truth.end()) + 1;
    const int k = std::max(kp, kt);
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    long best = 0;
    do {
        long hits = 0;
        for (std::size_t i = 0; i < pred.size(); ++i)
            if (perm[static_cast<std::size_t>(pred[i])] == truth[i]) ++hits;
        best = std::max(best, hits);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return static_cast<double>(best) / static_cast<double>(pred.size());
}

inline double purity_bruteforce(const std::vector<int>& pred, const std::vector<int>& truth) {
    std::map<int, std::map<int, int>> groups;
    for (std::size_t i = 0; i < pred.size(); ++i) ++groups[pred[i]][truth[i]];
    long total = 0;
    for (const auto& [p, counts] : groups) {
        int best = 0;
        for (const auto& [t, c] : counts) best = std::max(best, c);
        total += best;
    }
    return static_cast<double>(total) / static_cast<double>(pred.size());
}

/// NMI from empirical probabilities accumulated sample by sample.
inline double nmi_direct(const std::vector<int>& pred, const std::vector<int>& truth) {
    const double n = static_cast<double>(pred.size());
    std::map<int, double> pa, pb;
    std::map<std::pair<int, int>, double> pab;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        pa[pred[i]] += 1.0 / n;
        pb[truth[i]] += 1.0 / n;
        pab[{pred[i], truth[i]}] += 1.0 / n;
    }
    double ha = 0, hb = 0, mi = 0;
    for (const auto& [k, p] : pa) ha -= p * std::log(p);
    for (const auto& [k, p] : pb) hb -= p * std::log(p);
    for (const auto& [k, p] : pab) mi += p * std::log(p / (pa[k.first] * pb[k.second]));
    if (std::abs(ha) < 1e-15 && std::abs(hb) < 1e-15) return 1.0;
    if (std::abs(ha) < 1e-15 || std::abs(hb) < 1e-15) return 0.0;
    return mi / std::sqrt(ha * hb);
}

inline double ari_pairs(const std::vector<int>& pred, const std::vector<int>& truth) {
    const auto pc = pair_confusion(pred, truth);
    const double a = pc.same_same, b = pc.same_diff, c = pc.diff_same, d = pc.diff_diff;
    const double denom = (a + b) * (b + d) + (a + c) * (c + d);
    if (denom == 0.0) return 1.0;
    return 2.0 * (a * d - b * c) / denom;
}

}  // namespace oracle
