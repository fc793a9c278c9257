#pragma once

// External clustering metrics. All of them are computed from the contingency
// table and are invariant to relabelling of either partition.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "umccev/errors.hpp"

namespace umccev {

/// counts(p, t) = number of samples with predicted cluster p and true class t,
/// after both labelings are compacted to 0..k-1 in order of first appearance.
struct Contingency {
    Eigen::MatrixXi counts;
    long n = 0;

    static Contingency from_labels(const std::vector<int>& pred, const std::vector<int>& truth) {
        if (pred.size() != truth.size())
            throw InvalidInput("label vectors differ in length: " + std::to_string(pred.size()) + " vs " +
                               std::to_string(truth.size()));
        const auto compact = [](const std::vector<int>& labels) {
            std::map<int, int> ids;
            std::vector<int> out;
            out.reserve(labels.size());
            for (int l : labels) out.push_back(ids.try_emplace(l, static_cast<int>(ids.size())).first->second);
            return std::pair{out, static_cast<int>(ids.size())};
        };
        const auto [p, kp] = compact(pred);
        const auto [t, kt] = compact(truth);
        Contingency c;
        c.counts = Eigen::MatrixXi::Zero(kp, kt);
        for (std::size_t i = 0; i < p.size(); ++i) ++c.counts(p[i], t[i]);
        c.n = static_cast<long>(pred.size());
        return c;
    }
};

/// Minimum-cost perfect assignment (Kuhn-Munkres, O(k^3)).
/// Returns assignment[row] = column.
inline std::vector<int> hungarian(const Eigen::MatrixXd& cost) {
    if (cost.rows() != cost.cols()) throw InvalidInput("hungarian requires a square cost matrix");
    if (!cost.allFinite()) throw InvalidInput("hungarian requires finite costs");
    const int k = static_cast<int>(cost.rows());
    if (k == 0) return {};

    // 1-based potentials formulation; column 0 is a sentinel
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(k + 1, 0.0), v(k + 1, 0.0);
    std::vector<int> match(k + 1, 0), way(k + 1, 0);
    for (int row = 1; row <= k; ++row) {
        match[0] = row;
        int col0 = 0;
        std::vector<double> minv(k + 1, inf);
        std::vector<char> used(k + 1, false);
        do {
            used[col0] = true;
            const int r0 = match[col0];
            double delta = inf;
            int col1 = 0;
            for (int col = 1; col <= k; ++col) {
                if (used[col]) continue;
                const double cur = cost(r0 - 1, col - 1) - u[r0] - v[col];
                if (cur < minv[col]) {
                    minv[col] = cur;
                    way[col] = col0;
                }
                if (minv[col] < delta) {
                    delta = minv[col];
                    col1 = col;
                }
            }
            for (int col = 0; col <= k; ++col) {
                if (used[col]) {
                    u[match[col]] += delta;
                    v[col] -= delta;
                } else {
                    minv[col] -= delta;
                }
            }
            col0 = col1;
        } while (match[col0] != 0);
        do {
            const int col1 = way[col0];
            match[col0] = match[col1];
            col0 = col1;
        } while (col0 != 0);
    }
    std::vector<int> assignment(k);
    for (int col = 1; col <= k; ++col) assignment[match[col] - 1] = col - 1;
    return assignment;
}

/// Best-matching accuracy; the contingency is zero-padded to square.
inline double accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
    const auto c = Contingency::from_labels(pred, truth);
    if (c.n == 0) throw InvalidInput("accuracy of empty labelings");
    const Eigen::Index k = std::max(c.counts.rows(), c.counts.cols());
    Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(k, k);
    cost.topLeftCorner(c.counts.rows(), c.counts.cols()) = -c.counts.cast<double>();
    const auto assign = hungarian(cost);
    long hits = 0;
    for (Eigen::Index r = 0; r < c.counts.rows(); ++r) {
        const int col = assign[static_cast<std::size_t>(r)];
        if (col < c.counts.cols()) hits += c.counts(r, col);
    }
    return static_cast<double>(hits) / static_cast<double>(c.n);
}

/// Mutual information normalized by sqrt(H(pred) H(truth)), natural log.
inline double nmi(const std::vector<int>& pred, const std::vector<int>& truth) {
    const auto c = Contingency::from_labels(pred, truth);
    if (c.n == 0) throw InvalidInput("nmi of empty labelings");
    const double n = static_cast<double>(c.n);
    const Eigen::VectorXd a = c.counts.cast<double>().rowwise().sum();
    const Eigen::VectorXd b = c.counts.cast<double>().colwise().sum().transpose();
    const auto entropy = [n](const Eigen::VectorXd& m) {
        double h = 0.0;
        for (double x : m)
            if (x > 0.0) h -= x / n * std::log(x / n);
        return h;
    };
    double mi = 0.0;
    for (Eigen::Index i = 0; i < c.counts.rows(); ++i)
        for (Eigen::Index j = 0; j < c.counts.cols(); ++j) {
            const double nij = c.counts(i, j);
            if (nij > 0.0) mi += nij / n * std::log(n * nij / (a[i] * b[j]));
        }
    const double ha = entropy(a);
    const double hb = entropy(b);
    if (ha == 0.0 && hb == 0.0) return 1.0;
    if (ha == 0.0 || hb == 0.0) return 0.0;
    return std::clamp(mi / std::sqrt(ha * hb), 0.0, 1.0);
}

inline double purity(const std::vector<int>& pred, const std::vector<int>& truth) {
    const auto c = Contingency::from_labels(pred, truth);
    if (c.n == 0) throw InvalidInput("purity of empty labelings");
    return static_cast<double>(c.counts.rowwise().maxCoeff().sum()) / static_cast<double>(c.n);
}

struct PairCounts {
    double precision = 0.0;
    double recall = 0.0;
    double f_score = 0.0;
};

namespace detail {
inline double choose2(double x) { return 0.5 * x * (x - 1.0); }
}  // namespace detail

/// Pair-counting precision, recall and F-score; 0/0 is taken as 0.
inline PairCounts pairwise_prf(const std::vector<int>& pred, const std::vector<int>& truth) {
    const auto c = Contingency::from_labels(pred, truth);
    if (c.n < 2) throw InvalidInput("pairwise_prf needs at least two samples");
    const Eigen::MatrixXd m = c.counts.cast<double>();
    const double tp = m.unaryExpr(&detail::choose2).sum();
    const double pred_pairs = m.rowwise().sum().unaryExpr(&detail::choose2).sum();
    const double true_pairs = m.colwise().sum().unaryExpr(&detail::choose2).sum();
    PairCounts r;
    r.precision = pred_pairs > 0.0 ? tp / pred_pairs : 0.0;
    r.recall = true_pairs > 0.0 ? tp / true_pairs : 0.0;
    const double denom = r.precision + r.recall;
    r.f_score = denom > 0.0 ? 2.0 * r.precision * r.recall / denom : 0.0;
    return r;
}

inline double ari(const std::vector<int>& pred, const std::vector<int>& truth) {
    const auto c = Contingency::from_labels(pred, truth);
    if (c.n < 2) throw InvalidInput("ari needs at least two samples");
    const Eigen::MatrixXd m = c.counts.cast<double>();
    const double index = m.unaryExpr(&detail::choose2).sum();
    const double sum_a = m.rowwise().sum().unaryExpr(&detail::choose2).sum();
    const double sum_b = m.colwise().sum().unaryExpr(&detail::choose2).sum();
    const double expected = sum_a * sum_b / detail::choose2(static_cast<double>(c.n));
    const double max_index = 0.5 * (sum_a + sum_b);
    const double denom = max_index - expected;
    if (denom == 0.0) return index == max_index ? 1.0 : 0.0;
    return (index - expected) / denom;
}

struct MetricSet {
    double acc = 0.0;
    double nmi = 0.0;
    double purity = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f_score = 0.0;
    double ari = 0.0;
};

inline const std::vector<std::string>& metric_names() {
    static const std::vector<std::string> names{"acc", "nmi", "purity", "precision", "recall", "fscore", "ari"};
    return names;
}

/// Values in metric_names() order.
inline std::vector<double> as_vector(const MetricSet& m) {
    return {m.acc, m.nmi, m.purity, m.precision, m.recall, m.f_score, m.ari};
}

inline MetricSet evaluate(const std::vector<int>& pred, const std::vector<int>& truth) {
    MetricSet m;
    m.acc = accuracy(pred, truth);
    m.nmi = nmi(pred, truth);
    m.purity = purity(pred, truth);
    const auto prf = pairwise_prf(pred, truth);
    m.precision = prf.precision;
    m.recall = prf.recall;
    m.f_score = prf.f_score;
    m.ari = ari(pred, truth);
    return m;
}

}  // namespace umccev
