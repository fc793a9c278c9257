#pragma once

// Proximal and penalty operators shared by the ADMM updates.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "umccev/errors.hpp"

namespace umccev {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Knees of the firm threshold: zero below `lambda`, identity above `a`.
class FirmParams {
public:
    FirmParams(double lambda, double a) : lambda_(lambda), a_(a) {
        if (!(lambda >= 0.0) || !(a >= lambda) || !std::isfinite(a))
            throw InvalidInput("FirmParams requires 0 <= lambda <= a < inf");
    }

    /// Knees induced by a penalty weight and ADMM penalty: lambda = w/mu, a = w/(gamma*mu).
    static FirmParams from_penalty(double weight, double mu, double gamma) {
        if (!(mu > 0.0) || !(gamma > 0.0) || !(gamma <= 1.0))
            throw InvalidInput("FirmParams::from_penalty requires mu > 0 and gamma in (0, 1]");
        const double lambda = weight / mu;
        // gamma == 1 must land exactly on the hard-threshold case
        const double a = gamma == 1.0 ? lambda : weight / (gamma * mu);
        return {lambda, std::max(a, lambda)};
    }

    double lambda() const noexcept { return lambda_; }
    double a() const noexcept { return a_; }
    bool is_hard() const noexcept { return a_ == lambda_; }

private:
    double lambda_;
    double a_;
};

/// Scalar B = b*I of the generalized Huber function.
class GmcScale {
public:
    explicit GmcScale(double b) : b_(b) {
        if (!(b > 0.0) || !std::isfinite(b)) throw InvalidInput("GmcScale requires finite b > 0");
    }

    /// b = sqrt(gamma / theta) for a subproblem weight theta.
    static GmcScale for_weight(double gamma, double theta) { return GmcScale(std::sqrt(gamma / theta)); }

    double b() const noexcept { return b_; }

    /// True when A^T A - theta b^2 I is PSD for A = I, i.e. theta * b^2 <= 1.
    bool convex_for(double theta) const noexcept { return theta * b_ * b_ <= 1.0 + 1e-12; }

private:
    double b_;
};

inline double soft_threshold(double x, double tau) {
    const double mag = std::abs(x) - tau;
    return mag > 0.0 ? std::copysign(mag, x) : 0.0;
}

inline double firm_threshold(double x, const FirmParams& p) {
    const double ax = std::abs(x);
    if (ax <= p.lambda()) return 0.0;
    if (ax > p.a() || p.is_hard()) return x;
    return std::copysign(p.a() * (ax - p.lambda()) / (p.a() - p.lambda()), x);
}

namespace detail {

template <class SpectrumMap>
Matrix map_singular_values(const Matrix& m, SpectrumMap&& f) {
    if (!m.allFinite()) throw NumericalError("singular value decomposition of a non-finite matrix");
    if (m.size() == 0) return m;
    Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) throw NumericalError("singular value decomposition failed");
    Vector s = svd.singularValues();
    for (Eigen::Index i = 0; i < s.size(); ++i) s[i] = f(s[i]);
    return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

}  // namespace detail

/// Singular value thresholding: proximal map of tau * nuclear norm.
inline Matrix svt(const Matrix& m, double tau) {
    if (!(tau >= 0.0)) throw InvalidInput("svt requires tau >= 0");
    return detail::map_singular_values(m, [tau](double s) { return soft_threshold(s, tau); });
}

/// Firm threshold applied to the singular values.
inline Matrix firm_svt(const Matrix& m, const FirmParams& p) {
    return detail::map_singular_values(m, [&p](double s) { return firm_threshold(s, p); });
}

/// Elementwise firm threshold.
inline Matrix firm_threshold(const Matrix& m, const FirmParams& p) {
    return m.unaryExpr([&p](double x) { return firm_threshold(x, p); });
}

/// S_B(u) = inf_v ||v||_1 + 1/2 ||b (u - v)||^2, evaluated coordinatewise in closed form.
inline double generalized_huber(const Vector& u, const GmcScale& s) {
    const double b2 = s.b() * s.b();
    double total = 0.0;
    for (double t : u) {
        const double at = std::abs(t);
        total += at <= 1.0 / b2 ? 0.5 * b2 * t * t : at - 0.5 / b2;
    }
    return total;
}

/// phi_B(u) = ||u||_1 - S_B(u); lies in [0, ||u||_1].
inline double gmc_penalty(const Vector& u, const GmcScale& s) {
    return u.lpNorm<1>() - generalized_huber(u, s);
}

/// Euclidean projection of v onto {o >= 0, sum(o) = 1, o[banned] = 0}.
inline Vector project_capped_simplex(const Vector& v, Eigen::Index banned) {
    const Eigen::Index n = v.size();
    if (n < 2) throw InvalidInput("project_capped_simplex requires at least two coordinates");
    if (banned < 0 || banned >= n) throw InvalidInput("project_capped_simplex: banned index out of range");
    if (!v.allFinite()) throw InvalidInput("project_capped_simplex: non-finite input");

    std::vector<double> sorted;
    sorted.reserve(static_cast<std::size_t>(n - 1));
    for (Eigen::Index j = 0; j < n; ++j)
        if (j != banned) sorted.push_back(v[j]);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());

    // largest k with sorted[k-1] - (prefix_k - 1)/k > 0 fixes the shift
    double prefix = 0.0;
    double shift = 0.0;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        prefix += sorted[k];
        const double candidate = (prefix - 1.0) / static_cast<double>(k + 1);
        if (sorted[k] - candidate > 0.0) shift = candidate;
    }

    Vector out(n);
    for (Eigen::Index j = 0; j < n; ++j) out[j] = j == banned ? 0.0 : std::max(v[j] - shift, 0.0);
    return out;
}

}  // namespace umccev
