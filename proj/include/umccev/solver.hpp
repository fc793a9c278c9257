#pragma once

// ADMM engine for the coupled self-expressive model.
//
// Per view v the model couples a global similarity Z (tied to an adaptive
// graph S, an error term E_v and spectral embeddings F_v) with a view-specific
// self-expressive matrix U_v that carries nonconvex low-rank and sparse
// penalties through the splits U_v = U1_v (singular values) and
// U_v = U2_v - diag(U2_v) (entries). Each outer iteration sweeps the views in
// order and applies E, Z, S, F, U, U1, U2 and the multiplier step; Z, S are
// shared, so the last view of a sweep leaves its mark on them.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "umccev/datasets.hpp"
#include "umccev/errors.hpp"
#include "umccev/graphs.hpp"
#include "umccev/operators.hpp"

namespace umccev {

enum class Variant {
    UmcCev,   ///< full coupled model
    Ml0Lssc,  ///< self-expressive side only; Z follows U_v
    MlrrAgr,  ///< graph side only; no U_v, no eta coupling
};

inline std::string to_string(Variant v) {
    switch (v) {
        case Variant::UmcCev: return "umc-cev";
        case Variant::Ml0Lssc: return "ml0-lssc";
        case Variant::MlrrAgr: return "mlrr-agr";
    }
    return "unknown";
}

inline Variant parse_variant(const std::string& s) {
    if (s == "umc-cev") return Variant::UmcCev;
    if (s == "ml0-lssc") return Variant::Ml0Lssc;
    if (s == "mlrr-agr") return Variant::MlrrAgr;
    throw InvalidInput("unknown variant '" + s + "' (expected umc-cev, ml0-lssc or mlrr-agr)");
}

struct SolverConfig {
    double lambda1 = 2e-5;  // nonconvex low-rank + sparse penalty on U_v
    double lambda2 = 2e-1;  // spectral (embedding smoothness) term
    double lambda3 = 2.0;   // nuclear norm of E_v
    double eta = 1.0;       // Z <-> U_v coupling
    double mu = 0.01;       // initial penalty for X = XZ + E and Z = S
    double mu1 = 1.0;
    double mu2 = 0.1;
    double rho1 = 1.2;
    double mu_max = 1e6;
    double gamma = 0.6;     // firm-threshold shape, (0, 1]
    int max_iter = 100;
    double tol = 1e-6;
    Variant variant = Variant::UmcCev;
    int knn_k = 0;          // 0 selects max(5, c + 1), capped at n - 1
    std::uint64_t seed = 0;
    bool printed_updates = false;  // literal (non-stationary) Z/U/E formulas
    bool grow_mu = true;           // false keeps mu fixed, leaving Z = S and X = XZ + E soft

    void validate() const {
        const auto require = [](bool ok, const char* what) {
            if (!ok) throw InvalidInput(std::string("invalid solver config: ") + what);
        };
        require(lambda1 >= 0.0 && std::isfinite(lambda1), "lambda1 must be >= 0");
        require(lambda2 >= 0.0 && std::isfinite(lambda2), "lambda2 must be >= 0");
        require(lambda3 >= 0.0 && std::isfinite(lambda3), "lambda3 must be >= 0");
        require(eta > 0.0 && std::isfinite(eta), "eta must be > 0");
        require(mu > 0.0 && std::isfinite(mu), "mu must be > 0");
        require(mu1 > 0.0 && std::isfinite(mu1), "mu1 must be > 0");
        require(mu2 > 0.0 && std::isfinite(mu2), "mu2 must be > 0");
        require(rho1 > 1.0 && std::isfinite(rho1), "rho1 must be > 1");
        require(mu_max > 0.0, "mu_max must be > 0");
        require(gamma > 0.0 && gamma <= 1.0, "gamma must lie in (0, 1]");
        require(max_iter >= 0, "max_iter must be >= 0");
        require(tol > 0.0, "tol must be > 0");
        require(knn_k >= 0, "knn_k must be >= 0");
    }

    int knn_for(Eigen::Index n, int clusters) const {
        if (knn_k > 0) return knn_k;
        return static_cast<int>(std::min<Eigen::Index>(std::max(5, clusters + 1), n - 1));
    }
};

struct SolverState {
    Matrix Z;
    Matrix S;
    std::vector<Matrix> E;
    std::vector<Matrix> U;
    std::vector<Matrix> U1;
    std::vector<Matrix> U2;
    std::vector<Matrix> C1;
    std::vector<Matrix> C2;
    std::vector<Matrix> F;
    double mu_cur = 0.0;
    double mu1_cur = 0.0;
    double mu2_cur = 0.0;
    int iter = 0;
};

struct IterationRecord {
    int iter = 0;
    double r_zs = 0.0;
    double r_u1 = 0.0;
    double r_u2 = 0.0;
    double r_recon = 0.0;
    double objective = 0.0;

    double max_coupling() const { return std::max({r_zs, r_u1, r_u2}); }
    double max_residual() const { return std::max(max_coupling(), r_recon); }
};

using IterationTrace = std::vector<IterationRecord>;

enum class Step { E, Z, S, F, U, U1, U2, Multipliers };

/// Called after every individual update with the view index it applied to.
using StepObserver = std::function<void(Step, std::size_t view, const SolverState&)>;

class Admm {
public:
    Admm(const MultiViewDataset& data, SolverConfig cfg) : data_(data), cfg_(cfg) {
        cfg_.validate();
        if (data.views.empty()) throw InvalidInput("dataset has no views");
        const Eigen::Index n = data.samples();
        if (data.clusters <= 0 || data.clusters > n)
            throw InvalidInput("cluster count " + std::to_string(data.clusters) + " outside [1, " +
                               std::to_string(n) + "]");
        if (cfg_.knn_for(n, data.clusters) >= n)
            throw InvalidInput("k-NN size " + std::to_string(cfg_.knn_for(n, data.clusters)) +
                               " must be below the sample count " + std::to_string(n));
        for (const Matrix& X : data.views) {
            if (X.cols() != n) throw DimensionMismatchError("views disagree on the sample count");
            ViewCache vc;
            vc.gram = X.transpose() * X;
            Eigen::SelfAdjointEigenSolver<Matrix> eig(vc.gram);
            if (eig.info() != Eigen::Success) throw NumericalError("Gram eigendecomposition failed");
            vc.basis = eig.eigenvectors();
            vc.spectrum = eig.eigenvalues().cwiseMax(0.0);
            vc.sq_dist = pairwise_sq_distances(X);
            vc.norm = X.norm();
            cache_.push_back(std::move(vc));
        }
    }

    const SolverConfig& config() const { return cfg_; }
    const MultiViewDataset& data() const { return data_; }
    std::size_t views() const { return data_.views.size(); }

    SolverState initialize() const {
        const Eigen::Index n = data_.samples();
        const std::size_t nv = views();

        Eigen::Index rows = 0;
        for (const Matrix& X : data_.views) rows += X.rows();
        Matrix stacked(rows, n);
        Eigen::Index r = 0;
        for (const Matrix& X : data_.views) {
            stacked.middleRows(r, X.rows()) = normalize_unit_columns(X);
            r += X.rows();
        }

        SolverState st;
        st.Z = knn_affinity(stacked, cfg_.knn_for(n, data_.clusters)).W;
        st.S = st.Z;
        const Matrix F0 = spectral_embedding(laplacian(st.Z), data_.clusters);
        const Matrix zero = Matrix::Zero(n, n);
        st.F.assign(nv, F0);
        st.U.assign(nv, zero);
        st.U1.assign(nv, zero);
        st.U2.assign(nv, zero);
        st.C1.assign(nv, zero);
        st.C2.assign(nv, zero);
        for (std::size_t v = 0; v < nv; ++v) st.E.push_back(Matrix::Zero(data_.views[v].rows(), n));
        st.mu_cur = cfg_.mu;
        st.mu1_cur = cfg_.mu1;
        st.mu2_cur = cfg_.mu2;
        if (cfg_.variant != Variant::MlrrAgr)
            for (std::size_t v = 0; v < nv; ++v) st.U[v] = update_U(st, v);
        return st;
    }

    /// E_v = SVT(X_v - X_v Z, lambda3 / mu).
    Matrix update_E(const SolverState& st, std::size_t v) const {
        const Matrix& X = data_.views[v];
        Matrix residual = X - X * st.Z;
        if (cfg_.printed_updates) residual = -residual;
        return svt(residual, cfg_.lambda3 / st.mu_cur);
    }

    /// Stationary point of mu/2 ||X - XZ - E||^2 + eta/2 ||Z - U||^2 + mu/2 ||Z - S||^2.
    Matrix update_Z(const SolverState& st, std::size_t v) const {
        if (cfg_.variant == Variant::Ml0Lssc) return st.U[v];
        const ViewCache& vc = cache_[v];
        const Matrix& X = data_.views[v];
        const double eta = cfg_.variant == Variant::MlrrAgr ? 0.0 : cfg_.eta;
        const double mu = st.mu_cur;
        const Matrix data_term = vc.gram - X.transpose() * st.E[v];
        Matrix rhs = mu * st.S;
        if (eta != 0.0) rhs += eta * st.U[v];
        if (cfg_.printed_updates) {
            rhs += data_term;
            return solve_shifted(vc, 1.0, eta + mu, rhs);
        }
        rhs += mu * data_term;
        return solve_shifted(vc, mu, eta + mu, rhs);
    }

    /// Row-wise projection of Z - G_v / mu onto the zero-diagonal simplex.
    Matrix update_S(const SolverState& st, std::size_t v) const {
        const Matrix G = row_weights_from_distances(cache_[v].sq_dist, st.F[v], cfg_.lambda2);
        const Matrix target = st.Z - G / st.mu_cur;
        Matrix S(target.rows(), target.cols());
        for (Eigen::Index i = 0; i < target.rows(); ++i)
            S.row(i) = project_capped_simplex(target.row(i).transpose(), i).transpose();
        return S;
    }

    Matrix update_F(const SolverState& st, std::size_t /*v*/) const {
        return spectral_embedding(laplacian(st.S), data_.clusters);
    }

    /// Stationary point of the U_v augmented Lagrangian.
    Matrix update_U(const SolverState& st, std::size_t v) const {
        const ViewCache& vc = cache_[v];
        const double eta = cfg_.eta;
        const double mu1 = st.mu1_cur;
        const double mu2 = st.mu2_cur;
        Matrix U2_off = st.U2[v];
        U2_off.diagonal().setZero();
        if (cfg_.printed_updates) {
            const Matrix rhs = vc.gram + mu1 * st.U1[v] + mu2 * st.U2[v] - eta * st.Z - st.C1[v] - st.C2[v];
            return solve_shifted(vc, 1.0, mu1 + mu2 - eta, rhs);
        }
        const Matrix rhs = vc.gram + eta * st.Z + mu1 * st.U1[v] - st.C1[v] + mu2 * U2_off - st.C2[v];
        return solve_shifted(vc, 1.0, eta + mu1 + mu2, rhs);
    }

    Matrix update_U1(const SolverState& st, std::size_t v) const {
        const double mu1 = st.mu1_cur;
        return firm_svt(st.C1[v] / mu1 + st.U[v], FirmParams::from_penalty(cfg_.lambda1, mu1, cfg_.gamma));
    }

    Matrix update_U2(const SolverState& st, std::size_t v) const {
        const double mu2 = st.mu2_cur;
        Matrix U2 = firm_threshold(Matrix(st.C2[v] / mu2 + st.U[v]),
                                   FirmParams::from_penalty(cfg_.lambda1, mu2, cfg_.gamma));
        U2.diagonal().setZero();
        return U2;
    }

    /// Dual ascent on C1_v, C2_v followed by geometric growth of mu1, mu2.
    void update_multipliers(SolverState& st, std::size_t v) const {
        Matrix U2_diag = Matrix::Zero(st.U2[v].rows(), st.U2[v].cols());
        U2_diag.diagonal() = st.U2[v].diagonal();
        st.C1[v] += st.mu1_cur * (st.U[v] - st.U1[v]);
        st.C2[v] += st.mu2_cur * (st.U[v] - st.U2[v] - U2_diag);
        st.mu1_cur = std::min(cfg_.rho1 * st.mu1_cur, cfg_.mu_max);
        st.mu2_cur = std::min(cfg_.rho1 * st.mu2_cur, cfg_.mu_max);
    }

    void grow_graph_penalty(SolverState& st) const {
        if (cfg_.grow_mu) st.mu_cur = std::min(cfg_.rho1 * st.mu_cur, cfg_.mu_max);
    }

    /// One outer iteration: every view, every step, in order.
    void iterate(SolverState& st, const StepObserver& observe = {}) const {
        ++st.iter;
        const auto notify = [&](Step s, std::size_t v) {
            if (observe) observe(s, v, st);
        };
        const bool graph_side = cfg_.variant != Variant::Ml0Lssc;
        const bool expressive_side = cfg_.variant != Variant::MlrrAgr;
        for (std::size_t v = 0; v < views(); ++v) {
            if (graph_side) {
                st.E[v] = update_E(st, v);
                check_finite(st.E[v], "E", st.iter);
                notify(Step::E, v);
            }
            st.Z = update_Z(st, v);
            check_finite(st.Z, "Z", st.iter);
            notify(Step::Z, v);
            if (graph_side) {
                st.S = update_S(st, v);
                check_finite(st.S, "S", st.iter);
                notify(Step::S, v);
                st.F[v] = update_F(st, v);
                check_finite(st.F[v], "F", st.iter);
                notify(Step::F, v);
            }
            if (expressive_side) {
                st.U[v] = update_U(st, v);
                check_finite(st.U[v], "U", st.iter);
                notify(Step::U, v);
                st.U1[v] = update_U1(st, v);
                check_finite(st.U1[v], "U1", st.iter);
                notify(Step::U1, v);
                st.U2[v] = update_U2(st, v);
                check_finite(st.U2[v], "U2", st.iter);
                notify(Step::U2, v);
                update_multipliers(st, v);
                check_finite(st.C1[v], "C1", st.iter);
                check_finite(st.C2[v], "C2", st.iter);
                notify(Step::Multipliers, v);
            }
            if (graph_side) grow_graph_penalty(st);
        }
    }

    IterationRecord record(const SolverState& st) const {
        IterationRecord rec;
        rec.iter = st.iter;
        if (cfg_.variant != Variant::Ml0Lssc) {
            rec.r_zs = (st.Z - st.S).norm() / std::max(1.0, st.Z.norm());
            for (std::size_t v = 0; v < views(); ++v) {
                const Matrix& X = data_.views[v];
                rec.r_recon = std::max(rec.r_recon, (X - X * st.Z - st.E[v]).norm() / std::max(1.0, cache_[v].norm));
            }
        }
        if (cfg_.variant != Variant::MlrrAgr) {
            for (std::size_t v = 0; v < views(); ++v) {
                const double scale = std::max(1.0, st.U[v].norm());
                rec.r_u1 = std::max(rec.r_u1, (st.U[v] - st.U1[v]).norm() / scale);
                rec.r_u2 = std::max(rec.r_u2, (st.U[v] - st.U2[v]).norm() / scale);
            }
        }
        rec.objective = objective(st);
        return rec;
    }

    /// Model objective at the current iterate (monitoring only). The GMC
    /// scale of each penalty is the one its firm-threshold update induces,
    /// b = sqrt(gamma * mu_i / lambda1).
    double objective(const SolverState& st) const {
        double total = 0.0;
        const Matrix W = 0.5 * (st.S + st.S.transpose());
        Matrix Ls = -W;
        Ls.diagonal() += W.rowwise().sum();
        for (std::size_t v = 0; v < views(); ++v) {
            total += cache_[v].sq_dist.cwiseProduct(st.S).sum();
            total += cfg_.lambda3 * nuclear_norm(st.E[v]);
            total += 2.0 * cfg_.lambda2 * (st.F[v].transpose() * Ls * st.F[v]).trace();
            if (cfg_.lambda1 > 0.0) {
                const GmcScale b1 = GmcScale::for_weight(cfg_.gamma, cfg_.lambda1 / st.mu1_cur);
                const GmcScale b2 = GmcScale::for_weight(cfg_.gamma, cfg_.lambda1 / st.mu2_cur);
                const Vector sv = singular_values(st.U[v]);
                const Vector flat = st.U[v].reshaped();
                total += cfg_.lambda1 * (gmc_penalty(sv, b1) + gmc_penalty(flat, b2));
            }
            total += cfg_.eta * (st.Z - st.U[v]).squaredNorm();
        }
        return total;
    }

    static double nuclear_norm(const Matrix& M) { return singular_values(M).sum(); }

    static Vector singular_values(const Matrix& M) {
        if (M.size() == 0) return Vector();
        return Eigen::BDCSVD<Matrix>(M).singularValues();
    }

private:
    struct ViewCache {
        Matrix gram;     // X^T X
        Matrix basis;    // eigenvectors of X^T X
        Vector spectrum; // its eigenvalues
        Matrix sq_dist;  // pairwise squared sample distances
        double norm = 0.0;
    };

    /// (scale * X^T X + shift * I)^{-1} rhs through the cached eigenbasis.
    static Matrix solve_shifted(const ViewCache& vc, double scale, double shift, const Matrix& rhs) {
        Vector inv = (scale * vc.spectrum).array() + shift;
        const double floor = 1e-12 * std::max(1.0, std::abs(scale) * vc.spectrum.maxCoeff() + std::abs(shift));
        for (Eigen::Index i = 0; i < inv.size(); ++i) {
            if (std::abs(inv[i]) < floor) throw NumericalError("singular linear system in Z/U update");
            inv[i] = 1.0 / inv[i];
        }
        return vc.basis * (inv.asDiagonal() * (vc.basis.transpose() * rhs));
    }

    static void check_finite(const Matrix& M, const char* name, int iter) {
        if (!M.allFinite()) throw DivergenceError(name, iter);
    }

    const MultiViewDataset& data_;
    SolverConfig cfg_;
    std::vector<ViewCache> cache_;
};

struct SolverResult {
    SolverState state;
    IterationTrace trace;
};

/// Runs the ADMM loop until every residual is below tol or max_iter is hit.
inline SolverResult run(const MultiViewDataset& data, const SolverConfig& cfg, const StepObserver& observe = {}) {
    const Admm admm(data, cfg);
    SolverResult out{admm.initialize(), {}};
    for (int it = 0; it < cfg.max_iter; ++it) {
        admm.iterate(out.state, observe);
        out.trace.push_back(admm.record(out.state));
        if (out.trace.back().max_residual() < cfg.tol) break;
    }
    return out;
}

}  // namespace umccev
