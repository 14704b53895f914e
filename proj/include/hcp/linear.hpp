#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "error.hpp"
#include "views.hpp"

namespace hcp {

struct SolveReport {
    std::string method;
    std::size_t unknowns = 0;
    std::size_t bandwidth = 0;
    double residual = 0;
    int refinements = 0;
};

struct SolverOptions {
    /// Work limit n*b^2 for the banded elimination.
    double band_work = 6e9;
    /// Memory limit in bytes for the band storage.
    double band_bytes = 1.2e9;
    std::size_t dense_limit = 6000;
    /// Symmetric systems at least this large that miss the band limits go to conjugate gradients.
    std::size_t cg_min = 1000;
    /// Symmetric systems prefer conjugate gradients once the band work n*b^2 exceeds this.
    double cg_band_work = 5e7;
    /// Largest tolerated forward-error estimate cond * eps for methods other than banded elimination.
    double forward_tol = 1e-8;
    std::size_t direct_limit = 400000;
    double residual_tol = 1e-12;
    int max_refinements = 4;
};

/// One right-hand side: values imposed outside the interior and an additive source inside.
struct RhsColumn {
    std::function<double(std::size_t)> boundary;
    std::function<double(std::size_t)> source;
};

class KilledSolution;

template <ChainView V>
KilledSolution solve_killed(const V& view, std::vector<std::size_t> interior, double u, std::vector<RhsColumn> cols,
                            const SolverOptions& opt = {});

/**
 * \brief Solution of f = e^u P f + source on an interior set, with f = boundary outside.
 */
class KilledSolution {
public:
    std::size_t columns() const { return m_; }
    const std::vector<std::size_t>& interior() const { return states_; }
    const SolveReport& report() const { return report_; }

    bool is_interior(std::size_t state) const { return position(state) >= 0; }

    std::int64_t position(std::size_t state) const {
        if (!dense_.empty()) return state < dense_.size() ? dense_[state] : -1;
        auto it = sparse_.find(state);
        return it == sparse_.end() ? -1 : it->second;
    }

    double value(std::size_t state, std::size_t col = 0) const {
        auto p = position(state);
        if (p >= 0) return values_[static_cast<std::size_t>(p) * m_ + col];
        return cols_[col].boundary ? cols_[col].boundary(state) : 0.0;
    }

    double at_position(std::size_t p, std::size_t col = 0) const { return values_[p * m_ + col]; }

private:
    template <ChainView V>
    friend KilledSolution solve_killed(const V&, std::vector<std::size_t>, double, std::vector<RhsColumn>, const SolverOptions&);

    std::vector<std::size_t> states_;
    std::vector<std::int32_t> dense_;
    std::unordered_map<std::size_t, std::int32_t> sparse_;
    std::vector<double> values_;
    std::vector<RhsColumn> cols_;
    std::size_t m_ = 0;
    SolveReport report_;
};

namespace detail {

struct KilledRows {
    std::size_t n = 0;
    std::vector<std::size_t> start;
    std::vector<std::size_t> col;
    std::vector<double> val;
    std::vector<double> rho_in;
    std::vector<double> rho_out;
    std::size_t band = 0;
};

/**
 * Banded elimination that never forms 1 - (self-loop mass): each pivot is rebuilt from the
 * off-diagonal mass still ahead plus the accumulated exit mass. Exit mass is split in a
 * positive part and a negative part so that tilts e^u > 1 are handled too.
 */
inline bool banded_elimination(const KilledRows& R, double u, std::vector<double>& B, std::size_t m, std::vector<double>& X) {
    const std::size_t n = R.n, b = R.band, W = 2 * b + 1;
    const double w = std::exp(u);
    const double em1 = std::expm1(u);
    std::vector<double> A(n * W, 0.0), ep(n), en(n), piv(n);
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t e = R.start[p]; e < R.start[p + 1]; ++e) A[p * W + (R.col[e] + b - p)] += w * R.val[e];
        if (u <= 0) {
            ep[p] = R.rho_out[p] - em1 * R.rho_in[p];
            en[p] = 0;
        } else {
            ep[p] = R.rho_out[p];
            en[p] = em1 * R.rho_in[p];
        }
    }
    for (std::size_t k = 0; k < n; ++k) {
        double* rk = &A[k * W + b];
        const std::size_t hi = std::min(n - 1, k + b);
        double s = 0;
        for (std::size_t j = 1; j <= hi - k; ++j) s += rk[j];
        double pk = s + ep[k] - en[k];
        if (!(pk > 0) || pk <= 1e-300 * (s + ep[k] + en[k] + 1e-300)) return false;
        piv[k] = pk;
        for (std::size_t i = k + 1; i <= hi; ++i) {
            double* ri = &A[i * W + b];
            double aik = ri[static_cast<std::ptrdiff_t>(k) - static_cast<std::ptrdiff_t>(i)];
            if (aik == 0) continue;
            ri[static_cast<std::ptrdiff_t>(k) - static_cast<std::ptrdiff_t>(i)] = 0;
            const double f = aik / pk;
            for (std::size_t j = k + 1; j <= hi; ++j)
                if (j != i) ri[static_cast<std::ptrdiff_t>(j) - static_cast<std::ptrdiff_t>(i)] += f * rk[j - k];
            ep[i] += f * ep[k];
            en[i] += f * en[k];
            for (std::size_t c = 0; c < m; ++c) B[i * m + c] += f * B[k * m + c];
        }
    }
    X.assign(n * m, 0.0);
    for (std::size_t k = n; k-- > 0;) {
        const double* rk = &A[k * W + b];
        const std::size_t hi = std::min(n - 1, k + b);
        for (std::size_t c = 0; c < m; ++c) {
            double s = B[k * m + c];
            for (std::size_t j = k + 1; j <= hi; ++j) s += rk[j - k] * X[j * m + c];
            X[k * m + c] = s / piv[k];
        }
    }
    return true;
}

/**
 * Residual B - (I - e^u P) X in long double; returns the normwise backward error.
 *
 * The diagonal is taken as the total jump mass of the row, as in the banded elimination, so rates
 * like 1/N that do not sum to exactly one in double do not leak mass over long hitting times.
 */
inline double residual(const KilledRows& R, double u, const std::vector<double>& B, std::size_t m, const std::vector<double>& X,
                       std::vector<double>* out = nullptr) {
    const long double w = std::exp(static_cast<long double>(u));
    const long double em1 = std::expm1(static_cast<long double>(u));
    if (out) out->assign(R.n * m, 0.0);
    double worst = 0;
    for (std::size_t c = 0; c < m; ++c) {
        long double rmax = 0, xmax = 0, bmax = 0;
        for (std::size_t p = 0; p < R.n; ++p) {
            const long double xp = X[p * m + c];
            long double s = B[p * m + c] - static_cast<long double>(R.rho_out[p]) * xp;
            for (std::size_t e = R.start[p]; e < R.start[p + 1]; ++e) {
                const long double r = R.val[e], xq = X[R.col[e] * m + c];
                s -= r * (xp - xq) - em1 * r * xq;
            }
            if (out) (*out)[p * m + c] = static_cast<double>(s);
            rmax = std::max(rmax, std::fabs(s));
            xmax = std::max(xmax, std::fabs(static_cast<long double>(X[p * m + c])));
            bmax = std::max(bmax, std::fabs(static_cast<long double>(B[p * m + c])));
        }
        long double denom = (1 + w) * xmax + bmax;
        if (denom > 0) worst = std::max(worst, static_cast<double>(rmax / denom));
    }
    return worst;
}

/// Exact symmetry of the interior block.
inline bool symmetric(const KilledRows& R) {
    for (std::size_t p = 0; p < R.n; ++p)
        for (std::size_t e = R.start[p]; e < R.start[p + 1]; ++e) {
            const std::size_t q = R.col[e];
            bool found = false;
            for (std::size_t f = R.start[q]; f < R.start[q + 1]; ++f)
                if (R.col[f] == p) {
                    found = R.val[f] == R.val[e];
                    break;
                }
            if (!found) return false;
        }
    return true;
}

inline Eigen::SparseMatrix<double> assemble(const KilledRows& R, double u) {
    const double w = std::exp(u);
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(R.val.size() + R.n);
    for (std::size_t p = 0; p < R.n; ++p) {
        t.emplace_back(static_cast<int>(p), static_cast<int>(p), 1.0);
        for (std::size_t e = R.start[p]; e < R.start[p + 1]; ++e)
            t.emplace_back(static_cast<int>(p), static_cast<int>(R.col[e]), -w * R.val[e]);
    }
    Eigen::SparseMatrix<double> M(static_cast<Eigen::Index>(R.n), static_cast<Eigen::Index>(R.n));
    M.setFromTriplets(t.begin(), t.end());
    M.makeCompressed();
    return M;
}

} // namespace detail

/**
 * \brief Solves f(i) = e^u sum_j r(i,j) f(j) + source(i) for i in the interior, f = boundary elsewhere.
 *
 * Throws out_of_domain when e^u reaches the inverse spectral radius of the killed kernel.
 */
template <ChainView V>
KilledSolution solve_killed(const V& view, std::vector<std::size_t> interior, double u, std::vector<RhsColumn> cols,
                            const SolverOptions& opt) {
    KilledSolution S;
    std::sort(interior.begin(), interior.end(), [&](std::size_t a, std::size_t b) { return view.key(a) < view.key(b); });
    interior.erase(std::unique(interior.begin(), interior.end()), interior.end());
    const std::size_t n = interior.size();
    if (n == 0) throw invalid_input("killed system has no interior states");
    if (n > static_cast<std::size_t>(INT32_MAX)) throw too_large("killed system too large");
    const std::size_t total = view.state_count();
    if (total <= std::size_t{50'000'000}) {
        S.dense_.assign(total, -1);
        for (std::size_t p = 0; p < n; ++p) {
            if (interior[p] >= total) throw invalid_input("interior state out of range");
            S.dense_[interior[p]] = static_cast<std::int32_t>(p);
        }
    } else {
        for (std::size_t p = 0; p < n; ++p) S.sparse_[interior[p]] = static_cast<std::int32_t>(p);
    }
    S.states_ = std::move(interior);
    S.cols_ = std::move(cols);
    const std::size_t m_user = S.cols_.size();
    const double w = std::exp(u);
    const bool check_domain = u > 0;
    const std::size_t m = m_user + (check_domain ? 1 : 0);

    detail::KilledRows R;
    R.n = n;
    R.start.assign(n + 1, 0);
    R.rho_in.assign(n, 0);
    R.rho_out.assign(n, 0);
    std::vector<double> B(n * m, 0.0);
    for (std::size_t p = 0; p < n; ++p) {
        std::size_t i = S.states_[p];
        view.for_each_neighbor(i, [&](std::size_t j, double r) {
            if (j == i) throw invalid_input("chains with holding are not supported");
            auto q = S.position(j);
            if (q >= 0) {
                R.col.push_back(static_cast<std::size_t>(q));
                R.val.push_back(r);
                R.rho_in[p] += r;
                std::size_t d = static_cast<std::size_t>(q) > p ? static_cast<std::size_t>(q) - p : p - static_cast<std::size_t>(q);
                R.band = std::max(R.band, d);
            } else {
                R.rho_out[p] += r;
                for (std::size_t c = 0; c < m_user; ++c)
                    if (S.cols_[c].boundary) B[p * m + c] += w * r * S.cols_[c].boundary(j);
            }
        });
        R.start[p + 1] = R.col.size();
        for (std::size_t c = 0; c < m_user; ++c)
            if (S.cols_[c].source) B[p * m + c] += S.cols_[c].source(i);
        if (check_domain) B[p * m + m_user] = 1.0;
    }

    SolveReport rep;
    rep.unknowns = n;
    rep.bandwidth = R.band;
    std::vector<double> X;
    const double nb = static_cast<double>(n);
    const double bw = static_cast<double>(R.band) + 1;
    // Below the spectral threshold a symmetric killed kernel gives an SPD system; CG plus the
    // long-double refinement beats any factorisation of the wide hypercube band.
    const bool wide = nb * bw * bw > opt.cg_band_work && n >= opt.cg_min;
    if (!(wide && u <= 0 && detail::symmetric(R)) && nb * bw * bw <= opt.band_work && nb * (2 * bw + 1) * 8 <= opt.band_bytes) {
        rep.method = "banded-elimination";
        std::vector<double> Bc = B;
        if (!detail::banded_elimination(R, u, Bc, m, X)) {
            if (u > 0) throw out_of_domain("tilt e^u reaches the inverse spectral radius of the killed kernel");
            throw solve_error("singular killed system: some interior state cannot reach the boundary");
        }
        rep.residual = detail::residual(R, u, B, m, X);
    } else if (n <= opt.direct_limit) {
        using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>;
        std::function<Mat(const Mat&)> apply_inverse;
        Eigen::SparseMatrix<double> M = detail::assemble(R, u);
        Eigen::PartialPivLU<Mat> dense;
        Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> sparse;
        Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
        if (u <= 0 && n >= opt.cg_min && detail::symmetric(R)) {
            rep.method = "conjugate-gradient";
            cg.setTolerance(1e-15);
            cg.setMaxIterations(static_cast<Eigen::Index>(10 * n));
            cg.compute(M);
            apply_inverse = [&](const Mat& rhs) {
                Mat x(rhs.rows(), rhs.cols());
                for (Eigen::Index c = 0; c < rhs.cols(); ++c) {
                    x.col(c) = cg.solve(rhs.col(c));
                    if (cg.info() == Eigen::NumericalIssue) throw solve_error("conjugate gradient broke down");
                }
                return x;
            };
        } else if (n <= opt.dense_limit) {
            rep.method = "dense-lu";
            dense.compute(Mat(M));
            apply_inverse = [&](const Mat& rhs) { return Mat(dense.solve(rhs)); };
        } else {
            rep.method = "sparse-lu";
            sparse.analyzePattern(M);
            sparse.factorize(M);
            if (sparse.info() != Eigen::Success) {
                if (u > 0) throw out_of_domain("factorisation failed above the convergence threshold");
                throw solve_error("sparse factorisation failed: " + sparse.lastErrorMessage());
            }
            apply_inverse = [&](const Mat& rhs) { return Mat(sparse.solve(rhs)); };
        }
        Mat Bm(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t c = 0; c < m; ++c) Bm(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(c)) = B[p * m + c];
        Mat Xm = apply_inverse(Bm);
        auto to_vec = [&](const Mat& A, std::vector<double>& v) {
            v.resize(n * m);
            for (std::size_t p = 0; p < n; ++p)
                for (std::size_t c = 0; c < m; ++c) v[p * m + c] = A(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(c));
        };
        to_vec(Xm, X);
        std::vector<double> r;
        rep.residual = detail::residual(R, u, B, m, X, &r);
        // Refine until the correction drops to rounding level; a small backward error alone still
        // leaves cond * eps of forward error in the long mean times.
        for (int it = 0; it < opt.max_refinements && rep.residual > 0; ++it) {
            Mat Rm(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
            for (std::size_t p = 0; p < n; ++p)
                for (std::size_t c = 0; c < m; ++c) Rm(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(c)) = r[p * m + c];
            Mat D = apply_inverse(Rm);
            std::vector<double> Xn = X;
            double dmax = 0, xmax = 0;
            for (std::size_t p = 0; p < n; ++p)
                for (std::size_t c = 0; c < m; ++c) {
                    double dv = D(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(c));
                    Xn[p * m + c] += dv;
                    dmax = std::max(dmax, std::fabs(dv));
                    xmax = std::max(xmax, std::fabs(Xn[p * m + c]));
                }
            std::vector<double> rn;
            double res = detail::residual(R, u, B, m, Xn, &rn);
            if (!(res <= rep.residual)) break;
            X.swap(Xn);
            r.swap(rn);
            rep.residual = res;
            ++rep.refinements;
            if (dmax <= 4e-16 * xmax) break;
        }
    } else {
        rep.method = "bicgstab";
        Eigen::SparseMatrix<double> M = detail::assemble(R, u);
        Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> it;
        it.setTolerance(1e-15);
        it.setMaxIterations(20000);
        it.compute(M);
        X.assign(n * m, 0.0);
        Eigen::VectorXd bcol(static_cast<Eigen::Index>(n)), xcol;
        for (std::size_t c = 0; c < m; ++c) {
            for (std::size_t p = 0; p < n; ++p) bcol(static_cast<Eigen::Index>(p)) = B[p * m + c];
            xcol = it.solve(bcol);
            for (std::size_t p = 0; p < n; ++p) X[p * m + c] = xcol(static_cast<Eigen::Index>(p));
        }
        rep.residual = detail::residual(R, u, B, m, X);
    }
    if (rep.method != "banded-elimination") {
        // ||X|| / ||B|| bounds the condition number from below. Only the banded elimination avoids the
        // cancellation in 1 - (self-loop mass), so the other methods cannot be trusted past this point.
        double xmax = 0, bmax = 0;
        for (double x : X) xmax = std::max(xmax, std::fabs(x));
        for (double b : B) bmax = std::max(bmax, std::fabs(b));
        if (bmax > 0 && xmax / bmax * 2.2e-16 > opt.forward_tol)
            throw solve_error("killed system too ill-conditioned for " + rep.method + " (solution/rhs ratio " + std::to_string(xmax / bmax) +
                              "); reduce the instance so the banded elimination applies");
    }
    if (check_domain) {
        for (std::size_t p = 0; p < n; ++p)
            if (!(X[p * m + m_user] > 0)) throw out_of_domain("tilt e^u reaches the inverse spectral radius of the killed kernel");
    }
    if (!(rep.residual <= opt.residual_tol))
        throw solve_error("residual " + std::to_string(rep.residual) + " above tolerance with method " + rep.method);
    S.m_ = m_user;
    S.values_.resize(n * m_user);
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t c = 0; c < m_user; ++c) S.values_[p * m_user + c] = X[p * m + c];
    S.report_ = rep;
    return S;
}

} // namespace hcp
