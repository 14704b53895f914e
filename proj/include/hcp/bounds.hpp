#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "cube.hpp"
#include "error.hpp"
#include "lumped.hpp"

namespace hcp {

/// Constants shared by every bound. Defaults are the smallest values the arguments allow.
struct BoundParams {
    double kappa0 = 4;             ///< small-distance level of kappa
    std::size_t n_threshold = 10;  ///< kappa switches to N above this distance
    double alpha0 = 1.0 / 20;      ///< admissible dimension ceiling alpha0 N / log N
    double theta_C = 1;            ///< constant in the d > 1 mean-time scale
    double c_plus = 5, c_minus = 5;
    double c_window = 5;           ///< margin of the vertex escape window, in units of 1/N^2
    double a3_delta = 0.9;         ///< contraction level for the piecewise decreasing envelope
    double diffusive_cut = 1;      ///< d^2/N below this counts as the diffusive regime
    double rho_target = 0;         ///< target for rho(M); 0 means 1/log N

    void validate() const {
        if (!(kappa0 >= 4)) throw invalid_input("kappa0 must be at least 4");
        if (n_threshold < 1) throw invalid_input("kappa threshold must be positive");
        if (!(alpha0 > 0 && alpha0 <= 1.0 / 20)) throw invalid_input("alpha0 must lie in (0, 1/20]");
        if (!(theta_C > 0 && c_plus > 0 && c_minus > 0 && c_window > 0)) throw invalid_input("constants must be positive");
        if (!(a3_delta > 2 / std::numbers::e && a3_delta < 1)) throw invalid_input("a3_delta must lie in (2/e, 1)");
        if (!(diffusive_cut > 0)) throw invalid_input("diffusive cut must be positive");
        if (rho_target < 0) throw invalid_input("rho target must be nonnegative");
    }
};

inline double kappa(const BoundParams& bp, std::size_t n, std::size_t N) {
    if (n < 1) throw invalid_input("kappa is defined for n >= 1");
    return n <= bp.n_threshold ? bp.kappa0 : static_cast<double>(N);
}

/// {m >= 1 : m + 2p = n + 2 for some p >= 0}, largest first.
inline std::vector<std::size_t> index_set_I(std::size_t n) {
    if (n < 1) throw invalid_input("index set needs n >= 1");
    std::vector<std::size_t> out;
    for (std::size_t m = n + 2; m >= 1; m -= 2) {
        out.push_back(m);
        if (m < 2) break;
    }
    return out;
}

inline long double log_binom_ld(std::size_t n, std::size_t k) {
    if (k > n) return -std::numeric_limits<long double>::infinity();
    return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

inline long double log_add_ld(long double a, long double b) {
    if (a == -std::numeric_limits<long double>::infinity()) return b;
    if (b == -std::numeric_limits<long double>::infinity()) return a;
    long double m = std::max(a, b);
    return m + std::log1p(std::exp(std::min(a, b) - m));
}

/**
 * \brief F = F1 + F2 for every distance n = 1..N, held in log space.
 *
 * F1(n) = kappa(n) n!/N^n and
 * F2(n) = kappa(n+2)^2 (n+2)!/N^(n+2) sum_{m in I(n)} N^p/p! |sphere_m|, p = (n+2-m)/2.
 */
class FTable {
public:
    FTable(const std::vector<std::size_t>& sizes, BoundParams bp = {}) : sizes_(sizes), bp_(bp) {
        bp_.validate();
        if (sizes_.empty()) throw invalid_input("partition needs at least one class");
        for (auto s : sizes_) {
            if (s == 0) throw invalid_input("empty class");
            n_ += s;
        }
        auto spheres = composition_counts(sizes_);
        log_sphere_.resize(spheres.size());
        for (std::size_t m = 0; m < spheres.size(); ++m) log_sphere_[m] = log_big(spheres[m]);
        const long double logN = std::log(static_cast<long double>(n_));
        log_f1_.assign(n_ + 1, 0);
        log_f2_.assign(n_ + 1, 0);
        for (std::size_t n = 1; n <= n_; ++n) {
            log_f1_[n] = std::log(static_cast<long double>(kappa(bp_, n, n_))) + log_factorial(n) - n * logN;
            long double sum = -std::numeric_limits<long double>::infinity();
            for (auto m : index_set_I(n)) {
                if (m > n_) continue;
                std::size_t p = (n + 2 - m) / 2;
                sum = log_add_ld(sum, p * logN - log_factorial(p) + log_sphere_[m]);
            }
            log_f2_[n] = 2 * std::log(static_cast<long double>(kappa(bp_, n + 2, n_))) + log_factorial(n + 2) -
                         (n + 2) * logN + sum;
        }
    }

    explicit FTable(const Partition& p, BoundParams bp = {}) : FTable(p.sizes(), bp) {}

    std::size_t N() const { return n_; }
    std::size_t d() const { return sizes_.size(); }
    const std::vector<std::size_t>& sizes() const { return sizes_; }
    const BoundParams& params() const { return bp_; }

    long double log_F1(std::size_t n) const { return log_f1_[check(n)]; }
    long double log_F2(std::size_t n) const { return log_f2_[check(n)]; }
    long double log_F(std::size_t n) const { return log_add_ld(log_F1(n), log_F2(n)); }
    double F1(std::size_t n) const { return static_cast<double>(std::exp(log_F1(n))); }
    double F2(std::size_t n) const { return static_cast<double>(std::exp(log_F2(n))); }
    double F(std::size_t n) const { return static_cast<double>(std::exp(log_F(n))); }
    long double log_sphere(std::size_t m) const {
        return m < log_sphere_.size() ? log_sphere_[m] : -std::numeric_limits<long double>::infinity();
    }

private:
    std::size_t check(std::size_t n) const {
        if (n < 1 || n > n_) throw invalid_input("distance must lie in 1..N");
        return n;
    }

    std::vector<std::size_t> sizes_;
    BoundParams bp_;
    std::size_t n_ = 0;
    std::vector<long double> log_sphere_, log_f1_, log_f2_;
};

// Closed-form envelopes of F2.

struct Envelope {
    std::string name;
    long double log_value = 0;   ///< with any unspecified constant set to 1
    bool applicable = false;
    bool needs_constant = false; ///< carries an unspecified multiplicative constant
    bool rigorous = false;       ///< holds exactly for every N, d, n in its regime
    double value() const { return static_cast<double>(std::exp(log_value)); }
};

/// p* = n/2 for even n, (n+1)/2 for odd n; m* = n + 2 - 2p*.
inline std::size_t p_star(std::size_t n) { return n % 2 == 0 ? n / 2 : (n + 1) / 2; }
inline std::size_t m_star(std::size_t n) { return n + 2 - 2 * p_star(n); }

inline double a3_h(double x) { return (x > 0 ? std::fabs(x * std::log(x)) : 0.0) + x + x * x / 2; }

/// 2 exp(-1 + 2 h(d/(n+2))).
inline double a3_rho(std::size_t n, std::size_t d) {
    return 2 * std::exp(-1 + 2 * a3_h(static_cast<double>(d) / static_cast<double>(n + 2)));
}

/// Ratio c beyond which n+2 >= c d forces a3_rho <= delta; needs delta > 2/e.
inline double a3_C_delta(double delta) {
    if (!(delta > 2 / std::numbers::e)) throw invalid_input("delta must exceed 2/e");
    double target = (1 + std::log(delta / 2)) / 2;
    double lo = 0, hi = 1;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        (a3_h(mid) <= target ? lo : hi) = mid;
    }
    return 1 / lo;
}

inline bool a3_diffusive(const FTable& t) {
    double d = static_cast<double>(t.d());
    return d * d / static_cast<double>(t.N()) < t.params().diffusive_cut;
}

/**
 * \brief Every closed-form upper bound on F2(n), each with its regime guard.
 *
 * The "power" forms come in a sharp version and the version with the smaller exponent;
 * only the sharp version is a valid inequality for every m and d.
 */
inline std::vector<Envelope> a3_envelopes(const FTable& t, std::size_t n) {
    if (n < 1 || n > t.N()) throw invalid_input("distance must lie in 1..N");
    const auto& bp = t.params();
    const std::size_t N = t.N(), d = t.d();
    const long double logN = std::log(static_cast<long double>(N));
    const long double lk2 = 2 * std::log(static_cast<long double>(kappa(bp, n + 2, N)));
    const long double lead = lk2 + log_factorial(n + 2) - (n + 2) * logN;
    const long double ninf = -std::numeric_limits<long double>::infinity();
    const bool diff = a3_diffusive(t);
    const std::size_t ps = p_star(n), ms = m_star(n);
    const long double ln = std::log(static_cast<long double>(n));
    std::vector<Envelope> out;

    long double comp = ninf;
    for (auto m : index_set_I(n)) {
        std::size_t p = (n + 2 - m) / 2;
        comp = log_add_ld(comp, p * logN - log_factorial(p) + log_binom_ld(d + m - 1, m));
    }
    out.push_back({"composition-count", lead + comp, true, false, true});

    if (n == 1) {
        long double a = std::log(6.0L / N * d / N), b = 3 * std::log(static_cast<long double>(d + 2) / N);
        out.push_back({"small-n", lk2 + log_add_ld(a, b), true, false, true});
    } else if (n == 2) {
        long double a = std::log(12.0L / N) + 2 * std::log(static_cast<long double>(d + 1) / N);
        long double b = 4 * std::log(static_cast<long double>(d + 3) / N);
        out.push_back({"small-n", lk2 + log_add_ld(a, b), true, false, true});
    } else {
        out.push_back({"small-n", 0, false, false, true});
    }

    // Largest-p bounds; N^p/p! is increasing in p below N.
    const bool large = n + 2 >= d;
    const long double lp = ps * logN - log_factorial(ps);
    long double binsum = ninf;
    for (auto m : index_set_I(n)) binsum = log_add_ld(binsum, log_binom_ld(d + m - 1, m));
    const long double lpow = d * std::log(static_cast<long double>(n + 2)) - log_factorial(d);
    const long double dd = static_cast<long double>(d);
    out.push_back({"max-p-sum", lead + lp + binsum, large, false, true});
    out.push_back({"max-p-pascal", lead + lp + log_binom_ld(d + n + 2, d), large, false, true});
    out.push_back({"max-p-power", lead + lp + lpow + dd * (dd + 1) / (2 * (n + 2)), large, false, true});
    out.push_back({"max-p-power-printed", lead + lp + lpow + dd * dd / (2 * (n + 2)), large, false, false});

    // Small-m bounds; every m in I(n) is at most d.
    const bool small = n + 2 <= d && d >= 2;
    long double sm = ninf, smp = ninf;
    if (small) {
        const long double ld1 = std::log(static_cast<long double>(d - 1));
        for (auto m : index_set_I(n)) {
            std::size_t p = (n + 2 - m) / 2;
            long double base = p * logN - log_factorial(p) + m * ld1 - log_factorial(m);
            long double mm = static_cast<long double>(m);
            sm = log_add_ld(sm, base + mm * (mm + 1) / (2 * (dd - 1)));
            smp = log_add_ld(smp, base + mm * mm / (2 * (dd - 1)));
        }
    }
    out.push_back({"small-m-power", small ? lead + sm : 0, small, false, true});
    out.push_back({"small-m-power-printed", small ? lead + smp : 0, small, false, false});

    // Forms with an unspecified constant C, reported with C = 1.
    {
        bool ok = diff && n <= bp.n_threshold && n * n + 1 <= d;
        long double v = -static_cast<long double>(ps) * logN + ms * std::log(dd / N);
        out.push_back({"diffusive-fixed-n", v, ok, true, false});
    }
    {
        bool ok = diff && n + 2 <= d && d >= 2;
        long double v = 0;
        if (ok) {
            long double rbar = 2 * std::exp(-1.0L + static_cast<long double>(n + 2) / (dd - 1) +
                                            std::sqrt(2 * dd * dd / N));
            v = 1.5L * std::log(static_cast<long double>(n + 2)) + lk2 + (n + 2) / 2.0L * std::log(rbar) +
                (n + 2) / 2.0L * (ln - logN);
        }
        out.push_back({"diffusive-small-n", v, ok, true, false});
    }
    {
        long double v = lk2 + (n + 2) / 2.0L * std::log(static_cast<long double>(a3_rho(n, d))) +
                        static_cast<long double>(n + 2 - ps) * (ln - logN);
        out.push_back({"large-n", v, large, true, false});
    }
    {
        bool ok = !diff && n + 2 <= d && d >= 2;
        long double v = 0;
        if (ok)
            v = 1.5L * std::log(static_cast<long double>(n + 2)) + static_cast<long double>((n + 2) * (n + 2)) / (2 * (dd - 1)) +
                (n + 2) * std::log(dd / N);
        out.push_back({"discrete-small-n", v, ok, true, false});
    }
    {
        const double cd = a3_C_delta(bp.a3_delta);
        const double np2 = static_cast<double>(n + 2);
        long double base = 2 * logN, v;
        if (np2 <= cd * static_cast<double>(d))
            v = base + n / 2.0L * std::log(2 * std::exp(2.0L) * cd * dd / N);
        else if (np2 <= static_cast<double>(N) / std::numbers::e)
            v = base + n / 2.0L * std::log(static_cast<long double>(bp.a3_delta) * n / N);
        else
            v = base + n / 2.0L * std::log(2 / std::numbers::e_v<long double>);
        out.push_back({"decreasing-piecewise", v, large, true, false});
    }
    return out;
}

/// max over n >= max(1, d-2) of F(n)^(1/n); the decreasing envelope needs this below 1.
inline double decreasing_envelope_rate(const FTable& t) {
    std::size_t from = t.d() > 3 ? t.d() - 2 : 1;
    long double best = -std::numeric_limits<long double>::infinity();
    for (std::size_t n = from; n <= t.N(); ++n) best = std::max(best, t.log_F(n) / n);
    return static_cast<double>(std::exp(best));
}

/// Dimension from which the decreasing envelope is claimed: log N / log log N.
inline double decreasing_envelope_min_d(std::size_t N) {
    double l = std::log(static_cast<double>(N));
    return l / std::log(l);
}

// Escape-probability bounds on the lumped grid.

/**
 * \brief Exact P(tau_origin < tau_x) from count x for a single class of the given size.
 *
 * Resistance of the segment from x to the origin, summed in closed form.
 */
inline double rho_1d_exact(std::size_t size, std::size_t count) {
    if (size == 0 || count > size) throw invalid_input("count out of range");
    const std::size_t o = size / 2;
    if (count == o) throw invalid_input("start coincides with the origin");
    const long double lx = log_binom_ld(size, count), S = static_cast<long double>(size);
    long double sum = 0;
    if (count < o) {
        for (std::size_t j = count; j < o; ++j) sum += std::exp(lx - log_binom_ld(size, j)) * S / (S - j);
    } else {
        for (std::size_t j = o + 1; j <= count; ++j) sum += std::exp(lx - log_binom_ld(size, j)) * S / j;
    }
    return static_cast<double>(1 / sum);
}

struct DirichletBound {
    double value = 1;
    long double log_value = 0;
    std::string branch;          ///< "series" when the separated ansatz applies, else "one-parameter"
    bool separated = false;      ///< minimal graph distance inside J and x exceeds 3
    long double log_alpha = 0;   ///< log Q(J)/Q(x)
    double beta = 0;             ///< Q(neighbours of x)/Q(x) - 1
    double gamma = 0;            ///< same ratio on the J side, N - 1 when J consists of vertices
    double delta = 0;            ///< |neighbours of x in J| / N
    double leading_order = std::numeric_limits<double>::quiet_NaN(); ///< expansion for vertex x when separation fails
    double a = 0, b = 0, c = 0;  ///< optimal ansatz levels (series branch)
};

/// Minimal pairwise graph distance inside a set of grid points.
inline std::size_t min_graph_distance(const LumpedChain& ch, const std::vector<LumpedPoint>& pts) {
    std::size_t best = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) best = std::min(best, ch.graph_dist(pts[i], pts[j]));
    return best;
}

/**
 * \brief Upper bound on P(tau_J < tau_x) from x, by the Dirichlet principle with a piecewise-constant test function.
 *
 * When J and x are pairwise more than 3 apart the test function takes one level on each of the
 * shells around J and x and one in between; the minimum is a series of four conductances.
 * Otherwise the one-level function is used, whose minimum is also exact.
 */
inline DirichletBound dirichlet_upper_bound(const LumpedChain& ch, const LumpedPoint& x, const std::vector<LumpedPoint>& J) {
    ch.check(x);
    if (J.empty()) throw invalid_input("target set is empty");
    std::vector<std::size_t> ji;
    for (const auto& z : J) {
        if (z == x) throw invalid_input("start lies in the target set");
        ji.push_back(ch.index(z));
    }
    std::sort(ji.begin(), ji.end());
    ji.erase(std::unique(ji.begin(), ji.end()), ji.end());
    const std::size_t xi = ch.index(x);
    const long double lqx = ch.log_Q(xi);
    auto in_J = [&](std::size_t i) { return std::binary_search(ji.begin(), ji.end(), i); };
    auto shell_ratio = [&](std::size_t i) {
        long double s = 0, lq = ch.log_Q(i);
        ch.for_each_neighbor(i, [&](std::size_t j, double) { s += std::exp(static_cast<long double>(ch.log_Q(j)) - lq); });
        return s;
    };

    DirichletBound out;
    long double lqj = -std::numeric_limits<long double>::infinity(), gnum = 0;
    for (auto z : ji) lqj = log_add_ld(lqj, ch.log_Q(z));
    for (auto z : ji) gnum += std::exp(static_cast<long double>(ch.log_Q(z)) - lqj) * (shell_ratio(z) - 1);
    out.log_alpha = lqj - lqx;
    out.beta = static_cast<double>(shell_ratio(xi) - 1);
    out.gamma = static_cast<double>(gnum);
    std::size_t hits = 0;
    ch.for_each_neighbor(xi, [&](std::size_t j, double) { hits += in_J(j); });
    out.delta = static_cast<double>(hits) / static_cast<double>(ch.N());

    std::vector<LumpedPoint> all(J.begin(), J.end());
    all.push_back(x);
    out.separated = min_graph_distance(ch, all) > 3;

    if (ch.is_vertex(x)) {
        double al = static_cast<double>(std::exp(out.log_alpha));
        out.leading_order = al / (1 + al) * (1 + 2 * out.delta / (1 + al));
    }

    if (out.separated && out.beta > 0 && out.gamma > 0) {
        // Series: 1/(Q(J)) + 1/(gamma Q(J)) + 1/(beta Q(x)) + 1/Q(x), normalised by Q(x).
        long double la = out.log_alpha;
        long double rest = std::log1p(1 / static_cast<long double>(out.beta));
        long double denom = log_add_ld(std::log1p(1 / static_cast<long double>(out.gamma)), la + rest);
        out.log_value = la - denom;
        out.value = static_cast<double>(std::exp(out.log_value));
        out.branch = "series";
        // Potential levels: current I = value, drops I/alpha, I/(alpha gamma), I/beta, I.
        long double I = out.value;
        out.c = static_cast<double>(I);
        out.b = static_cast<double>(I * (1 + 1 / static_cast<long double>(out.beta)));
        out.a = static_cast<double>(1 - I * std::exp(-la));
        return out;
    }

    // One level a off J and x: conductances of J to the rest, x to the rest, and J to x directly.
    long double gJ = 0, gx = 0, g0 = 0;
    for (auto z : ji) {
        long double w = std::exp(static_cast<long double>(ch.log_Q(z)) - lqx);
        ch.for_each_neighbor(z, [&](std::size_t j, double r) {
            if (!in_J(j) && j != xi) gJ += w * r;
        });
    }
    ch.for_each_neighbor(xi, [&](std::size_t j, double r) { (in_J(j) ? g0 : gx) += r; });
    long double v = g0 + (gJ + gx > 0 ? gJ * gx / (gJ + gx) : 0);
    out.value = static_cast<double>(std::min<long double>(v, 1));
    out.log_value = std::log(static_cast<long double>(out.value));
    out.branch = "one-parameter";
    return out;
}

struct PathBound {
    double value = 0;
    long double log_value = 0;
    std::size_t paths = 0;       ///< one per axis on which x differs from the origin
    double closed_form = 0;      ///< the same sum assembled from one-dimensional escape probabilities
};

/**
 * \brief Lower bound on P(tau_0 < tau_x) from x by the parallel axis paths.
 *
 * Path mu moves the differing axes to the origin in cyclic order starting at the mu-th one.
 * The paths share no edge, so their conductances add.
 */
inline PathBound path_lower_bound(const LumpedChain& ch, const LumpedPoint& x) {
    ch.check(x);
    const auto& o = ch.origin();
    if (x == o) throw invalid_input("path bound needs a start away from the origin");
    std::vector<std::size_t> active;
    for (std::size_t k = 0; k < ch.d(); ++k)
        if (x.n[k] != o.n[k]) active.push_back(k);
    const std::size_t a = active.size();
    const long double lqx = ch.log_Q(x);
    PathBound out;
    out.paths = a;
    long double acc = -std::numeric_limits<long double>::infinity();
    std::vector<long double> inv_rho(a), logq(a);
    for (std::size_t i = 0; i < a; ++i) {
        std::size_t k = active[i];
        inv_rho[i] = static_cast<long double>(ch.N()) / ch.size(k) / rho_1d_exact(ch.size(k), x.n[k]);
        logq[i] = ch.log_binom(k, x.n[k]) - ch.log_binom(k, o.n[k]);
    }
    long double closed = 0;
    for (std::size_t mu = 0; mu < a; ++mu) {
        std::vector<std::size_t> order(a);
        for (std::size_t nu = 0; nu < a; ++nu) order[nu] = active[(mu + nu) % a];
        acc = log_add_ld(acc, -lqx - log_path_resistance(ch, x, o, order));
        long double r = 0, eps = 0;
        for (std::size_t nu = 0; nu < a; ++nu) {
            std::size_t i = (mu + nu) % a;
            r += std::exp(eps) * inv_rho[i];
            eps += logq[i];
        }
        closed += 1 / r;
    }
    out.log_value = acc;
    out.value = static_cast<double>(std::exp(acc));
    out.closed_form = static_cast<double>(closed);
    return out;
}

// Scale constants.

/// Largest integer below alpha0 N / log N.
inline std::size_t d0(std::size_t N, double alpha0 = 1.0 / 20) {
    if (N < 2) return 0;
    return static_cast<std::size_t>(std::floor(alpha0 * static_cast<double>(N) / std::log(static_cast<double>(N))));
}

/// Mean return time to the origin, 1/Q(0), in log form.
inline double log_kac_mean(const LumpedChain& ch) { return -ch.log_Q(ch.origin_index()); }

/// Mean-time scale: C N^2 prod |class k| for d > 1, (N/4) log N for d = 1.
inline double theta_hat(const LumpedChain& ch, const BoundParams& bp = {}) {
    double n = static_cast<double>(ch.N());
    if (ch.d() == 1) return n / 4 * std::log(n);
    double v = bp.theta_C * n * n;
    for (auto s : ch.sizes()) v *= static_cast<double>(s);
    return v;
}

/// log of 2^N/|J + x| (1 + 1/N).
inline double log_u_bar_inverse(std::size_t N, std::size_t count) {
    if (count == 0) throw invalid_input("target count must be positive");
    double n = static_cast<double>(N);
    return n * std::numbers::ln2 - std::log(static_cast<double>(count)) + std::log1p(1 / n);
}

/// log of theta_hat^2 / (mean return time to the origin).
inline double log_u_underbar_inverse(const LumpedChain& ch, const BoundParams& bp = {}) {
    return 2 * std::log(theta_hat(ch, bp)) - log_kac_mean(ch);
}

/// Exponent of the small error term: 2 under the distance hypothesis, else 1.
inline int k_selector(bool hypothesis) { return hypothesis ? 2 : 1; }

struct MeanTimeWindow {
    double log_base = 0;   ///< log 2^N/|A| (1 + 1/N)
    double spread = 0;     ///< max{U, N^-k}
    double factor_minus = 0, factor_plus = 0;
    double lower() const { return std::exp(log_base) * factor_minus; }
    double upper() const { return std::exp(log_base) * factor_plus; }
};

inline MeanTimeWindow mean_time_window(std::size_t N, std::size_t target_count, double U, int k, const BoundParams& bp = {}) {
    MeanTimeWindow w;
    w.log_base = log_u_bar_inverse(N, target_count);
    w.spread = std::max(U, std::pow(static_cast<double>(N), -k));
    w.factor_minus = 1 - bp.c_minus * w.spread;
    w.factor_plus = 1 + bp.c_plus * w.spread;
    return w;
}

/// max{U(A), |A| F(rho+1)}.
inline double theta_spread(double U, std::size_t count, const FTable& t, std::size_t rho) {
    return std::max(U, rho + 1 <= t.N() ? count * t.F(rho + 1) : 0.0);
}

/// max{U(A + sigma), N^-k, |A| F(rho+1)}.
inline double theta_tilde(double U, std::size_t count, const FTable& t, std::size_t rho, int k) {
    return std::max(theta_spread(U, count, t, rho), std::pow(static_cast<double>(t.N()), -k));
}

/// Smallest rho with M F(rho+1) <= target, or N when none exists.
inline std::size_t rho_of_M(const FTable& t, std::size_t M, double target = 0) {
    if (M < 1) throw invalid_input("M must be positive");
    if (target <= 0) target = t.params().rho_target > 0 ? t.params().rho_target : 1 / std::log(static_cast<double>(t.N()));
    const long double lt = std::log(static_cast<long double>(target)) - std::log(static_cast<long double>(M));
    for (std::size_t r = 0; r < t.N(); ++r)
        if (t.log_F(r + 1) <= lt) return r;
    return t.N();
}

// Sparseness.

/// max over eta in A of sum over sigma in A \ eta of F(Dist(eta, sigma)); A must be compatible.
inline double sparseness_U(const SpinSet& A, const Partition& p, const SpinConfig& xi, const BoundParams& bp = {}) {
    if (A.size() <= 1) return 0;
    if (A.dimension() != p.N()) throw invalid_input("set and partition have different N");
    if (!is_compatible(p, xi, A)) throw invalid_input("set is not compatible with the partition");
    FTable t(p, bp);
    double best = 0;
    for (const auto& e : A) {
        double s = 0;
        for (const auto& o : A)
            if (!(o == e)) s += t.F(hamming(e, o));
        best = std::max(best, s);
    }
    return best;
}

inline double sparseness_U(const SpinSet& A, const Partition& p, const BoundParams& bp = {}) {
    return sparseness_U(A, p, SpinConfig::all_plus(p.N()), bp);
}

/// The same functional for vertices of the lumped grid, with graph distances.
inline double sparseness_U(const FTable& t, const LumpedChain& ch, const std::vector<LumpedPoint>& J) {
    double best = 0;
    for (std::size_t a = 0; a < J.size(); ++a) {
        if (!ch.is_vertex(J[a])) throw invalid_input("sparseness is defined for vertices");
        double s = 0;
        for (std::size_t b = 0; b < J.size(); ++b)
            if (b != a) s += t.F(ch.graph_dist(J[a], J[b]));
        best = std::max(best, s);
    }
    return best;
}

} // namespace hcp
