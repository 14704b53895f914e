#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "cube.hpp"
#include "error.hpp"

namespace hcp {

using BigInt = boost::multiprecision::cpp_int;

/// Natural log of a positive big integer, accurate to long double precision.
inline long double log_big(const BigInt& v) {
    if (v <= 0) return -std::numeric_limits<long double>::infinity();
    std::size_t bits = boost::multiprecision::msb(v) + 1;
    if (bits <= 62) return std::log(static_cast<long double>(static_cast<std::uint64_t>(v)));
    std::size_t shift = bits - 62;
    BigInt top = v >> shift;
    return std::log(static_cast<long double>(static_cast<std::uint64_t>(top))) +
           static_cast<long double>(shift) * std::numbers::ln2_v<long double>;
}

inline BigInt binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    BigInt r = 1;
    for (std::size_t i = 1; i <= k; ++i) {
        r *= n - k + i;
        r /= i;
    }
    return r;
}

/// log(n!) to long double precision.
inline long double log_factorial(std::size_t n) { return std::lgamma(static_cast<long double>(n) + 1.0L); }

/// Stable log(exp(a) + exp(b)).
inline double log_add(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    if (a < b) std::swap(a, b);
    return a + std::log1p(std::exp(b - a));
}

/// A lumped move: point index of the neighbour and the jump rate.
/**
 * \brief Number of ways to write m = m_1 + ... + m_d with 0 <= m_k <= sizes[k], for m = 0..sum(sizes).
 *
 * These are the sphere sizes around any vertex of the lumped grid.
 */
inline std::vector<BigInt> composition_counts(const std::vector<std::size_t>& sizes) {
    std::size_t total = 0;
    for (auto s : sizes) total += s;
    std::vector<BigInt> cur(total + 1, 0);
    cur[0] = 1;
    std::size_t reach = 0;
    for (auto s : sizes) {
        std::vector<BigInt> nxt(total + 1, 0);
        BigInt window = 0;
        for (std::size_t m = 0; m <= reach + s; ++m) {
            if (m <= reach) window += cur[m];
            if (m > s && m - s - 1 <= reach) window -= cur[m - s - 1];
            nxt[m] = window;
        }
        reach += s;
        cur = std::move(nxt);
    }
    return cur;
}

struct LumpedMove {
    std::size_t index;
    std::size_t axis;
    bool toward_reference;
    double rate;
};

/**
 * \brief The lumped walk on the grid prod_k {0,...,|class k|}.
 *
 * Points are indexed in mixed radix with axis 0 varying fastest.
 * Count n_k moves to n_k - 1 with rate n_k/N and to n_k + 1 with rate (|class k| - n_k)/N.
 */
class LumpedChain {
public:
    explicit LumpedChain(Partition p) : p_(std::move(p)), sizes_(p_.sizes()) {
        n_ = p_.N();
        strides_.resize(d());
        long double total = 1;
        std::size_t count = 1;
        for (std::size_t k = 0; k < d(); ++k) {
            strides_[k] = count;
            total *= static_cast<long double>(sizes_[k] + 1);
            if (total > 1e15L) throw too_large("lumped grid has more than 1e15 points");
            count *= sizes_[k] + 1;
        }
        states_ = count;
        log_binom_.resize(d());
        for (std::size_t k = 0; k < d(); ++k) {
            std::size_t s = sizes_[k];
            auto& t = log_binom_[k];
            t.resize(s + 1);
            BigInt c = 1;
            for (std::size_t j = 0; j <= s; ++j) {
                t[j] = static_cast<double>(log_big(c));
                if (j < s) {
                    c *= s - j;
                    c /= j + 1;
                }
            }
        }
        log2n_ = static_cast<double>(static_cast<long double>(n_) * std::numbers::ln2_v<long double>);
        origin_.n.resize(d());
        for (std::size_t k = 0; k < d(); ++k) origin_.n[k] = sizes_[k] / 2;
    }

    static LumpedChain from_sizes(const std::vector<std::size_t>& s) { return LumpedChain(Partition::from_sizes(s)); }

    const Partition& partition() const { return p_; }
    std::size_t N() const { return n_; }
    std::size_t d() const { return sizes_.size(); }
    const std::vector<std::size_t>& sizes() const { return sizes_; }
    std::size_t size(std::size_t k) const { return sizes_[k]; }
    std::size_t state_count() const { return states_; }
    std::size_t stride(std::size_t k) const { return strides_[k]; }

    void check(const LumpedPoint& x) const {
        if (x.n.size() != d()) throw invalid_input("lumped point has wrong dimension");
        for (std::size_t k = 0; k < d(); ++k)
            if (x.n[k] > sizes_[k]) throw invalid_input("lumped point out of grid: " + x.to_string());
    }

    std::size_t index(const LumpedPoint& x) const {
        check(x);
        std::size_t i = 0;
        for (std::size_t k = 0; k < d(); ++k) i += x.n[k] * strides_[k];
        return i;
    }

    LumpedPoint point(std::size_t i) const {
        if (i >= states_) throw invalid_input("lumped index out of range");
        LumpedPoint x{std::vector<std::size_t>(d())};
        for (std::size_t k = 0; k < d(); ++k) {
            x.n[k] = i % (sizes_[k] + 1);
            i /= sizes_[k] + 1;
        }
        return x;
    }

    std::size_t coord(std::size_t i, std::size_t k) const { return (i / strides_[k]) % (sizes_[k] + 1); }

    /// Maximiser of the measure; odd classes take the lower middle count.
    const LumpedPoint& origin() const { return origin_; }
    std::size_t origin_index() const { return index(origin_); }

    bool is_vertex(const LumpedPoint& x) const {
        check(x);
        for (std::size_t k = 0; k < d(); ++k)
            if (x.n[k] != 0 && x.n[k] != sizes_[k]) return false;
        return true;
    }

    /// Vertex whose class k sits at the far end when bit k of mask is set.
    LumpedPoint vertex(std::uint64_t mask) const {
        LumpedPoint x{std::vector<std::size_t>(d(), 0)};
        for (std::size_t k = 0; k < d(); ++k)
            if ((mask >> k) & 1) x.n[k] = sizes_[k];
        return x;
    }

    double log_binom(std::size_t k, std::size_t j) const { return log_binom_[k][j]; }

    double log_multiplicity(const LumpedPoint& x) const {
        check(x);
        double s = 0;
        for (std::size_t k = 0; k < d(); ++k) s += log_binom_[k][x.n[k]];
        return s;
    }

    double log_multiplicity(std::size_t i) const {
        double s = 0;
        for (std::size_t k = 0; k < d(); ++k) s += log_binom_[k][coord(i, k)];
        return s;
    }

    BigInt multiplicity(const LumpedPoint& x) const {
        check(x);
        BigInt m = 1;
        for (std::size_t k = 0; k < d(); ++k) m *= binomial(sizes_[k], x.n[k]);
        return m;
    }

    double log_Q(const LumpedPoint& x) const { return log_multiplicity(x) - log2n_; }
    double log_Q(std::size_t i) const { return log_multiplicity(i) - log2n_; }
    double Q(const LumpedPoint& x) const { return std::exp(log_Q(x)); }
    double Q(std::size_t i) const { return std::exp(log_Q(i)); }

    /**
     * \brief Jump rate along axis k; toward_reference lowers the count.
     */
    double rate(const LumpedPoint& x, std::size_t k, bool toward_reference) const {
        check(x);
        if (k >= d()) throw invalid_input("axis out of range");
        std::size_t c = toward_reference ? x.n[k] : sizes_[k] - x.n[k];
        return static_cast<double>(c) / static_cast<double>(n_);
    }

    /// Calls f(index, rate) for every neighbour of point index i with positive rate.
    template <class F>
    void for_each_neighbor(std::size_t i, F&& f) const {
        const double inv = 1.0 / static_cast<double>(n_);
        for (std::size_t k = 0; k < d(); ++k) {
            std::size_t c = coord(i, k);
            if (c > 0) f(i - strides_[k], static_cast<double>(c) * inv);
            if (c < sizes_[k]) f(i + strides_[k], static_cast<double>(sizes_[k] - c) * inv);
        }
    }

    std::vector<LumpedMove> neighbors(const LumpedPoint& x) const {
        check(x);
        std::size_t i = index(x);
        std::vector<LumpedMove> out;
        const double inv = 1.0 / static_cast<double>(n_);
        for (std::size_t k = 0; k < d(); ++k) {
            if (x.n[k] > 0) out.push_back({i - strides_[k], k, true, static_cast<double>(x.n[k]) * inv});
            if (x.n[k] < sizes_[k]) out.push_back({i + strides_[k], k, false, static_cast<double>(sizes_[k] - x.n[k]) * inv});
        }
        return out;
    }

    std::size_t graph_dist(const LumpedPoint& x, const LumpedPoint& y) const {
        check(x);
        check(y);
        std::size_t s = 0;
        for (std::size_t k = 0; k < d(); ++k) s += x.n[k] > y.n[k] ? x.n[k] - y.n[k] : y.n[k] - x.n[k];
        return s;
    }

    std::size_t graph_dist(std::size_t i, std::size_t j) const {
        std::size_t s = 0;
        for (std::size_t k = 0; k < d(); ++k) {
            std::size_t a = coord(i, k), b = coord(j, k);
            s += a > b ? a - b : b - a;
        }
        return s;
    }

    /**
     * \brief Sizes of the spheres of radius m = 0..N around a vertex.
     *
     * Counts compositions m = m_1 + ... + m_d with 0 <= m_k <= |class k|.
     */
    std::vector<BigInt> sphere_sizes() const { return composition_counts(sizes_); }

    BigInt sphere_size(const LumpedPoint& x, std::size_t m) const {
        if (!is_vertex(x)) throw invalid_input("sphere sizes are defined around vertices");
        if (m > n_) return 0;
        return sphere_sizes()[m];
    }

    std::vector<double> log_sphere_sizes() const {
        auto s = sphere_sizes();
        std::vector<double> out(s.size());
        for (std::size_t m = 0; m < s.size(); ++m) out[m] = static_cast<double>(log_big(s[m]));
        return out;
    }

    /// Free-energy potential -(1/N) log multiplicity + log 2.
    double potential_psi(const LumpedPoint& x) const {
        return -log_multiplicity(x) / static_cast<double>(n_) + std::numbers::ln2;
    }

    /// Points at graph distance exactly m from x.
    std::vector<std::size_t> sphere_points(const LumpedPoint& x, std::size_t m) const {
        check(x);
        std::vector<std::size_t> out;
        std::size_t i0 = index(x);
        for (std::size_t i = 0; i < states_; ++i)
            if (graph_dist(i, i0) == m) out.push_back(i);
        return out;
    }

private:
    Partition p_;
    std::vector<std::size_t> sizes_;
    std::vector<std::size_t> strides_;
    std::vector<std::vector<double>> log_binom_;
    std::size_t n_ = 0;
    std::size_t states_ = 0;
    double log2n_ = 0;
    LumpedPoint origin_;
};

/**
 * \brief Probability that the walk started at vertex x is at z after n steps, n = graph_dist(x,z).
 *
 * Equals n!/N^n * Q(z)/Q(x).
 */
inline double n_step_vertex_prob(const LumpedChain& c, const LumpedPoint& x, const LumpedPoint& z, std::size_t n) {
    if (!c.is_vertex(x)) throw invalid_input("n-step formula needs a vertex start");
    if (c.graph_dist(x, z) != n) throw invalid_input("n differs from the graph distance between the points");
    long double lg = log_factorial(n) - static_cast<long double>(n) * std::log(static_cast<long double>(c.N())) +
                     c.log_multiplicity(z) - c.log_multiplicity(x);
    return static_cast<double>(std::exp(lg));
}

/**
 * \brief Upper bound on the steps-step transition probability from vertex x to z.
 *
 * With m = graph_dist(x,z) and steps = m + 2p the bound is r^(m)(x,z) (m+2p)! / (N^p m! p!).
 */
inline double n_step_vertex_upper(const LumpedChain& c, const LumpedPoint& x, const LumpedPoint& z, std::size_t steps) {
    std::size_t m = c.graph_dist(x, z);
    if (steps < m || (steps - m) % 2) throw invalid_input("step count must exceed the distance by an even number");
    std::size_t p = (steps - m) / 2;
    long double lg = std::log(static_cast<long double>(n_step_vertex_prob(c, x, z, m))) + log_factorial(steps) -
                     log_factorial(m) - log_factorial(p) - static_cast<long double>(p) * std::log(static_cast<long double>(c.N()));
    return static_cast<double>(std::exp(lg));
}

/**
 * \brief log of the resistance sum_n 1/(Q(w_n) r(w_n, w_n+1)) along a monotone path from x to y.
 *
 * The path fixes the axes one at a time in the given order.
 */
inline double log_path_resistance(const LumpedChain& c, const LumpedPoint& x, const LumpedPoint& y,
                                  const std::vector<std::size_t>& axis_order) {
    c.check(x);
    c.check(y);
    LumpedPoint cur = x;
    double acc = -std::numeric_limits<double>::infinity();
    const double logn = std::log(static_cast<double>(c.N()));
    for (auto k : axis_order) {
        if (k >= c.d()) throw invalid_input("axis out of range");
        while (cur.n[k] != y.n[k]) {
            bool down = cur.n[k] > y.n[k];
            std::size_t movers = down ? cur.n[k] : c.size(k) - cur.n[k];
            acc = log_add(acc, -c.log_Q(cur) - (std::log(static_cast<double>(movers)) - logn));
            cur.n[k] = down ? cur.n[k] - 1 : cur.n[k] + 1;
        }
    }
    if (!(cur == y)) throw invalid_input("axis order does not cover every differing axis");
    return acc;
}

struct LogRegularity {
    bool regular;
    double rate;
};

/// Fraction of coordinates lying in classes smaller than 10 log N; regular when at most 1/2.
inline LogRegularity is_log_regular(const Partition& p) {
    double cut = 10.0 * std::log(static_cast<double>(p.N()));
    std::size_t small = 0;
    for (auto s : p.sizes())
        if (static_cast<double>(s) < cut) small += s;
    double rate = static_cast<double>(small) / static_cast<double>(p.N());
    return {rate <= 0.5, rate};
}

/// Large-class approximation prod_k sqrt(pi |class k| / 2) of the mean return time to the origin.
inline double kac_stirling(const LumpedChain& c) {
    double v = 1;
    for (auto s : c.sizes()) v *= std::sqrt(std::numbers::pi * static_cast<double>(s) / 2.0);
    return v;
}

} // namespace hcp
