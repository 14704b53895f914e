#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "linear.hpp"
#include "lumped.hpp"
#include "views.hpp"

namespace hcp {

/// Sorted, duplicate-free list of state indices.
using StateSet = std::vector<std::size_t>;

inline StateSet make_set(std::vector<std::size_t> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

inline bool set_contains(const StateSet& s, std::size_t i) { return std::binary_search(s.begin(), s.end(), i); }

inline StateSet set_union(const StateSet& a, const StateSet& b) {
    StateSet out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline StateSet set_with(const StateSet& a, std::size_t i) { return set_union(a, StateSet{i}); }

/**
 * \brief How a start inside the target set is treated.
 *
 * strict uses hitting times tau > 0 (first-step analysis); boundary uses tau >= 0.
 */
enum class StartRule { strict, boundary };

struct ScalarResult {
    double value = 0;
    SolveReport report;
};

namespace detail {

template <ChainView V>
StateSet complement(const V& v, const StateSet& excluded) {
    StateSet out;
    const std::size_t n = v.state_count();
    out.reserve(n > excluded.size() ? n - excluded.size() : 0);
    std::size_t e = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (e < excluded.size() && excluded[e] < i) ++e;
        if (e < excluded.size() && excluded[e] == i) continue;
        out.push_back(i);
    }
    return out;
}

template <ChainView V>
void check_states(const V& v, const StateSet& s, const char* what) {
    for (auto i : s)
        if (i >= v.state_count()) throw invalid_input(std::string(what) + " contains a state out of range");
}

/// Killed solve on the complement of `stop`, or nothing when the complement is empty.
template <ChainView V>
std::optional<KilledSolution> solve_outside(const V& v, const StateSet& stop, double u, std::vector<RhsColumn> cols,
                                            const SolverOptions& opt) {
    auto interior = complement(v, stop);
    if (interior.empty()) return std::nullopt;
    return solve_killed(v, std::move(interior), u, std::move(cols), opt);
}

template <ChainView V>
double read(const V&, const std::optional<KilledSolution>& s, const RhsColumn& col, std::size_t state, std::size_t c) {
    if (s && s->is_interior(state)) return s->value(state, c);
    return col.boundary ? col.boundary(state) : 0.0;
}

/// e^u * sum_z r(y,z) f(z): the value of a strict (tau > 0) functional started on the stopping set.
template <ChainView V>
double first_step(const V& v, std::size_t y, double u, const std::optional<KilledSolution>& s, const RhsColumn& col,
                  std::size_t c) {
    long double acc = 0;
    v.for_each_neighbor(y, [&](std::size_t z, double r) { acc += static_cast<long double>(r) * read(v, s, col, z, c); });
    return static_cast<double>(std::exp(static_cast<long double>(u)) * acc);
}

inline SolveReport report_of(const std::optional<KilledSolution>& s) { return s ? s->report() : SolveReport{"none", 0, 0, 0, 0}; }

inline RhsColumn indicator(const StateSet& a) {
    return {[a](std::size_t j) { return set_contains(a, j) ? 1.0 : 0.0; }, nullptr};
}

inline void check_disjoint(const StateSet& a, const StateSet& b) {
    for (auto i : a)
        if (set_contains(b, i)) throw invalid_input("target and taboo sets intersect");
}

} // namespace detail

/**
 * \brief P_y(tau_A < tau_B).
 *
 * With an empty B the answer is 1 since the chain is irreducible.
 */
template <ChainView V>
ScalarResult hit_prob(const V& v, std::size_t y, StateSet A, StateSet B, StartRule rule = StartRule::strict,
                      const SolverOptions& opt = {}) {
    A = make_set(std::move(A));
    B = make_set(std::move(B));
    if (A.empty()) throw invalid_input("target set is empty");
    detail::check_states(v, A, "target set");
    detail::check_states(v, B, "taboo set");
    detail::check_disjoint(A, B);
    if (y >= v.state_count()) throw invalid_input("start state out of range");
    if (B.empty()) return {1.0, {"none", 0, 0, 0, 0}};
    auto stop = set_union(A, B);
    if (set_contains(stop, y) && rule == StartRule::boundary) return {set_contains(A, y) ? 1.0 : 0.0, {"none", 0, 0, 0, 0}};
    RhsColumn col = detail::indicator(A);
    auto s = detail::solve_outside(v, stop, 0.0, {col}, opt);
    double val = set_contains(stop, y) ? detail::first_step(v, y, 0.0, s, col, 0) : s->value(y, 0);
    return {val, detail::report_of(s)};
}

/// The whole function z -> P_z(tau_A < tau_B) on the complement of A and B.
template <ChainView V>
KilledSolution hitting_function(const V& v, StateSet A, StateSet B, const SolverOptions& opt = {}) {
    A = make_set(std::move(A));
    B = make_set(std::move(B));
    detail::check_disjoint(A, B);
    auto s = detail::solve_outside(v, set_union(A, B), 0.0, {detail::indicator(A)}, opt);
    if (!s) throw invalid_input("target and taboo sets cover the whole state space");
    return std::move(*s);
}

struct EscapeResult {
    /// P_x(tau_J < tau_x)
    double escape = 0;
    /// P_x(tau_x < tau_J), computed separately so that small values keep full relative accuracy.
    double stay = 0;
    SolveReport report;
};

template <ChainView V>
EscapeResult escape_split(const V& v, std::size_t x, StateSet J, const SolverOptions& opt = {}) {
    J = make_set(std::move(J));
    if (J.empty()) throw invalid_input("escape target set is empty");
    if (set_contains(J, x)) throw invalid_input("escape start lies in the target set");
    detail::check_states(v, J, "escape target set");
    RhsColumn to_j = detail::indicator(J);
    RhsColumn to_x = detail::indicator(StateSet{x});
    auto s = detail::solve_outside(v, set_with(J, x), 0.0, {to_j, to_x}, opt);
    return {detail::first_step(v, x, 0.0, s, to_j, 0), detail::first_step(v, x, 0.0, s, to_x, 1), detail::report_of(s)};
}

/// P_x(tau_J < tau_x).
template <ChainView V>
ScalarResult escape_prob(const V& v, std::size_t x, const StateSet& J, const SolverOptions& opt = {}) {
    auto e = escape_split(v, x, J, opt);
    return {e.escape, e.report};
}

/// Q(x) P_x(tau_J < tau_x).
template <ChainView V>
ScalarResult capacity(const V& v, std::size_t x, const StateSet& J, const SolverOptions& opt = {}) {
    auto e = escape_split(v, x, J, opt);
    return {std::exp(v.log_measure(x)) * e.escape, e.report};
}

/// (1/2) sum_{y,y'} Q(y) r(y,y') (h(y) - h(y'))^2 for h given on every state.
template <ChainView V>
double dirichlet_form(const V& v, const std::vector<double>& h) {
    if (h.size() != v.state_count()) throw invalid_input("test function length differs from the state count");
    long double acc = 0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        long double q = std::exp(static_cast<long double>(v.log_measure(i)));
        v.for_each_neighbor(i, [&](std::size_t j, double r) {
            long double dh = static_cast<long double>(h[i]) - h[j];
            acc += q * r * dh * dh;
        });
    }
    return static_cast<double>(acc / 2);
}

/// The equilibrium potential of (x, J): 0 at x, 1 on J, harmonic elsewhere, on every state.
template <ChainView V>
std::vector<double> equilibrium_potential(const V& v, std::size_t x, StateSet J, const SolverOptions& opt = {}) {
    J = make_set(std::move(J));
    RhsColumn col = detail::indicator(J);
    auto s = detail::solve_outside(v, set_with(J, x), 0.0, {col}, opt);
    std::vector<double> h(v.state_count());
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = detail::read(v, s, col, i, 0);
    return h;
}

struct VectorResult {
    std::vector<double> values;
    SolveReport report;
};

/// H_A(y, eta) = P_y(tau_eta < tau_{A \ eta}) for each eta in A, in sorted order of A.
template <ChainView V>
VectorResult harmonic_measure(const V& v, std::size_t y, StateSet A, const SolverOptions& opt = {}) {
    A = make_set(std::move(A));
    if (A.empty()) throw invalid_input("target set is empty");
    detail::check_states(v, A, "target set");
    if (set_contains(A, y)) throw invalid_input("harmonic measure start lies in the target set");
    std::vector<RhsColumn> cols;
    for (auto a : A) cols.push_back(detail::indicator(StateSet{a}));
    auto s = detail::solve_outside(v, A, 0.0, cols, opt);
    VectorResult out;
    for (std::size_t c = 0; c < A.size(); ++c) out.values.push_back(s->value(y, c));
    out.report = s->report();
    return out;
}

/**
 * \brief E_y tau_A. With StartRule::strict and y in A this is the return time to A.
 */
template <ChainView V>
ScalarResult mean_hitting_time(const V& v, std::size_t y, StateSet A, StartRule rule = StartRule::strict,
                               const SolverOptions& opt = {}) {
    A = make_set(std::move(A));
    if (A.empty()) throw invalid_input("target set is empty");
    detail::check_states(v, A, "target set");
    if (set_contains(A, y) && rule == StartRule::boundary) return {0.0, {"none", 0, 0, 0, 0}};
    RhsColumn col{nullptr, [](std::size_t) { return 1.0; }};
    auto s = detail::solve_outside(v, A, 0.0, {col}, opt);
    if (set_contains(A, y)) return {1.0 + detail::first_step(v, y, 0.0, s, col, 0), detail::report_of(s)};
    return {s->value(y, 0), s->report()};
}

/**
 * \brief Mean hitting time from the capacity representation
 *        [Q(s) + sum_{eta not in A, eta != s} Q(eta) P_eta(tau_s < tau_A)] / [Q(s) P_s(tau_A < tau_s)].
 */
template <ChainView V>
ScalarResult mean_time_by_capacity(const V& v, std::size_t s0, StateSet A, const SolverOptions& opt = {}) {
    A = make_set(std::move(A));
    if (set_contains(A, s0)) throw invalid_input("start lies in the target set");
    RhsColumn to_s = detail::indicator(StateSet{s0});
    RhsColumn to_a = detail::indicator(A);
    auto sol = detail::solve_outside(v, set_with(A, s0), 0.0, {to_s, to_a}, opt);
    const double lq = v.log_measure(s0);
    long double num = 1;
    if (sol)
        for (auto eta : sol->interior()) num += std::exp(static_cast<long double>(v.log_measure(eta) - lq)) * sol->value(eta, 0);
    double esc = detail::first_step(v, s0, 0.0, sol, to_a, 1);
    return {static_cast<double>(num / esc), detail::report_of(sol)};
}

/**
 * \brief E_y[tau_{A u B} ; tau_A < tau_B] under the strict rule.
 */
template <ChainView V>
ScalarResult restricted_mean(const V& v, std::size_t y, StateSet A, StateSet B, const SolverOptions& opt = {}) {
    A = make_set(std::move(A));
    B = make_set(std::move(B));
    if (A.empty()) throw invalid_input("target set is empty");
    detail::check_disjoint(A, B);
    auto stop = set_union(A, B);
    RhsColumn hcol = detail::indicator(A);
    auto h = detail::solve_outside(v, stop, 0.0, {hcol}, opt);
    RhsColumn wcol{nullptr, [&](std::size_t z) { return h->value(z, 0); }};
    std::optional<KilledSolution> w;
    if (h) w = detail::solve_outside(v, stop, 0.0, {wcol}, opt);
    if (!set_contains(stop, y)) return {w->value(y, 0), w->report()};
    long double acc = 0;
    v.for_each_neighbor(y, [&](std::size_t z, double r) {
        double hz = detail::read(v, h, hcol, z, 0);
        double wz = (w && w->is_interior(z)) ? w->value(z, 0) : 0.0;
        acc += static_cast<long double>(r) * (hz + wz);
    });
    return {static_cast<double>(acc), detail::report_of(w)};
}

/// E_y(tau_A | X at tau_A equals eta), computed through the h-transform.
template <ChainView V>
ScalarResult conditional_mean_time(const V& v, std::size_t y, std::size_t eta, StateSet A, const SolverOptions& opt = {}) {
    A = make_set(std::move(A));
    if (!set_contains(A, eta)) throw invalid_input("conditioning point is not in the target set");
    StateSet rest;
    for (auto a : A)
        if (a != eta) rest.push_back(a);
    auto num = restricted_mean(v, y, StateSet{eta}, rest, opt);
    auto den = hit_prob(v, y, StateSet{eta}, rest, StartRule::strict, opt);
    if (!(den.value > 0)) throw invalid_input("conditioning event has probability zero");
    return {num.value / den.value, num.report};
}

/**
 * \brief E_s(tau_A | tau_A < tau_B) from the capacity representation with weights P_eta(tau_A < tau_B).
 */
template <ChainView V>
ScalarResult conditional_mean_by_capacity(const V& v, std::size_t s0, StateSet A, StateSet B, const SolverOptions& opt = {}) {
    A = make_set(std::move(A));
    B = make_set(std::move(B));
    detail::check_disjoint(A, B);
    auto ab = set_union(A, B);
    if (set_contains(ab, s0)) throw invalid_input("start lies in the target set");
    RhsColumn to_s = detail::indicator(StateSet{s0});
    RhsColumn to_ab = detail::indicator(ab);
    auto sol = detail::solve_outside(v, set_with(ab, s0), 0.0, {to_s, to_ab}, opt);
    RhsColumn to_a = detail::indicator(A);
    auto hab = detail::solve_outside(v, ab, 0.0, {to_a}, opt);
    const double lq = v.log_measure(s0);
    const double hs = hab->value(s0, 0);
    long double num = 1;
    if (sol)
        for (auto eta : sol->interior())
            num += std::exp(static_cast<long double>(v.log_measure(eta) - lq)) * sol->value(eta, 0) * hab->value(eta, 0) / hs;
    double esc = detail::first_step(v, s0, 0.0, sol, to_ab, 1);
    return {static_cast<double>(num / esc), detail::report_of(sol)};
}

/**
 * \brief G^y_{x,J}(u) = E_y[e^{u tau_x} ; tau_x < tau_J] under the strict rule.
 *
 * Throws out_of_domain when u is at or above the convergence threshold.
 */
template <ChainView V>
ScalarResult laplace_G(const V& v, std::size_t y, std::size_t x, StateSet J, double u, const SolverOptions& opt = {}) {
    J = make_set(std::move(J));
    if (set_contains(J, x)) throw invalid_input("Laplace target lies in the taboo set");
    detail::check_states(v, J, "taboo set");
    auto stop = set_with(J, x);
    RhsColumn col = detail::indicator(StateSet{x});
    auto s = detail::solve_outside(v, stop, u, {col}, opt);
    double val = set_contains(stop, y) ? detail::first_step(v, y, u, s, col, 0) : s->value(y, 0);
    return {val, detail::report_of(s)};
}

/// E_y[e^{u tau_A}] with tau_A > 0.
template <ChainView V>
ScalarResult laplace_hitting(const V& v, std::size_t y, StateSet A, double u, const SolverOptions& opt = {}) {
    A = make_set(std::move(A));
    RhsColumn col = detail::indicator(A);
    auto s = detail::solve_outside(v, A, u, {col}, opt);
    double val = set_contains(A, y) ? detail::first_step(v, y, u, s, col, 0) : s->value(y, 0);
    return {val, detail::report_of(s)};
}

struct IdentityCheck {
    double lhs = 0;
    double rhs = 0;
    double residual = 0;
};

/**
 * \brief Renewal identity P_y(tau_x < tau_I) = P_y(tau_x < tau_{I u y}) / P_y(tau_{I u x} < tau_y).
 */
template <ChainView V>
IdentityCheck renewal_identity(const V& v, std::size_t y, std::size_t x, StateSet I, const SolverOptions& opt = {}) {
    I = make_set(std::move(I));
    if (y == x || set_contains(I, y) || set_contains(I, x)) throw invalid_input("renewal identity needs y, x and I disjoint");
    double lhs = hit_prob(v, y, StateSet{x}, I, StartRule::strict, opt).value;
    double a = hit_prob(v, y, StateSet{x}, set_with(I, y), StartRule::strict, opt).value;
    double b = escape_prob(v, y, set_with(I, x), opt).value;
    double rhs = a / b;
    return {lhs, rhs, std::fabs(lhs - rhs)};
}

/**
 * \brief Splits G^y_{x,J} at a reference state o:
 *        G^y_{x,J u o} + G^y_{o,J u x} G^o_{x,J u o} / (1 - G^o_{o,J u x}).
 */
template <ChainView V>
IdentityCheck laplace_decomposition(const V& v, std::size_t y, std::size_t x, StateSet J, std::size_t o, double u,
                                    const SolverOptions& opt = {}) {
    J = make_set(std::move(J));
    if (o == x || set_contains(J, o)) throw invalid_input("reference state must lie outside J and differ from x");
    double lhs = laplace_G(v, y, x, J, u, opt).value;
    double a = laplace_G(v, y, x, set_with(J, o), u, opt).value;
    double b = laplace_G(v, y, o, set_with(J, x), u, opt).value;
    double c = laplace_G(v, o, x, set_with(J, o), u, opt).value;
    double g = laplace_G(v, o, o, set_with(J, x), u, opt).value;
    double rhs = a + b * c / (1 - g);
    return {lhs, rhs, std::fabs(lhs - rhs)};
}

/// Bisection for the smallest u at which G^x_{x,J}(u) stops converging.
template <ChainView V>
double laplace_threshold(const V& v, std::size_t x, const StateSet& J, double hi_guess, int iters = 60, const SolverOptions& opt = {}) {
    double lo = 0, hi = hi_guess;
    auto ok = [&](double u) {
        try {
            laplace_G(v, x, x, J, u, opt);
            return true;
        } catch (const out_of_domain&) {
            return false;
        }
    };
    while (ok(hi)) {
        lo = hi;
        hi *= 2;
    }
    for (int i = 0; i < iters; ++i) {
        double mid = 0.5 * (lo + hi);
        (ok(mid) ? lo : hi) = mid;
    }
    return hi;
}

// Lumped-grid specific quantities.

/**
 * \brief phi_x(n) = max over y at graph distance n from the vertex x of P_y(tau_x < tau_0), n = 0..N.
 *
 * Entry 0 is the strict return probability P_x(tau_x < tau_0).
 */
inline std::vector<double> phi_profile(const LumpedChain& c, const LumpedPoint& x, const SolverOptions& opt = {}) {
    if (!c.is_vertex(x)) throw invalid_input("phi is defined for vertices");
    LumpedView v(c);
    std::size_t xi = c.index(x), oi = c.origin_index();
    if (xi == oi) throw invalid_input("vertex coincides with the origin");
    RhsColumn col = detail::indicator(StateSet{xi});
    auto s = detail::solve_outside(v, make_set({xi, oi}), 0.0, {col}, opt);
    std::vector<double> phi(c.N() + 1, 0.0);
    for (std::size_t i = 0; i < c.state_count(); ++i) {
        double val = (i == xi || i == oi) ? detail::first_step(v, i, 0.0, s, col, 0) : s->value(i, 0);
        auto dd = c.graph_dist(i, xi);
        phi[dd] = std::max(phi[dd], val);
    }
    return phi;
}

inline double phi_exact(const LumpedChain& c, const LumpedPoint& x, std::size_t n, const SolverOptions& opt = {}) {
    if (n == 0 || n > c.N()) throw invalid_input("phi distance must lie in 1..N");
    return phi_profile(c, x, opt)[n];
}

/// V(y, J) = sum over z in J \ y of phi_z(dist(y, z)) for vertices y and J.
inline double v_sparseness_at(const LumpedChain& c, const LumpedPoint& y, const std::vector<LumpedPoint>& J,
                              const SolverOptions& opt = {}) {
    double s = 0;
    for (const auto& z : J) {
        if (z == y) continue;
        s += phi_profile(c, z, opt)[c.graph_dist(y, z)];
    }
    return s;
}

/// max over y in J of V(y, J).
inline double v_sparseness(const LumpedChain& c, const std::vector<LumpedPoint>& J, const SolverOptions& opt = {}) {
    std::vector<std::vector<double>> prof;
    for (const auto& z : J) prof.push_back(phi_profile(c, z, opt));
    double best = 0;
    for (std::size_t a = 0; a < J.size(); ++a) {
        double s = 0;
        for (std::size_t b = 0; b < J.size(); ++b)
            if (b != a) s += prof[b][c.graph_dist(J[a], J[b])];
        best = std::max(best, s);
    }
    return best;
}

struct EscapeBracket {
    double lower = 0;
    double upper = 0;
    std::size_t region_size = 0;
    SolveReport report;
};

/**
 * \brief Certified enclosure of P_x(tau_0 < tau_x) for a vertex x from a solve on the ball of the given radius.
 *
 * Outside the ball, P_z(tau_x < tau_0) lies between 0 and Q(x) times the resistance of the
 * axis path from z to the origin, which bounds Q(x) / capacity(z, 0).
 */
inline EscapeBracket escape_to_origin_bracket(const LumpedChain& c, const LumpedPoint& x, std::size_t radius,
                                              const SolverOptions& opt = {}) {
    if (!c.is_vertex(x)) throw invalid_input("bracket needs a vertex start");
    LumpedView v(c);
    const std::size_t xi = c.index(x), oi = c.origin_index();
    if (xi == oi) throw invalid_input("vertex coincides with the origin");
    std::vector<std::size_t> region;
    LumpedPoint cur = x;
    auto rec = [&](auto&& self, std::size_t k, std::size_t left) -> void {
        if (k == c.d()) {
            std::size_t i = c.index(cur);
            if (i != xi && i != oi) region.push_back(i);
            return;
        }
        for (std::size_t m = 0; m <= std::min(left, c.size(k)); ++m) {
            cur.n[k] = x.n[k] == 0 ? m : c.size(k) - m;
            self(self, k + 1, left - m);
        }
        cur.n[k] = x.n[k];
    };
    rec(rec, 0, radius);
    std::vector<std::size_t> order(c.d());
    for (std::size_t k = 0; k < c.d(); ++k) order[k] = k;
    const double lqx = c.log_Q(xi);
    RhsColumn lo{[xi](std::size_t j) { return j == xi ? 1.0 : 0.0; }, nullptr};
    RhsColumn hi{[&, xi, oi](std::size_t j) {
                     if (j == xi) return 1.0;
                     if (j == oi) return 0.0;
                     return std::min(1.0, std::exp(lqx + log_path_resistance(c, c.point(j), c.origin(), order)));
                 },
                 nullptr};
    auto s = solve_killed(v, region, 0.0, {lo, hi}, opt);
    EscapeBracket out;
    out.region_size = s.interior().size();
    out.report = s.report();
    std::optional<KilledSolution> so(std::move(s));
    double stay_lo = detail::first_step(v, xi, 0.0, so, lo, 0);
    double stay_hi = detail::first_step(v, xi, 0.0, so, hi, 1);
    out.lower = 1.0 - stay_hi;
    out.upper = 1.0 - stay_lo;
    return out;
}

} // namespace hcp
