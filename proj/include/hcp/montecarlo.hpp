#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "error.hpp"
#include "lumped.hpp"
#include "solver.hpp"
#include "spin.hpp"
#include "views.hpp"

namespace hcp {

/**
 * \brief Per-replica random stream: mt19937_64 seeded through seed_seq from (seed, stream).
 *
 * All derived draws are written out here so sequences do not depend on the standard library's
 * distribution implementations.
 */
class Rng {
public:
    static constexpr const char* algorithm = "mt19937_64/seed_seq(seed,stream)";

    Rng(std::uint64_t seed, std::uint64_t stream) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
        eng_.seed(seq);
    }

    std::uint64_t next() { return eng_(); }

    /// Uniform integer in [0, n), by rejection.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw invalid_input("empty range");
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t v;
        do v = next();
        while (v >= limit);
        return v % n;
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    /// Uniform on (0, 1].
    double uniform_pos() { return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53; }

    double normal() {
        double u = uniform_pos(), v = uniform01();
        return std::sqrt(-2 * std::log(u)) * std::cos(2 * std::numbers::pi * v);
    }

    /// Number of failures before the first success of probability p, as a real for huge counts.
    double geometric_failures(double p) {
        if (!(p > 0 && p <= 1)) throw invalid_input("success probability must lie in (0,1]");
        if (p == 1) return 0;
        return std::floor(std::log(uniform_pos()) / std::log1p(-p));
    }

private:
    std::mt19937_64 eng_;
};

/// One step of the hypercube walk: a uniformly chosen coordinate flips.
inline SpinConfig step_hypercube(const SpinConfig& s, Rng& rng) {
    if (s.size() == 0) throw invalid_input("empty configuration");
    return s.flipped(static_cast<std::size_t>(rng.below(s.size())));
}

namespace detail {

/// Picks the class of a uniform coordinate, then moves down if the coordinate is among the n_k flipped ones.
inline std::pair<std::size_t, bool> lumped_move(const std::vector<std::size_t>& sizes, const std::vector<std::size_t>& counts,
                                                std::size_t N, Rng& rng) {
    std::size_t u = static_cast<std::size_t>(rng.below(N));
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        if (u < sizes[k]) return {k, u < counts[k]};
        u -= sizes[k];
    }
    throw invalid_input("unreachable");
}

} // namespace detail

inline LumpedPoint step_lumped(const LumpedChain& c, const LumpedPoint& x, Rng& rng) {
    c.check(x);
    auto [k, down] = detail::lumped_move(c.sizes(), x.n, c.N(), rng);
    LumpedPoint y = x;
    y.n[k] = down ? y.n[k] - 1 : y.n[k] + 1;
    return y;
}

/// Index-level stepping on the two chain views.
struct HypercubeStepper {
    std::size_t n;
    explicit HypercubeStepper(const HypercubeView& v) : n(v.N()) {}
    std::size_t operator()(std::size_t i, Rng& rng) const { return i ^ (std::size_t{1} << rng.below(n)); }
};

struct LumpedStepper {
    const LumpedChain* c;
    explicit LumpedStepper(const LumpedView& v) : c(&v.chain()) {}
    std::size_t operator()(std::size_t i, Rng& rng) const {
        std::size_t u = static_cast<std::size_t>(rng.below(c->N()));
        for (std::size_t k = 0; k < c->d(); ++k) {
            if (u < c->size(k)) return u < c->coord(i, k) ? i - c->stride(k) : i + c->stride(k);
            u -= c->size(k);
        }
        throw invalid_input("unreachable");
    }
};

inline HypercubeStepper make_stepper(const HypercubeView& v) { return HypercubeStepper(v); }
inline LumpedStepper make_stepper(const LumpedView& v) { return LumpedStepper(v); }

struct SimConfig {
    std::uint64_t seed = 1;
    std::size_t replicas = 1000;
    double max_steps = 1e8;
};

struct HitSample {
    double time = 0;          ///< steps; real-valued so accelerated samples beyond 2^64 fit
    std::size_t hit_state = 0;
    bool censored = false;
};

/**
 * \brief Independent first-passage samples of tau_{A u B} from y, replica r drawing from stream r.
 */
template <ChainView V>
std::vector<HitSample> sample_hitting(const V& v, const SimConfig& cfg, std::size_t y, const StateSet& A, const StateSet& B = {}) {
    if (A.empty()) throw invalid_input("target set is empty");
    if (cfg.replicas < 1) throw invalid_input("need at least one replica");
    if (y >= v.state_count()) throw invalid_input("start out of range");
    std::vector<char> stop(v.state_count(), 0);
    for (auto a : A) stop.at(a) = 1;
    for (auto b : B) {
        if (stop.at(b)) throw invalid_input("target and taboo sets intersect");
        stop[b] = 1;
    }
    auto step = make_stepper(v);
    std::vector<HitSample> out(cfg.replicas);
    std::size_t censored = 0;
    for (std::size_t r = 0; r < cfg.replicas; ++r) {
        Rng rng(cfg.seed, r);
        std::size_t s = y;
        double t = 0;
        HitSample h;
        for (;;) {
            s = step(s, rng);
            t += 1;
            if (stop[s]) {
                h = {t, s, false};
                break;
            }
            if (t >= cfg.max_steps) {
                h = {t, s, true};
                ++censored;
                break;
            }
        }
        out[r] = h;
    }
    if (censored == cfg.replicas) throw solve_error("every replica was censored");
    return out;
}

/// Hypercube sampling on configurations directly, for any N; hit_state is the index of the hit point in A.
inline std::vector<HitSample> sample_hitting_spins(const SimConfig& cfg, const SpinConfig& y, const SpinSet& A) {
    if (A.empty()) throw invalid_input("target set is empty");
    if (A.dimension() != y.size()) throw invalid_input("start and target set have different N");
    if (cfg.replicas < 1) throw invalid_input("need at least one replica");
    std::vector<HitSample> out(cfg.replicas);
    std::size_t censored = 0;
    for (std::size_t r = 0; r < cfg.replicas; ++r) {
        Rng rng(cfg.seed, r);
        SpinConfig s = y;
        double t = 0;
        for (;;) {
            s.flip(static_cast<std::size_t>(rng.below(s.size())));
            t += 1;
            auto it = std::lower_bound(A.begin(), A.end(), s);
            if (it != A.end() && *it == s) {
                out[r] = {t, static_cast<std::size_t>(it - A.begin()), false};
                break;
            }
            if (t >= cfg.max_steps) {
                out[r] = {t, 0, true};
                ++censored;
                break;
            }
        }
    }
    if (censored == cfg.replicas) throw solve_error("every replica was censored");
    return out;
}

struct Estimate {
    double value = 0;
    double se = 0;  ///< standard error
    std::size_t n = 0;
    double sigmas_from(double exact) const { return se > 0 ? std::fabs(value - exact) / se : (value == exact ? 0 : INFINITY); }
};

/// Fraction of uncensored samples that ended in A.
inline Estimate hit_fraction(const std::vector<HitSample>& s, const StateSet& A) {
    std::size_t n = 0, k = 0;
    for (const auto& h : s) {
        if (h.censored) continue;
        ++n;
        k += set_contains(A, h.hit_state);
    }
    if (n == 0) throw invalid_input("no uncensored samples");
    double p = static_cast<double>(k) / static_cast<double>(n);
    return {p, std::sqrt(std::max(p * (1 - p), 1.0 / static_cast<double>(n)) / static_cast<double>(n)), n};
}

inline Estimate mean_time(const std::vector<HitSample>& s) {
    std::size_t n = 0;
    long double m = 0, q = 0;
    for (const auto& h : s) {
        if (h.censored) continue;
        ++n;
        long double d = h.time - m;
        m += d / n;
        q += d * (h.time - m);
    }
    if (n < 2) throw invalid_input("need at least two uncensored samples");
    return {static_cast<double>(m), static_cast<double>(std::sqrt(q / (n - 1) / n)), n};
}

// Distributional tests.

struct TestResult {
    double statistic = 0;
    double threshold = 0;
    bool pass = false;
    std::size_t n = 0;
};

/// Kolmogorov-Smirnov distance between the law of time/mean and Exp(1).
inline TestResult exponentiality_test(const std::vector<double>& times, double mean, double threshold = 0.02) {
    if (times.size() < 1000) throw invalid_input("exponentiality test needs at least 1000 samples");
    if (!(mean > 0)) throw invalid_input("mean must be positive");
    std::vector<double> x(times);
    for (auto& t : x) t /= mean;
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double ks = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double F = -std::expm1(-x[i]);
        ks = std::max({ks, std::fabs(F - static_cast<double>(i) / n), std::fabs(static_cast<double>(i + 1) / n - F)});
    }
    return {ks, threshold, ks <= threshold, x.size()};
}

inline TestResult exponentiality_test(const std::vector<HitSample>& s, double mean, double threshold = 0.02) {
    std::vector<double> t;
    for (const auto& h : s)
        if (!h.censored) t.push_back(h.time);
    return exponentiality_test(t, mean, threshold);
}

/// Largest absolute pairwise Pearson correlation between the columns; one column passes vacuously.
inline TestResult independence_test(const std::vector<std::vector<double>>& columns, double threshold = 0.05) {
    if (columns.empty()) throw invalid_input("no samples");
    const std::size_t n = columns.front().size();
    for (const auto& c : columns)
        if (c.size() != n) throw invalid_input("columns differ in length");
    if (columns.size() == 1) return {0, threshold, true, n};
    if (n < 1000) throw invalid_input("independence test needs at least 1000 samples");
    double worst = 0;
    for (std::size_t a = 0; a < columns.size(); ++a)
        for (std::size_t b = a + 1; b < columns.size(); ++b) {
            long double ma = 0, mb = 0;
            for (std::size_t i = 0; i < n; ++i) {
                ma += columns[a][i];
                mb += columns[b][i];
            }
            ma /= n;
            mb /= n;
            long double sab = 0, saa = 0, sbb = 0;
            for (std::size_t i = 0; i < n; ++i) {
                long double da = columns[a][i] - ma, db = columns[b][i] - mb;
                sab += da * db;
                saa += da * da;
                sbb += db * db;
            }
            double r = (saa > 0 && sbb > 0) ? static_cast<double>(sab / std::sqrt(saa * sbb)) : 1.0;
            worst = std::max(worst, std::fabs(r));
        }
    return {worst, threshold, worst <= threshold, n};
}

/**
 * \brief First-passage sampler that renews at a hub state and draws the number of failed excursions exactly.
 *
 * From the hub, excursions either return or reach a target. The failure count is geometric with the exact
 * success probability; when it is large the total length of failed excursions is drawn from the normal law
 * with their exact mean and variance, otherwise each failed excursion is simulated. The successful
 * excursion is simulated exactly as the h-transformed walk. Starts away from the hub walk directly until
 * they reach the hub or a target.
 */
template <ChainView V>
class RenewalSampler {
public:
    static constexpr double direct_failures = 64;

    RenewalSampler(const V& v, std::size_t hub, StateSet targets, const SolverOptions& opt = {})
        : v_(&v), hub_(hub), targets_(make_set(std::move(targets))) {
        if (targets_.empty()) throw invalid_input("target set is empty");
        if (set_contains(targets_, hub_)) throw invalid_input("hub lies in the target set");
        const std::size_t S = v.state_count();
        stop_.assign(S, 0);
        stop_[hub_] = 1;
        for (auto a : targets_) stop_[a] = 2;
        StateSet bnd = set_with(targets_, hub_);
        auto interior = detail::complement(v, bnd);

        std::vector<RhsColumn> cols;
        for (auto a : targets_) cols.push_back(detail::indicator(StateSet{a}));
        RhsColumn back = detail::indicator(StateSet{hub_});
        cols.push_back(back);
        auto s = solve_killed(v, interior, 0.0, cols, opt);
        const std::size_t T = targets_.size();
        h_.assign(T, std::vector<double>(S, 0.0));
        std::vector<double> hf(S, 0.0);
        for (std::size_t t = 0; t < T; ++t) h_[t][targets_[t]] = 1;
        hf[hub_] = 1;
        for (auto i : interior) {
            for (std::size_t t = 0; t < T; ++t) h_[t][i] = s.value(i, t);
            hf[i] = s.value(i, T);
        }
        p_.resize(T);
        for (std::size_t t = 0; t < T; ++t) {
            double acc = 0;
            v.for_each_neighbor(hub_, [&](std::size_t j, double r) { acc += r * h_[t][j]; });
            p_[t] = acc;
        }
        // Moments of the failed-excursion length: m1 = E[L; fail], m2 = E[L^2; fail] on the interior.
        RhsColumn m1col{nullptr, [&](std::size_t i) { return hf[i]; }};
        auto m1 = solve_killed(v, interior, 0.0, {m1col}, opt);
        RhsColumn m2col{nullptr, [&](std::size_t i) { return 2 * m1.value(i) - hf[i]; }};
        auto m2 = solve_killed(v, interior, 0.0, {m2col}, opt);
        long double e1 = 0, e2 = 0, pf = 0;
        v.for_each_neighbor(hub_, [&](std::size_t j, double r) {
            double a = stop_[j] ? 0.0 : m1.value(j), b = stop_[j] ? 0.0 : m2.value(j);
            pf += r * hf[j];
            e1 += r * (hf[j] + a);
            e2 += r * (hf[j] + 2 * a + b);
        });
        p_fail_ = static_cast<double>(pf);
        if (pf > 0) {
            fail_mean_ = static_cast<double>(e1 / pf);
            fail_var_ = std::max(0.0, static_cast<double>(e2 / pf - (e1 / pf) * (e1 / pf)));
        }
        p_total_ = 0;
        for (auto p : p_) p_total_ += p;
        if (!(p_total_ > 0)) throw solve_error("targets are unreachable from the hub");
    }

    const StateSet& targets() const { return targets_; }
    double success_probability() const { return p_total_; }
    double failure_mean() const { return fail_mean_; }
    double failure_variance() const { return fail_var_; }

    HitSample sample(std::size_t start, Rng& rng, double max_direct = 1e9) const {
        auto step = make_stepper(*v_);
        double t = 0;
        std::size_t s = start;
        if (s != hub_ || stop_[s] == 2) {
            // Direct phase; a start inside the target set still has to leave it.
            do {
                s = step(s, rng);
                t += 1;
                if (t > max_direct) return {t, s, true};
            } while (!stop_[s]);
            if (stop_[s] == 2) return {t, s, false};
        }
        double g = rng.geometric_failures(p_total_);
        if (g <= direct_failures) {
            for (double k = 0; k < g; ++k) t += failed_excursion(rng, step);
        } else {
            t += g * fail_mean_ + std::sqrt(g * fail_var_) * rng.normal();
        }
        // Successful excursion: choose the target, then walk the h-transform.
        double u = rng.uniform01() * p_total_;
        std::size_t which = 0;
        while (which + 1 < p_.size() && u >= p_[which]) u -= p_[which++];
        const auto& h = h_[which];
        std::size_t cur = hub_;
        double hc = p_[which];
        for (;;) {
            double w = rng.uniform01() * hc, acc = 0;
            std::size_t nxt = cur;
            bool picked = false;
            v_->for_each_neighbor(cur, [&](std::size_t j, double r) {
                if (picked) return;
                acc += r * h[j];
                if (w < acc) {
                    nxt = j;
                    picked = true;
                }
            });
            if (!picked) {
                // Rounding left w at the top of the range: take the last neighbour with positive weight.
                v_->for_each_neighbor(cur, [&](std::size_t j, double r) {
                    if (r * h[j] > 0) nxt = j;
                });
            }
            cur = nxt;
            t += 1;
            if (cur == targets_[which]) break;
            hc = h[cur];
        }
        return {t, cur, false};
    }

    std::vector<HitSample> sample_many(std::size_t start, const SimConfig& cfg) const {
        std::vector<HitSample> out(cfg.replicas);
        for (std::size_t r = 0; r < cfg.replicas; ++r) {
            Rng rng(cfg.seed, r);
            out[r] = sample(start, rng, cfg.max_steps);
        }
        return out;
    }

private:
    template <class Step>
    double failed_excursion(Rng& rng, const Step& step) const {
        for (;;) {
            std::size_t s = hub_;
            double len = 0;
            do {
                s = step(s, rng);
                len += 1;
            } while (!stop_[s]);
            if (stop_[s] == 1) return len;
        }
    }

    const V* v_;
    std::size_t hub_;
    StateSet targets_;
    std::vector<char> stop_;
    std::vector<std::vector<double>> h_;
    std::vector<double> p_;
    double p_total_ = 0, p_fail_ = 0, fail_mean_ = 0, fail_var_ = 0;
};

/**
 * \brief Joint samples of (tau_{a_1}, ..., tau_{a_n}) for singleton targets, all from one trajectory per replica.
 *
 * Each target is found in turn: after reaching one, the walk continues toward the rest.
 */
template <ChainView V>
std::vector<std::vector<double>> sample_joint_hitting(const V& v, std::size_t hub, const StateSet& targets, std::size_t start,
                                                      const SimConfig& cfg, const SolverOptions& opt = {}) {
    const std::size_t T = targets.size();
    if (T == 0) throw invalid_input("target set is empty");
    // One sampler per nonempty subset of remaining targets, built lazily by bitmask.
    if (T > 16) throw too_large("too many joint targets");
    std::vector<std::unique_ptr<RenewalSampler<V>>> samplers(std::size_t{1} << T);
    auto sampler = [&](std::size_t mask) -> const RenewalSampler<V>& {
        if (!samplers[mask]) {
            StateSet s;
            for (std::size_t t = 0; t < T; ++t)
                if ((mask >> t) & 1) s.push_back(targets[t]);
            samplers[mask] = std::make_unique<RenewalSampler<V>>(v, hub, s, opt);
        }
        return *samplers[mask];
    };
    std::vector<std::vector<double>> cols(T, std::vector<double>(cfg.replicas, 0.0));
    for (std::size_t r = 0; r < cfg.replicas; ++r) {
        Rng rng(cfg.seed, r);
        std::size_t mask = (std::size_t{1} << T) - 1, at = start;
        double t = 0;
        while (mask) {
            auto h = sampler(mask).sample(at, rng, cfg.max_steps);
            if (h.censored) throw solve_error("joint sample censored");
            t += h.time;
            at = h.hit_state;
            for (std::size_t k = 0; k < T; ++k)
                if (((mask >> k) & 1) && targets[k] == at) {
                    cols[k][r] = t;
                    mask &= ~(std::size_t{1} << k);
                }
        }
    }
    return cols;
}

} // namespace hcp
