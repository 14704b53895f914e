#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "hcp/cube.hpp"
#include "hcp/montecarlo.hpp"

using namespace hcp;

TEST(Rng, StreamsAreReproducibleAndDistinct) {
    Rng a(42, 0), b(42, 0), c(42, 1), d(43, 0);
    bool differ_c = false, differ_d = false;
    for (int i = 0; i < 100; ++i) {
        auto x = a.next();
        EXPECT_EQ(x, b.next());
        differ_c |= x != c.next();
        differ_d |= x != d.next();
    }
    EXPECT_TRUE(differ_c);
    EXPECT_TRUE(differ_d);
}

TEST(Rng, BoundedAndUnitDraws) {
    Rng r(7, 3);
    double sum = 0;
    for (int i = 0; i < 100000; ++i) {
        EXPECT_LT(r.below(13), 13u);
        double u = r.uniform01(), v = r.uniform_pos();
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
        EXPECT_GT(v, 0.0);
        EXPECT_LE(v, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / 100000, 0.5, 4 * std::sqrt(1.0 / 12 / 100000));
    EXPECT_THROW(r.below(0), invalid_input);
    EXPECT_EQ(r.geometric_failures(1.0), 0.0);
    EXPECT_THROW(r.geometric_failures(0.0), invalid_input);
}

TEST(Rng, GeometricAndNormalMoments) {
    Rng r(9, 0);
    const int n = 200000;
    const double p = 0.01;
    long double g = 0, z = 0, z2 = 0;
    for (int i = 0; i < n; ++i) {
        g += r.geometric_failures(p);
        double x = r.normal();
        z += x;
        z2 += x * x;
    }
    double gm = static_cast<double>(g / n), sd = std::sqrt((1 - p) / (p * p) / n);
    EXPECT_NEAR(gm, (1 - p) / p, 4 * sd);
    EXPECT_NEAR(static_cast<double>(z / n), 0.0, 4 / std::sqrt(n));
    EXPECT_NEAR(static_cast<double>(z2 / n), 1.0, 4 * std::sqrt(2.0 / n));
}

TEST(Walk, FlippedCoordinateIsUniform) {
    const std::size_t N = 10;
    const int steps = 1000000;
    Rng r(1, 0);
    auto s = SpinConfig::all_plus(N);
    std::vector<int> count(N, 0);
    for (int t = 0; t < steps; ++t) {
        auto next = step_hypercube(s, r);
        ASSERT_EQ(hamming(s, next), 1u);
        for (std::size_t i = 0; i < N; ++i)
            if (s.plus(i) != next.plus(i)) ++count[i];
        s = next;
    }
    double chi2 = 0, e = static_cast<double>(steps) / N;
    for (auto c : count) chi2 += (c - e) * (c - e) / e;
    // 9 degrees of freedom; 27.9 is the 0.1% point.
    EXPECT_LT(chi2, 27.9);
}

TEST(Walk, LumpedMoveFrequenciesMatchRates) {
    auto c = LumpedChain::from_sizes({3, 5, 4});
    LumpedPoint x{{1, 4, 0}};
    Rng r(2, 0);
    const int n = 200000;
    std::map<std::vector<std::size_t>, int> seen;
    for (int t = 0; t < n; ++t) ++seen[step_lumped(c, x, r).n];
    std::size_t i = c.index(x);
    double total = 0;
    c.for_each_neighbor(i, [&](std::size_t j, double rate) {
        total += rate;
        double f = static_cast<double>(seen[c.point(j).n]) / n;
        EXPECT_NEAR(f, rate, 4 * std::sqrt(rate * (1 - rate) / n));
    });
    EXPECT_NEAR(total, 1.0, 1e-15);
    EXPECT_EQ(seen.size(), 5u);  // class 2 has no down move at count 0
}

TEST(Walk, LumpedImageOfHypercubeWalkHasLumpedRates) {
    auto p = Partition::parse("3,5");
    LumpedChain c(p);
    LumpingMap g(p, SpinConfig::parse("+-+-+-+-"));
    Rng r(3, 0);
    auto s = SpinConfig::parse("++++++++");
    std::map<std::pair<std::size_t, std::size_t>, int> trans;
    std::map<std::size_t, int> visits;
    for (int t = 0; t < 400000; ++t) {
        auto next = step_hypercube(s, r);
        std::size_t a = c.index(g(s)), b = c.index(g(next));
        ++trans[{a, b}];
        ++visits[a];
        s = next;
    }
    int checked = 0;
    for (auto [a, n] : visits) {
        if (n < 5000) continue;
        c.for_each_neighbor(a, [&](std::size_t b, double rate) {
            double f = static_cast<double>(trans[{a, b}]) / n;
            EXPECT_NEAR(f, rate, 5 * std::sqrt(rate * (1 - rate) / n));
        });
        ++checked;
    }
    EXPECT_GE(checked, 5);
}

TEST(Sampling, MatchesExactOnSmallHypercube) {
    HypercubeView v(8);
    StateSet A = {0}, B = {255};
    std::size_t y = 0b00001111;
    SimConfig cfg{5, 20000, 1e7};
    auto s = sample_hitting(v, cfg, y, A, B);
    double p = hit_prob(v, y, A, B).value;
    auto est = hit_fraction(s, A);
    EXPECT_LE(est.sigmas_from(p), 4.0);
    double m = mean_hitting_time(v, y, make_set({0, 255})).value;
    EXPECT_LE(mean_time(s).sigmas_from(m), 4.0);
}

TEST(Sampling, MatchesExactOnLumpedGrid) {
    auto c = LumpedChain::from_sizes({6, 5});
    LumpedView v(c);
    std::size_t o = c.origin_index(), x = c.index(c.vertex(1));
    SimConfig cfg{11, 20000, 1e7};
    auto s = sample_hitting(v, cfg, o, {x});
    EXPECT_LE(mean_time(s).sigmas_from(mean_hitting_time(v, o, {x}).value), 4.0);
}

TEST(Sampling, DeterministicPerSeed) {
    HypercubeView v(6);
    SimConfig cfg{77, 200, 1e6};
    auto a = sample_hitting(v, cfg, 5, {0});
    auto b = sample_hitting(v, cfg, 5, {0});
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].time, b[i].time);
        EXPECT_EQ(a[i].hit_state, b[i].hit_state);
    }
}

TEST(Sampling, FullSpaceTargetAndCensoring) {
    HypercubeView v(3);
    StateSet all;
    for (std::size_t i = 0; i < 8; ++i) all.push_back(i);
    for (const auto& h : sample_hitting(v, {1, 50, 10}, 0, all)) EXPECT_EQ(h.time, 1.0);
    HypercubeView big(20);
    EXPECT_THROW(sample_hitting(big, {1, 10, 5}, 0, {(1u << 20) - 1}), solve_error);
    auto s = sample_hitting(v, {1, 2000, 3}, 0, {7});
    int cens = 0;
    for (const auto& h : s) {
        cens += h.censored;
        if (h.censored) {
            EXPECT_EQ(h.time, 3.0);
        }
    }
    EXPECT_GT(cens, 0);
    EXPECT_LT(cens, 2000);
    EXPECT_THROW(sample_hitting(v, {1, 10, 5}, 0, {}), invalid_input);
    EXPECT_THROW(sample_hitting(v, {1, 10, 5}, 0, {1}, {1}), invalid_input);
}

TEST(StatTests, ExponentialityCalibration) {
    Rng r(4, 0);
    std::vector<double> e, u;
    for (int i = 0; i < 50000; ++i) {
        e.push_back(-std::log(r.uniform_pos()) * 3.0);
        u.push_back(r.uniform01() * 6.0);
    }
    EXPECT_TRUE(exponentiality_test(e, 3.0).pass);
    EXPECT_FALSE(exponentiality_test(u, 3.0).pass);
    EXPECT_THROW(exponentiality_test(std::vector<double>(10, 1.0), 1.0), invalid_input);
}

TEST(StatTests, IndependenceCalibration) {
    Rng r(6, 0);
    std::vector<double> a, b, c;
    for (int i = 0; i < 20000; ++i) {
        a.push_back(-std::log(r.uniform_pos()));
        b.push_back(-std::log(r.uniform_pos()));
        c.push_back(a.back() + 0.2 * b.back());
    }
    EXPECT_TRUE(independence_test({a, b}).pass);
    EXPECT_FALSE(independence_test({a, c}).pass);
    EXPECT_TRUE(independence_test({a}).pass);
}

TEST(Renewal, MatchesExactMeanWithDirectFailures) {
    // Small chain: the failure count stays small, so every excursion is simulated.
    auto c = LumpedChain::from_sizes({10});
    LumpedView v(c);
    std::size_t o = c.origin_index(), x = c.index(c.vertex(1));
    RenewalSampler<LumpedView> rs(v, o, {x});
    for (std::size_t y : {o, std::size_t{3}, std::size_t{0}}) {
        auto s = rs.sample_many(y, {21, 20000, 1e8});
        EXPECT_LE(mean_time(s).sigmas_from(mean_hitting_time(v, y, {x}).value), 4.0) << y;
    }
}

TEST(Renewal, MatchesExactMeanWithNormalFailures) {
    auto c = LumpedChain::from_sizes({40});
    LumpedView v(c);
    std::size_t o = c.origin_index(), x = c.index(c.vertex(1));
    RenewalSampler<LumpedView> rs(v, o, {x});
    EXPECT_LT(rs.success_probability(), 1e-9);
    double m = mean_hitting_time(v, o, {x}).value;
    auto s = rs.sample_many(o, {8, 20000, 1e8});
    EXPECT_LE(mean_time(s).sigmas_from(m), 4.0);
    EXPECT_TRUE(exponentiality_test(s, m).pass);
}

TEST(Renewal, FailureMomentsMatchDirectSimulation) {
    auto c = LumpedChain::from_sizes({12});
    LumpedView v(c);
    std::size_t o = c.origin_index(), x = c.index(c.vertex(1));
    RenewalSampler<LumpedView> rs(v, o, {x});
    // Direct excursions from the hub that return before x.
    auto s = sample_hitting(v, {3, 100000, 1e7}, o, {o}, {x});
    std::vector<HitSample> back;
    for (const auto& h : s)
        if (h.hit_state == o) back.push_back(h);
    auto m = mean_time(back);
    EXPECT_LE(m.sigmas_from(rs.failure_mean()), 4.0);
}

TEST(Renewal, TwoTargetsSplitByHarmonicMeasure) {
    auto c = LumpedChain::from_sizes({9});
    LumpedView v(c);
    std::size_t o = c.origin_index();
    RenewalSampler<LumpedView> rs(v, o, {0, 9});
    auto s = rs.sample_many(2, {5, 20000, 1e8});
    double p = hit_prob(v, 2, {0}, {9}).value;
    EXPECT_LE(hit_fraction(s, {0}).sigmas_from(p), 4.0);
    EXPECT_THROW(RenewalSampler<LumpedView>(v, o, {o}), invalid_input);
}

TEST(Renewal, JointHittingTimesOfAntipodalVertices) {
    auto c = LumpedChain::from_sizes({48});
    LumpedView v(c);
    std::size_t o = c.origin_index(), a = c.index(c.vertex(0)), b = c.index(c.vertex(1));
    auto cols = sample_joint_hitting(v, o, {a, b}, o, {13, 20000, 1e8});
    double ma = mean_hitting_time(v, o, {a}).value;
    for (auto& t : cols[0]) t /= ma;
    for (auto& t : cols[1]) t /= ma;
    EXPECT_TRUE(independence_test(cols).pass);
    EXPECT_TRUE(exponentiality_test(cols[0], 1.0).pass);
    EXPECT_TRUE(exponentiality_test(cols[1], 1.0).pass);
}

TEST(Sampling, SpinSamplerAgreesWithIndexSampler) {
    HypercubeView v(6);
    SpinSet A({SpinConfig::from_index(0, 6), SpinConfig::from_index(63, 6)});
    auto start = SpinConfig::from_index(5, 6);
    auto a = sample_hitting_spins({4, 500, 1e6}, start, A);
    auto b = sample_hitting(v, {4, 500, 1e6}, 5, {0, 63});
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].time, b[i].time);
        EXPECT_EQ(A[a[i].hit_state].to_index(), b[i].hit_state);
    }
    auto big = sample_hitting_spins({1, 2000, 100}, SpinConfig::all_plus(100), SpinSet({SpinConfig::all_plus(100).flipped(3)}));
    EXPECT_FALSE(big.empty());
}
