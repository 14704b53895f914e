#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hcp/bounds.hpp"
#include "hcp/solver.hpp"

using namespace hcp;

namespace {

// F2 straight from the definition, with sphere sizes counted by scanning the grid.
double f2_oracle(const std::vector<std::size_t>& sizes, std::size_t n, double k0 = 4, std::size_t thr = 10) {
    auto c = LumpedChain::from_sizes(sizes);
    const double N = static_cast<double>(c.N());
    auto kap = [&](std::size_t m) { return m <= thr ? k0 : N; };
    auto fact = [](std::size_t m) { return std::tgamma(static_cast<double>(m) + 1); };
    double sum = 0;
    for (std::size_t m = n + 2; m >= 1; m -= 2) {
        std::size_t p = (n + 2 - m) / 2;
        std::size_t sphere = 0;
        for (std::size_t i = 0; i < c.state_count(); ++i) sphere += c.graph_dist(i, 0) == m;
        sum += std::pow(N, static_cast<double>(p)) / fact(p) * static_cast<double>(sphere);
        if (m < 2) break;
    }
    return kap(n + 2) * kap(n + 2) * fact(n + 2) / std::pow(N, static_cast<double>(n + 2)) * sum;
}

} // namespace

TEST(Bounds, KappaAndIndexSet) {
    BoundParams bp;
    EXPECT_EQ(kappa(bp, 1, 200), 4.0);
    EXPECT_EQ(kappa(bp, 100, 200), 200.0);
    for (std::size_t n = 1; n < 50; ++n) EXPECT_LE(kappa(bp, n, 200), kappa(bp, n + 1, 200));
    EXPECT_EQ(index_set_I(1), (std::vector<std::size_t>{3, 1}));
    EXPECT_EQ(index_set_I(2), (std::vector<std::size_t>{4, 2}));
    EXPECT_EQ(index_set_I(4), (std::vector<std::size_t>{6, 4, 2}));
    EXPECT_THROW(BoundParams{.kappa0 = 2}.validate(), invalid_input);
    EXPECT_THROW(BoundParams{.alpha0 = 0.1}.validate(), invalid_input);
}

TEST(Bounds, FTableMatchesDefinition) {
    FTable t({100});
    EXPECT_NEAR(t.F1(2), 8e-4, 1e-18);
    for (auto sizes : {std::vector<std::size_t>{3, 4, 2}, std::vector<std::size_t>{7}, std::vector<std::size_t>{2, 2, 2, 3}}) {
        FTable ft(sizes);
        for (std::size_t n = 1; n <= ft.N(); ++n) {
            EXPECT_NEAR(ft.F2(n) / f2_oracle(sizes, n), 1.0, 1e-12) << n;
            EXPECT_NEAR(ft.F(n), ft.F1(n) + ft.F2(n), 1e-15 * ft.F(n));
            EXPECT_GE(ft.F(n), ft.F1(n));
            EXPECT_GE(ft.F(n), ft.F2(n));
        }
    }
    EXPECT_THROW(t.F(0), invalid_input);
    EXPECT_THROW(t.F(101), invalid_input);
}

TEST(Bounds, RigorousEnvelopesDominate) {
    for (std::size_t N : {64u, 128u, 256u})
        for (std::size_t d = 1; d <= 4; ++d) {
            FTable t(Partition::equipartition(N, d).sizes());
            for (std::size_t n = 1; n <= N; ++n)
                for (const auto& e : a3_envelopes(t, n)) {
                    if (e.applicable && e.rigorous) { EXPECT_LE(t.log_F2(n), e.log_value + 1e-12L) << e.name << " N=" << N << " d=" << d << " n=" << n; }
                }
        }
    EXPECT_EQ(p_star(3), 2u);
    EXPECT_EQ(m_star(3), 1u);
    EXPECT_EQ(p_star(4), 2u);
    EXPECT_EQ(m_star(4), 2u);
}

TEST(Bounds, PrintedPowerFormsCanFail) {
    // Binomial(d+m-1, m) against (d-1)^m/m! e^{m^2/(2(d-1))} at d = 2, m = 1: 2 > e^{1/2}.
    FTable t({1, 1, 1, 1, 1, 1, 1, 1});
    bool sharp_ok = true;
    for (std::size_t n = 1; n + 2 <= t.d(); ++n)
        for (const auto& e : a3_envelopes(t, n))
            if (e.name == "small-m-power") sharp_ok = sharp_ok && t.log_F2(n) <= e.log_value;
    EXPECT_TRUE(sharp_ok);
    EXPECT_LT(std::exp(0.5), 2.0);
}

TEST(Bounds, DecreasingEnvelopeConstants) {
    EXPECT_NEAR(a3_rho(0, 0), 2 / std::numbers::e, 1e-15);
    double c = a3_C_delta(0.9);
    auto n = static_cast<std::size_t>(std::ceil(c * 10)) - 2;
    EXPECT_LE(a3_rho(n, 10), 0.9);
    EXPECT_GT(a3_rho(n - 2, 10), 0.9);
    EXPECT_THROW(a3_C_delta(0.7), invalid_input);
    FTable t(Partition::equipartition(256, 4).sizes());
    EXPECT_LT(decreasing_envelope_rate(t), 1.0);
}

TEST(Bounds, OneDimensionalFormula) {
    EXPECT_EQ(rho_1d_exact(2, 0), 1.0);
    EXPECT_DOUBLE_EQ(rho_1d_exact(4, 0), 0.75);
    for (std::size_t N = 2; N <= 60; N += 2)
        for (std::size_t k = 0; k <= N; ++k) {
            if (k != N / 2) { EXPECT_NEAR(rho_1d_exact(N, k), rho_1d_exact(N, N - k), 1e-14); }
        }
    EXPECT_THROW(rho_1d_exact(6, 3), invalid_input);
    for (std::size_t N : {7u, 30u, 51u}) {
        auto c = LumpedChain::from_sizes({N});
        LumpedView v(c);
        for (std::size_t k = 0; k <= N; ++k) {
            if (k == c.origin().n[0]) continue;
            EXPECT_NEAR(rho_1d_exact(N, k), escape_prob(v, k, {c.origin_index()}).value, 1e-12) << N << " " << k;
        }
    }
}

TEST(Bounds, SandwichAroundExactEscape) {
    std::mt19937_64 rng(17);
    for (auto sizes : {std::vector<std::size_t>{10, 8}, std::vector<std::size_t>{6, 5, 4}, std::vector<std::size_t>{31}}) {
        auto c = LumpedChain::from_sizes(sizes);
        LumpedView v(c);
        for (int t = 0; t < 25; ++t) {
            std::size_t xi = rng() % c.state_count();
            if (xi == c.origin_index()) continue;
            auto x = c.point(xi);
            double exact0 = escape_prob(v, xi, {c.origin_index()}).value;
            auto lo = path_lower_bound(c, x);
            EXPECT_LE(lo.value, exact0 * (1 + 1e-12));
            EXPECT_NEAR(lo.closed_form / lo.value, 1.0, 1e-12);
            EXPECT_GE(dirichlet_upper_bound(c, x, {c.origin()}).value, exact0 * (1 - 1e-12));
            std::vector<LumpedPoint> J;
            StateSet Js;
            for (int k = 0; k < 1 + t % 3; ++k) {
                auto z = c.vertex(rng() % (std::uint64_t{1} << c.d()));
                if (z == x) continue;
                J.push_back(z);
                Js.push_back(c.index(z));
            }
            if (J.empty()) continue;
            Js = make_set(Js);
            double exact = escape_prob(v, xi, Js).value;
            auto up = dirichlet_upper_bound(c, x, J);
            EXPECT_GE(up.value, exact * (1 - 1e-12)) << up.branch;
        }
    }
}

TEST(Bounds, PathBoundIsExactInOneDimension) {
    auto c = LumpedChain::from_sizes({40});
    for (std::size_t k : {0u, 5u, 19u, 33u, 40u}) EXPECT_NEAR(path_lower_bound(c, c.point(k)).value, rho_1d_exact(40, k), 1e-14);
    EXPECT_THROW(path_lower_bound(c, c.origin()), invalid_input);
}

TEST(Bounds, SeriesBoundIsTheAnsatzDirichletForm) {
    auto c = LumpedChain::from_sizes({12, 12});
    LumpedView v(c);
    auto x = c.origin();
    std::vector<LumpedPoint> J = {c.vertex(0), c.vertex(3)};
    auto b = dirichlet_upper_bound(c, x, J);
    ASSERT_EQ(b.branch, "series");
    std::vector<double> h(c.state_count(), b.b);
    std::size_t xi = c.index(x);
    h[xi] = 0;
    c.for_each_neighbor(xi, [&](std::size_t j, double) { h[j] = b.c; });
    for (const auto& z : J) {
        std::size_t zi = c.index(z);
        h[zi] = 1;
        c.for_each_neighbor(zi, [&](std::size_t j, double) { h[j] = b.a; });
    }
    EXPECT_NEAR(dirichlet_form(v, h) / c.Q(xi) / b.value, 1.0, 1e-12);
    EXPECT_NEAR(b.gamma, 23.0, 1e-12);
    // Perturbing any level raises the form.
    for (double eps : {-1e-3, 1e-3}) {
        auto g = h;
        for (auto& val : g)
            if (val == b.b) val += eps;
        EXPECT_GT(dirichlet_form(v, g), dirichlet_form(v, h));
    }
}

TEST(Bounds, VertexToOriginBoundNearOneMinusOneOverN) {
    auto c = LumpedChain::from_sizes({64});
    auto b = dirichlet_upper_bound(c, c.vertex(1), {c.origin()});
    EXPECT_EQ(b.branch, "series");
    EXPECT_NEAR(b.value, 1 - 1.0 / 64, 2.0 / (64 * 64));
    LumpedView v(c);
    EXPECT_GE(b.value, escape_prob(v, c.index(c.vertex(1)), {c.origin_index()}).value);
}

TEST(Bounds, OneParameterBranchWhenCrowded) {
    auto c = LumpedChain::from_sizes({2, 2});
    auto x = c.vertex(0);
    auto b = dirichlet_upper_bound(c, x, {c.vertex(1)});
    EXPECT_EQ(b.branch, "one-parameter");
    EXPECT_FALSE(b.separated);
    EXPECT_FALSE(std::isnan(b.leading_order));
    LumpedView v(c);
    EXPECT_GE(b.value, escape_prob(v, c.index(x), {c.index(c.vertex(1))}).value);
}

TEST(Bounds, ScaleConstants) {
    EXPECT_EQ(d0(1000), 7u);
    auto c = LumpedChain::from_sizes({8, 8});
    EXPECT_NEAR(std::exp(log_kac_mean(c)) * c.Q(c.origin_index()), 1.0, 1e-14);
    EXPECT_EQ(k_selector(true), 2);
    EXPECT_EQ(k_selector(false), 1);
    EXPECT_DOUBLE_EQ(theta_hat(c), 16.0 * 16 * 64);
    auto c1 = LumpedChain::from_sizes({100});
    EXPECT_DOUBLE_EQ(theta_hat(c1), 25 * std::log(100.0));
    EXPECT_NEAR(log_u_bar_inverse(10, 2), std::log(1024.0 / 2 * 1.1), 1e-12);
    auto w = mean_time_window(10, 2, 0.0, 2);
    EXPECT_NEAR(w.upper() / (512 * 1.1), 1.05, 1e-12);
}

TEST(Bounds, RhoOfM) {
    FTable t({128});
    EXPECT_EQ(rho_of_M(t, 2), 0u);
    FTable t2(Partition::equipartition(64, 3).sizes());
    std::size_t prev = 0;
    for (std::size_t M = 1; M < 2000; M *= 3) {
        auto r = rho_of_M(t2, M, 1e-3);
        EXPECT_GE(r, prev);
        prev = r;
    }
    EXPECT_LE(rho_of_M(t2, 50, 1e-2), rho_of_M(t2, 50, 1e-4));
}

TEST(Bounds, Sparseness) {
    const std::size_t N = 12;
    auto xi = SpinConfig::all_plus(N);
    auto trivial = Partition::trivial(N);
    EXPECT_EQ(sparseness_U(SpinSet({xi}), trivial), 0.0);
    FTable t({N});
    EXPECT_DOUBLE_EQ(sparseness_U(SpinSet({xi, xi.negated()}), trivial), t.F(N));
    auto s = SpinConfig::parse("+++---++++++");
    EXPECT_THROW(sparseness_U(SpinSet({xi, s}), trivial), invalid_input);
    auto p = build_partition_from_set(SpinSet({xi, s}));
    EXPECT_DOUBLE_EQ(sparseness_U(SpinSet({xi, s}), p), FTable(p).F(3));
}

TEST(Bounds, ExactPhiSparsenessBelowF) {
    // V <= U: the exact phi functional never exceeds its F bound on a log-regular instance.
    auto c = LumpedChain::from_sizes({64});
    FTable t({64});
    std::vector<LumpedPoint> J = {c.vertex(0), c.vertex(1)};
    EXPECT_LE(v_sparseness(c, J), sparseness_U(t, c, J));
}
