#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hcp/checks.hpp"

using namespace hcp;

namespace {

bool all_hard_pass(const std::vector<CheckRecord>& rs) {
    for (const auto& r : rs)
        if (r.hard && !r.satisfied) {
            ADD_FAILURE() << r.name << " " << r.instance << " exact=" << r.exact << " note=" << r.note;
            return false;
        }
    return true;
}

const CheckRecord& find(const std::vector<CheckRecord>& rs, const std::string& name) {
    for (const auto& r : rs)
        if (r.name == name) return r;
    throw std::runtime_error("missing record " + name);
}

} // namespace

TEST(Checks, KacAndStirling) {
    auto rs = check_kac(LumpedChain::from_sizes({7, 6, 5}));
    EXPECT_TRUE(rs[0].satisfied);
    EXPECT_TRUE(rs[0].hard);
    EXPECT_FALSE(rs[1].hard);  // classes below 16
    auto big = check_kac(LumpedChain::from_sizes({40, 30}));
    EXPECT_TRUE(big[1].hard);
    EXPECT_TRUE(big[1].satisfied);
    EXPECT_NEAR(big[1].measured, 1.0, 0.05);
}

TEST(Checks, EscapeWindowRegimeLabels) {
    auto small = check_escape_window(LumpedChain::from_sizes({64}), LumpedPoint{{0}});
    EXPECT_EQ(small.regime, outside_regime);  // d0(64) = 0
    EXPECT_FALSE(small.hard);
    EXPECT_TRUE(small.satisfied);
    auto c = LumpedChain::from_sizes({256});
    auto r = check_escape_window(c, c.vertex(1));
    EXPECT_TRUE(r.hard);
    EXPECT_TRUE(r.satisfied);
    EXPECT_LE(r.measured, 5.0);
}

TEST(Checks, EscapeWindowThroughBracket) {
    auto c = LumpedChain::from_sizes({128, 128});
    CheckOptions full, local;
    local.full_solve_limit = 100;
    local.bracket_radius = 12;
    auto a = check_escape_window(c, c.vertex(2), full);
    auto b = check_escape_window(c, c.vertex(2), local);
    EXPECT_NE(b.note.find("bracket"), std::string::npos);
    EXPECT_NEAR(a.exact, b.exact, 1e-9);
    EXPECT_TRUE(a.satisfied);
    EXPECT_TRUE(b.satisfied);
}

TEST(Checks, PhiMonotoneAndDominated) {
    auto c = LumpedChain::from_sizes({128});
    FTable t(std::vector<std::size_t>{128}, BoundParams{});
    auto rs = check_phi(c, c.vertex(1), t);
    EXPECT_TRUE(find(rs, "phi-monotone").satisfied);
    EXPECT_TRUE(find(rs, "phi-domination").hard);
    EXPECT_TRUE(all_hard_pass(rs));
}

TEST(Checks, VertexTargetBoundsHoldInRegime) {
    auto c = LumpedChain::from_sizes({128});
    auto rs = check_vertex_targets(c, {c.vertex(0), c.vertex(1)});
    EXPECT_TRUE(all_hard_pass(rs));
    EXPECT_TRUE(find(rs, "escape-from-target").hard);
    EXPECT_TRUE(find(rs, "leave-to-rest-upper").hard);
    EXPECT_FALSE(find(rs, "harmonic-lower").hard);
    EXPECT_LE(find(rs, "escape-from-target").measured, 4.0);
}

TEST(Checks, VertexTargetChecksCanFail) {
    auto c = LumpedChain::from_sizes({128});
    CheckOptions o;
    o.cor_c = -1e6;
    auto rs = check_vertex_targets(c, {c.vertex(0), c.vertex(1)}, o);
    EXPECT_FALSE(find(rs, "escape-from-target").satisfied);
    EXPECT_THROW(check_vertex_targets(c, {c.origin()}), invalid_input);
    EXPECT_THROW(check_vertex_targets(c, {LumpedPoint{{5}}}), invalid_input);
}

TEST(Checks, TwoDimensionalTargetsOutsideRegime) {
    auto c = LumpedChain::from_sizes({20, 20});
    auto rs = check_vertex_targets(c, {c.vertex(0), c.vertex(3)});
    for (const auto& r : rs) EXPECT_FALSE(r.hard) << r.name;
    EXPECT_TRUE(find(rs, "hit-before-origin").satisfied);
}

TEST(Checks, UniformityAtAntipodes) {
    auto c = LumpedChain::from_sizes({256});
    FTable t(std::vector<std::size_t>{256}, BoundParams{});
    auto rs = check_harmonic_uniformity(c, {c.vertex(0), c.vertex(1)}, t);
    EXPECT_TRUE(rs[0].hard);
    EXPECT_TRUE(rs[0].satisfied);
    EXPECT_NEAR(rs[0].exact, 1.0 / 256, 1e-4);
    EXPECT_LE(rs[1].measured, 4.0);
}

TEST(Checks, MeanTimeWindowAtAntipodes) {
    auto c = LumpedChain::from_sizes({256});
    auto r = check_mean_time_window(c, {c.vertex(0), c.vertex(1)});
    EXPECT_TRUE(r.hard);
    EXPECT_TRUE(r.satisfied) << r.note;
    CheckOptions tight;
    tight.bp.c_plus = tight.bp.c_minus = 1e-9;
    EXPECT_FALSE(check_mean_time_window(c, {c.vertex(0), c.vertex(1)}, tight).satisfied);
}

TEST(Checks, LaplaceLimitAndMatthews) {
    auto c = LumpedChain::from_sizes({256});
    auto r = check_laplace_limit(c, c.origin_index(), c.vertex(0));
    EXPECT_TRUE(r.satisfied) << r.exact;
    auto m = check_matthews(c, 1, c.vertex(0));
    EXPECT_TRUE(m.satisfied) << m.measured;
    auto far = check_matthews(c, c.origin_index(), c.vertex(0));
    EXPECT_TRUE(far.satisfied) << far.measured;
}

TEST(Checks, SandwichRecord) {
    auto c = LumpedChain::from_sizes({9, 7});
    auto r = check_sandwich(c, c.vertex(3), {c.origin()});
    EXPECT_TRUE(r.satisfied);
    EXPECT_LE(r.lower, r.exact);
    EXPECT_LE(r.exact, r.upper);
    auto s = check_sandwich(c, c.vertex(3), {c.vertex(0), c.vertex(1)});
    EXPECT_TRUE(std::isnan(s.lower));
    EXPECT_TRUE(s.satisfied);
}

TEST(Checks, A3RecordsOnEquipartition) {
    FTable t(Partition::equipartition(128, 2), BoundParams{});
    auto rs = check_a3(t);
    EXPECT_TRUE(all_hard_pass(rs));
    EXPECT_TRUE(find(rs, "a3-composition-count").hard);
    EXPECT_FALSE(find(rs, "a3-max-p-power-printed").hard);
    EXPECT_FALSE(find(rs, "a3-diffusive-fixed-n").hard);
}

TEST(Checks, A4OnRandomSets) {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 50; ++t) {
        std::size_t n = 4 + rng() % 13, m = 1 + rng() % 4;
        std::vector<SpinConfig> v;
        for (std::size_t i = 0; i < m; ++i) v.push_back(SpinConfig::from_index(rng() & ((std::uint64_t{1} << n) - 1), n));
        SpinSet A(v);
        auto rs = check_a4(A, SpinConfig::all_plus(n));
        EXPECT_TRUE(rs[0].satisfied);
        EXPECT_FALSE(rs[1].hard);
    }
}

TEST(Checks, LumpingAndIdentities) {
    auto p = Partition::parse("3,5");
    auto xi = SpinConfig::parse("+-+-+-+-");
    SpinSet A({xi, xi.negated(), SpinConfig::parse("-+--+-+-")});
    ASSERT_TRUE(is_compatible(p, xi, A));
    auto r = check_lumping(p, xi, A, SpinConfig::parse("++++++++"));
    EXPECT_TRUE(r.satisfied) << r.exact;
    auto c = LumpedChain::from_sizes({4, 4});
    LumpedView v(c);
    auto id = check_identities(v, 3, 20, {7}, c.origin_index(), {-0.2, 0.0});
    EXPECT_TRUE(id.satisfied) << id.exact;
}

TEST(Checks, RandomLumpingInstancesAgree) {
    Rng rng(12, 0);
    for (int t = 0; t < 10; ++t) {
        auto in = random_lumping_instance(rng, 8);
        EXPECT_TRUE(is_compatible(in.partition, in.xi, in.A));
        EXPECT_FALSE(in.A.contains(in.start));
        auto r = check_lumping(in.partition, in.xi, in.A, in.start);
        EXPECT_TRUE(r.satisfied) << r.instance << " " << r.exact;
    }
}
