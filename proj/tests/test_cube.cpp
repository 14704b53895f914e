#include <gtest/gtest.h>

#include <random>
#include <set>

#include "hcp/cube.hpp"

using namespace hcp;

TEST(SpinConfig, ParseAndPrintRoundTrip) {
    auto s = SpinConfig::parse("+-+-");
    EXPECT_EQ(s.size(), 4u);
    EXPECT_EQ(s.spin(0), 1);
    EXPECT_EQ(s.spin(1), -1);
    EXPECT_EQ(s.to_string(), "+-+-");
    EXPECT_THROW(SpinConfig::parse("+x"), invalid_input);
    EXPECT_THROW(SpinConfig::parse(""), invalid_input);
}

TEST(SpinConfig, HexForm) {
    auto s = SpinConfig::parse_hex("0x5", 4);
    EXPECT_EQ(s.to_string(), "+-+-");
    EXPECT_THROW(SpinConfig::parse_hex("0x10", 4), invalid_input);
    EXPECT_THROW(SpinConfig::parse_any("0x5"), invalid_input);
    EXPECT_EQ(SpinConfig::parse_any("0x5", 4), s);
}

TEST(SpinConfig, WideConfigurations) {
    auto s = SpinConfig::all_plus(130);
    s.flip(129);
    s.flip(64);
    EXPECT_EQ(s.count_plus(), 128u);
    EXPECT_EQ(hamming(s, SpinConfig::all_plus(130)), 2u);
    EXPECT_EQ(s.negated().count_plus(), 2u);
    EXPECT_EQ(SpinConfig::parse(s.to_string()), s);
}

TEST(SpinConfig, IndexRoundTrip) {
    for (std::uint64_t i = 0; i < 64; ++i) EXPECT_EQ(SpinConfig::from_index(i, 6).to_index(), i);
}

TEST(SpinSet, ParsesLinesAndDeduplicates) {
    auto a = SpinSet::parse_lines("++--\n# comment\n\n--++\n++--\n");
    EXPECT_EQ(a.size(), 2u);
    EXPECT_TRUE(a.contains(SpinConfig::parse("--++")));
    EXPECT_THROW(SpinSet::parse_lines("++\n+++\n"), invalid_input);
}

TEST(Hamming, HypothesisThreshold) {
    SpinSet a({SpinConfig::parse("++++++"), SpinConfig::parse("------")});
    EXPECT_TRUE(hypothesis_H(a));
    SpinSet b({SpinConfig::parse("++++++"), SpinConfig::parse("+++---")});
    EXPECT_FALSE(hypothesis_H(b));
    EXPECT_TRUE(hypothesis_H(b, 2));
}

TEST(Partition, ParseForms) {
    auto p = Partition::parse("2,2,4");
    EXPECT_EQ(p.N(), 8u);
    EXPECT_EQ(p.d(), 3u);
    EXPECT_EQ(p.class_of(4), 2u);
    auto q = Partition::parse("[1,3|2,4]");
    EXPECT_EQ(q.d(), 2u);
    EXPECT_EQ(q.class_of(2), 0u);
    EXPECT_EQ(q.to_string(), "[1,3|2,4]");
    EXPECT_EQ(Partition::parse(q.to_string()), q);
    EXPECT_EQ(p.to_string(), "2,2,4");
    EXPECT_THROW(Partition::parse("[1,2|2,3]"), invalid_input);
    EXPECT_THROW(Partition::parse("[1,2|4]", 4), invalid_input);
    EXPECT_THROW(Partition::parse("2,0"), invalid_input);
    EXPECT_THROW(Partition::parse("2,2", 5), invalid_input);
}

TEST(Partition, Equipartition) {
    auto p = Partition::equipartition(10, 3);
    EXPECT_EQ(p.sizes(), (std::vector<std::size_t>{4, 3, 3}));
}

TEST(Lumping, CountsDisagreementsPerClass) {
    LumpingMap g(Partition::parse("2,2"), SpinConfig::parse("++++"));
    EXPECT_EQ(g(SpinConfig::parse("+---")).n, (std::vector<std::size_t>{1, 2}));
    EXPECT_THROW(g(SpinConfig::parse("+++")), invalid_input);
}

TEST(Orbit, EnumeratesClassNegations) {
    auto p = Partition::parse("1,2,3");
    auto xi = SpinConfig::parse("+-+-+-");
    auto o = orbit(p, xi);
    ASSERT_EQ(o.size(), 8u);
    std::set<SpinConfig> uniq(o.begin(), o.end());
    EXPECT_EQ(uniq.size(), 8u);
    LumpingMap g(p, xi);
    for (const auto& s : o)
        for (std::size_t k = 0; k < 3; ++k) {
            auto n = g(s).n[k];
            EXPECT_TRUE(n == 0 || n == p.class_size(k));
        }
    EXPECT_THROW(orbit(Partition::from_sizes(std::vector<std::size_t>(30, 1)), SpinConfig::all_plus(30)), too_large);
}

TEST(Compatibility, Examples) {
    auto xi = SpinConfig::parse("++++");
    EXPECT_TRUE(is_compatible(Partition::parse("2,2"), xi, SpinSet({SpinConfig::parse("++--")})));
    EXPECT_FALSE(is_compatible(Partition::parse("2,2"), xi, SpinSet({SpinConfig::parse("+-+-")})));
    EXPECT_TRUE(is_compatible(Partition::trivial(4), xi, SpinSet({xi.negated()})));
}

TEST(BuildPartition, AntipodalPairGivesOneClass) {
    auto xi = SpinConfig::parse("+-++-+");
    SpinSet a({xi, xi.negated()});
    auto p = build_partition_from_set(a, xi);
    EXPECT_EQ(p.d(), 1u);
}

TEST(BuildPartition, CompatibleAndSmallOnRandomSets) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 300; ++trial) {
        std::size_t n = 2 + rng() % 15;
        std::size_t m = 1 + rng() % 4;
        std::vector<SpinConfig> v;
        for (std::size_t j = 0; j < m; ++j) v.push_back(SpinConfig::from_index(rng() & ((1ull << n) - 1), n));
        SpinSet a(v);
        auto xi = SpinConfig::from_index(rng() & ((1ull << n) - 1), n);
        auto p = build_partition_from_set(a, xi);
        EXPECT_TRUE(is_compatible(p, xi, a));
        EXPECT_LE(p.d(), std::size_t{1} << a.size());
        // every point of a lands on a vertex, and class negations of xi stay compatible
        for (const auto& s : orbit(p, xi, 1u << 16)) EXPECT_TRUE(is_compatible(p, s, a));
    }
}

TEST(Refine, SplitsEachClassInTwoAtMost) {
    auto p = Partition::parse("3,3");
    auto s = SpinConfig::parse("+-++++");
    auto r = refine_partition_for_point(p, s);
    EXPECT_EQ(r.d(), 3u);
    EXPECT_TRUE(is_compatible(r, SpinConfig::all_plus(6), SpinSet({s})));
    EXPECT_LE(r.d(), 2 * p.d());
}
