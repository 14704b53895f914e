#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "hcp/report.hpp"

using namespace hcp;

namespace {

Report sample_report() {
    Report r;
    r.experiment = "unit";
    r.inputs = {{"N", 8}, {"classes", "3,5"}};
    CheckRecord a;
    a.name = "kac";
    a.anchor = "mean return time";
    a.instance = "N=8";
    a.exact = 1.0000000000000002;
    a.bound = 1;
    CheckRecord b = a;
    b.name = "envelope";
    b.hard = false;
    b.satisfied = false;
    b.measured = 3.25;
    b.note = "quoted \"note\", with comma";
    r.add(a);
    r.add(b);
    return r;
}

} // namespace

TEST(Report, HashIgnoresWallClock) {
    auto a = sample_report(), b = sample_report();
    b.wall_seconds = 123.0;
    EXPECT_EQ(a.content_hash(), b.content_hash());
    EXPECT_EQ(a.content_hash().size(), 16u);
    b.checks[0].exact = 1.0;
    EXPECT_NE(a.content_hash(), b.content_hash());
}

TEST(Report, FnvReferenceValues) {
    EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
    EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
}

TEST(Report, JsonRoundTripIsExact) {
    auto r = sample_report();
    auto j = nlohmann::json::parse(r.to_json().dump());
    auto back = Report::from_json(j);
    EXPECT_EQ(back.content_hash(), r.content_hash());
    EXPECT_EQ(back.checks[0].exact, 1.0000000000000002);
    EXPECT_TRUE(std::isnan(back.checks[0].measured));
    EXPECT_TRUE(j["checks"][0]["measured"].is_null());
    EXPECT_EQ(j["summary"]["hard_failures"], 0);
    EXPECT_EQ(j["summary"]["envelope_misses"], 1);
    j["schema_version"] = "0";
    EXPECT_THROW(Report::from_json(j), invalid_input);
}

TEST(Report, ExitPolicy) {
    auto r = sample_report();
    EXPECT_TRUE(r.ok());  // envelope misses never fail a run
    r.checks[0].satisfied = false;
    EXPECT_FALSE(r.ok());
    EXPECT_EQ(r.hard_failures(), 1u);
}

TEST(Report, CsvQuotingAndColumns) {
    auto csv = sample_report().to_csv();
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "name,anchor,instance,exact,bound,lower,upper,measured,satisfied,hard,regime,note");
    EXPECT_NE(csv.find("\"quoted \"\"note\"\", with comma\""), std::string::npos);
    EXPECT_NE(csv.find(",3.25,false,false,"), std::string::npos);
}

TEST(Report, PartitionAndPointJson) {
    auto p = Partition::parse("3,5");
    auto j = partition_to_json(p);
    EXPECT_EQ(j["N"], 8);
    EXPECT_EQ(j["classes"].size(), 2u);
    auto q = partition_from_json(nlohmann::json::parse(j.dump()));
    EXPECT_EQ(q.sizes(), p.sizes());
    EXPECT_EQ(q.class_of(4), p.class_of(4));
    LumpedPoint x{{1, 4}};
    EXPECT_EQ(point_from_json(point_to_json(x)), x);
    EXPECT_THROW(partition_from_json(nlohmann::json{{"N", 3}, {"classes", {{0, 1}}}}), invalid_input);
}

TEST(Report, SetFileParsing) {
    std::string path = ::testing::TempDir() + "hcp_set.txt";
    {
        std::ofstream f(path);
        f << "# two points\n++--\n\n--++\n0x3\n";
    }
    auto s = read_set_file(path, 4);
    EXPECT_EQ(s.size(), 2u);  // 0x3 is ++-- again
    EXPECT_TRUE(s.contains(SpinConfig::parse("++--")));
    EXPECT_THROW(read_set_file(path + ".missing"), invalid_input);
    std::remove(path.c_str());
}
