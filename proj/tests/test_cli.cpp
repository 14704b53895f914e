#include <gtest/gtest.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

using nlohmann::json;

namespace {

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

std::string tmp(const std::string& name) { return ::testing::TempDir() + "hcp_cli_" + name; }

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

Run hcp(const std::string& args) {
    const std::string out = tmp("stdout"), err = tmp("stderr");
    const std::string cmd = std::string(HCP_CLI_PATH) + " " + args + " >" + out + " 2>" + err;
    int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

std::string write(const std::string& name, const std::string& text) {
    std::string p = tmp(name);
    std::ofstream(p) << text;
    return p;
}

std::string antipodes(std::size_t n) { return std::string(n, '+') + "\n" + std::string(n, '-') + "\n"; }

std::string alternating(std::size_t n) {
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s += i % 2 ? '-' : '+';
    return s;
}

} // namespace

TEST(Cli, RefusesOversizeHypercube) {
    auto set = write("a40.txt", antipodes(40));
    auto r = hcp("solve --set-file " + set + " --start " + alternating(40));
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("size guard"), std::string::npos) << r.err;
    EXPECT_NE(r.err.find("N=24"), std::string::npos);
    // The same instance lumped over one class is fine.
    EXPECT_EQ(hcp("solve --classes 40 --set-file " + set + " --start " + alternating(40)).code, 0);
}

TEST(Cli, OnlyKacGivesOneExactRecord) {
    auto r = hcp("verify --classes 7,6 --only kac");
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = json::parse(r.out);
    ASSERT_EQ(j["checks"].size(), 1u);
    EXPECT_EQ(j["checks"][0]["name"], "kac");
    EXPECT_NEAR(j["checks"][0]["exact"].get<double>(), 1.0, 1e-12);
    EXPECT_EQ(j["summary"]["hard_failures"], 0);
}

TEST(Cli, MalformedInputsExitWithTwo) {
    EXPECT_EQ(hcp("verify --only bogus").code, 2);
    EXPECT_EQ(hcp("verify --classes 3,5 --kappa0 1").code, 2);
    EXPECT_EQ(hcp("solve --set-file " + tmp("missing.txt") + " --start ++").code, 2);
    auto set = write("a6.txt", antipodes(6));
    EXPECT_EQ(hcp("solve --set-file " + set + " --start ++++++").code, 2);  // start in the set
}

TEST(Cli, SolveReportsSumAndCapacityResidual) {
    auto set = write("a8.txt", antipodes(8));
    auto r = hcp("solve --set-file " + set + " --start " + alternating(8) + " --u -0.01,0");
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = json::parse(r.out);
    double sum = 0;
    for (const auto& h : j["results"]["harmonic_measure"]) sum += h["probability"].get<double>();
    EXPECT_NEAR(sum, 1.0, 1e-12);
    bool found = false;
    for (const auto& c : j["checks"])
        if (c["name"] == "capacity-mean-time") {
            found = true;
            EXPECT_LE(c["exact"].get<double>(), 1e-10);
        }
    EXPECT_TRUE(found);
    EXPECT_DOUBLE_EQ(j["results"]["laplace"][1]["value"].get<double>(), 1.0);
}

TEST(Cli, SpecRoundTripIsBitForBit) {
    auto set = write("a10.txt", std::string(10, '+') + "\n" + "++++------\n");
    auto first = tmp("solve1.json");
    ASSERT_EQ(hcp("solve --classes 4,6 --set-file " + set + " --start " + alternating(10) + " --u -0.001 --out " + first).code, 0);
    auto again = hcp("solve --spec " + first);
    ASSERT_EQ(again.code, 0) << again.err;
    auto a = json::parse(slurp(first)), b = json::parse(again.out);
    EXPECT_EQ(a["content_hash"], b["content_hash"]);
    EXPECT_EQ(a["results"].dump(), b["results"].dump());
    EXPECT_EQ(a["inputs"], b["inputs"]);
    // A report can only be replayed by the command that wrote it.
    EXPECT_EQ(hcp("bounds --spec " + first).code, 2);
}

TEST(Cli, SimulateIsDeterministicAndMatchesExact) {
    auto set = write("s8.txt", "++++++++\n+++-----\n");
    const std::string base = "simulate --set-file " + set + " --start " + alternating(8) + " --replicas 20000 ";
    auto a = hcp(base + "--seed 5"), b = hcp(base + "--seed 5"), c = hcp(base + "--seed 6");
    ASSERT_EQ(a.code, 0) << a.err;
    auto ja = json::parse(a.out), jb = json::parse(b.out), jc = json::parse(c.out);
    EXPECT_EQ(ja["content_hash"], jb["content_hash"]);
    EXPECT_NE(ja["content_hash"], jc["content_hash"]);
    for (const auto& r : ja["checks"])
        if (r["name"] == "mc-hit-probability") { EXPECT_LE(r["measured"].get<double>(), 3.0) << r["instance"]; }
}

TEST(Cli, SimulateWritesSamples) {
    auto set = write("s6.txt", antipodes(6));
    auto path = tmp("samples.csv");
    ASSERT_EQ(hcp("simulate --set-file " + set + " --start +-+-+- --replicas 50 --samples " + path).code, 0);
    auto text = slurp(path);
    EXPECT_EQ(text.substr(0, text.find('\n')), "time,hit_state,censored");
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 51);
}

TEST(Cli, BoundsTableForTwoClasses) {
    auto r = hcp("bounds --classes 64,64 --format csv");
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream in(r.out);
    std::string header, line;
    std::getline(in, header);
    EXPECT_EQ(header.substr(0, 11), "n,F1,F2,F,c");
    EXPECT_EQ(header.substr(header.rfind(',') + 1), "dominated");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        EXPECT_EQ(line.substr(line.rfind(',') + 1), "true") << line;
    }
    EXPECT_EQ(rows, 128u);
}

TEST(Cli, SparsenessOfAntipodesIsF) {
    auto set = write("a32.txt", antipodes(32));
    auto r = hcp("sparseness --set-file " + set);
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = json::parse(r.out);
    EXPECT_EQ(j["results"]["d"], 1);
    EXPECT_DOUBLE_EQ(j["results"]["U"].get<double>(), j["results"]["F_N"].get<double>());
}

TEST(Cli, CsvReportHasFixedColumns) {
    auto r = hcp("verify --classes 9,7 --only kac,sandwich --format csv");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "name,anchor,instance,exact,bound,lower,upper,measured,satisfied,hard,regime,note");
}

TEST(Cli, BatchRunsIndependentSpecs) {
    auto one = tmp("k1.json"), two = tmp("k2.json");
    ASSERT_EQ(hcp("verify --classes 12 --only kac --out " + one).code, 0);
    ASSERT_EQ(hcp("verify --classes 5,5 --only kac,phi --out " + two).code, 0);
    auto specs = write("batch.json", "[" + slurp(one) + "," + slurp(two) + "]");
    auto r = hcp("batch --workers 2 --spec " + specs);
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = json::parse(r.out);
    ASSERT_EQ(j.size(), 2u);
    EXPECT_EQ(j[0]["content_hash"], json::parse(slurp(one))["content_hash"]);
    EXPECT_EQ(j[1]["content_hash"], json::parse(slurp(two))["content_hash"]);
}
