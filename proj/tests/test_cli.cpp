#include <gtest/gtest.h>

#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cheshire/cli.hpp"

using cheshire::cli::run;
using nlohmann::json;

namespace {

std::string data_file(const std::string& name) { return std::string(CHESHIRE_DATA_DIR) + "/" + name; }

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome invoke(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

std::string write_temp(const std::string& name, const std::string& text) {
    const std::string path = testing::TempDir() + name;
    std::ofstream(path) << text;
    return path;
}

json two_cat_pre() {
    return json::parse(R"({"photons": 2, "terms": [["0100", 0.7071067811865476, 0], ["1000", 0.7071067811865476, 0]]})");
}

}  // namespace

TEST(CliScenario, TwoCatTable) {
    const Outcome o = invoke({"scenario", "two-cat"});
    EXPECT_EQ(o.code, 0) << o.err;
    int rows = 0;
    for (const auto& l : lines(o.out))
        if (l.rfind("1 ", 0) == 0 || l.rfind("2 ", 0) == 0) ++rows;
    EXPECT_EQ(rows, 8);
    EXPECT_NE(o.out.find("pattern matches"), std::string::npos);
}

TEST(CliScenario, NCatCsvRows) {
    const Outcome o = invoke({"scenario", "n-cat:n=5", "--format", "csv"});
    EXPECT_EQ(o.code, 0) << o.err;
    const auto ls = lines(o.out);
    ASSERT_FALSE(ls.empty());
    EXPECT_EQ(ls.front(), "photon,kind,arm,re,im");
    int rows = 0;
    for (const auto& l : ls)
        if (!l.empty() && std::isdigit(static_cast<unsigned char>(l.front()))) ++rows;
    EXPECT_EQ(rows, 20);
    EXPECT_EQ(ls.back().rfind("overlap,", 0), 0u);
}

TEST(CliScenario, JsonIsParseable) {
    const Outcome o = invoke({"--format", "json", "scenario", "two-cat"});
    ASSERT_EQ(o.code, 0) << o.err;
    const json doc = json::parse(o.out);
    EXPECT_EQ(doc.at("entries").size(), 8u);
}

TEST(CliScenario, ErrorCodes) {
    EXPECT_EQ(invoke({"scenario", "general:theta=0"}).code, 3);
    EXPECT_EQ(invoke({"scenario", "three-headed-cat"}).code, 2);
    EXPECT_EQ(invoke({"scenario"}).code, 2);
    EXPECT_EQ(invoke({"no-such-command"}).code, 2);
    EXPECT_EQ(invoke({"--tol", "-1", "scenario", "two-cat"}).code, 2);
}

TEST(CliSolve, TwoCatProblem) {
    const Outcome o = invoke({"solve", data_file("two_cat_targets.json")});
    EXPECT_EQ(o.code, 0) << o.err;
    EXPECT_NE(o.out.find("0100"), std::string::npos);
    EXPECT_NE(o.out.find("1001"), std::string::npos);
    EXPECT_NE(o.out.find("1010"), std::string::npos);
}

TEST(CliSolve, ContradictoryTargetsExitThree) {
    json doc;
    doc["pre"] = two_cat_pre();
    doc["targets"] = json::array({{{"observable", "path:1:L"}, {"re", 1}, {"im", 0}},
                                  {{"observable", "path:1:L"}, {"re", 0}, {"im", 0}}});
    const Outcome o = invoke({"solve", write_temp("cheshire_contradiction.json", doc.dump())});
    EXPECT_EQ(o.code, 3) << o.out;
    EXPECT_FALSE(o.err.empty());
}

TEST(CliSolve, IdentityOnlyProblemHasZeroResidual) {
    json doc;
    doc["pre"] = two_cat_pre();
    doc["targets"] = json::array({{{"observable", "identity"}, {"re", 1}, {"im", 0}}});
    const Outcome o = invoke({"--format", "json", "solve", write_temp("cheshire_identity.json", doc.dump())});
    ASSERT_EQ(o.code, 0) << o.err;
    EXPECT_EQ(json::parse(o.out).at("residual").get<double>(), 0.0);
}

TEST(CliSolve, MissingAndMalformedFiles) {
    EXPECT_EQ(invoke({"solve", data_file("missing.json")}).code, 4);
    EXPECT_EQ(invoke({"solve", write_temp("cheshire_broken.json", "{ nope")}).code, 2);
}

TEST(CliCircuit, ProbabilitiesIncludeSuccessPattern) {
    const Outcome o = invoke({"--format", "json", "circuit", data_file("two_cat_device.circuit"), "--emit", "probs"});
    ASSERT_EQ(o.code, 0) << o.err;
    const json doc = json::parse(o.out);
    bool found = false;
    for (const auto& p : doc.at("patterns")) {
        if (p.at("pattern") == "D5") {
            EXPECT_NEAR(p.at("probability").get<double>(), 1.0 / 6.0, 1e-12);
            found = true;
        }
    }
    EXPECT_TRUE(found);
    EXPECT_LE(doc.at("calibration_residual").get<double>(), 1e-10);
}

TEST(CliCircuit, CountsAreReproducible) {
    const std::vector<std::string> args{"circuit", data_file("two_cat_device.circuit"), "--emit", "counts", "--seed", "42"};
    const Outcome a = invoke(args);
    const Outcome b = invoke(args);
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    EXPECT_NE(a.out.find("seed 42"), std::string::npos);
    const Outcome c = invoke({"circuit", data_file("two_cat_device.circuit"), "--emit", "counts", "--seed", "43"});
    EXPECT_NE(a.out, c.out);
}

TEST(CliCircuit, ConditionalState) {
    const Outcome o = invoke({"circuit", data_file("two_cat_device.circuit"), "--emit", "conditional-state"});
    EXPECT_EQ(o.code, 0) << o.err;
    EXPECT_FALSE(o.out.empty());
}

TEST(CliCircuit, UsageAndParseErrors) {
    EXPECT_EQ(invoke({"circuit", data_file("two_cat_device.circuit"), "--emit", "counts", "--shots", "0"}).code, 2);
    EXPECT_EQ(invoke({"circuit", data_file("two_cat_device.circuit"), "--emit", "sparkles"}).code, 2);
    const std::string bad = write_temp("cheshire_bad.circuit", "photons 2\nsource spdc\n\nwobble photon=1\n");
    const Outcome o = invoke({"circuit", bad});
    EXPECT_EQ(o.code, 2);
    EXPECT_NE(o.err.find("line 4"), std::string::npos) << o.err;
    EXPECT_EQ(invoke({"circuit", data_file("missing.circuit")}).code, 4);
}

TEST(CliCircuit, FailedCalibrationExitsThree) {
    const std::string text =
        "photons 1\nsource ket 00:1 10:1\nbs modes=L,R adjustable\n"
        "detector D5 photon=1 arm=L pol=H\ndetector D6 photon=1 arm=L pol=V\ndetector D7 photon=1 arm=R\n"
        "calibrate ket 01:1\n";
    const Outcome o = invoke({"circuit", write_temp("cheshire_uncalibratable.circuit", text)});
    EXPECT_EQ(o.code, 3);
    EXPECT_NE(o.err.find("residual"), std::string::npos) << o.err;
}

TEST(CliPointer, TwoCatGrinConverges) {
    const Outcome o = invoke({"pointer", "two-cat", "--observable", "grin:1:R"});
    EXPECT_EQ(o.code, 0) << o.err;
    EXPECT_NE(o.out.find("converges quadratically"), std::string::npos);
}

TEST(CliPointer, IdentityShiftsByOne) {
    const Outcome o = invoke({"--format", "json", "pointer", "two-cat", "--observable", "identity", "--g", "0.01"});
    ASSERT_EQ(o.code, 0) << o.err;
    const json doc = json::parse(o.out);
    EXPECT_NEAR(doc.at("rows").at(0).at("re_estimate").get<double>(), 1.0, 1e-9);
}

TEST(CliPointer, SingleCatPathConverges) {
    EXPECT_EQ(invoke({"pointer", "single", "--observable", "path:1:L"}).code, 0);
    EXPECT_EQ(invoke({"pointer", "single", "--observable", "path:3:L"}).code, 2);
    EXPECT_EQ(invoke({"pointer", "single", "--observable", "path:1:L", "--g", "0"}).code, 2);
}
