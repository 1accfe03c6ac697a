#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "wordswap/wordswap.hpp"

namespace fs = std::filesystem;
using namespace wordswap;

namespace {

const std::string kCli = WORDSWAP_CLI;
const std::string kFix = WORDSWAP_FIXTURE_DIR;

class CliTest : public ::testing::Test {
protected:
    fs::path dir;

    void SetUp() override {
        dir = fs::temp_directory_path() /
              (std::string("wordswap_cli_") + ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }

    /// Runs the CLI with `args`; stdout and stderr go to files in `dir`.
    int run(const std::string& args, const std::string& env = {}) {
        std::string cmd = env + (env.empty() ? "" : " ") + "'" + kCli + "' " + args + " >'" +
                          (dir / "stdout").string() + "' 2>'" + (dir / "stderr").string() + "' </dev/null";
        int rc = std::system(cmd.c_str());
        return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    }
    std::string err() { return read_file((dir / "stderr").string()); }
    std::string out() { return read_file((dir / "stdout").string()); }
    std::string p(const std::string& name) { return (dir / name).string(); }
    static std::string fx(const std::string& name) { return kFix + "/" + name; }
};

std::string strip_comments(const std::string& text) {
    std::string out;
    for (const auto& line : split(text, '\n'))
        if (!line.empty() && line[0] != '#') out += line + "\n";
    return out;
}

}  // namespace

TEST_F(CliTest, HelpAndUsageErrors) {
    EXPECT_EQ(run("--help"), 0);
    EXPECT_NE(out().find("build-sets"), std::string::npos);
    EXPECT_EQ(run(""), 2);
    auto e = nlohmann::json::parse(err());
    EXPECT_EQ(e["error"], "usage");
    EXPECT_EQ(run("frobnicate"), 2);
    EXPECT_EQ(run("report"), 2);
    EXPECT_EQ(nlohmann::json::parse(err())["error"], "usage");
}

TEST_F(CliTest, MissingInputFile) {
    EXPECT_EQ(run("build-sets --corpus /nonexistent.jsonl --lexicon " + fx("antonyms.tsv") + " --out " + p("o")), 1);
    auto e = nlohmann::json::parse(err());
    EXPECT_EQ(e["error"], "missing_file");
}

TEST_F(CliTest, BuildSetsReproducesFixture) {
    ASSERT_EQ(run("build-sets --corpus " + fx("train.jsonl") + " --lexicon " + fx("antonyms.tsv") +
                  " --substitutions " + fx("substitutions.tsv") + " --out " + p("sets")),
              0)
        << err();
    for (const char* role : {"I_A", "I_TA1", "I_TA2"})
        EXPECT_EQ(read_file(p("sets/") + role + ".jsonl"), read_file(fx(std::string(role) + ".jsonl"))) << role;
    auto manifest = nlohmann::json::parse(read_file(p("sets/build_manifest.json")));
    EXPECT_EQ(manifest["sets"]["I_A"]["size"], 620);
    EXPECT_NE(err().find("I_TA3 is empty"), std::string::npos);
}

TEST_F(CliTest, RolesFilterAndEnvOutputDir) {
    ASSERT_EQ(run("build-sets --corpus " + fx("train.jsonl") + " --lexicon " + fx("antonyms.tsv") +
                      " --roles I_A,I_TA1",
                  "WORDSWAP_OUT='" + p("env") + "'"),
              0)
        << err();
    EXPECT_TRUE(fs::exists(p("env/I_A.jsonl")));
    EXPECT_TRUE(fs::exists(p("env/I_TA1.jsonl")));
    EXPECT_FALSE(fs::exists(p("env/E_A.jsonl")));
}

TEST_F(CliTest, PolarityMatchesFixture) {
    ASSERT_EQ(run("polarity --corpus " + fx("train.jsonl") + " --lexicon " + fx("antonyms.tsv") + " --sets " +
                  fx("I_A.jsonl") + " " + fx("I_TA1.jsonl") + " " + fx("I_TA2.jsonl") + " --out " + p("pol")),
              0)
        << err();
    EXPECT_EQ(strip_comments(read_file(p("pol/polarity.tsv"))), strip_comments(read_file(fx("polarity.tsv"))));
}

TEST_F(CliTest, PredictBaselines) {
    ASSERT_EQ(run("predict-baseline --kind polarity-only --set " + fx("I_TA1.jsonl") + " --polarity " +
                  fx("polarity.tsv") + " --output " + p("po.tsv")),
              0)
        << err();
    auto preds = load_predictions(p("po.tsv"), "po");
    EXPECT_EQ(preds.by_id.size(), 620u);
    ASSERT_EQ(run("predict-baseline --kind insensitive-oracle --set " + fx("I_TA1.jsonl") + " --control " +
                  fx("I_A.jsonl") + " --output " + p("io.tsv")),
              0)
        << err();
    auto io = load_predictions(p("io.tsv"), "io");
    auto set = load_set(fx("I_TA1.jsonl"));
    EXPECT_DOUBLE_EQ(*accuracy(set, io), 1.0);
    EXPECT_EQ(run("predict-baseline --kind insensitive-oracle --set " + fx("I_TA1.jsonl") + " --output " +
                  p("x.tsv")),
              2);
    EXPECT_NE(err().find("--control"), std::string::npos);
    EXPECT_EQ(run("predict-baseline --kind psychic --set " + fx("I_TA1.jsonl")), 2);
}

TEST_F(CliTest, ReportIsByteIdenticalAcrossRuns) {
    ASSERT_EQ(run("report --config " + fx("bundle.ini") + " --out " + p("r1")), 0) << err();
    ASSERT_EQ(run("report --config " + fx("bundle.ini") + " --out " + p("r2")), 0) << err();
    auto a = read_file(p("r1/report.json")), b = read_file(p("r2/report.json"));
    EXPECT_EQ(sha256_hex(a), sha256_hex(b));
    EXPECT_EQ(read_file(p("r1/report.md")), read_file(p("r2/report.md")));
    auto j = nlohmann::json::parse(a);
    EXPECT_EQ(j["bonferroni_m"], 7);
}

TEST_F(CliTest, ReportFlagOverridesConfigAlpha) {
    ASSERT_EQ(run("report --config " + fx("bundle.ini") + " --out " + p("r") + " --alpha 0.01"), 0) << err();
    auto j = nlohmann::json::parse(read_file(p("r/report.json")));
    EXPECT_DOUBLE_EQ(j["alpha_family"].get<double>(), 0.01);
}

TEST_F(CliTest, AnalyzeSingleExperiment) {
    ASSERT_EQ(run("analyze --control " + fx("I_A.jsonl") + " --transformed " + fx("I_TA1.jsonl") + " --polarity " +
                  fx("polarity.tsv") + " --predictions " + fx("dam_I_A.tsv") + " " + fx("dam_I_TA1.tsv") +
                  " --model DAM --name ita1 --out " + p("a")),
              0)
        << err();
    auto j = nlohmann::json::parse(read_file(p("a/report.json")));
    ASSERT_EQ(j["results"].size(), 1u);
    EXPECT_EQ(j["results"][0]["model"], "DAM");
    EXPECT_EQ(run("analyze --control " + fx("I_A.jsonl") + " --transformed " + fx("I_TA1.jsonl") + " --polarity " +
                  fx("polarity.tsv") + " --predictions " + fx("dam_I_TA1.tsv") + " --out " + p("b")),
              1);
    EXPECT_EQ(nlohmann::json::parse(err())["error"], "missing_prediction");
}

TEST_F(CliTest, AnnotateExportAppliesLog) {
    ASSERT_EQ(run("annotate --set " + fx("I_TA2.jsonl") + " --log " + fx("I_TA2.annotations.jsonl") +
                  " --export " + p("ita2.jsonl")),
              0)
        << err();
    auto set = load_set(p("ita2.jsonl"));
    EXPECT_EQ(progress(set).pending, 0u);
    EXPECT_EQ(progress(set).annotated, 400u);
}

TEST_F(CliTest, AnnotateTerminalSession) {
    std::ofstream(p("in.txt")) << "n\nq\n";
    fs::copy_file(fx("I_TA2.jsonl"), p("ita2.jsonl"));
    std::string cmd = "'" + kCli + "' annotate --set " + p("ita2.jsonl") + " --log " + p("log.jsonl") +
                      " --annotator t <" + p("in.txt") + " >/dev/null 2>&1";
    ASSERT_EQ(WEXITSTATUS(std::system(cmd.c_str())), 0);
    auto records = load_annotation_log(p("log.jsonl"));
    ASSERT_EQ(records.size(), 1u);
    EXPECT_EQ(records[0].decision, Decision::neutral);
    EXPECT_EQ(records[0].annotator, "t");
}
