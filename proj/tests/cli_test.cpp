#include "ccd/eval.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace {

namespace fs = std::filesystem;

struct Run {
    int code = -1;
    std::string out;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(CCD_CLI_PATH) + " " + args + " 2>&1";
    Run r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (pipe == nullptr) return r;
    char buf[4096];
    while (std::fgets(buf, sizeof buf, pipe) != nullptr) r.out += buf;
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        root_ = fs::temp_directory_path() /
                ("ccd_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(root_);
        fs::create_directories(root_);
    }
    void TearDown() override { fs::remove_all(root_); }
    fs::path root_;
};

TEST_F(CliTest, SynthFitEval) {
    const auto data = root_ / "data";
    auto r = run("synth --out " + data.string() + " --cases 3 --seed 1 --width 256 --height 256");
    ASSERT_EQ(r.code, 0) << r.out;
    ASSERT_TRUE(fs::exists(data / "case_0002" / "manifest.json"));

    r = run("fit " + (data / "case_0000" / "manifest.json").string() + " --json");
    ASSERT_EQ(r.code, 0) << r.out;
    const auto doc = nlohmann::json::parse(r.out);
    const auto truth = ccd::load_truth(data / "case_0000" / "truth.json");
    EXPECT_NEAR(doc["left"]["ccd"].get<double>(), truth.left->ccd, 0.5);
    EXPECT_NEAR(doc["right"]["ccd"].get<double>(), truth.right->ccd, 0.5);

    const auto report = root_ / "report.json";
    r = run("eval --pred " + data.string() + " --truth " + data.string() + " --report " + report.string() + " --text");
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("Left Femur"), std::string::npos);
    const auto parsed = ccd::evaluation_from_json(nlohmann::json::parse(std::ifstream(report)));
    EXPECT_EQ(parsed.aggregate.case_count, 3u);
    EXPECT_EQ(parsed.cases.size(), 3u);
}

TEST_F(CliTest, ErrorsAndExitCodes) {
    EXPECT_EQ(run("fit " + (root_ / "missing.json").string()).code, 1);
    EXPECT_NE(run("").code, 0);
    EXPECT_EQ(run("eval --pred " + (root_ / "nope").string() + " --truth " + root_.string()).code, 1);

    // truth missing for a prediction study
    const auto pred = root_ / "pred";
    ASSERT_EQ(run("synth --out " + pred.string() + " --cases 1 --width 128 --height 128").code, 0);
    const auto r = run("eval --pred " + pred.string() + " --truth " + (root_ / "empty").string());
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.out.find("truth.json"), std::string::npos);
}

TEST_F(CliTest, FailedCaseExitCode) {
    const auto data = root_ / "data";
    ASSERT_EQ(run("synth --out " + data.string() + " --cases 1 --width 128 --height 128").code, 0);
    // an impossible consensus requirement makes every fit fail
    const auto r = run("eval --pred " + data.string() + " --truth " + data.string() + " --min-inliers 100000");
    EXPECT_EQ(r.code, 2) << r.out;
}

} // namespace
