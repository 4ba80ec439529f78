#include <gtest/gtest.h>

#include <filesystem>

#include "support/cli_runner.hpp"
#include "support/fixtures.hpp"

namespace fs = std::filesystem;
using namespace btgen;
using btgen::testing::fixture;
using btgen::testing::run_cli;
using btgen::testing::slurp;

namespace {

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("btgen_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

}  // namespace

TEST_F(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(run_cli({}).code, 2);
    EXPECT_EQ(run_cli({"synth"}).code, 2);
    EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
    EXPECT_EQ(run_cli({"synth", "--scenario", fixture("scenarios/uav_patrol.json"), "--out", path("t.xml"),
                       "--policy", "psychic"})
                  .code,
              2);
    EXPECT_EQ(run_cli({"--help"}).code, 0);
}

TEST_F(Cli, MissingOrMalformedInputsExitTwo) {
    const auto r = run_cli({"validate", "--tree", path("absent.xml")});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("absent.xml"), std::string::npos);
    std::ofstream(path("bad.xml")) << "<Sequence instance_name='s'>";
    EXPECT_EQ(run_cli({"validate", "--tree", path("bad.xml")}).code, 2);
}

TEST_F(Cli, ValidateReportsFindings) {
    EXPECT_EQ(run_cli({"validate", "--tree", fixture("trees/patrol.xml"), "--library", fixture("libraries/uav.json")}).code,
              0);
    const auto r = run_cli({"validate", "--tree", fixture("trees/broken.xml")});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.out.find("empty control node"), std::string::npos);
    EXPECT_EQ(run_cli({"validate", "--tree", fixture("trees/patrol.xml"), "--scenario",
                       fixture("scenarios/uav_patrol.json"), "--cases", fixture("cases/uav_nodes.json")})
                  .code,
              0);
}

TEST_F(Cli, SynthWritesTreeAndReportDeterministically) {
    const std::vector<std::string> args = {"synth", "--scenario", fixture("scenarios/uav_patrol.json"),
                                           "--policy", "mcts-oracle", "--seed", "7"};
    auto with_out = [&](const std::string& stem) {
        auto a = args;
        a.insert(a.end(), {"--out", path(stem + ".xml")});
        return a;
    };
    ASSERT_EQ(run_cli(with_out("a")).code, 0);
    ASSERT_EQ(run_cli(with_out("b")).code, 0);
    EXPECT_EQ(slurp(path("a.xml")), slurp(path("b.xml")));
    const std::string ra = slurp(path("a.report.json"));
    const std::string rb = slurp(path("b.report.json"));
    EXPECT_EQ(ra, rb);
    const auto report = nlohmann::json::parse(ra);
    EXPECT_EQ(report["policy"], "mcts-oracle");
    EXPECT_EQ(report["seed"], 7);
    EXPECT_TRUE(report["solved"].get<bool>());
    EXPECT_EQ(parse_bt_xml(slurp(path("a.xml"))), uav_patrol_reference_tree());
}

TEST_F(Cli, SynthWithRemoteMockLogsDrops) {
    const auto r = run_cli({"synth", "--scenario", fixture("scenarios/uav_patrol.json"), "--out", path("t.xml"),
                            "--policy", "remote", "--mock", "oracle-echo"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto report = nlohmann::json::parse(slurp(path("t.report.json")));
    EXPECT_EQ(report["policy"], "remote");
    EXPECT_TRUE(report["dropped"].is_array());
}

TEST_F(Cli, SynthRemoteWithoutEndpointIsUsageError) {
    unsetenv("BTGEN_REMOTE_ENDPOINT");
    EXPECT_EQ(run_cli({"synth", "--scenario", fixture("scenarios/uav_patrol.json"), "--out", path("t.xml"), "--policy",
                       "remote"})
                  .code,
              2);
}

TEST_F(Cli, SimulateWritesEpisodeAndTrace) {
    const auto r = run_cli({"simulate", "--tree", fixture("trees/patrol.xml"), "--scenario",
                            fixture("scenarios/uav_patrol.json"), "--out", path("ep.json"), "--trace",
                            path("trace.jsonl"), "--dump-states"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto ep = nlohmann::json::parse(slurp(path("ep.json")));
    EXPECT_TRUE(ep["success"].get<bool>());
    EXPECT_EQ(ep["ticks_used"], 5);
    const std::string trace = slurp(path("trace.jsonl"));
    EXPECT_EQ(std::count(trace.begin(), trace.end(), '\n'), 10);
    EXPECT_NE(trace.find("\"state\""), std::string::npos);

    std::ofstream(path("move.xml")) << "<Action instance_name='move-to_next-pos'/>";
    EXPECT_EQ(run_cli({"simulate", "--tree", path("move.xml"), "--scenario", fixture("scenarios/uav_patrol.json"),
                       "--out", path("ep2.json")})
                  .code,
              1);
}

TEST_F(Cli, DatasetRecordsRoundTrip) {
    const auto r = run_cli({"dataset", "--scenarios", fixture("scenarios"), "--out", path("corpus.jsonl")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto records = read_records(slurp(path("corpus.jsonl")));
    ASSERT_EQ(records.size(), 5u);
    for (const auto& rec : records) {
        EXPECT_EQ(read_record(write_record(rec)), rec);
        EXPECT_NO_THROW(check_record(rec));
    }
}

TEST_F(Cli, EvalWritesMetricReport) {
    const auto r = run_cli({"eval", "--scenarios", fixture("scenarios"), "--n", "2", "--k", "1", "--k", "2", "--out",
                            path("metrics.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto m = nlohmann::json::parse(slurp(path("metrics.json")));
    EXPECT_EQ(m["problems"].size(), 5u);
    EXPECT_DOUBLE_EQ(m["accuracy"].get<double>(), 1.0);
}
