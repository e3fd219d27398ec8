#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "cli.hpp"
#include "test_support.hpp"

using gdl::testing::data_path;
using nlohmann::json;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

// Arguments starting with '@' name files in the test data directory.
CliRun gdl_run(std::vector<std::string> args) {
  for (auto& a : args) {
    if (!a.empty() && a[0] == '@') a = data_path(a.substr(1));
  }
  std::ostringstream out, err;
  int code = gdl::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string golden(const std::string& name) {
  std::ifstream in(std::string(GDL_GOLDEN_DIR) + "/" + name, std::ios::binary);
  EXPECT_TRUE(in) << "missing golden file " << name;
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "gdl_cli_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Cli, CheckMatchesGolden) {
  CliRun r = gdl_run({"check", "--schema", "@walk_schema.json", "--program", "@walk_lengths.gdl"});
  EXPECT_EQ(r.code, gdl::cli::kOk) << r.err;
  EXPECT_EQ(r.out, golden("check_walk.json"));
}

TEST(Cli, CheckTextFormat) {
  CliRun r = gdl_run({"check", "--schema", "@reach_schema.json", "--program", "@reach.dl", "--format", "text"});
  EXPECT_EQ(r.code, gdl::cli::kOk) << r.err;
  EXPECT_EQ(r.out.rfind("ok: ", 0), 0u) << r.out;
  EXPECT_NE(r.out.find("intensional: R"), std::string::npos);
}

TEST(Cli, ValidationErrorExitsOne) {
  CliRun r = gdl_run({"check", "--schema", "@reach_schema.json", "--program", "@unsafe.gdl"});
  EXPECT_EQ(r.code, gdl::cli::kValidationError);
  EXPECT_NE(r.err.find("UnsafeVariable"), std::string::npos) << r.err;
  EXPECT_TRUE(r.out.empty());
}

TEST(Cli, MissingFileExitsTwo) {
  CliRun r = gdl_run({"check", "--schema", "@reach_schema.json", "--program", "/nonexistent/x.gdl"});
  EXPECT_EQ(r.code, gdl::cli::kIoError);
}

TEST(Cli, BadCommandLineIsAValidationError) {
  EXPECT_EQ(gdl_run({"frobnicate"}).code, gdl::cli::kValidationError);
  EXPECT_EQ(gdl_run({"sample", "--schema", "@temp_schema.json", "--policy", "sideways"}).code,
            gdl::cli::kValidationError);
}

TEST(Cli, SampleTableMatchesGoldenAndRepeats) {
  std::vector<std::string> args = {"sample", "--schema", "@temp_schema.json", "--table",
                                   "@temp_table.json", "--samples", "3", "--seed", "7"};
  CliRun a = gdl_run(args);
  ASSERT_EQ(a.code, gdl::cli::kOk) << a.err;
  EXPECT_EQ(a.out, golden("sample_temp.jsonl"));
  auto ls = lines(a.out);
  ASSERT_EQ(ls.size(), 3u);
  for (std::size_t k = 0; k < ls.size(); ++k) {
    json j = json::parse(ls[k]);
    EXPECT_EQ(j["world"], k);
    EXPECT_EQ(j["facts"].size(), 5u);
  }
  EXPECT_EQ(gdl_run(args).out, a.out);
  args[8] = "8";
  EXPECT_NE(gdl_run(args).out, a.out);
}

TEST(Cli, SampleProgramMatchesGolden) {
  CliRun r = gdl_run({"sample", "--schema", "@walk_schema.json", "--program", "@walk_lengths.gdl", "--edb",
                   "@walk_dag.json", "--samples", "2", "--seed", "3", "--policy", "shuffled"});
  ASSERT_EQ(r.code, gdl::cli::kOk) << r.err;
  EXPECT_EQ(r.out, golden("sample_walk.jsonl"));
}

TEST(Cli, CyclicSamplesAreCensored) {
  CliRun r = gdl_run({"sample", "--schema", "@walk_schema.json", "--program", "@walk_lengths.gdl", "--edb",
                   "@walk_cycle.json", "--samples", "10", "--budget", "100"});
  ASSERT_EQ(r.code, gdl::cli::kOk) << r.err;
  auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 10u);
  for (const auto& l : ls) {
    json j = json::parse(l);
    EXPECT_EQ(j["status"], "censored");
    EXPECT_EQ(j["firings"], 100);
  }
}

TEST(Cli, TraceFileHasOneLinePerFiring) {
  auto trace = scratch("trace.jsonl");
  CliRun r = gdl_run({"sample", "--schema", "@walk_schema.json", "--program", "@walk_lengths.gdl", "--edb",
                   "@walk_dag.json", "--samples", "2", "--trace", trace.string()});
  ASSERT_EQ(r.code, gdl::cli::kOk) << r.err;
  std::size_t firings = 0;
  for (const auto& l : lines(r.out)) firings += json::parse(l)["firings"].get<std::size_t>();
  std::ifstream in(trace);
  std::stringstream ss;
  ss << in.rdbuf();
  auto tl = lines(ss.str());
  EXPECT_EQ(tl.size(), firings);
  for (const auto& l : tl) EXPECT_TRUE(json::parse(l).contains("fact"));
}

TEST(Cli, EstimateEventMatchesGolden) {
  CliRun r = gdl_run({"estimate", "--schema", "@coin_schema.json", "--table", "@coin_table.json", "--event",
                   "@coin_present.event", "--samples", "1000"});
  ASSERT_EQ(r.code, gdl::cli::kOk) << r.err;
  EXPECT_EQ(r.out, golden("estimate_coin.json"));
}

TEST(Cli, EstimateCoversTheTrueProbability) {
  CliRun r = gdl_run({"estimate", "--schema", "@coin_schema.json", "--table", "@coin_table.json", "--event",
                   "@coin_present.event", "--samples", "100000", "--seed", "99"});
  ASSERT_EQ(r.code, gdl::cli::kOk) << r.err;
  json j = json::parse(r.out);
  EXPECT_LE(j["ci"][0].get<double>(), 0.3);
  EXPECT_GE(j["ci"][1].get<double>(), 0.3);
}

TEST(Cli, EstimateTautology) {
  CliRun r = gdl_run({"estimate", "--schema", "@temp_schema.json", "--table", "@temp_table.json", "--event",
                   "@always.event", "--samples", "200"});
  ASSERT_EQ(r.code, gdl::cli::kOk) << r.err;
  EXPECT_EQ(json::parse(r.out)["point"].get<double>(), 1.0);
}

TEST(Cli, EstimateMomentsMatchesGolden) {
  CliRun r = gdl_run({"estimate", "--schema", "@temp_schema.json", "--table", "@temp_table.json", "--query",
                   "@room_avg.sql", "--group-by", "RoomNo", "--value", "°C", "--samples", "2000"});
  ASSERT_EQ(r.code, gdl::cli::kOk) << r.err;
  EXPECT_EQ(r.out, golden("moments_rooms.json"));
}

TEST(Cli, EstimateOnCensoredWorldsExitsThree) {
  CliRun r = gdl_run({"estimate", "--schema", "@walk_schema.json", "--program", "@walk_lengths.gdl", "--edb",
                   "@walk_cycle.json", "--event", "@walk_reaches_d.event", "--samples", "20", "--budget", "50"});
  EXPECT_EQ(r.code, gdl::cli::kEstimationImpossible);
  EXPECT_NE(r.err.find("AllWorldsCensored"), std::string::npos) << r.err;
}

TEST(Cli, QueryAndDatalogMatchGolden) {
  CliRun q = gdl_run({"query", "--schema", "@temp_schema.json", "--edb", "@temp_means.json", "--query", "@room_avg.sql"});
  ASSERT_EQ(q.code, gdl::cli::kOk) << q.err;
  EXPECT_EQ(q.out, golden("query_rooms.json"));
  CliRun d = gdl_run({"datalog", "--schema", "@reach_schema.json", "--program", "@reach.dl", "--edb", "@reach_edb.json"});
  ASSERT_EQ(d.code, gdl::cli::kOk) << d.err;
  EXPECT_EQ(d.out, golden("datalog_reach.json"));
}

TEST(Cli, DatalogRejectsDistributions) {
  CliRun r = gdl_run({"datalog", "--schema", "@walk_schema.json", "--program", "@walk_lengths.gdl", "--edb",
                   "@walk_dag.json"});
  EXPECT_EQ(r.code, gdl::cli::kValidationError);
  EXPECT_NE(r.err.find("NondeterministicProgram"), std::string::npos) << r.err;
}

TEST(Cli, OutWritesAFile) {
  auto path = scratch("check.json");
  std::filesystem::remove(path);
  CliRun r = gdl_run({"check", "--schema", "@walk_schema.json", "--program", "@walk_lengths.gdl", "--out",
                   path.string()});
  ASSERT_EQ(r.code, gdl::cli::kOk) << r.err;
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), golden("check_walk.json"));
}
