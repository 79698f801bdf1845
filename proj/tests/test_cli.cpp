#include <gtest/gtest.h>

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "support.hpp"

using stagevote::testing::run_command;
using json = nlohmann::json;

namespace {

const std::string kCli = STAGEVOTE_CLI;
const std::string kSamples = STAGEVOTE_SAMPLES;

std::string sample(const std::string& name) { return kSamples + "/" + name; }

std::string temp_file(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / ("stagevote_cli_" + name);
  std::ofstream(path) << content;
  return path.string();
}

}  // namespace

TEST(CliTally, SecondChoiceProfileElectsX) {
  const auto r = run_command(kCli + " tally " + sample("second_choice.csv") + " --alpha 0.5");
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_NE(r.out.find("Stage2   25   25   25   25  100     0\n"), std::string::npos);
  EXPECT_NE(r.out.find("algorithm: basic\nwinner: X\nstage: 2\nscore: 100\n"), std::string::npos) << r.out;
}

TEST(CliTally, JsonAgreesWithText) {
  const std::string args = " tally " + sample("null_cutoff.csv") + " --beta 0.3333 --selector MaxEntropy";
  const auto text = run_command(kCli + args);
  const auto js = run_command(kCli + args + " --format json");
  ASSERT_EQ(js.exit_code, 0);
  const auto j = json::parse(js.out);
  const auto& d = j["decision"];
  EXPECT_EQ(d["winner"], "A");
  EXPECT_EQ(d["bestScore"], 65.0);
  EXPECT_EQ(d["bestScoreStage"], 2);
  EXPECT_EQ(d["lastStageByBeta"], 2);
  EXPECT_EQ(d["firstStageByAlpha"], 2);
  EXPECT_TRUE(d["lastStageByGamma"].is_number());
  EXPECT_EQ(j["scores"]["stages"][1][0], 65.0);
  EXPECT_NE(text.out.find("winner: A\nbestScore: 65\nbestScoreStage: 2\n"), std::string::npos) << text.out;
}

TEST(CliTally, EmptyWindowExitsWithNullStatus) {
  const auto r = run_command(kCli + " tally " + sample("protest.csv") + " --beta 0.3333 --format json");
  EXPECT_EQ(r.exit_code, 2);
  const auto d = json::parse(r.out)["decision"];
  EXPECT_EQ(d["winner"], "NULL");
  EXPECT_TRUE(d["lastStageByBeta"].is_null());
  EXPECT_TRUE(d["bestScoreStage"].is_null());
}

TEST(CliTally, RejectsInvalidBallots) {
  const auto dup = temp_file("dup.csv", "voter_id,pref1,pref2\nv1,A,A\n");
  auto r = run_command(kCli + " tally " + dup, true);
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.out.find("v1"), std::string::npos);

  const auto unknown = temp_file("unknown.csv", "voter_id,pref1,pref2\nv1,A,Z\n");
  r = run_command(kCli + " tally " + unknown + " --candidates A,B,NULL", true);
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.out.find("Z"), std::string::npos);

  const auto malformed = temp_file("malformed.csv", "voter_id,pref1,pref2\nv1,,A\n");
  r = run_command(kCli + " tally " + malformed, true);
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.out.find("line 2"), std::string::npos);

  EXPECT_EQ(run_command(kCli + " tally /nonexistent.csv").exit_code, 1);
  EXPECT_EQ(run_command(kCli + " tally " + sample("protest.csv") + " --selector Median").exit_code, 1);
}

TEST(CliMinStages, PrintsLeastStageCount) {
  EXPECT_EQ(run_command(kCli + " min-stages 100 5 0.5").out, "3\n");
  EXPECT_EQ(run_command(kCli + " min-stages 10 2 0.01").out, "1\n");
  EXPECT_EQ(run_command(kCli + " min-stages 1 20 0.66").out, "14\n");
  EXPECT_EQ(run_command(kCli + " min-stages 1 20 1.5").exit_code, 1);
}

TEST(CliSimulate, MissingKeyIsNamed) {
  const auto cfg = temp_file("missing.json", R"({"numCandiates": 5, "numElections": 2, "columnBlindness": 5,
    "crowdBuildMethod": {"name": "standardDistribution", "mean": 600, "standardDeviation": 100}})");
  const auto r = run_command(kCli + " simulate " + cfg, true);
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.out.find("numVoters"), std::string::npos) << r.out;
}

TEST(CliSimulate, OutputIsReproducible) {
  const std::string base = kCli + " simulate " + sample("sim_small.json") + " --seed 3";
  const auto a = run_command(base);
  const auto b = run_command(base);
  const auto c = run_command(base + " --threads 4");
  ASSERT_EQ(a.exit_code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out, c.out);
  EXPECT_NE(a.out.find("START OF SIMULATION"), std::string::npos);
  EXPECT_NE(a.out.find("seed : 3\n"), std::string::npos);
  EXPECT_NE(a.out.find("meanWinnerRank"), std::string::npos);
}

TEST(CliSimulate, SeedFromEnvironmentWhenConfigHasNone) {
  const auto cfg = temp_file("noseed.json", R"({"numCandiates": 4, "numVoters": 10, "numElections": 3,
    "columnBlindness": 5, "crowdBuildMethod": {"name": "standardDistribution", "mean": 600, "standardDeviation": 100}})");
  const auto r = run_command("STAGEVOTE_SEED=42 " + kCli + " simulate " + cfg + " --format json");
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_EQ(json::parse(r.out)["config"]["seed"], 42);
}
