// Copyright 2026 The Handover VMC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "hvmc/cli.hpp"

namespace hvmc {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::main(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("hvmc_cli_" + std::string(::testing::UnitTest::GetInstance()
                                          ->current_test_info()
                                          ->name()));
    fs::remove_all(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string scenario(const char* name) {
    return (data_dir() / "scenarios" / name).string();
  }

  fs::path dir_;
};

TEST_F(CliTest, RunStaticScenarioSucceeds) {
  const Result r = run({"run", "--scenario", scenario("static_box.json"),
                        "--out", dir_.string()});
  EXPECT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_TRUE(fs::exists(dir_ / "static_box.csv"));
  const std::string metrics = slurp(dir_ / "metrics.csv");
  EXPECT_EQ(metrics.substr(0, metrics.find('\n')),
            "log,t_a,SR,d_i,L_r,L_o,e_d,theta_i,theta_r,theta_o,e_theta");
  EXPECT_NE(slurp(dir_ / "outcome.json").find("\"success\": true"),
            std::string::npos);
}

TEST_F(CliTest, TimeoutScenarioIsTaskFailure) {
  const Result r = run({"run", "--scenario", scenario("unreachable_box.json"),
                        "--out", dir_.string()});
  EXPECT_EQ(r.code, cli::kExitTaskFailure);
  EXPECT_NE(slurp(dir_ / "outcome.json").find("\"timeout\""), std::string::npos);
}

TEST_F(CliTest, MissingChainIsInvalidInput) {
  const Result r = run({"run", "--scenario", scenario("static_box.json"),
                        "--chain", "/nonexistent/chain.json", "--out",
                        dir_.string()});
  EXPECT_EQ(r.code, cli::kExitInvalid);
  EXPECT_NE(r.err.find("chain"), std::string::npos);
}

TEST_F(CliTest, InvalidConfigNamesKey) {
  fs::create_directories(dir_);
  std::ofstream(dir_ / "bad.json")
      << R"({"chain": ")" << (data_dir() / "chains" / "panda7.json").string()
      << R"(", "controller": {"spring1": {"f_max": 30, "stiffness": -5}}})";
  const Result r = run({"run", "--scenario", scenario("static_box.json"),
                        "--controller-config", (dir_ / "bad.json").string(),
                        "--out", dir_.string()});
  EXPECT_EQ(r.code, cli::kExitInvalid);
  EXPECT_NE(r.err.find("controller.spring1.stiffness"), std::string::npos);
}

TEST_F(CliTest, MissingScenarioFileIsInvalid) {
  EXPECT_EQ(run({"run", "--scenario", "/nonexistent.json", "--out",
                 dir_.string()})
                .code,
            cli::kExitInvalid);
}

TEST_F(CliTest, UnknownFlagIsInvalid) {
  EXPECT_EQ(run({"batch", "--frobnicate"}).code, cli::kExitInvalid);
  EXPECT_EQ(run({}).code, cli::kExitInvalid);
  EXPECT_EQ(run({"--help"}).code, cli::kExitOk);
}

TEST_F(CliTest, BatchZeroRunsIsInvalid) {
  const Result r = run({"batch", "--runs", "0", "--out", dir_.string()});
  EXPECT_EQ(r.code, cli::kExitInvalid);
  EXPECT_NE(r.err.find("runs"), std::string::npos);
}

TEST_F(CliTest, BatchUnknownExperimentIsInvalid) {
  EXPECT_EQ(run({"batch", "--experiment", "exp9", "--out", dir_.string()}).code,
            cli::kExitInvalid);
}

TEST_F(CliTest, BatchWritesOutcomesAndSummary) {
  const Result r = run({"batch", "--experiment", "exp1", "--object",
                        "cardboard_box", "--motion", "translation", "--runs",
                        "4", "--seed", "7", "--save-logs", "--out",
                        dir_.string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  std::istringstream outcomes(slurp(dir_ / "outcomes.csv"));
  std::string line;
  int rows = 0;
  while (std::getline(outcomes, line)) ++rows;
  EXPECT_EQ(rows, 5);
  const std::string summary = slurp(dir_ / "summary.csv");
  EXPECT_NE(summary.find("cardboard_box/translation,4,"), std::string::npos);
  EXPECT_EQ(std::distance(fs::directory_iterator(dir_ / "logs"),
                          fs::directory_iterator()),
            4);

  // The metrics subcommand reproduces the per-run values from the logs.
  std::vector<std::string> args = {"metrics"};
  for (const auto& e : fs::directory_iterator(dir_ / "logs")) {
    args.push_back(e.path().string());
  }
  const Result m = run(args);
  ASSERT_EQ(m.code, cli::kExitOk) << m.err;
  EXPECT_EQ(m.out.substr(0, m.out.find('\n')),
            "log,t_a,SR,d_i,L_r,L_o,e_d,theta_i,theta_r,theta_o,e_theta");
}

TEST_F(CliTest, BatchRerunIsByteIdentical) {
  auto go = [&](const std::string& sub, const char* jobs) {
    return run({"batch", "--experiment", "exp2", "--runs", "6", "--seed", "7",
                "--jobs", jobs, "--out", (dir_ / sub).string()});
  };
  ASSERT_EQ(go("a", "1").code, cli::kExitOk);
  ASSERT_EQ(go("b", "1").code, cli::kExitOk);
  ASSERT_EQ(go("c", "3").code, cli::kExitOk);
  const std::string a = slurp(dir_ / "a" / "summary.csv");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(dir_ / "b" / "summary.csv"));
  EXPECT_EQ(a, slurp(dir_ / "c" / "summary.csv"));
  EXPECT_EQ(slurp(dir_ / "a" / "outcomes.csv"),
            slurp(dir_ / "c" / "outcomes.csv"));
}

TEST_F(CliTest, EnvironmentOverridesFlags) {
  ::setenv("HVMC_PROFILE", "bogus", 1);
  const Result r = run({"run", "--scenario", scenario("static_box.json"),
                        "--out", dir_.string()});
  ::unsetenv("HVMC_PROFILE");
  EXPECT_EQ(r.code, cli::kExitInvalid);
  EXPECT_NE(r.err.find("profile"), std::string::npos);
}

TEST_F(CliTest, StreamRateValidated) {
  EXPECT_EQ(run({"serve", "--port", "0", "--stream-hz", "500", "--duration",
                 "0.1"})
                .code,
            cli::kExitInvalid);
}

TEST_F(CliTest, ServeRunsAndStops) {
  const Result r = run({"serve", "--port", "0", "--duration", "0.3"});
  EXPECT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_NE(r.out.find("listening on ws://127.0.0.1:"), std::string::npos);
}

}  // namespace
}  // namespace hvmc
