// Copyright 2026 The Authors.
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


#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "divsel/report.hpp"
#include "divsel/rng.hpp"

namespace divsel {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("divsel_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    Rng rng(3);
    std::ofstream out(dir_ / "data.csv");
    out << "g0,g1,g2,g3,g4,g5,y\n";
    out.precision(17);
    for (int i = 0; i < 60; ++i) {
      double x[6];
      for (double& v : x) v = rng.normal();
      out << x[0] << ',' << x[1] << ',' << x[2] << ',' << x[3] << ',' << x[4] << ',' << x[5] << ','
          << 2 * x[0] - 1.5 * x[2] + 0.5 * rng.normal() << '\n';
    }
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args) const {
    const std::string cmd = std::string(DIVSEL_CLI_PATH) + " " + args + " > " + (dir_ / "stdout.txt").string() +
                            " 2> " + (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  std::string data() const { return (dir_ / "data.csv").string(); }
  fs::path out(const std::string& sub) const { return dir_ / sub; }
  std::string stderr_text() const { return slurp(dir_ / "stderr.txt"); }

  fs::path dir_;
};

Json without_timestamp(const fs::path& p) {
  Json j = Json::parse(slurp(p));
  j.erase("generated_at");
  return j;
}

TEST_F(CliTest, SelectWritesValidReportAndModel) {
  ASSERT_EQ(run("--seed 4 --output " + out("a").string() + " select --data " + data() +
                " --iters 300 --kappa 2 --methods bernoulli-dpp,spike-slab --train-fraction 0.8"),
            0)
      << stderr_text();
  const Json report = Json::parse(slurp(out("a") / "report.json"));
  EXPECT_TRUE(validate_report(report).empty());
  ASSERT_EQ(report["reports"].size(), 2U);
  const Json& dpp = report["reports"][0];
  EXPECT_EQ(dpp["method"], "bernoulli-dpp");
  const auto sel = dpp["selected"].get<std::vector<int>>();
  EXPECT_NE(std::find(sel.begin(), sel.end(), 0), sel.end());
  EXPECT_NE(std::find(sel.begin(), sel.end(), 2), sel.end());
  EXPECT_EQ(report["provenance"]["seed"], 4);
  const Json model = Json::parse(slurp(out("a") / "model.json"));
  EXPECT_EQ(model["schema"], "divsel.model");
  EXPECT_EQ(model["feature_names"].size(), 6U);

  ASSERT_EQ(run("--output " + out("a").string() + " map --model " + (out("a") / "model.json").string()), 0);
  EXPECT_TRUE(fs::exists(out("a") / "map.json"));
  ASSERT_EQ(run("--output " + out("a").string() + " sample --model " + (out("a") / "model.json").string() +
                " --draws 200 --data " + data() + " --predict " + data()),
            0)
      << stderr_text();
  EXPECT_TRUE(fs::exists(out("a") / "samples.json"));
  EXPECT_TRUE(fs::exists(out("a") / "intervals.csv"));
}

TEST_F(CliTest, FixedSeedIsByteIdenticalApartFromTimestamp) {
  const std::string args = " select --data " + data() + " --iters 200 --kappa 2 --methods bernoulli-dpp,omp";
  ASSERT_EQ(run("--seed 9 --output " + out("a").string() + args), 0) << stderr_text();
  ASSERT_EQ(run("--seed 9 --output " + out("b").string() + args), 0) << stderr_text();
  EXPECT_EQ(without_timestamp(out("a") / "report.json"), without_timestamp(out("b") / "report.json"));
  EXPECT_EQ(slurp(out("a") / "model.json"), slurp(out("b") / "model.json"));
  ASSERT_EQ(run("--seed 10 --output " + out("c").string() + args), 0);
  EXPECT_NE(slurp(out("a") / "model.json"), slurp(out("c") / "model.json"));
}

TEST_F(CliTest, Fig1WritesCsv) {
  ASSERT_EQ(run("--output " + out("f").string() + " demo fig1 --samples 200"), 0) << stderr_text();
  const std::string csv = slurp(out("f") / "fig1.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run("select --data /nonexistent.csv"), 2);
  EXPECT_EQ(run("--output " + out("x").string() + " select --data " + data() + " --response nope"), 2);
  EXPECT_EQ(run("bogus"), 1);
  EXPECT_EQ(run("select"), 1);
  EXPECT_EQ(run("select --data " + data() + " --kappa -1"), 1);
  EXPECT_EQ(run("map --model /nonexistent.json"), 2);
  EXPECT_EQ(run("schema"), 0);
  EXPECT_NE(slurp(dir_ / "stdout.txt").find("divsel.selection_report"), std::string::npos);
}

TEST_F(CliTest, ConfigFileSuppliesDefaultsAndFlagsWin) {
  {
    std::ofstream cfg(dir_ / "c.json");
    cfg << R"({"seed": 5, "select": {"kappa": 3, "iters": 150, "methods": "bernoulli-dpp", "data": ")" << data()
        << R"("}})";
  }
  ASSERT_EQ(run("--config " + (dir_ / "c.json").string() + " --output " + out("a").string() + " select --iters 120"), 0)
      << stderr_text();
  const Json report = Json::parse(slurp(out("a") / "report.json"));
  const Json& cfg = report["provenance"]["config"];
  EXPECT_EQ(report["provenance"]["seed"], 5);
  EXPECT_EQ(cfg["learner"]["kappa"], 3.0);
  EXPECT_EQ(cfg["learner"]["n_iters"], 120);
}

}  // namespace
}  // namespace divsel
