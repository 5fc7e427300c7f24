//
// Copyright 2026 The fairaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include <array>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <gtest/gtest.h>

namespace {

struct Result {
  int status = -1;
  std::string output;
};

Result RunCli(const std::string& args) {
  const std::string cmd = std::string(FAIRAUDIT_CLI) + " " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

const std::string kData = FAIRAUDIT_DATA_DIR;
const std::string kCompas = " --dataset " + kData + "/compas-scores-two-years.csv --schema " +
                            kData + "/schemas/propublica.json";

std::string Slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

TEST(Cli, IngestPrintsGroundTruth) {
  const Result r = RunCli("ingest" + kCompas);
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_NE(r.output.find("rows_used=6172"), std::string::npos);
  EXPECT_NE(r.output.find("female,0.1903"), std::string::npos);
}

TEST(Cli, AuditIsByteReproducible) {
  const std::string dir = ::testing::TempDir();
  const std::string a = dir + "/cli_a.csv", b = dir + "/cli_b.csv";
  const std::string args = "audit" + kCompas + " --budget 100 --reps 20 --seed 3 --out ";
  ASSERT_EQ(RunCli(args + a).status, 0);
  ASSERT_EQ(RunCli(args + b + " --threads 3").status, 0);
  const std::string text = Slurp(a);
  EXPECT_EQ(text, Slurp(b));
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "method,strategy,repetition,agent,attribute,dp_true,dp_estimate,abs_error,R_i,"
            "R_i_bar,signed_error,within_parity_band");
  // 9 pairs x 20 repetitions x 5 agents, plus the header.
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 9 * 20 * 5);
}

TEST(Cli, ConfigFileWithFlagOverride) {
  const std::string dir = ::testing::TempDir();
  const std::string cfg = dir + "/cli_config.json";
  std::ofstream(cfg) << R"({"dataset": ")" << kData << R"(/compas-scores-two-years.csv",
    "schema": ")" << kData << R"(/schemas/propublica.json", "methods": ["uniform"],
    "strategies": ["none"], "budget": 50, "repetitions": 1000})";
  const std::string out = dir + "/cli_cfg.csv";
  const Result r = RunCli("audit --config " + cfg + " --reps 2 --out " + out);
  ASSERT_EQ(r.status, 0) << r.output;
  const std::string text = Slurp(out);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 2 * 5);
}

TEST(Cli, SweepAgentsAndBudget) {
  const std::string dir = ::testing::TempDir();
  const std::string out = dir + "/cli_sweep.csv";
  const Result r = RunCli("sweep-agents" + kCompas + " --budget 100 --reps 10 --agents 1,2 --out " + out);
  ASSERT_EQ(r.status, 0) << r.output;
  const std::string text = Slurp(out);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 2 * 9);
  const Result b = RunCli("sweep-budget" + kCompas +
                       " --budgets 100,200 --reps 5 --attrs female,priors --method uniform");
  ASSERT_EQ(b.status, 0) << b.output;
  EXPECT_NE(b.output.find("200,2,uniform,apriori"), std::string::npos);
}

TEST(Cli, BoundsCheckSynthetic) {
  const Result r = RunCli("bounds-check --template-marginal 0.8 --template-lo 0.3 --template-hi 0.6 "
                       "--m 5 --budget 250 --reps 50");
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_NE(r.output.find("stratified_apriori_worse"), std::string::npos);
  EXPECT_NE(r.output.find("witnessed"), std::string::npos);
}

TEST(Cli, ErrorsMapToCategoryExitCodes) {
  EXPECT_EQ(RunCli("audit --dataset /nonexistent.csv --schema " + kData +
                "/schemas/propublica.json").status,
            11);
  EXPECT_EQ(RunCli("audit" + kCompas + " --method bogus").status, 2);
  EXPECT_EQ(RunCli("audit" + kCompas + " --attrs nosuch").status, 2);
  EXPECT_EQ(RunCli("ingest --dataset " + kData + "/german_credit.csv --schema " + kData +
                "/schemas/propublica.json").status,
            3);
  EXPECT_EQ(RunCli("frobnicate").status, 2);
}

}  // namespace
