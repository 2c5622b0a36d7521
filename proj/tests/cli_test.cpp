// Copyright 2026 The specrl Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#ifndef SPECRL_CLI_PATH
#error "SPECRL_CLI_PATH must name the specrl executable"
#endif

namespace {

namespace fs = std::filesystem;

struct CliResult {
  int code = -1;
  std::string out;
};

CliResult run(const std::string& args, const std::string& env = "") {
  const fs::path log = fs::temp_directory_path() / "specrl_cli_test.log";
  const std::string cmd = env + " '" + std::string(SPECRL_CLI_PATH) + "' " + args + " > '" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::ostringstream os;
  os << in.rdbuf();
  r.out = os.str();
  return r;
}

fs::path temp(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("specrl_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

TEST(CliTest, ListPresets) {
  const CliResult r = run("list-presets");
  EXPECT_EQ(r.code, 0);
  for (const char* name : {"table1_replay", "table2_replay", "fig3_heatmap", "fig4_sensitivity", "sec33_async"})
    EXPECT_NE(r.out.find(name), std::string::npos) << name;
}

TEST(CliTest, ValidateShippedPresets) {
  const CliResult r = run("validate table1_replay table2_replay fig3_heatmap fig4_sensitivity sec33_async table4_draft_length");
  EXPECT_EQ(r.code, 0) << r.out;
}

TEST(CliTest, ValidationErrorsExitOne) {
  const auto bad = temp("bad.json");
  write(bad, R"({"base": {"traffic": {"mu": 7, "sigma": 0},
                 "sharding": {"gpus_per_instance": 8, "tensor_parallel": 2, "pipeline_parallel": 2, "expert_parallel": 1}}})");
  CliResult r = run("validate '" + bad.string() + "'");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("traffic.sigma"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("(4) != gpus_per_instance (8)"), std::string::npos) << r.out;
  r = run("run '" + bad.string() + "' --out-dir '" + temp("unused").string() + "'");
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(run("run no_such_scenario").code, 1);
  EXPECT_EQ(run("run table1_replay --format xml").code, 1);
}

TEST(CliTest, UnwritableOutputExitsTwo) {
  const auto blocker = temp("blocker");
  write(blocker, "not a directory");
  const CliResult r = run("run table1_replay --quiet --out-dir '" + (blocker / "sub").string() + "'");
  EXPECT_EQ(r.code, 2) << r.out;
}

TEST(CliTest, OutDirFromEnvironment) {
  const auto dir = temp("env");
  const CliResult r = run("run table1_replay --quiet", "SPECRL_OUT_DIR='" + dir.string() + "'");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(fs::exists(dir / "table1_replay.csv"));
  EXPECT_TRUE(fs::exists(dir / "table1_replay.summary.json"));
}

TEST(CliTest, FormatSelectsTables) {
  const auto dir = temp("csv");
  EXPECT_EQ(run("run table1_replay --quiet --format csv --out-dir '" + dir.string() + "'").code, 0);
  EXPECT_TRUE(fs::exists(dir / "table1_replay.csv"));
  EXPECT_FALSE(fs::exists(dir / "table1_replay.txt"));
}

TEST(CliTest, SameSeedByteIdenticalAcrossThreads) {
  const auto a = temp("t1"), b = temp("t8");
  ASSERT_EQ(run("run table2_replay --quiet --seed 9 --threads 1 --out-dir '" + a.string() + "'").code, 0);
  ASSERT_EQ(run("run table2_replay --quiet --seed 9 --threads 8 --out-dir '" + b.string() + "'").code, 0);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    ++files;
    EXPECT_EQ(slurp(e.path()), slurp(b / e.path().filename())) << e.path();
  }
  EXPECT_GE(files, 3u);
}

TEST(CliTest, SeedChangesProvenance) {
  const auto a = temp("s1"), b = temp("s2");
  ASSERT_EQ(run("run table2_replay --quiet --seed 1 --out-dir '" + a.string() + "'").code, 0);
  ASSERT_EQ(run("run table2_replay --quiet --seed 2 --out-dir '" + b.string() + "'").code, 0);
  EXPECT_NE(slurp(a / "table2_replay.summary.json"), slurp(b / "table2_replay.summary.json"));
}

}  // namespace
