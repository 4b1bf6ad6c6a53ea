#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include <gtest/gtest.h>

#include "tfpg/study.hpp"

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(TFPG_CLI_PATH) + " " + args + " 2>/dev/null";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  while (fgets(buf.data(), buf.size(), pipe)) r.out += buf.data();
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

}  // namespace

TEST(Cli, OdeStudyWritesCsv) {
  const auto r = run("ode --alpha 0.5 --K 10,20 --ref-K 200");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind(tfpg::kCsvHeader, 0), 0u);
  std::istringstream in(r.out);
  const auto rows = tfpg::parse_csv(in);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].K, 20);
  EXPECT_TRUE(rows[1].rate.has_value());
}

TEST(Cli, InfsupMarkdown) {
  const auto r = run("infsup --alpha 0.5 --K 20,40 --format markdown");
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("| 0.5 | 0.47"), std::string::npos) << r.out;
}

TEST(Cli, ConfigFileIsOverriddenByFlags) {
  const auto path = std::filesystem::temp_directory_path() / "tfpg_cli_test.cfg";
  {
    std::ofstream cfg(path);
    cfg << "alpha=0.3\nK=10,20,40\nref_K=160\nformat=markdown\n";
  }
  const auto r = run("ode --config " + path.string() + " --format csv --K 10,20");
  std::filesystem::remove(path);
  ASSERT_EQ(r.code, 0);
  std::istringstream in(r.out);
  const auto rows = tfpg::parse_csv(in);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].alpha, 0.3);
}

TEST(Cli, WritesOutputFile) {
  const auto path = std::filesystem::temp_directory_path() / "tfpg_cli_out.csv";
  const auto r = run("pde1d --case a --alpha 0.5 --K 4,8 --M 16 --ref-K 32 --out " + path.string());
  ASSERT_EQ(r.code, 0);
  std::ifstream in(path);
  EXPECT_EQ(tfpg::parse_csv(in).size(), 2u);
  std::filesystem::remove(path);
}

TEST(Cli, ConfigurationErrorsExitWithTwo) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("heat").code, 2);
  EXPECT_EQ(run("ode --alpha 1.5").code, 2);
  EXPECT_EQ(run("ode --K 20,10").code, 2);
  EXPECT_EQ(run("pde1d --case e").code, 2);
  EXPECT_EQ(run("repro-table 7").code, 2);
  EXPECT_EQ(run("ode --config /nonexistent/file.cfg").code, 2);
  EXPECT_EQ(run("ode --K 10,20 --ref-K 80 --out /nonexistent-dir/x.csv").code, 2);
}

TEST(Cli, HelpExitsCleanly) { EXPECT_EQ(run("--help").code, 0); }
