#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "tfpg/study.hpp"

using namespace tfpg;

namespace {

StudyConfig from_text(const std::string& text, StudyConfig c = {}) {
  std::istringstream in(text);
  apply_config_file(c, in);
  return c;
}

ConvergenceReport random_report(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> n(0, 12);
  ConvergenceReport r;
  r.mode = "pde1d";
  const std::vector<std::string> tags{"a", "f", "exp", "pow(-0.300000)", "odd,\"tag\""};
  const int rows = n(rng);
  for (int i = 0; i < rows; ++i) {
    ReportRow row;
    row.mode = u(rng) < 0.5 ? "ode" : "pde2d";
    row.case_tag = tags[i % tags.size()];
    row.alpha = u(rng);
    row.K = 1 + n(rng) * 37;
    if (u(rng) < 0.5) row.h = 1.0 / (1 + n(rng));
    row.err_l2 = std::pow(10.0, -12.0 * u(rng)) * u(rng);
    if (u(rng) < 0.7) row.err_aux = std::exp(-30.0 * u(rng));
    if (u(rng) < 0.6) row.rate = 4.0 * u(rng) - 1.0;
    r.rows.push_back(row);
  }
  return r;
}

}  // namespace

TEST(PairwiseRates, PublishedRow) {
  const auto r = pairwise_rates({8.49e-3, 3.96e-3, 1.92e-3, 9.57e-4, 4.68e-4, 2.36e-4});
  EXPECT_EQ(r.rates.size(), 5u);
  EXPECT_NEAR(r.mean, 1.03, 0.005);
}

TEST(PairwiseRates, ConstantAndGeometricSequences) {
  for (double v : pairwise_rates({2.0, 2.0, 2.0}).rates) EXPECT_EQ(v, 0.0);
  const double q = std::pow(2.0, 1.5);
  const auto r = pairwise_rates({1.0, 1.0 / q, 1.0 / (q * q), 1.0 / (q * q * q)});
  for (double v : r.rates) EXPECT_NEAR(v, 1.5, 1e-14);
  EXPECT_NEAR(r.mean, 1.5, 1e-14);
}

TEST(PairwiseRates, RejectsNonPositiveErrors) {
  EXPECT_THROW(pairwise_rates({1.0, 0.0}), DomainError);
  EXPECT_THROW(pairwise_rates({1.0, -1e-3}), DomainError);
}

TEST(Config, DefaultsAndFastMode) {
  StudyConfig c;
  c.mode = StudyMode::Pde1d;
  EXPECT_EQ(effective_M(c), 2000);
  EXPECT_EQ(effective_ref_K(c), 2000);
  EXPECT_EQ(effective_cases(c), (std::vector<char>{'a', 'b', 'c', 'd'}));
  c.fast = true;
  EXPECT_EQ(effective_M(c), 512);
  EXPECT_EQ(effective_ref_K(c), 1024);
  c.mode = StudyMode::Pde2d;
  EXPECT_EQ(effective_M(c), 32);
  EXPECT_EQ(effective_cases(c), (std::vector<char>{'e', 'f'}));
}

TEST(Config, FileSettingsAndComments) {
  const auto c = from_text(
      "# study\n"
      "mode = pde2d\n"
      "alpha = 0.3, 0.7   # two orders\n"
      "K=8,16,32\n"
      "M=12\n"
      "case=e\n"
      "ref_K=256\n"
      "format=markdown\n"
      "fast=yes\n"
      "norm=exact\n");
  EXPECT_EQ(c.mode, StudyMode::Pde2d);
  EXPECT_EQ(c.alphas, (std::vector<double>{0.3, 0.7}));
  EXPECT_EQ(c.Ks, (std::vector<int>{8, 16, 32}));
  EXPECT_EQ(c.M, 12);
  EXPECT_EQ(c.cases, (std::vector<char>{'e'}));
  EXPECT_EQ(c.ref_K, 256);
  EXPECT_EQ(c.format, ReportFormat::Markdown);
  EXPECT_TRUE(c.fast);
  EXPECT_EQ(c.norm, TimeNorm::Exact);
  EXPECT_TRUE(validate_config(c).empty());
}

TEST(Config, SourceSpellings) {
  EXPECT_TRUE(std::holds_alternative<ExpSource>(parse_time_source("exp")));
  EXPECT_TRUE(std::holds_alternative<ExpMinusOneSource>(parse_time_source("expm1")));
  EXPECT_TRUE(std::holds_alternative<SinSource>(parse_time_source("sin")));
  EXPECT_EQ(std::get<ConstantSource>(parse_time_source("const:2.5")).value, 2.5);
  EXPECT_EQ(std::get<PowerSource>(parse_time_source("pow:0.75")).exponent, 0.75);
  EXPECT_THROW(parse_time_source("pow:-1"), DomainError);
  EXPECT_THROW(parse_time_source("cosh"), DomainError);
}

TEST(Config, NonDoublingKIsOnlyAWarning) {
  StudyConfig c;
  c.Ks = {10, 30, 50};
  EXPECT_EQ(validate_config(c).size(), 2u);
}

// Every malformed configuration must be rejected before any solve starts.
TEST(Config, RejectsMalformedConfigurations) {
  const std::vector<std::string> bad_files{
      "alpha=1.2\n",
      "alpha=0\n",
      "alpha=\n",
      "alpha=0.3,,0.5\n",
      "K=20,10\n",
      "K=10,10\n",
      "K=0,10\n",
      "K=ten\n",
      "K=10.5\n",
      "ref_K=100\nK=10,200\n",
      "lambda=-1\n",
      "source=pow:-2\n",
      "mode=heat\n",
      "format=xml\n",
      "fast=maybe\n",
      "norm=sup\n",
      "jobs=0\n",
      "T=-1\n",
      "colour=blue\n",
      "just some words\n",
      "mode=ode\ncase=a\n",
      "mode=infsup\ncase=a\n",
      "mode=pde1d\ncase=e\n",
      "mode=pde2d\ncase=b\n",
      "mode=pde1d\ncase=z\n",
      "mode=pde1d\ncase=ab\n",
      "mode=pde1d\nM=1\n",
  };
  for (const auto& text : bad_files) {
    EXPECT_THROW(
        {
          const auto c = from_text(text);
          validate_config(c);
        },
        DomainError)
        << text;
  }
}

TEST(Csv, EmptyReportIsHeaderOnly) {
  std::ostringstream out;
  write_csv(out, ConvergenceReport{});
  EXPECT_EQ(out.str(), std::string(kCsvHeader) + "\n");
}

TEST(Csv, RoundTripOfRandomReports) {
  std::mt19937 rng(2024);
  for (int i = 0; i < 20; ++i) {
    const auto r = random_report(rng);
    std::stringstream ss;
    write_csv(ss, r);
    EXPECT_EQ(parse_csv(ss), r.rows) << "report " << i;
  }
}

TEST(Csv, RejectsMalformedInput) {
  std::istringstream no_header("a,b\n");
  EXPECT_THROW(parse_csv(no_header), DomainError);
  std::istringstream short_row(std::string(kCsvHeader) + "\node,exp,0.5,10\n");
  EXPECT_THROW(parse_csv(short_row), DomainError);
  std::istringstream bad_number(std::string(kCsvHeader) + "\node,exp,x,10,,1e-3,,\n");
  EXPECT_THROW(parse_csv(bad_number), DomainError);
}

TEST(Report, WritesToPathAndReportsFailuresWithPath) {
  const auto path = std::filesystem::temp_directory_path() / "tfpg_report_test.csv";
  ConvergenceReport r;
  r.rows.push_back({"ode", "exp", 0.5, 10, std::nullopt, 1e-3, 2e-2, std::nullopt});
  emit_report(r, ReportFormat::Csv, path.string());
  std::ifstream in(path);
  EXPECT_EQ(parse_csv(in), r.rows);
  std::filesystem::remove(path);
  try {
    emit_report(r, ReportFormat::Csv, "/nonexistent-dir/x.csv");
    FAIL() << "expected an I/O error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent-dir/x.csv"), std::string::npos);
  }
}

TEST(RunStudy, InfsupGridMatchesPublishedRow) {
  StudyConfig c = table_config(1);
  c.alphas = {0.5};
  const auto report = run_study(c);
  ASSERT_EQ(report.rows.size(), 6u);
  const auto cmp = compare_with_published(report, 1);
  EXPECT_EQ(cmp.cells, 6);
  EXPECT_LE(cmp.worst_value_dev, 1e-3);
}

TEST(RunStudy, InfsupMarkdownLayout) {
  StudyConfig c = table_config(1);
  c.Ks = {20, 40};
  std::ostringstream out;
  write_markdown(out, run_study(c));
  std::istringstream lines(out.str());
  std::string line;
  std::vector<std::string> all;
  while (std::getline(lines, line)) all.push_back(line);
  ASSERT_EQ(all.size(), 7u);  // header, rule, five orders
  EXPECT_EQ(all[0], "| alpha \\ K | 20 | 40 |");
  EXPECT_EQ(all[2].rfind("| 0.3 | 0.77", 0), 0u);
  EXPECT_EQ(all[6].rfind("| 0.98 |", 0), 0u);
}

TEST(RunStudy, OdeStudyReproducesPublishedRateAndIsDeterministic) {
  StudyConfig c = table_config(2);
  c.alphas = {0.3};
  c.jobs = 2;
  const auto a = run_study(c);
  const auto b = run_study(c);
  EXPECT_EQ(a.rows, b.rows);
  ASSERT_EQ(a.summaries.size(), 1u);
  EXPECT_NEAR(*a.summaries[0].mean_rate_l2, 1.03, 0.05);
  EXPECT_FALSE(a.rows[0].rate.has_value());
  EXPECT_TRUE(a.rows[1].rate.has_value());
  EXPECT_NEAR(*a.summaries[0].theory_l2, 1.1, 1e-12);

  std::ostringstream md;
  write_markdown(md, a);
  EXPECT_NE(md.str().find("| 0.3 | L2 |"), std::string::npos);
  EXPECT_NE(md.str().find("(1.10)"), std::string::npos);
  EXPECT_NE(md.str().find("H^alpha"), std::string::npos);
}

TEST(RunStudy, SmallPdeStudyOrdersRowsByConfiguration) {
  StudyConfig c;
  c.mode = StudyMode::Pde1d;
  c.M = 32;
  c.cases = {'b', 'a'};
  c.alphas = {0.7, 0.4};
  c.Ks = {4, 8};
  c.ref_K = 64;
  c.jobs = 3;
  const auto r = run_study(c);
  ASSERT_EQ(r.rows.size(), 8u);
  EXPECT_EQ(r.rows[0].case_tag, "b");
  EXPECT_EQ(r.rows[0].alpha, 0.7);
  EXPECT_EQ(r.rows[2].alpha, 0.4);
  EXPECT_EQ(r.rows[4].case_tag, "a");
  for (const auto& row : r.rows) {
    EXPECT_GT(row.err_l2, 0.0);
    ASSERT_TRUE(row.h.has_value());
    EXPECT_DOUBLE_EQ(*row.h, 1.0 / 32);
    EXPECT_TRUE(row.err_aux.has_value());
  }
  std::ostringstream md;
  write_markdown(md, r);
  EXPECT_NE(md.str().find("| (b) | 0.7 |"), std::string::npos);
  EXPECT_NE(md.str().find("relative L2 error at t = T"), std::string::npos);
}

TEST(RunStudy, FailingCellIsIdentified) {
  StudyConfig c;
  c.alphas = {0.5};
  c.Ks = {4, 8};
  c.ref_K = 16;
  c.source = ConstantSource{0.0};  // zero reference solution
  try {
    run_study(c);
    FAIL() << "expected a failure";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("ode alpha=0.5"), std::string::npos) << e.what();
  }
}

TEST(TableConfig, PresetsAndUnknownTable) {
  EXPECT_EQ(table_config(1).mode, StudyMode::Infsup);
  EXPECT_EQ(table_config(2).mode, StudyMode::Ode);
  EXPECT_EQ(table_config(4).cases, (std::vector<char>{'c', 'd'}));
  EXPECT_EQ(table_config(5).mode, StudyMode::Pde2d);
  EXPECT_THROW(table_config(6), DomainError);
}
