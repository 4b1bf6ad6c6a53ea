#include <fstream>
#include <iostream>
#include <string>
#include <tuple>
#include <vector>

#include <CLI11.hpp>

#include "tfpg/study.hpp"

namespace {

// Exit codes: 0 ok, 2 bad configuration, 3 numerical failure.
constexpr int kConfigError = 2;
constexpr int kNumericError = 3;

struct Flags {
  std::string config;
  std::string alpha;
  std::string K;
  int M = 0;
  std::string cases;
  double lambda = 1.0;
  std::string source;
  int ref_K = 0;
  std::string out;
  std::string format;
  std::string norm;
  bool fast = false;
  int jobs = 1;
};

struct Registered {
  CLI::Option* config;
  std::vector<std::pair<std::string, CLI::Option*>> settings;
  CLI::Option* fast;
};

Registered add_common(CLI::App* cmd, Flags& f) {
  Registered r;
  r.config = cmd->add_option("--config", f.config, "key=value file with defaults");
  r.settings = {
      {"alpha", cmd->add_option("--alpha", f.alpha, "comma-separated fractional orders")},
      {"K", cmd->add_option("--K", f.K, "comma-separated temporal cell counts")},
      {"ref_K", cmd->add_option("--ref-K", f.ref_K, "reference cell count")},
      {"out", cmd->add_option("--out", f.out, "output path (default stdout)")},
      {"format", cmd->add_option("--format", f.format, "csv or markdown")},
      {"norm", cmd->add_option("--norm", f.norm, "nodal (default) or exact time integration")},
      {"jobs", cmd->add_option("--jobs", f.jobs, "worker threads")},
  };
  r.fast = cmd->add_flag("--fast", f.fast, "coarser spatial mesh and reference for quick runs");
  return r;
}

void apply(tfpg::StudyConfig& c, const Registered& r, const Flags& f) {
  if (r.config->count()) {
    std::ifstream in(f.config);
    if (!in) throw tfpg::DomainError("cannot read config file '" + f.config + "'");
    tfpg::apply_config_file(c, in);
  }
  for (const auto& [key, opt] : r.settings) {
    if (!opt->count()) continue;
    const auto values = opt->results();
    std::string joined;
    for (const auto& v : values) joined += (joined.empty() ? "" : ",") + v;
    tfpg::apply_setting(c, key, joined);
  }
  if (r.fast->count()) c.fast = true;
}

int run(const tfpg::StudyConfig& c, int table) {
  const auto report = tfpg::run_study(c);
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
  if (c.out.empty())
    tfpg::emit_report(report, c.format, std::cout);
  else
    tfpg::emit_report(report, c.format, c.out);
  if (table > 0) {
    const auto cmp = tfpg::compare_with_published(report, table);
    std::cerr << "compared " << cmp.cells << " cells (worst deviation " << cmp.worst_value_dev
              << ") and " << cmp.rates << " mean rates (worst deviation " << cmp.worst_rate_dev
              << ")\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Space-time Petrov-Galerkin solver for time-fractional diffusion"};
  app.require_subcommand(1);

  Flags f;
  auto* ode = app.add_subcommand("ode", "scalar problem d^alpha u + lambda u = f");
  auto* pde1d = app.add_subcommand("pde1d", "1-D cases (a)-(d)");
  auto* pde2d = app.add_subcommand("pde2d", "2-D cases (e)-(f)");
  auto* infsup = app.add_subcommand("infsup", "stability constant of the cell-average projection");
  auto* repro = app.add_subcommand("repro-table", "reproduce a published table (1-5)");
  int table = 0;
  repro->add_option("table", table, "table number")->required()->check(CLI::Range(1, 5));

  std::vector<std::pair<CLI::App*, Registered>> cmds;
  for (auto* cmd : {ode, pde1d, pde2d, infsup, repro}) cmds.emplace_back(cmd, add_common(cmd, f));
  std::vector<std::tuple<std::string, CLI::App*, CLI::Option*>> extra;
  extra.emplace_back("lambda", ode, ode->add_option("--lambda", f.lambda, "decay rate"));
  extra.emplace_back("source", ode, ode->add_option("--source", f.source,
                                               "exp, expm1, sin, const:<c> or pow:<g>"));
  for (auto* cmd : {pde1d, pde2d, repro}) {
    extra.emplace_back("M", cmd, cmd->add_option("--M", f.M, "spatial subdivisions per side"));
    extra.emplace_back("case", cmd, cmd->add_option("--case", f.cases, "comma-separated case letters"));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    for (auto& [cmd, reg] : cmds) {
      if (!cmd->parsed()) continue;
      tfpg::StudyConfig c;
      if (cmd == repro)
        c = tfpg::table_config(table);
      else if (cmd == ode)
        c.mode = tfpg::StudyMode::Ode;
      else if (cmd == pde1d)
        c.mode = tfpg::StudyMode::Pde1d;
      else if (cmd == pde2d)
        c.mode = tfpg::StudyMode::Pde2d;
      else
        c.mode = tfpg::StudyMode::Infsup;
      if (cmd == infsup) {
        c.alphas.assign(tfpg::bench::kInfsupAlpha.begin(), tfpg::bench::kInfsupAlpha.end());
        c.Ks.assign(tfpg::bench::kInfsupK.begin(), tfpg::bench::kInfsupK.end());
      }
      apply(c, reg, f);
      for (const auto& [key, owner, opt] : extra) {
        if (owner != cmd || !opt->count()) continue;
        std::string joined;
        for (const auto& v : opt->results()) joined += (joined.empty() ? "" : ",") + v;
        tfpg::apply_setting(c, key, joined);
      }
      return run(c, cmd == repro ? table : 0);
    }
  } catch (const tfpg::DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const tfpg::NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return 0;
}
