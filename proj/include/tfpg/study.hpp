#pragma once

// Convergence studies over (alpha, K) grids: configuration, execution on a
// small worker pool, observed rates, and CSV / Markdown reports.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "tfpg/benchmarks.hpp"
#include "tfpg/errors.hpp"
#include "tfpg/fem_space.hpp"
#include "tfpg/frac_ode.hpp"
#include "tfpg/frac_time.hpp"
#include "tfpg/spacetime.hpp"
#include "tfpg/time_source.hpp"

namespace tfpg {

enum class StudyMode { Ode, Pde1d, Pde2d, Infsup };
enum class ReportFormat { Csv, Markdown };

inline std::string to_string(StudyMode m) {
  switch (m) {
    case StudyMode::Ode: return "ode";
    case StudyMode::Pde1d: return "pde1d";
    case StudyMode::Pde2d: return "pde2d";
    default: return "infsup";
  }
}

inline StudyMode parse_mode(const std::string& s) {
  if (s == "ode") return StudyMode::Ode;
  if (s == "pde1d") return StudyMode::Pde1d;
  if (s == "pde2d") return StudyMode::Pde2d;
  if (s == "infsup") return StudyMode::Infsup;
  throw DomainError("unknown mode '" + s + "' (expected ode, pde1d, pde2d or infsup)");
}

inline ReportFormat parse_format(const std::string& s) {
  if (s == "csv") return ReportFormat::Csv;
  if (s == "markdown" || s == "md") return ReportFormat::Markdown;
  throw DomainError("unknown format '" + s + "' (expected csv or markdown)");
}

/// "exp", "expm1", "sin", "const:<c>" or "pow:<gamma>".
inline TimeSource parse_time_source(const std::string& s) {
  if (s == "exp") return ExpSource{};
  if (s == "expm1") return ExpMinusOneSource{};
  if (s == "sin") return SinSource{};
  const auto colon = s.find(':');
  if (colon != std::string::npos) {
    const std::string head = s.substr(0, colon);
    double v = 0.0;
    try {
      std::size_t used = 0;
      v = std::stod(s.substr(colon + 1), &used);
      if (used != s.size() - colon - 1) throw std::invalid_argument(s);
    } catch (const std::exception&) {
      throw DomainError("bad number in source '" + s + "'");
    }
    if (head == "const") return ConstantSource{v};
    if (head == "pow") return make_power_source(v);
  }
  throw DomainError("unknown source '" + s + "' (expected exp, expm1, sin, const:<c>, pow:<g>)");
}

struct StudyConfig {
  StudyMode mode = StudyMode::Ode;
  std::vector<double> alphas{0.3, 0.5, 0.7, 0.9};
  std::vector<int> Ks{10, 20, 40, 80, 160, 320};
  int M = 0;                // 0 picks the mode default
  std::vector<char> cases;  // empty picks the mode default
  double lambda = 1.0;
  TimeSource source = ExpSource{};  // scalar mode only
  int ref_K = 2000;
  double T = 1.0;
  std::string out;  // empty writes to stdout
  ReportFormat format = ReportFormat::Csv;
  bool fast = false;
  int jobs = 1;
  TimeNorm norm = TimeNorm::ReferenceNodes;
};

inline int effective_M(const StudyConfig& c) {
  if (c.M > 0) return c.M;
  if (c.mode == StudyMode::Pde1d) return c.fast ? 512 : 2000;
  if (c.mode == StudyMode::Pde2d) return c.fast ? 32 : 100;
  return 0;
}

inline int effective_ref_K(const StudyConfig& c) { return c.fast ? std::min(c.ref_K, 1024) : c.ref_K; }

inline std::vector<char> effective_cases(const StudyConfig& c) {
  if (!c.cases.empty()) return c.cases;
  if (c.mode == StudyMode::Pde1d) return {'a', 'b', 'c', 'd'};
  if (c.mode == StudyMode::Pde2d) return {'e', 'f'};
  return {};
}

/// Throws DomainError on invalid settings; returns warnings.
inline std::vector<std::string> validate_config(const StudyConfig& c) {
  std::vector<std::string> warnings;
  detail::require(!c.alphas.empty(), "config: alpha list is empty");
  for (double a : c.alphas)
    detail::require(a > 0.0 && a < 1.0, "config: alpha " + std::to_string(a) + " not in (0,1)");
  detail::require(!c.Ks.empty(), "config: K list is empty");
  for (std::size_t i = 0; i < c.Ks.size(); ++i) {
    detail::require(c.Ks[i] >= 1, "config: K values must be positive");
    if (i > 0) {
      detail::require(c.Ks[i] > c.Ks[i - 1], "config: K list must be strictly increasing");
      if (c.Ks[i] != 2 * c.Ks[i - 1])
        warnings.push_back("K list is not a doubling sequence; rates use log2 of error ratios");
    }
  }
  detail::require(std::isfinite(c.T) && c.T > 0.0, "config: T must be positive");
  detail::require(c.jobs >= 1, "config: jobs must be at least 1");
  if (c.mode != StudyMode::Infsup)
    detail::require(effective_ref_K(c) > c.Ks.back(),
                    "config: ref_K (" + std::to_string(effective_ref_K(c)) +
                        ") must exceed the largest K (" + std::to_string(c.Ks.back()) + ")");
  if (c.mode == StudyMode::Ode) {
    detail::require(std::isfinite(c.lambda) && c.lambda >= 0.0, "config: lambda must be nonnegative");
    detail::validate(c.source);
    detail::require(c.cases.empty(), "config: cases do not apply to the ode mode");
  }
  if (c.mode == StudyMode::Infsup)
    detail::require(c.cases.empty(), "config: cases do not apply to the infsup mode");
  if (c.mode == StudyMode::Pde1d || c.mode == StudyMode::Pde2d) {
    const int dim = c.mode == StudyMode::Pde1d ? 1 : 2;
    for (char k : effective_cases(c)) {
      detail::require(valid_case(k), std::string("config: unknown case '") + k + "'");
      detail::require(case_dimension(k) == dim, std::string("config: case '") + k +
                                                    "' is not a " + std::to_string(dim) +
                                                    "-D case");
    }
    detail::require(effective_M(c) >= 2, "config: M must be at least 2");
  }
  return warnings;
}

struct ReportRow {
  std::string mode;
  std::string case_tag;
  double alpha = 0.0;
  int K = 0;
  std::optional<double> h;
  double err_l2 = 0.0;
  std::optional<double> err_aux;
  std::optional<double> rate;

  bool operator==(const ReportRow&) const = default;
};

struct RateSummary {
  std::string case_tag;
  double alpha = 0.0;
  std::optional<double> mean_rate_l2;
  std::optional<double> mean_rate_aux;
  std::optional<double> theory_l2;
  std::optional<double> theory_aux;
};

struct ConvergenceReport {
  std::string mode;
  std::vector<ReportRow> rows;
  std::vector<RateSummary> summaries;
  std::vector<std::string> warnings;
};

struct RateSeries {
  std::vector<double> rates;
  double mean = 0.0;
};

/// rate_i = log2(e_i / e_{i+1}) and their mean.
inline RateSeries pairwise_rates(const std::vector<double>& errors) {
  RateSeries r;
  for (double e : errors)
    detail::require(e > 0.0 && std::isfinite(e), "pairwise_rates: errors must be positive");
  for (std::size_t i = 0; i + 1 < errors.size(); ++i)
    r.rates.push_back(std::log2(errors[i] / errors[i + 1]));
  if (!r.rates.empty()) {
    double s = 0.0;
    for (double v : r.rates) s += v;
    r.mean = s / static_cast<double>(r.rates.size());
  }
  return r;
}

namespace detail {

struct GroupResult {
  std::vector<ReportRow> rows;
  RateSummary summary;
};

inline std::optional<double> mean_rate(const std::vector<double>& errors) {
  if (errors.size() < 2) return std::nullopt;
  for (double e : errors)
    if (!(e > 0.0)) return std::nullopt;
  return pairwise_rates(errors).mean;
}

inline void attach_rates(std::vector<ReportRow>& rows) {
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i - 1].err_l2 > 0.0 && rows[i].err_l2 > 0.0)
      rows[i].rate = std::log2(rows[i - 1].err_l2 / rows[i].err_l2);
}

inline GroupResult summarize(std::vector<ReportRow> rows, const std::string& tag, double alpha,
                             std::optional<double> theory_l2, std::optional<double> theory_aux) {
  attach_rates(rows);
  std::vector<double> l2;
  std::vector<double> aux;
  bool have_aux = true;
  for (const auto& r : rows) {
    l2.push_back(r.err_l2);
    if (r.err_aux)
      aux.push_back(*r.err_aux);
    else
      have_aux = false;
  }
  RateSummary s{tag, alpha, mean_rate(l2), have_aux ? mean_rate(aux) : std::nullopt, theory_l2,
                theory_aux};
  return {std::move(rows), s};
}

inline GroupResult run_ode_group(const StudyConfig& c, double alpha) {
  const OdeSolution ref =
      solve_ode(OdeProblem{TemporalMesh(c.T, effective_ref_K(c), alpha), c.lambda, c.source});
  const OdeErrorMeter meter(ref, c.norm);
  std::vector<ReportRow> rows;
  for (int K : c.Ks) {
    const auto sol = solve_ode(OdeProblem{TemporalMesh(c.T, K, alpha), c.lambda, c.source});
    const auto e = meter(sol);
    rows.push_back({"ode", describe(c.source), alpha, K, std::nullopt, e.l2_rel, e.halpha_rel, {}});
  }
  std::optional<double> tl2;
  std::optional<double> taux;
  if (std::holds_alternative<ExpSource>(c.source)) {
    taux = std::min(alpha + 0.5, 1.0);
    tl2 = alpha + *taux;
  }
  return summarize(std::move(rows), describe(c.source), alpha, tl2, taux);
}

inline GroupResult run_pde_group(const StudyConfig& c, char tag, double alpha,
                                 const SpatialMesh& smesh, const SpatialMatrices& mats) {
  const SeparableSource source = case_source(tag);
  const SpaceTimeSolution ref =
      solve_spacetime(source, TemporalMesh(c.T, effective_ref_K(c), alpha), smesh, mats);
  const SpaceTimeErrorMeter meter(ref, mats, c.norm);
  std::vector<ReportRow> rows;
  for (int K : c.Ks) {
    const auto sol = solve_spacetime(source, TemporalMesh(c.T, K, alpha), smesh, mats);
    const auto e = meter(sol);
    rows.push_back({to_string(c.mode), std::string(1, tag), alpha, K, smesh.h, e.l2_qt_rel,
                    e.l2_final_rel, {}});
  }
  return summarize(std::move(rows), std::string(1, tag), alpha, case_theoretical_rate(tag, alpha),
                   std::nullopt);
}

inline GroupResult run_infsup_group(const StudyConfig& c, double alpha) {
  std::vector<ReportRow> rows;
  for (int K : c.Ks)
    rows.push_back({"infsup", "-", alpha, K, std::nullopt, stability_constant(alpha, K, c.T),
                    std::nullopt, std::nullopt});
  return {std::move(rows), RateSummary{"-", alpha, {}, {}, {}, {}}};
}

inline std::string describe_cell(const StudyConfig& c, char tag, double alpha) {
  std::ostringstream os;
  os << to_string(c.mode);
  if (tag) os << " case " << tag;
  os << " alpha=" << alpha;
  return os.str();
}

}  // namespace detail

/// Runs every (case, alpha) group; the reference solution of a group is
/// computed once and reused for all of its K values. Groups run on
/// `jobs` threads; the report order follows the configuration.
inline ConvergenceReport run_study(const StudyConfig& config) {
  ConvergenceReport report;
  report.mode = to_string(config.mode);
  report.warnings = validate_config(config);

  struct Job {
    char tag;
    double alpha;
  };
  std::vector<Job> jobs;
  const auto cases = effective_cases(config);
  if (cases.empty())
    for (double a : config.alphas) jobs.push_back({0, a});
  else
    for (char k : cases)
      for (double a : config.alphas) jobs.push_back({k, a});

  std::optional<SpatialMesh> smesh;
  std::optional<SpatialMatrices> mats;
  if (config.mode == StudyMode::Pde1d || config.mode == StudyMode::Pde2d) {
    smesh = build_mesh(config.mode == StudyMode::Pde1d ? 1 : 2, effective_M(config));
    mats = assemble(*smesh);
  }

  std::vector<detail::GroupResult> results(jobs.size());
  std::vector<std::exception_ptr> failures(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const Job& j = jobs[i];
      try {
        switch (config.mode) {
          case StudyMode::Ode: results[i] = detail::run_ode_group(config, j.alpha); break;
          case StudyMode::Infsup: results[i] = detail::run_infsup_group(config, j.alpha); break;
          default: results[i] = detail::run_pde_group(config, j.tag, j.alpha, *smesh, *mats);
        }
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const int threads = std::min<int>(config.jobs, static_cast<int>(jobs.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (!failures[i]) continue;
    const std::string where = detail::describe_cell(config, jobs[i].tag, jobs[i].alpha);
    try {
      std::rethrow_exception(failures[i]);
    } catch (const DomainError& e) {
      throw DomainError(where + ": " + e.what());
    } catch (const NumericError& e) {
      throw NumericError(where + ": " + e.what());
    }
  }
  for (auto& r : results) {
    report.rows.insert(report.rows.end(), r.rows.begin(), r.rows.end());
    report.summaries.push_back(r.summary);
  }
  return report;
}

namespace detail {

inline std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

inline std::string format_rate(std::optional<double> v) {
  if (!v) return "--";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.2f", *v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

inline std::string optional_field(const std::optional<double>& v) {
  return v ? format_full(*v) : std::string();
}

}  // namespace detail

inline constexpr const char* kCsvHeader = "mode,case,alpha,K,h,err_l2,err_aux,rate";

inline void write_csv(std::ostream& out, const ConvergenceReport& report) {
  out << kCsvHeader << '\n';
  for (const auto& r : report.rows) {
    out << detail::csv_field(r.mode) << ',' << detail::csv_field(r.case_tag) << ','
        << detail::format_full(r.alpha) << ',' << r.K << ',' << detail::optional_field(r.h) << ','
        << detail::format_full(r.err_l2) << ',' << detail::optional_field(r.err_aux) << ','
        << detail::optional_field(r.rate) << '\n';
  }
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  require(!quoted, "csv: unterminated quote");
  fields.push_back(cur);
  return fields;
}

inline double parse_number(const std::string& s, const char* column) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  require(!s.empty() && end && *end == '\0',
          std::string("csv: bad number '") + s + "' in column " + column);
  return v;
}

inline std::optional<double> parse_optional(const std::string& s, const char* column) {
  if (s.empty()) return std::nullopt;
  return parse_number(s, column);
}

}  // namespace detail

/// Rows of a report written by write_csv.
inline std::vector<ReportRow> parse_csv(std::istream& in) {
  std::string line;
  detail::require(static_cast<bool>(std::getline(in, line)) && line == kCsvHeader,
                  "csv: missing or unexpected header");
  std::vector<ReportRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    detail::require(f.size() == 8, "csv: expected 8 fields, got " + std::to_string(f.size()));
    ReportRow r;
    r.mode = f[0];
    r.case_tag = f[1];
    r.alpha = detail::parse_number(f[2], "alpha");
    const double K = detail::parse_number(f[3], "K");
    detail::require(K == std::floor(K), "csv: K must be an integer");
    r.K = static_cast<int>(K);
    r.h = detail::parse_optional(f[4], "h");
    r.err_l2 = detail::parse_number(f[5], "err_l2");
    r.err_aux = detail::parse_optional(f[6], "err_aux");
    r.rate = detail::parse_optional(f[7], "rate");
    rows.push_back(std::move(r));
  }
  return rows;
}

inline void write_markdown(std::ostream& out, const ConvergenceReport& report) {
  // group rows by (case, alpha) in report order
  struct Group {
    std::string tag;
    double alpha;
    std::vector<const ReportRow*> rows;
  };
  std::vector<Group> groups;
  std::vector<int> Ks;
  for (const auto& r : report.rows) {
    if (groups.empty() || groups.back().tag != r.case_tag || groups.back().alpha != r.alpha)
      groups.push_back({r.case_tag, r.alpha, {}});
    groups.back().rows.push_back(&r);
    if (std::find(Ks.begin(), Ks.end(), r.K) == Ks.end()) Ks.push_back(r.K);
  }
  const auto summary_for = [&](const Group& g) -> const RateSummary* {
    for (const auto& s : report.summaries)
      if (s.case_tag == g.tag && s.alpha == g.alpha) return &s;
    return nullptr;
  };
  const auto header = [&](const std::string& first, const std::string& second, bool rate) {
    out << "| " << first << " | " << second << " |";
    for (int K : Ks) out << ' ' << K << " |";
    if (rate) out << " rate |";
    out << "\n|---|---|";
    for (std::size_t i = 0; i < Ks.size(); ++i) out << "---|";
    if (rate) out << "---|";
    out << '\n';
  };
  const auto cells = [&](const Group& g, bool aux) {
    for (int K : Ks) {
      const ReportRow* hit = nullptr;
      for (const auto* r : g.rows)
        if (r->K == K) hit = r;
      if (!hit)
        out << "  |";
      else if (aux)
        out << ' ' << (hit->err_aux ? detail::format_short(*hit->err_aux) : "--") << " |";
      else
        out << ' ' << detail::format_short(hit->err_l2) << " |";
    }
  };
  const auto rate_cell = [&](std::optional<double> rate, std::optional<double> theory) {
    out << ' ' << detail::format_rate(rate) << " (" << detail::format_rate(theory) << ") |\n";
  };

  if (report.mode == "infsup") {
    out << "| alpha \\ K |";
    for (int K : Ks) out << ' ' << K << " |";
    out << "\n|---|";
    for (std::size_t i = 0; i < Ks.size(); ++i) out << "---|";
    out << '\n';
    for (const auto& g : groups) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%g", g.alpha);
      out << "| " << buf << " |";
      for (int K : Ks) {
        const ReportRow* hit = nullptr;
        for (const auto* r : g.rows)
          if (r->K == K) hit = r;
        if (hit) {
          std::snprintf(buf, sizeof buf, "%.4f", hit->err_l2);
          out << ' ' << buf << " |";
        } else {
          out << "  |";
        }
      }
      out << '\n';
    }
    return;
  }

  if (report.mode == "ode") {
    header("alpha", "norm", true);
    for (const auto& g : groups) {
      const RateSummary* s = summary_for(g);
      char buf[32];
      std::snprintf(buf, sizeof buf, "%g", g.alpha);
      out << "| " << buf << " | L2 |";
      cells(g, false);
      rate_cell(s ? s->mean_rate_l2 : std::nullopt, s ? s->theory_l2 : std::nullopt);
      out << "|  | H^alpha |";
      cells(g, true);
      rate_cell(s ? s->mean_rate_aux : std::nullopt, s ? s->theory_aux : std::nullopt);
    }
    return;
  }

  out << "L2(Q_T) relative error\n\n";
  header("case", "alpha \\ K", true);
  for (const auto& g : groups) {
    const RateSummary* s = summary_for(g);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", g.alpha);
    out << "| (" << g.tag << ") | " << buf << " |";
    cells(g, false);
    rate_cell(s ? s->mean_rate_l2 : std::nullopt, s ? s->theory_l2 : std::nullopt);
  }
  out << "\nrelative L2 error at t = T\n\n";
  header("case", "alpha \\ K", true);
  for (const auto& g : groups) {
    const RateSummary* s = summary_for(g);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", g.alpha);
    out << "| (" << g.tag << ") | " << buf << " |";
    cells(g, true);
    rate_cell(s ? s->mean_rate_aux : std::nullopt, std::nullopt);
  }
}

inline void emit_report(const ConvergenceReport& report, ReportFormat format, std::ostream& out) {
  if (format == ReportFormat::Csv)
    write_csv(out, report);
  else
    write_markdown(out, report);
}

/// Writes to `path`; I/O failures are reported with the path.
inline void emit_report(const ConvergenceReport& report, ReportFormat format,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  emit_report(report, format, out);
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
std::vector<T> parse_list(const std::string& value, const std::string& key) {
  std::vector<T> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    require(!item.empty(), "config: empty entry in '" + key + "'");
    if constexpr (std::is_same_v<T, std::string>) {
      out.push_back(item);
      continue;
    }
    try {
      std::size_t used = 0;
      if constexpr (std::is_same_v<T, int>) {
        out.push_back(std::stoi(item, &used));
      } else if constexpr (std::is_same_v<T, double>) {
        out.push_back(std::stod(item, &used));
      }
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw DomainError("config: bad value '" + item + "' for '" + key + "'");
    }
  }
  require(!out.empty(), "config: '" + key + "' is empty");
  return out;
}

inline bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw DomainError("config: bad boolean '" + v + "' for '" + key + "'");
}

}  // namespace detail

/// Applies one key=value setting.
inline void apply_setting(StudyConfig& c, const std::string& key, const std::string& value) {
  if (key == "mode") {
    c.mode = parse_mode(value);
  } else if (key == "alpha") {
    c.alphas = detail::parse_list<double>(value, key);
  } else if (key == "K") {
    c.Ks = detail::parse_list<int>(value, key);
  } else if (key == "M") {
    c.M = detail::parse_list<int>(value, key).at(0);
  } else if (key == "case") {
    c.cases.clear();
    for (const auto& item : detail::parse_list<std::string>(value, key)) {
      detail::require(item.size() == 1 && valid_case(item[0]), "config: bad case '" + item + "'");
      c.cases.push_back(item[0]);
    }
  } else if (key == "lambda") {
    c.lambda = detail::parse_list<double>(value, key).at(0);
  } else if (key == "source") {
    c.source = parse_time_source(value);
  } else if (key == "ref_K" || key == "ref-K") {
    c.ref_K = detail::parse_list<int>(value, key).at(0);
  } else if (key == "T") {
    c.T = detail::parse_list<double>(value, key).at(0);
  } else if (key == "out") {
    c.out = value;
  } else if (key == "format") {
    c.format = parse_format(value);
  } else if (key == "fast") {
    c.fast = detail::parse_bool(value, key);
  } else if (key == "jobs") {
    c.jobs = detail::parse_list<int>(value, key).at(0);
  } else if (key == "norm") {
    if (value == "exact")
      c.norm = TimeNorm::Exact;
    else if (value == "reference-nodes" || value == "nodal")
      c.norm = TimeNorm::ReferenceNodes;
    else
      throw DomainError("config: bad norm '" + value + "' (expected exact or nodal)");
  } else {
    throw DomainError("config: unknown key '" + key + "'");
  }
}

/// Plain key=value lines; '#' starts a comment.
inline void apply_config_file(StudyConfig& c, std::istream& in) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    detail::require(eq != std::string::npos,
                    "config line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    detail::require(!key.empty() && !value.empty(),
                    "config line " + std::to_string(lineno) + ": empty key or value");
    apply_setting(c, key, value);
  }
}

/// Deviation of a study from the published values of one table.
/// Values are compared relatively, except the stability constants (absolute).
struct TableComparison {
  int cells = 0;
  double worst_value_dev = 0.0;
  int rates = 0;
  double worst_rate_dev = 0.0;
  std::vector<std::string> lines;
};

inline TableComparison compare_with_published(const ConvergenceReport& report, int table) {
  TableComparison out;
  const auto column_of = [](const auto& grid, int K) -> int {
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (grid[i] == K) return static_cast<int>(i);
    return -1;
  };
  const auto note = [&](const std::string& what, double got, double want, double dev) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s: got %.4g, published %.4g, deviation %.3g", what.c_str(),
                  got, want, dev);
    out.lines.push_back(buf);
  };
  const auto label = [](const std::string& tag, double alpha, const char* col, int K) {
    char buf[80];
    if (K > 0)
      std::snprintf(buf, sizeof buf, "%s alpha=%g %s K=%d", tag.c_str(), alpha, col, K);
    else
      std::snprintf(buf, sizeof buf, "%s alpha=%g %s", tag.c_str(), alpha, col);
    return std::string(buf);
  };

  if (table == 1) {
    for (const auto& r : report.rows) {
      int ai = -1;
      for (std::size_t i = 0; i < bench::kInfsupAlpha.size(); ++i)
        if (bench::kInfsupAlpha[i] == r.alpha) ai = static_cast<int>(i);
      const int k = column_of(bench::kInfsupK, r.K);
      if (ai < 0 || k < 0) continue;
      const double want = bench::infsup_table()[ai][k];
      const double dev = std::abs(r.err_l2 - want);
      ++out.cells;
      out.worst_value_dev = std::max(out.worst_value_dev, dev);
      note(label("c", r.alpha, "", r.K), r.err_l2, want, dev);
    }
    return out;
  }

  const auto value_check = [&](const std::vector<bench::Row>& published, char tag, bool aux,
                               const char* col) {
    for (const auto& r : report.rows) {
      const char rt = r.case_tag.size() == 1 ? r.case_tag[0] : 0;
      if (table != 2 && rt != tag) continue;
      const bench::Row* row = bench::find(published, tag, r.alpha);
      const int k = column_of(bench::kStudyK, r.K);
      if (!row || k < 0) continue;
      const std::optional<double> got = aux ? r.err_aux : std::optional<double>(r.err_l2);
      if (!got) continue;
      const double want = row->values[k];
      const double dev = std::abs(*got / want - 1.0);
      ++out.cells;
      out.worst_value_dev = std::max(out.worst_value_dev, dev);
      note(label(std::string(1, tag), r.alpha, col, r.K), *got, want, dev);
    }
    for (const auto& s : report.summaries) {
      const char st = s.case_tag.size() == 1 ? s.case_tag[0] : 0;
      if (table != 2 && st != tag) continue;
      const bench::Row* row = bench::find(published, tag, s.alpha);
      const std::optional<double> got = aux ? s.mean_rate_aux : s.mean_rate_l2;
      if (!row || !row->rate || !got) continue;
      const double dev = std::abs(*got - *row->rate);
      ++out.rates;
      out.worst_rate_dev = std::max(out.worst_rate_dev, dev);
      note(label(std::string(1, tag), s.alpha, col, 0) + " mean rate", *got, *row->rate, dev);
    }
  };

  switch (table) {
    case 2:
      value_check(bench::ode_table(), 'l', false, "L2");
      value_check(bench::ode_table(), 'h', true, "H^alpha");
      break;
    case 3:
      for (char c : {'a', 'b', 'c', 'd'}) value_check(bench::pde1d_table(), c, false, "L2(Q_T)");
      break;
    case 4:
      for (char c : {'c', 'd'}) value_check(bench::final_time_table(), c, true, "final");
      break;
    case 5:
      for (char c : {'e', 'f'}) value_check(bench::pde2d_table(), c, false, "L2(Q_T)");
      break;
    default:
      throw DomainError("unknown table " + std::to_string(table) + " (expected 1..5)");
  }
  return out;
}

/// Preset reproducing one of the published benchmark tables (1..5).
inline StudyConfig table_config(int table) {
  StudyConfig c;
  switch (table) {
    case 1:
      c.mode = StudyMode::Infsup;
      c.alphas.assign(bench::kInfsupAlpha.begin(), bench::kInfsupAlpha.end());
      c.Ks.assign(bench::kInfsupK.begin(), bench::kInfsupK.end());
      break;
    case 2:
      c.mode = StudyMode::Ode;
      c.source = ExpSource{};
      c.lambda = 1.0;
      break;
    case 3:
      c.mode = StudyMode::Pde1d;
      break;
    case 4:
      c.mode = StudyMode::Pde1d;
      c.cases = {'c', 'd'};
      break;
    case 5:
      c.mode = StudyMode::Pde2d;
      break;
    default:
      throw DomainError("unknown table " + std::to_string(table) + " (expected 1..5)");
  }
  return c;
}

}  // namespace tfpg
