#pragma once

#include <chrono>
#include <fstream>
#include <functional>
#include <map>

#include "parafem/timestepping.hpp"

namespace parafem {

/// Least-squares slope of log(err) against log(h).
inline double fit_rate(std::span<const double> hs, std::span<const double> errs) {
  if (hs.size() != errs.size()) throw std::invalid_argument("fit_rate: h and error lists differ in length");
  if (hs.size() < 2) throw std::invalid_argument("fit_rate: at least two points required");
  const auto n = static_cast<double>(hs.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    if (!(hs[i] > 0.0)) throw std::invalid_argument("fit_rate: mesh sizes must be positive");
    if (!(errs[i] > 0.0)) throw std::invalid_argument("fit_rate: errors must be positive");
    sx += std::log(hs[i]);
    sy += std::log(errs[i]);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    const double dx = std::log(hs[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(errs[i]) - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_rate: mesh sizes must not all coincide");
  return sxy / sxx;
}

/// Time discretization of a study: the tau -> 0 limit (semi-discrete
/// reference on every mesh) or backward Euler with N doubling per level.
enum class TimeMode { semi_discrete, full };

struct StudyConfig {
  std::string problem = "smooth1d";
  int levels = 3;
  TimeMode mode = TimeMode::full;
  Index base_steps = 4;            ///< backward Euler steps on level 0 (full mode)
  Index reference_grid = 64;       ///< output intervals of the semi-discrete reference
  double tol_time = 1e-8;          ///< temporal convergence tolerance of the reference
  double tol_rel = kDefaultSolverTolerance;
  std::optional<double> eps;       ///< checkerboard contrast or spectral exponent shift
  std::optional<Index> modes;      ///< spectral field truncation
  bool timing = false;             ///< record wall time in the seconds column
  std::string out;                 ///< CSV path; empty for none
};

/// Problem-specific defaults applied before explicit overrides.
inline StudyConfig default_study_config(const std::string& problem, TimeMode mode) {
  StudyConfig c;
  c.problem = problem;
  c.mode = mode;
  if (problem == "spectral-p2" || problem == "spectral-p32") {
    c.reference_grid = Index{1} << 13;
    c.tol_time = 1e-4;
  }
  return c;
}

struct StudyRow {
  int level = 0;
  double h = 0.0;
  double tau = 0.0;
  Index dofs = 0;
  double e_W = 0.0;
  double e_LinfL2 = 0.0;
  double e_L2H1 = 0.0;
  double seconds = 0.0;

  bool operator==(const StudyRow&) const = default;
};

struct ConvergenceReport {
  std::string problem;
  std::vector<StudyRow> rows;

  bool has_rates() const { return rows.size() >= 2; }

  double rate(double StudyRow::*column) const {
    if (!has_rates()) throw std::logic_error("ConvergenceReport: rates need at least two rows");
    std::vector<double> h, e;
    for (const auto& r : rows) {
      h.push_back(r.h);
      e.push_back(r.*column);
    }
    return fit_rate(h, e);
  }
};

inline const char* kCsvHeader = "level,h,tau,dofs,e_W,e_LinfL2,e_L2H1,seconds";

inline std::string format_csv_row(const StudyRow& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%td,%.17g,%.17g,%.17g,%.17g", r.level, r.h, r.tau, r.dofs, r.e_W,
                r.e_LinfL2, r.e_L2H1, r.seconds);
  return buf;
}

inline void write_csv(std::ostream& os, const ConvergenceReport& report) {
  os << kCsvHeader << '\n';
  for (const auto& r : report.rows) os << format_csv_row(r) << '\n';
}

inline ConvergenceReport parse_csv(std::istream& is) {
  ConvergenceReport report;
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) throw Error("parse_csv: missing or unexpected header");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 8) throw Error("parse_csv: expected 8 columns in '" + line + "'");
    try {
      StudyRow r;
      r.level = std::stoi(f[0]);
      r.h = std::stod(f[1]);
      r.tau = std::stod(f[2]);
      r.dofs = static_cast<Index>(std::stoll(f[3]));
      r.e_W = std::stod(f[4]);
      r.e_LinfL2 = std::stod(f[5]);
      r.e_L2H1 = std::stod(f[6]);
      r.seconds = std::stod(f[7]);
      report.rows.push_back(r);
    } catch (const std::logic_error&) {
      throw Error("parse_csv: malformed number in '" + line + "'");
    }
  }
  return report;
}

/// Aligned text table with fitted rates.
inline std::string format_table(const ConvergenceReport& report) {
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-6s %-11s %-11s %-8s %-12s %-12s %-12s %s\n", "level", "h", "tau", "dofs", "e_W",
                "e_LinfL2", "e_L2H1", "seconds");
  os << buf;
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%-6d %-11.5g %-11.5g %-8td %-12.5e %-12.5e %-12.5e %.2f\n", r.level, r.h, r.tau,
                  r.dofs, r.e_W, r.e_LinfL2, r.e_L2H1, r.seconds);
    os << buf;
  }
  if (report.has_rates()) {
    std::snprintf(buf, sizeof buf, "%-6s %-11s %-11s %-8s %-12.3f %-12.3f %-12.3f\n", "rate", "", "", "",
                  report.rate(&StudyRow::e_W), report.rate(&StudyRow::e_LinfL2), report.rate(&StudyRow::e_L2H1));
    os << buf;
  }
  return os.str();
}

/// Mesh of refinement level `level` for a catalog problem.
inline MeshPtr study_mesh(const ProblemSpec& problem, int level) {
  return share(refine_uniform(problem.base_mesh(), level));
}

/// One row of a study: solve on the level mesh and measure errors.
inline StudyRow run_level(const ProblemSpec& problem, const StudyConfig& cfg, int level) {
  const auto start = std::chrono::steady_clock::now();
  const MeshPtr mesh = study_mesh(problem, level);
  StudyRow row;
  row.level = level;
  row.h = mesh->h_max();
  row.dofs = mesh->n_free();
  Trajectory traj;
  if (cfg.mode == TimeMode::semi_discrete) {
    traj = semi_discrete_reference(problem, mesh, cfg.tol_time, cfg.reference_grid, cfg.tol_rel).trajectory;
    row.tau = 0.0;
  } else {
    const StepperConfig sc{cfg.base_steps << level, cfg.tol_rel};
    row.tau = sc.tau(problem.T);
    traj = backward_euler(problem, mesh, sc);
  }
  const ErrorBundle e = ErrorEvaluator(problem, mesh, cfg.tol_rel).evaluate(traj, false);
  row.e_W = e.e_W;
  row.e_LinfL2 = e.e_LinfL2;
  row.e_L2H1 = e.e_L2H1;
  if (cfg.timing)
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

/// Runs all levels in order. When cfg.out is set the CSV is rewritten after
/// every completed level, so a failing level leaves the finished rows on disk.
inline ConvergenceReport run_study(const StudyConfig& cfg,
                                   const std::function<void(const StudyRow&)>& on_row = {}) {
  if (cfg.levels < 1) throw std::invalid_argument("run_study: at least one level required");
  const ProblemSpec problem = make_problem(cfg.problem, cfg.eps, cfg.modes);
  if (!problem.exact) throw std::invalid_argument("run_study: problem has no exact solution");
  ConvergenceReport report;
  report.problem = problem.name;
  auto flush = [&] {
    if (cfg.out.empty()) return;
    std::ofstream f(cfg.out, std::ios::trunc);
    if (!f) throw Error("run_study: cannot write '" + cfg.out + "'");
    write_csv(f, report);
  };
  for (int level = 0; level < cfg.levels; ++level) {
    StudyRow row;
    try {
      row = run_level(problem, cfg, level);
    } catch (...) {
      flush();
      throw;
    }
    report.rows.push_back(row);
    flush();
    if (on_row) on_row(row);
  }
  return report;
}

/// Admissible interval for the fitted rate of one error column.
struct RateExpectation {
  std::string column;
  double StudyRow::*member;
  double lower;
  double upper;
};

/// Rates asserted by `study --assert-rates`.
inline std::vector<RateExpectation> expected_rates(const std::string& problem, TimeMode mode) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<RateExpectation> r;
  if (problem == "checkerboard") {
    r.push_back({"e_W", &StudyRow::e_W, 0.85, 1.15});
    r.push_back({"e_LinfL2", &StudyRow::e_LinfL2, 1.5, inf});
  } else if (problem == "spectral-p2" || problem == "spectral-p32") {
    r.push_back({"e_W", &StudyRow::e_W, 0.85, 1.15});
    r.push_back({"e_LinfL2", &StudyRow::e_LinfL2, -inf, 1.3});
  } else if (mode == TimeMode::semi_discrete) {
    r.push_back({"e_W", &StudyRow::e_W, 0.9, 1.1});
  } else {
    r.push_back({"e_W", &StudyRow::e_W, 0.85, 1.15});
  }
  return r;
}

struct RateVerdict {
  std::string column;
  double rate;
  double lower;
  double upper;
  bool passed;
};

inline std::vector<RateVerdict> check_rates(const ConvergenceReport& report, TimeMode mode) {
  std::vector<RateVerdict> out;
  if (!report.has_rates()) return out;
  for (const auto& e : expected_rates(report.problem, mode)) {
    const double r = report.rate(e.member);
    out.push_back({e.column, r, e.lower, e.upper, r >= e.lower && r <= e.upper});
  }
  return out;
}

/// Applies "key = value" lines ('#' starts a comment) to a configuration.
inline void apply_config(StudyConfig& cfg, std::istream& is) {
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
    };
    if (trim(line).empty()) continue;
    if (eq == std::string::npos) throw Error("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    try {
      if (key == "problem") cfg.problem = value;
      else if (key == "levels") cfg.levels = std::stoi(value);
      else if (key == "mode") {
        if (value == "semi") cfg.mode = TimeMode::semi_discrete;
        else if (value == "full") cfg.mode = TimeMode::full;
        else throw Error("config line " + std::to_string(lineno) + ": mode must be semi or full");
      }
      else if (key == "base_steps") cfg.base_steps = std::stoll(value);
      else if (key == "reference_grid") cfg.reference_grid = std::stoll(value);
      else if (key == "tol_time") cfg.tol_time = std::stod(value);
      else if (key == "tol_rel") cfg.tol_rel = std::stod(value);
      else if (key == "eps") cfg.eps = std::stod(value);
      else if (key == "modes") cfg.modes = std::stoll(value);
      else if (key == "timing") cfg.timing = (value == "1" || value == "true");
      else if (key == "out") cfg.out = value;
      else throw Error("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    } catch (const std::logic_error&) {
      throw Error("config line " + std::to_string(lineno) + ": malformed value for '" + key + "'");
    }
  }
}

}  // namespace parafem
