// Acceptance criteria AC1-AC6: one PASS/FAIL line per criterion.
// Usage: acceptance [AC1 AC2 ...]  (all criteria when no argument is given)

#include <chrono>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>

#include "parafem/verify.hpp"

namespace {

using namespace parafem;

struct Verdict {
  bool passed = false;
  std::string detail;
};

double elapsed_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ConvergenceReport semi_study(const std::string& problem, int levels, std::optional<Index> modes = std::nullopt) {
  StudyConfig cfg = default_study_config(problem, TimeMode::semi_discrete);
  cfg.levels = levels;
  cfg.modes = modes;
  return run_study(cfg);
}

bool within(double v, double lo, double hi) { return v >= lo && v <= hi; }

Verdict ac1_checkerboard() {
  const auto start = std::chrono::steady_clock::now();
  const ConvergenceReport r = semi_study("checkerboard", 5);
  const double s = elapsed_since(start);
  const double rw = r.rate(&StudyRow::e_W), rl = r.rate(&StudyRow::e_LinfL2);
  const bool ok = within(rw, 0.85, 1.15) && rl >= 1.5 && s <= 300.0;
  return {ok, fmt("checkerboard eps=0.1, 5 levels: e_W rate %.3f in [0.85, 1.15], e_LinfL2 rate %.3f >= 1.5, "
                  "%.1f s <= 300 s",
                  rw, rl, s)};
}

Verdict ac2_smooth_order() {
  const auto start = std::chrono::steady_clock::now();
  const double r1 = semi_study("smooth1d", 4).rate(&StudyRow::e_W);
  const double r2 = semi_study("smooth2d", 4).rate(&StudyRow::e_W);
  const double s = elapsed_since(start);
  const bool ok = within(r1, 0.9, 1.1) && within(r2, 0.9, 1.1) && s <= 120.0;
  return {ok, fmt("semi-discrete, 4 levels: smooth1d e_W rate %.3f, smooth2d e_W rate %.3f in [0.9, 1.1], "
                  "%.1f s <= 120 s",
                  r1, r2, s)};
}

Verdict ac3_temporal_order() {
  const auto start = std::chrono::steady_clock::now();
  const ProblemSpec p = make_smooth_1d();
  // e_W adds the spatial H1 error (~ h) to the temporal one; at h = 1/16384
  // it stays two orders below the temporal error at N = 64
  const MeshPtr mesh = share(build_interval_mesh(16384, 0.0, 1.0));
  const ErrorEvaluator eval(p, mesh);
  std::vector<double> taus, errs;
  std::string values;
  for (Index N : {8, 16, 32, 64}) {
    taus.push_back(p.T / static_cast<double>(N));
    errs.push_back(eval.evaluate(backward_euler(p, mesh, {N}), false).e_W);
    values += fmt("%s%.4e", values.empty() ? "" : ", ", errs.back());
  }
  const double rate = fit_rate(taus, errs);
  const double s = elapsed_since(start);
  const bool ok = within(rate, 0.85, 1.15) && s <= 60.0;
  return {ok, fmt("smooth1d h=1/16384, N=8..64 (e_W %s): rate in tau %.3f in [0.85, 1.15], %.1f s <= 60 s",
                  values.c_str(), rate, s)};
}

Verdict ac4_rough_solution() {
  const auto start = std::chrono::steady_clock::now();
  // field evaluated with the largest admissible truncation
  const Index modes = kMaxSpectralModes;
  const ConvergenceReport r = semi_study("spectral-p2", 4, modes);
  const double s = elapsed_since(start);
  const double rw = r.rate(&StudyRow::e_W), rl = r.rate(&StudyRow::e_LinfL2);
  const bool ok = within(rw, 0.85, 1.15) && rl <= 1.3 && s <= 300.0;
  return {ok, fmt("spectral p=2 eps=0.05, %td modes, 4 levels: e_W rate %.3f in [0.85, 1.15], "
                  "e_LinfL2 rate %.3f <= 1.3, %.1f s <= 300 s",
                  modes, rw, rl, s)};
}

Verdict ac5_property_suites() {
  bool ok = true;
  std::string detail;
  for (const auto& r : run_property_suites()) {
    const bool suite_ok = r.passed && r.seconds <= 30.0;
    ok = ok && suite_ok;
    detail += fmt("\n    %s %s: %s (%.2f s)", suite_ok ? "pass" : "FAIL", r.name.c_str(), r.detail.c_str(), r.seconds);
  }
  return {ok, "property suites, each <= 30 s:" + detail};
}

Verdict ac6_determinism() {
  StudyConfig cfg = default_study_config("checkerboard", TimeMode::semi_discrete);
  cfg.levels = 3;
  std::ostringstream a, b;
  write_csv(a, run_study(cfg));
  write_csv(b, run_study(cfg));
  const bool ok = a.str() == b.str() && !a.str().empty();
  return {ok, fmt("checkerboard, 3 levels, semi-discrete: two runs give %s CSV (%zu bytes)",
                  ok ? "byte-identical" : "DIFFERENT", a.str().size())};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"AC1", ac1_checkerboard},   {"AC2", ac2_smooth_order},      {"AC3", ac3_temporal_order},
      {"AC4", ac4_rough_solution}, {"AC5", ac5_property_suites}, {"AC6", ac6_determinism}};
  std::set<std::string> selected(argv + 1, argv + argc);
  for (const auto& s : selected) {
    if (std::none_of(criteria.begin(), criteria.end(), [&](const auto& c) { return c.first == s; })) {
      std::fprintf(stderr, "unknown criterion '%s' (expected AC1..AC6)\n", s.c_str());
      return 1;
    }
  }
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    if (!selected.empty() && !selected.count(name)) continue;
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s: %s\n", v.passed ? "PASS" : "FAIL", name.c_str(), v.detail.c_str());
    std::fflush(stdout);
    failures += !v.passed;
  }
  return failures == 0 ? 0 : 1;
}
