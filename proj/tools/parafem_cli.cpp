// Command-line front end: refinement studies, invariant suites, trajectory norms.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

#include "parafem/verify.hpp"

namespace {

using namespace parafem;

struct StudyOptions {
  std::string problem = "smooth1d";
  int levels = 3;
  bool couple_tau = false;
  bool assert_rates = false;
  std::string out;
  std::string config;
  std::optional<double> eps;
  std::optional<Index> modes;
  std::optional<Index> base_steps;
  std::optional<Index> reference_grid;
  std::optional<double> tol_time;
  std::optional<double> tol_rel;
  bool timing = false;
};

int run_study_command(const StudyOptions& o, CLI::App& sub) {
  const TimeMode mode = o.couple_tau ? TimeMode::semi_discrete : TimeMode::full;
  StudyConfig cfg = default_study_config(o.problem, mode);
  if (!o.config.empty()) {
    std::ifstream f(o.config);
    if (!f) throw Error("cannot open config file '" + o.config + "'");
    apply_config(cfg, f);
  }
  // explicit command-line values override the file
  if (sub.count("--problem")) cfg.problem = o.problem;
  if (sub.count("--levels") || o.config.empty()) cfg.levels = o.levels;
  if (sub.count("--couple-tau")) cfg.mode = TimeMode::semi_discrete;
  if (!o.out.empty()) cfg.out = o.out;
  if (o.eps) cfg.eps = o.eps;
  if (o.modes) cfg.modes = o.modes;
  if (o.base_steps) cfg.base_steps = *o.base_steps;
  if (o.reference_grid) cfg.reference_grid = *o.reference_grid;
  if (o.tol_time) cfg.tol_time = *o.tol_time;
  if (o.tol_rel) cfg.tol_rel = *o.tol_rel;
  if (o.timing) cfg.timing = true;

  const ConvergenceReport report = run_study(cfg, [](const StudyRow& r) {
    std::fprintf(stderr, "level %d done: h = %.5g, e_W = %.5e\n", r.level, r.h, r.e_W);
  });
  std::cout << "problem " << report.problem << " ("
            << (cfg.mode == TimeMode::semi_discrete ? "semi-discrete reference" : "backward Euler") << ")\n"
            << format_table(report);
  if (!o.assert_rates) return 0;
  if (!report.has_rates()) {
    std::cerr << "rate assertion needs at least two levels\n";
    return 2;
  }
  bool ok = true;
  for (const auto& v : check_rates(report, cfg.mode)) {
    std::printf("%s rate %s: %.4f in [%g, %g]\n", v.passed ? "PASS" : "FAIL", v.column.c_str(), v.rate, v.lower,
                v.upper);
    ok = ok && v.passed;
  }
  return ok ? 0 : 2;
}

int run_verify_command() {
  bool ok = true;
  for (const auto& r : run_property_suites()) {
    std::printf("%s %s: %s (%.2f s)\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str(), r.seconds);
    ok = ok && r.passed;
  }
  return ok ? 0 : 1;
}

int run_norms_command(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open trajectory file '" + path + "'");
  const Trajectory traj = read_trajectory(f);
  std::printf("%-8s %-24s %-24s %-24s\n", "n", "t", "l2_norm", "h1_norm");
  for (Index n = 0; n <= traj.n_steps(); ++n) {
    const FeFunction u = traj.snapshot(n);
    std::printf("%-8td %-24.17g %-24.17g %-24.17g\n", n, traj.times[n], l2_norm(u), h1_norm(u));
  }
  if (traj.n_steps() >= 1) std::printf("discrete_energy_norm %.17g\n", discrete_energy_norm(traj));
  return 0;
}

int run_simulate_command(const std::string& problem_name, int level, Index steps, bool semi, double tol_time,
                         const std::string& out) {
  const ProblemSpec problem = make_problem(problem_name);
  const MeshPtr mesh = study_mesh(problem, level);
  const Trajectory traj = semi ? semi_discrete_reference(problem, mesh, tol_time, steps).trajectory
                               : backward_euler(problem, mesh, {steps});
  std::ofstream f(out);
  if (!f) throw Error("cannot write '" + out + "'");
  write_trajectory(f, traj);
  if (problem.exact) {
    const ErrorBundle e = w_norm_error(traj, problem);
    std::printf("e_W %.10e e_LinfL2 %.10e e_L2H1 %.10e e_disc %.10e\n", e.e_W, e.e_LinfL2, e.e_L2H1, e.e_disc);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"P1 finite elements with backward Euler for linear parabolic problems"};
  app.require_subcommand(1);

  StudyOptions so;
  auto* study = app.add_subcommand("study", "run a mesh refinement study and fit convergence rates");
  study->add_option("--problem", so.problem, "smooth1d, smooth2d, spectral-p2, spectral-p32 or checkerboard");
  study->add_option("--levels", so.levels, "number of mesh levels")->check(CLI::PositiveNumber);
  study->add_flag("--couple-tau", so.couple_tau,
                  "drive tau to zero on every mesh (semi-discrete reference) instead of N doubling per level");
  study->add_option("--out", so.out, "CSV report path");
  study->add_flag("--assert-rates", so.assert_rates, "exit with status 2 if a fitted rate is out of range");
  study->add_option("--config", so.config, "key = value configuration file");
  study->add_option("--eps", so.eps, "checkerboard contrast or spectral exponent shift");
  study->add_option("--modes", so.modes, "spectral field truncation (at most 512)");
  study->add_option("--base-steps", so.base_steps, "backward Euler steps on the coarsest level");
  study->add_option("--reference-grid", so.reference_grid, "output intervals of the semi-discrete reference");
  study->add_option("--tol-time", so.tol_time, "temporal convergence tolerance of the reference");
  study->add_option("--tol-rel", so.tol_rel, "relative tolerance of inner linear solves");
  study->add_flag("--timing", so.timing, "record wall time in the seconds column");

  auto* verify = app.add_subcommand("verify", "run the invariant suites");

  std::string traj_path;
  auto* norms = app.add_subcommand("norms", "norms of a dumped trajectory");
  norms->add_option("--traj", traj_path, "trajectory file")->required();

  std::string sim_problem = "smooth1d", sim_out;
  int sim_level = 0;
  Index sim_steps = 16;
  bool sim_semi = false;
  double sim_tol = 1e-8;
  auto* simulate = app.add_subcommand("simulate", "solve one problem on one mesh and dump the trajectory");
  simulate->add_option("--problem", sim_problem, "catalog problem name");
  simulate->add_option("--level", sim_level, "refinement level of the base mesh")->check(CLI::NonNegativeNumber);
  simulate->add_option("--steps", sim_steps, "time steps (output intervals with --semi)")->check(CLI::PositiveNumber);
  simulate->add_flag("--semi", sim_semi, "semi-discrete reference instead of plain backward Euler");
  simulate->add_option("--tol-time", sim_tol, "temporal tolerance with --semi");
  simulate->add_option("--out", sim_out, "trajectory file")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*study) return run_study_command(so, *study);
    if (*verify) return run_verify_command();
    if (*norms) return run_norms_command(traj_path);
    if (*simulate) return run_simulate_command(sim_problem, sim_level, sim_steps, sim_semi, sim_tol, sim_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
