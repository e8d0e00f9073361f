#pragma once

#include <random>

#include "parafem/study.hpp"

namespace parafem {

/// Outcome of one invariant suite.
struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

namespace checks {

inline std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

/// Square mesh with interior vertices jittered by up to `jitter` times the
/// spacing; the boundary and the connectivity are unchanged.
inline Mesh jittered_square_mesh(Index n, double x0, double x1, double jitter, std::mt19937_64& rng) {
  const Mesh base = build_square_mesh(n, x0, x1);
  std::uniform_real_distribution<double> u(-jitter, jitter);
  const double h = (x1 - x0) / static_cast<double>(n);
  std::vector<Point> v = base.vertices();
  for (Index i = 0; i < base.n_vertices(); ++i)
    if (!base.is_boundary(i)) v[i] = {v[i][0] + h * u(rng), v[i][1] + h * u(rng)};
  return Mesh::from_parts(2, std::move(v), base.cells(), base.box());
}

inline Mesh jittered_interval_mesh(Index n, double jitter, std::mt19937_64& rng) {
  const Mesh base = build_interval_mesh(n, 0.0, 1.0);
  std::uniform_real_distribution<double> u(-jitter, jitter);
  const double h = 1.0 / static_cast<double>(n);
  std::vector<Point> v = base.vertices();
  for (Index i = 0; i < base.n_vertices(); ++i)
    if (!base.is_boundary(i)) v[i][0] += h * u(rng);
  return Mesh::from_parts(1, std::move(v), base.cells(), base.box());
}

inline Vector random_vector(Index n, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Vector v(static_cast<std::size_t>(n));
  for (auto& x : v) x = u(rng);
  return v;
}

inline SpatialField sine_field_1d(double k) {
  return {[k](const Point& x) { return std::sin(k * x[0]); },
          [k](const Point& x) { return Vec2{k * std::cos(k * x[0]), 0.0}; }};
}

/// Variable coefficients with advection and reaction and declared bounds.
inline CoefficientField variable_coefficients(int dim) {
  CoefficientField c;
  c.a = [](const Point& x, double t) { return 1.0 + 0.5 * std::sin(3.0 * x[0] + x[1]) * std::cos(t); };
  c.b = [dim](const Point& x, double t) {
    return Vec2{0.8 * std::cos(2.0 * x[1] + t), dim == 2 ? 0.6 * std::sin(x[0]) : 0.0};
  };
  c.c = [](const Point& x, double) { return 0.7 * std::cos(5.0 * x[0]); };
  c.a_lower = 0.5;
  c.a_sup = 1.5;
  c.b_sup = 1.0;
  c.c_sup = 0.7;
  c.time_dependent = true;
  return c;
}

/// Projection idempotence on V_h members and L2 orthogonality of the residual.
inline CheckResult projection_identities() {
  CheckResult r;
  r.name = "projection idempotence and orthogonality";
  std::mt19937_64 rng(11);
  double worst_idem = 0.0, worst_orth = 0.0;
  for (int dim = 1; dim <= 2; ++dim) {
    const MeshPtr m = share(dim == 1 ? jittered_interval_mesh(12, 0.3, rng) : jittered_square_mesh(6, 0.0, 1.0, 0.2, rng));
    const FeFunction v(m, random_vector(m->n_free(), rng));
    const PointLocator loc(m);
    const FeFunction p1 = l2_project(m, loc.as_field(v).value);
    const FeFunction p2 = l2_project(m, v);
    worst_idem = std::max({worst_idem, norm_inf(linear_combination(1.0, p1.values, -1.0, v.values)),
                           norm_inf(linear_combination(1.0, p2.values, -1.0, v.values))});
    const ScalarFunction g = [](const Point& x) { return std::exp(x[0]) * std::sin(7.0 * x[0] + 2.0 * x[1]) + x[1]; };
    const FeFunction pg = l2_project(m, g);
    const Vector f = l2_pairing(*m, g);
    const Vector mp = matvec(assemble_mass(*m), pg.values);
    worst_orth = std::max(worst_orth, norm_inf(linear_combination(1.0, f, -1.0, mp)));
  }
  r.passed = worst_idem <= 1e-9 && worst_orth <= 1e-9;
  r.detail = fmt("max idempotence defect %.3e, max orthogonality defect %.3e", worst_idem, worst_orth);
  return r;
}

/// Convergence rates of pi_h sin(pi x) in L2, H1 and the discrete H^-1 surrogate.
inline CheckResult projection_rates() {
  CheckResult r;
  r.name = "projection approximation rates";
  const SpatialField g = sine_field_1d(std::numbers::pi);
  std::vector<double> hs, e0, e1, em1;
  for (int level = 0; level <= 4; ++level) {
    const MeshPtr m = share(refine_uniform(build_interval_mesh(4, 0.0, 1.0), level));
    const FeFunction p = l2_project(m, g.value);
    hs.push_back(m->h_max());
    e0.push_back(l2_error(p, g.value));
    e1.push_back(h1_error(p, g));
    const Mesh mid = refine_uniform(*m);
    const Mesh fine = refine_uniform(mid);
    const std::array<const Mesh*, 2> chain{&mid, &fine};
    Vector f = l2_pairing(fine, g.value);
    axpy(-1.0, matvec(assemble_mass(fine), matvec(prolongation(*m, chain), p.values)), f);
    em1.push_back(dual_norm_h(fine, f));
  }
  const double r0 = fit_rate(hs, e0), r1 = fit_rate(hs, e1), rm1 = fit_rate(hs, em1);
  r.passed = r0 >= 1.9 && r1 >= 0.9 && rm1 >= 2.8;
  r.detail = fmt("rates L2 %.3f (>= 1.9), H1 %.3f (>= 0.9), H^-1 %.3f (>= 2.8)", r0, r1, rm1);
  return r;
}

/// a(u,u;t) + eta |u|^2 >= alpha ||u||^2_{H1} and |a(u,v;t)| <= C_a ||u|| ||v||
/// on random discrete functions and times.
inline CheckResult garding_inequality() {
  CheckResult r;
  r.name = "Garding inequality and continuity";
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> time(0.0, 1.0);
  Index violations = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  for (int sample = 0; sample < 200; ++sample) {
    const int dim = 1 + sample % 2;
    const CoefficientField coeff = variable_coefficients(dim);
    const Mesh m = dim == 1 ? jittered_interval_mesh(10, 0.3, rng) : jittered_square_mesh(5, 0.0, 1.0, 0.2, rng);
    const double t = time(rng);
    const CsrMatrix a = assemble_form(m, coeff, t);
    const CsrMatrix mass = assemble_mass(m), h1 = assemble_h1_matrix(m);
    const Vector u = random_vector(m.n_free(), rng), v = random_vector(m.n_free(), rng);
    const double auu = dot(u, matvec(a, u));
    const double lhs = auu + coeff.garding_eta() * dot(u, matvec(mass, u));
    const double rhs = coeff.garding_alpha() * dot(u, matvec(h1, u));
    const double nu = std::sqrt(dot(u, matvec(h1, u))), nv = std::sqrt(dot(v, matvec(h1, v)));
    const double cont = std::abs(dot(v, matvec(a, u))) - coeff.continuity_constant() * nu * nv;
    worst_margin = std::min(worst_margin, (lhs - rhs) / rhs);
    if (lhs < rhs * (1.0 - 1e-12) || cont > 1e-12 * nu * nv) ++violations;
  }
  r.passed = violations == 0;
  r.detail = fmt("200 samples, %.0f violations, smallest relative margin %.3e", static_cast<double>(violations),
                 worst_margin);
  return r;
}

/// Problem with variable, time-dependent coefficients (including advection)
/// and a smooth exact solution, for stepper checks.
inline ProblemSpec advection_problem() {
  using std::numbers::pi;
  ProblemSpec p = make_smooth_2d();
  p.name = "advection2d";
  p.coeff = variable_coefficients(2);
  p.pointwise_f.reset();
  p.base_mesh = [] { return build_square_mesh(4, 0.0, 1.0); };
  return p;
}

/// Every step of every stepper run satisfies the scheme up to solver tolerance.
inline CheckResult galerkin_residuals() {
  CheckResult r;
  r.name = "Galerkin residual of backward Euler outputs";
  struct Case {
    ProblemSpec problem;
    MeshPtr mesh;
    Index N;
  };
  std::vector<Case> cases;
  cases.push_back({make_smooth_1d(), share(build_interval_mesh(32, 0.0, 1.0)), 16});
  cases.push_back({make_smooth_2d(), share(build_square_mesh(8, 0.0, 1.0)), 8});
  cases.push_back({make_checkerboard(0.1), share(build_square_mesh(8, -1.0, 1.0, true)), 8});
  cases.push_back({advection_problem(), share(build_square_mesh(8, 0.0, 1.0)), 8});
  double worst = 0.0;
  for (const auto& c : cases) {
    const Trajectory traj = backward_euler(c.problem, c.mesh, {c.N});
    const LoadEvaluator load(c.problem, *c.mesh);
    for (Index n = 1; n <= traj.n_steps(); ++n) {
      const Vector res = galerkin_residual(traj, c.problem, n);
      const double scale = std::max(norm_inf(load(traj.times[n])), 1e-300);
      worst = std::max(worst, norm_inf(res) / scale);
    }
  }
  r.passed = worst <= 1e-9;
  r.detail = fmt("max ||r||_inf / ||F||_inf = %.3e over %.0f runs", worst, static_cast<double>(cases.size()));
  return r;
}

/// Sparse solvers against the dense LU oracle on random assemblies: Krylov
/// methods on 2D systems, the library dispatcher (direct along paths) on 1D
/// systems. The right-hand sides are b = A v for random v of unit size,
/// i.e. solutions of the scale met in projections and time steps.
inline CheckResult solver_agreement() {
  CheckResult r;
  r.name = "sparse solvers vs dense oracle";
  std::mt19937_64 rng(37);
  double worst = 0.0;
  Index largest = 0;
  auto compare = [&](const CsrMatrix& a, bool spd, bool krylov_only) {
    const Vector b = matvec(a, random_vector(a.n(), rng));
    SolveResult s = krylov_only ? (spd ? solve_spd(a, b) : solve_general(a, b)) : solve_system(a, b, spd);
    const Vector x = require_converged(std::move(s), "solver agreement");
    const Vector y = solve_dense_oracle(DenseMatrix::from_sparse(a), b);
    worst = std::max(worst, norm_inf(linear_combination(1.0, x, -1.0, y)));
    largest = std::max(largest, a.n());
  };
  for (Index n : {3, 8, 14, 22}) {
    const Mesh m = jittered_square_mesh(n, 0.0, 1.0, 0.25, rng);
    compare(assemble_mass(m), true, true);
    compare(assemble_h1_matrix(m), true, true);
    compare(add(1.0, assemble_mass(m), 0.05, assemble_form(m, variable_coefficients(2), 0.3)), false, true);
  }
  for (Index n : {4, 33, 240}) {
    const Mesh m = refine_uniform(jittered_interval_mesh(n, 0.3, rng), 1);
    compare(assemble_mass(m), true, false);
    compare(assemble_h1_matrix(m), true, false);
    compare(add(1.0, assemble_mass(m), 0.05, assemble_form(m, variable_coefficients(1), 0.3)), false, false);
  }
  r.passed = worst <= 1e-8 && largest <= 500;
  r.detail = fmt("max |x - x_dense|_inf = %.3e, largest system n = %.0f", worst, static_cast<double>(largest));
  return r;
}

/// ||u^{n+1}||_L2 <= ||u^n||_L2 for f = 0, b = 0, c >= 0.
inline CheckResult l2_monotonicity() {
  CheckResult r;
  r.name = "backward Euler L2 monotonicity without load";
  Index violations = 0, steps = 0;
  for (int dim = 1; dim <= 2; ++dim) {
    ProblemSpec p;
    p.name = "decay";
    p.dim = dim;
    p.T = 1.0;
    CoefficientField c;
    c.a = [](const Point& x, double) { return 1.0 + 0.5 * std::sin(4.0 * x[0]); };
    c.c = [](const Point& x, double) { return 2.0 * x[0] * x[0]; };
    c.a_lower = 0.5;
    c.a_sup = 1.5;
    c.c_sup = 2.0;
    p.coeff = c;
    p.load = PointwiseLoad{[](const Point&, double) { return 0.0; }};
    p.u0 = [](const Point& x) { return std::sin(9.0 * x[0]) + std::cos(5.0 * x[1]) + (x[0] > 0.5 ? 1.0 : -1.0); };
    const MeshPtr m = share(dim == 1 ? build_interval_mesh(40, 0.0, 1.0) : build_square_mesh(12, 0.0, 1.0));
    for (Index N : {5, 40}) {
      const Trajectory traj = backward_euler(p, m, {N});
      double prev = l2_norm(traj.snapshot(0));
      for (Index n = 1; n <= traj.n_steps(); ++n) {
        const double cur = l2_norm(traj.snapshot(n));
        if (cur > prev * (1.0 + 1e-12)) ++violations;
        prev = cur;
        ++steps;
      }
    }
  }
  r.passed = violations == 0;
  r.detail = fmt("%.0f violations in %.0f steps", static_cast<double>(violations), static_cast<double>(steps));
  return r;
}

/// Declared spectral norms are stable under doubling the explicit truncation.
inline CheckResult spectral_norms() {
  CheckResult r;
  r.name = "spectral norm declarations vs doubled truncation";
  double worst = 0.0;
  int finite = 0;
  for (double p : {2.0, 1.5}) {
    const SpectralSeries s(p, kDefaultSpectralEps);
    const std::pair<SpaceNorm, int> norms[] = {
        {SpaceNorm::h2_semi, 0}, {SpaceNorm::l2, 1}, {SpaceNorm::h1, 1}, {SpaceNorm::hm1, 2}};
    for (const auto& [space, d] : norms) {
      const SeriesValue a = s.norm_squared(space, d, 1000), b = s.norm_squared(space, d, 2000);
      if (a.finite() != b.finite()) {
        worst = std::numeric_limits<double>::infinity();
        continue;
      }
      if (!a.finite()) continue;
      ++finite;
      worst = std::max(worst, std::abs(a.value - b.value) / b.value);
    }
  }
  r.passed = worst <= 1e-10;
  r.detail = fmt("%.0f finite norms, max relative deviation %.3e", static_cast<double>(finite), worst);
  return r;
}

}  // namespace checks

/// All invariant suites, each timed.
inline std::vector<CheckResult> run_property_suites() {
  using Fn = CheckResult (*)();
  const std::pair<const char*, Fn> suites[] = {
      {"projection idempotence and orthogonality", checks::projection_identities},
      {"projection approximation rates", checks::projection_rates},
      {"Garding inequality and continuity", checks::garding_inequality},
      {"Galerkin residual of backward Euler outputs", checks::galerkin_residuals},
      {"sparse solvers vs dense oracle", checks::solver_agreement},
      {"backward Euler L2 monotonicity without load", checks::l2_monotonicity},
      {"spectral norm declarations vs doubled truncation", checks::spectral_norms}};
  std::vector<CheckResult> out;
  for (const auto& [name, f] : suites) {
    const auto start = std::chrono::steady_clock::now();
    CheckResult r;
    try {
      r = f();
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("exception: ") + e.what();
    }
    r.name = name;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace parafem
