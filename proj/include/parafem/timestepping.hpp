#pragma once

#include "parafem/norms.hpp"

namespace parafem {

/// Uniform backward Euler steps: tau = T / N.
struct StepperConfig {
  Index N = 1;
  double tol_rel = kDefaultSolverTolerance;

  double tau(double T) const { return T / static_cast<double>(N); }
};

/// Load vector F(t)_i = <f(t), phi_i> over the free vertices of a mesh.
/// For the weak recipe and time-independent coefficients the per-mode
/// pairings (w_m, phi_i) and a(w_m, phi_i) are precomputed, so that
/// F(t) = sum_m q_m'(t) (w_m, phi_i) + q_m(t) a(w_m, phi_i).
class LoadEvaluator {
 public:
  LoadEvaluator(const ProblemSpec& problem, const Mesh& mesh)
      : problem_(problem), mesh_(mesh),
        rule_(quadrature::fine_rule(mesh.dim(), fine_levels_for(mesh, problem))) {
    if (std::holds_alternative<WeakRecipe>(problem_.load)) {
      if (!problem_.exact) throw std::invalid_argument("weak-recipe load requires an exact solution");
      if (!problem_.coeff.time_dependent) {
        for (const auto& term : problem_.exact->terms()) {
          const SpatialField& w = term.space;
          mass_pair_.push_back(integrate_against_basis(mesh_, rule_, [&](const Point& x, Index) {
            return BasisPairing{w.value(x), {0.0, 0.0}};
          }));
          form_pair_.push_back(integrate_against_basis(mesh_, rule_, [&](const Point& x, Index) {
            const auto s = problem_.coeff.sample(x, 0.0);
            const Vec2 g = w.gradient(x);
            return BasisPairing{s.b[0] * g[0] + s.b[1] * g[1] + s.c * w.value(x), {s.a * g[0], s.a * g[1]}};
          }));
        }
      }
    }
  }

  Vector operator()(double t) const {
    if (const auto* p = std::get_if<PointwiseLoad>(&problem_.load)) return assemble_load(mesh_, p->f, t, rule_);
    const ExactSolution& u = *problem_.exact;
    if (problem_.coeff.time_dependent) {
      return assemble_weak_load(
          mesh_, problem_.coeff, t, [&](const Point& x) { return u.value(x, t); },
          [&](const Point& x) { return u.gradient(x, t); }, [&](const Point& x) { return u.time_derivative(x, t); },
          rule_);
    }
    Vector f(static_cast<std::size_t>(mesh_.n_free()), 0.0);
    for (std::size_t m = 0; m < mass_pair_.size(); ++m) {
      const auto& q = u.terms()[m].time;
      axpy(q.d1(t), mass_pair_[m], f);
      axpy(q.value(t), form_pair_[m], f);
    }
    return f;
  }

 private:
  const ProblemSpec& problem_;
  const Mesh& mesh_;
  QuadratureRule rule_;
  std::vector<Vector> mass_pair_, form_pair_;
};

/// Rejects step sizes violating tau < 1/eta.
inline void check_time_step(const ProblemSpec& problem, double tau) {
  const double eta = problem.coeff.garding_eta();
  if (!(tau > 0.0) || !(tau * eta < 1.0)) {
    std::ostringstream os;
    os << "time step tau = " << tau << " must satisfy 0 < tau < 1/eta = " << 1.0 / eta;
    throw std::invalid_argument(os.str());
  }
}

namespace detail {

/// Operators of one mesh reused across stepper runs.
struct StepperWorkspace {
  const ProblemSpec& problem;
  MeshPtr mesh;
  CsrMatrix mass;
  LoadEvaluator load;
  std::optional<CsrMatrix> form;  // cached when coefficients are time-independent

  StepperWorkspace(const ProblemSpec& p, MeshPtr m)
      : problem(p), mesh(std::move(m)), mass(assemble_mass(*mesh)), load(p, *mesh) {
    if (!p.coeff.time_dependent) form = assemble_form(*mesh, p.coeff, 0.0);
  }

  CsrMatrix form_at(double t) const { return form ? *form : assemble_form(*mesh, problem.coeff, t); }

  Vector initial_value(double tol_rel) const { return l2_project(mesh, problem.u0, tol_rel).values; }

  /// u'(t) = M^-1 (F(t) - A(t) u) for the semi-discrete equation.
  Vector derivative(double t, std::span<const double> u, double tol_rel) const {
    Vector r = load(t);
    const Vector au = matvec(form_at(t), u);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= au[i];
    return require_converged(solve_system(mass, r, true, tol_rel), "semi-discrete derivative");
  }

  /// Backward Euler with N steps, keeping every `stride`-th node.
  Trajectory run(Index N, Index stride, double tol_rel) const {
    if (N < 1) throw std::invalid_argument("backward_euler: N must be >= 1");
    if (stride < 1 || N % stride != 0) throw std::invalid_argument("backward_euler: stride must divide N");
    const double T = problem.T;
    const double tau = T / static_cast<double>(N);
    check_time_step(problem, tau);
    Trajectory traj;
    traj.mesh = mesh;
    Vector u = initial_value(tol_rel);
    traj.times.push_back(0.0);
    traj.values.push_back(u);

    std::optional<CsrMatrix> system;
    if (form) system = add(1.0, mass, tau, *form);
    const bool symmetric = !problem.coeff.has_advection();
    Vector delta(u.size(), 0.0);
    for (Index n = 0; n < N; ++n) {
      const double t = T * static_cast<double>(n + 1) / static_cast<double>(N);
      const CsrMatrix a = form_at(t);
      if (!form) system = add(1.0, mass, tau, a);
      // increment form: (M + tau A) delta = tau (F - A u^n), u^{n+1} = u^n + delta
      Vector rhs = load(t);
      const Vector au = matvec(a, u);
      for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = tau * (rhs[i] - au[i]);
      auto fail = [&](const SolveReport& rep) {
        std::ostringstream os;
        os << "backward Euler step " << n + 1 << " of " << N << " did not converge (relative residual "
           << rep.residual_rel << ")";
        throw SolverError(os.str(), rep);
      };
      SolveResult r;
      try {
        r = solve_system(*system, rhs, symmetric, tol_rel, std::span<const double>(delta));
      } catch (const SolverError& e) {
        fail(e.report());
      }
      if (!r.report.acceptable()) fail(r.report);
      delta = std::move(r.x);
      axpy(1.0, delta, u);
      if ((n + 1) % stride == 0) {
        traj.times.push_back(t);
        traj.values.push_back(u);
      }
    }
    return traj;
  }
};

}  // namespace detail

/// Fully discrete scheme: (M + tau A(t^{n+1})) u^{n+1} = M u^n + tau F(t^{n+1}),
/// u^0 = pi_h u_0.
inline Trajectory backward_euler(const ProblemSpec& problem, MeshPtr mesh, const StepperConfig& cfg) {
  return detail::StepperWorkspace(problem, std::move(mesh)).run(cfg.N, 1, cfg.tol_rel);
}

/// Outcome of the temporal refinement behind semi_discrete_reference.
struct ReferenceResult {
  Trajectory trajectory;          ///< on the output grid, with derivative snapshots
  std::vector<double> differences;  ///< discrete energy norms of successive differences
  Index finest_steps = 0;
  bool converged = false;
};

inline constexpr Index kMaxReferenceSteps = Index{1} << 20;

/// Approximates the semi-discrete solution on a grid of N0 intervals.
/// Backward Euler runs with N0 2^k steps are Richardson-combined,
/// 2 u_{N} - u_{N/2}, and refinement stops once successive candidates
/// differ by at most tol_time in the discrete energy norm. The first
/// candidate is the plain N0 run; tol_time = infinity returns it.
/// Throws when the step cap is reached first.
inline ReferenceResult semi_discrete_reference(const ProblemSpec& problem, MeshPtr mesh, double tol_time,
                                               Index N0 = 64, double tol_rel = kDefaultSolverTolerance,
                                               Index max_steps = kMaxReferenceSteps) {
  if (!(tol_time > 0.0)) throw std::invalid_argument("semi_discrete_reference: tol_time must be positive");
  if (N0 < 1 || N0 > max_steps) throw std::invalid_argument("semi_discrete_reference: invalid N0");
  const detail::StepperWorkspace ws(problem, mesh);
  const CsrMatrix h1 = assemble_h1_matrix(*mesh);
  const DualNorm dual(h1, tol_rel);

  auto energy_of_difference = [&](const std::vector<Vector>& a, const std::vector<Vector>& b,
                                  const std::vector<double>& times) {
    double sum = 0.0;
    Vector warm;
    for (std::size_t n = 1; n < times.size(); ++n) {
      const double tau = times[n] - times[n - 1];
      const Vector en = linear_combination(1.0, a[n], -1.0, b[n]);
      const Vector ep = linear_combination(1.0, a[n - 1], -1.0, b[n - 1]);
      const Vector f = matvec(ws.mass, linear_combination(1.0 / tau, en, -1.0 / tau, ep));
      double hm1 = 0.0;
      if (norm_inf(f) > 0.0) {
        warm = dual.riesz(f, warm.empty() ? std::nullopt : std::optional<std::span<const double>>(warm));
        hm1 = dot(f, warm);
      }
      sum += tau * (std::max(0.0, hm1) + std::max(0.0, dot(en, matvec(h1, en))));
    }
    return std::sqrt(sum);
  };

  auto finish = [&](Trajectory traj, ReferenceResult& out) {
    traj.derivatives.clear();
    for (std::size_t n = 0; n < traj.times.size(); ++n)
      traj.derivatives.push_back(ws.derivative(traj.times[n], traj.values[n], tol_rel));
    out.trajectory = std::move(traj);
  };

  ReferenceResult out;
  Trajectory previous_run = ws.run(N0, 1, tol_rel);
  out.finest_steps = N0;
  if (std::isinf(tol_time)) {
    out.converged = true;
    finish(std::move(previous_run), out);
    return out;
  }
  Trajectory candidate = previous_run;
  for (Index stride = 2; N0 * stride <= max_steps; stride *= 2) {
    const Index N = N0 * stride;
    Trajectory run = ws.run(N, stride, tol_rel);
    Trajectory next = run;
    for (std::size_t n = 0; n < next.values.size(); ++n)
      next.values[n] = linear_combination(2.0, run.values[n], -1.0, previous_run.values[n]);
    const double diff = energy_of_difference(next.values, candidate.values, next.times);
    out.differences.push_back(diff);
    out.finest_steps = N;
    candidate = std::move(next);
    previous_run = std::move(run);
    if (diff <= tol_time) {
      out.converged = true;
      finish(std::move(candidate), out);
      return out;
    }
  }
  std::ostringstream os;
  os << "semi_discrete_reference: no convergence to " << tol_time << " within " << max_steps
     << " steps; last difference " << (out.differences.empty() ? 0.0 : out.differences.back());
  throw Error(os.str());
}

/// r_i = (d_tau u^n, phi_i) + a(u^n, phi_i; t^n) - <f(t^n), phi_i>.
inline Vector galerkin_residual(const Trajectory& traj, const ProblemSpec& problem, Index n) {
  traj.validate();
  if (n < 1 || n > traj.n_steps()) throw std::invalid_argument("galerkin_residual: index out of range");
  const Mesh& m = *traj.mesh;
  const double t = traj.times[n], tau = t - traj.times[n - 1];
  const LoadEvaluator load(problem, m);
  Vector r = matvec(assemble_mass(m), linear_combination(1.0 / tau, traj.values[n], -1.0 / tau, traj.values[n - 1]));
  axpy(1.0, matvec(assemble_form(m, problem.coeff, t), traj.values[n]), r);
  axpy(-1.0, load(t), r);
  return r;
}

}  // namespace parafem
