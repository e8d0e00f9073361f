#pragma once

#include <iomanip>

#include "parafem/problems.hpp"
#include "parafem/projections.hpp"

namespace parafem {

/// Time grid with one coefficient vector per node. When `derivatives` is
/// non-empty it holds the time derivative at every node (semi-discrete
/// trajectories); otherwise the trajectory is read as its piecewise-linear
/// interpolant in time.
struct Trajectory {
  MeshPtr mesh;
  std::vector<double> times;
  std::vector<Vector> values;
  std::vector<Vector> derivatives;

  Index n_steps() const { return static_cast<Index>(times.size()) - 1; }
  bool has_derivatives() const { return !derivatives.empty(); }
  FeFunction snapshot(Index n) const { return FeFunction(mesh, values.at(static_cast<std::size_t>(n))); }

  void validate() const {
    if (!mesh) throw std::invalid_argument("Trajectory: missing mesh");
    if (times.empty() || times.size() != values.size())
      throw std::invalid_argument("Trajectory: one snapshot per time node required");
    if (!derivatives.empty() && derivatives.size() != values.size())
      throw std::invalid_argument("Trajectory: one derivative per time node required");
    for (std::size_t n = 1; n < times.size(); ++n)
      if (!(times[n] > times[n - 1])) throw std::invalid_argument("Trajectory: times must increase strictly");
    const auto nf = static_cast<std::size_t>(mesh->n_free());
    for (const auto& v : values)
      if (v.size() != nf) throw std::invalid_argument("Trajectory: snapshot size mismatch");
    for (const auto& v : derivatives)
      if (v.size() != nf) throw std::invalid_argument("Trajectory: derivative size mismatch");
  }
};

/// Discrete H^-1 norm on V_h: sqrt(F^T G^-1 F) with G the H1 Gram matrix.
class DualNorm {
 public:
  explicit DualNorm(const Mesh& m, double tol_rel = kDefaultSolverTolerance)
      : g_(assemble_h1_matrix(m)), tol_(tol_rel) {}
  DualNorm(CsrMatrix g, double tol_rel) : g_(std::move(g)), tol_(tol_rel) {}

  const CsrMatrix& gram() const { return g_; }

  /// Riesz representative G^-1 F, optionally warm-started.
  Vector riesz(std::span<const double> f, std::optional<std::span<const double>> x0 = std::nullopt) const {
    return require_converged(solve_system(g_, f, true, tol_, x0), "dual norm");
  }

  double squared(std::span<const double> f, std::optional<std::span<const double>> x0 = std::nullopt) const {
    const Vector x = riesz(f, x0);
    return std::max(0.0, dot(f, x));
  }

  double operator()(std::span<const double> f) const { return std::sqrt(squared(f)); }

 private:
  CsrMatrix g_;
  double tol_;
};

inline double dual_norm_h(const Mesh& m, std::span<const double> f, double tol_rel = kDefaultSolverTolerance) {
  if (static_cast<Index>(f.size()) != m.n_free()) throw std::invalid_argument("dual_norm_h: size mismatch");
  return DualNorm(m, tol_rel)(f);
}

inline double l2_norm(const FeFunction& u) {
  return std::sqrt(std::max(0.0, dot(u.values, matvec(assemble_mass(*u.mesh), u.values))));
}

inline double h1_norm(const FeFunction& u) {
  return std::sqrt(std::max(0.0, dot(u.values, matvec(assemble_h1_matrix(*u.mesh), u.values))));
}

/// sqrt(sum_n tau_n (||d_tau u^n||^2_{H^-1} + ||u^n||^2_{H1})), n = 1..N, with
/// the H^-1 term the dual norm of M d_tau u^n.
inline double discrete_energy_norm(const Trajectory& traj, double tol_rel = kDefaultSolverTolerance) {
  traj.validate();
  if (traj.n_steps() < 1) throw std::invalid_argument("discrete_energy_norm: at least two time nodes required");
  const Mesh& m = *traj.mesh;
  const CsrMatrix mass = assemble_mass(m);
  const DualNorm dual(m, tol_rel);
  double sum = 0.0;
  Vector warm;
  for (Index n = 1; n <= traj.n_steps(); ++n) {
    const double tau = traj.times[n] - traj.times[n - 1];
    const Vector& un = traj.values[n];
    Vector dq = linear_combination(1.0 / tau, un, -1.0 / tau, traj.values[n - 1]);
    const Vector f = matvec(mass, dq);
    double hm1 = 0.0;
    if (norm_inf(f) > 0.0) {
      warm = dual.riesz(f, warm.empty() ? std::nullopt : std::optional<std::span<const double>>(warm));
      hm1 = std::max(0.0, dot(f, warm));
    }
    sum += tau * (hm1 + std::max(0.0, dot(un, matvec(dual.gram(), un))));
  }
  return std::sqrt(sum);
}

/// Error measures of a discrete trajectory against an exact solution.
struct ErrorBundle {
  double e_W = 0.0;       ///< ||u - u~||_{L2 H1} + ||u' - u~'||_{L2 H^-1}
  double e_LinfL2 = 0.0;  ///< max over time nodes of ||u(t^n) - u^n||_{L2}
  double e_L2H1 = 0.0;
  double e_Hm1 = 0.0;     ///< ||u' - u~'||_{L2 H^-1}
  double e_disc = 0.0;    ///< discrete energy norm of (u(t^n) - u^n)
};

/// Evaluates errors of P1 functions against a separable exact solution
///   u = sum_m q_m(t) w_m(x).
/// Spatial integrals of w_m are precomputed once with the fine rule, so the
/// squared errors reduce to small quadratic forms per time. The H^-1 norm
/// is the discrete dual norm on the twice-refined mesh.
class ErrorEvaluator {
 public:
  /// Extra fine-rule levels for the exact-mode Gram matrices: the squared
  /// errors are differences of O(1) quantities, so their quadrature must be
  /// much finer than the errors it resolves.
  static constexpr int kExtraLevels = 1;
  ErrorEvaluator(const ProblemSpec& problem, MeshPtr mesh, double tol_rel = kDefaultSolverTolerance)
      : exact_(problem.exact.value_or(ExactSolution{})), mesh_(std::move(mesh)), tol_(tol_rel) {
    if (!problem.exact) throw std::invalid_argument("ErrorEvaluator: problem has no exact solution");
    const Mesh& m = *mesh_;
    mass_ = assemble_mass(m);
    h1_ = assemble_h1_matrix(m);
    const auto n_terms = exact_.n_terms();

    // coarse-mesh pairings and Gram matrices of the exact modes
    const QuadratureRule q = quadrature::fine_rule(m.dim(), fine_levels_for(m, problem) + kExtraLevels);
    l2_pair_.resize(n_terms);
    h1_pair_.resize(n_terms);
    for (std::size_t k = 0; k < n_terms; ++k) {
      const SpatialField& w = exact_.terms()[k].space;
      l2_pair_[k] = integrate_against_basis(m, q, [&](const Point& x, Index) { return BasisPairing{w.value(x), {0, 0}}; });
      h1_pair_[k] = integrate_against_basis(m, q, [&](const Point& x, Index) {
        return BasisPairing{w.value(x), w.gradient(x)};
      });
    }
    gram_l2_.assign(n_terms * n_terms, 0.0);
    gram_h1_.assign(n_terms * n_terms, 0.0);
    Vector val(n_terms);
    std::vector<Vec2> grad(n_terms);
    for (Index c = 0; c < m.n_cells(); ++c) {
      const double meas = m.cell_measure(c);
      for (std::size_t p = 0; p < q.size(); ++p) {
        const Point x = m.map_barycentric(c, std::span<const double>(q.points[p].data(), 3));
        for (std::size_t k = 0; k < n_terms; ++k) {
          val[k] = exact_.terms()[k].space.value(x);
          grad[k] = exact_.terms()[k].space.gradient(x);
        }
        const double w = q.weights[p] * meas;
        for (std::size_t i = 0; i < n_terms; ++i)
          for (std::size_t j = 0; j <= i; ++j) {
            const double vv = w * val[i] * val[j];
            gram_l2_[i * n_terms + j] += vv;
            gram_h1_[i * n_terms + j] += vv + w * (grad[i][0] * grad[j][0] + grad[i][1] * grad[j][1]);
          }
      }
    }
    for (std::size_t i = 0; i < n_terms; ++i)
      for (std::size_t j = 0; j < i; ++j) {
        gram_l2_[j * n_terms + i] = gram_l2_[i * n_terms + j];
        gram_h1_[j * n_terms + i] = gram_h1_[i * n_terms + j];
      }

    // twice-refined mesh for the H^-1 surrogate
    const Mesh mid = refine_uniform(m);
    fine_ = share(refine_uniform(mid));
    const std::array<const Mesh*, 2> chain{&mid, fine_.get()};
    prolong_ = prolongation(m, chain);
    fine_mass_ = assemble_mass(*fine_);
    fine_dual_ = std::make_unique<DualNorm>(assemble_h1_matrix(*fine_), tol_rel);
    const QuadratureRule qf = quadrature::fine_rule(fine_->dim(), fine_levels_for(*fine_, problem));
    fine_pair_.resize(n_terms);
    fine_riesz_.resize(n_terms);
    for (std::size_t k = 0; k < n_terms; ++k) {
      const SpatialField& w = exact_.terms()[k].space;
      fine_pair_[k] = integrate_against_basis(*fine_, qf, [&](const Point& x, Index) { return BasisPairing{w.value(x), {0, 0}}; });
      fine_riesz_[k] = fine_dual_->riesz(fine_pair_[k]);
    }
  }

  const Mesh& mesh() const { return *mesh_; }
  const Mesh& fine_mesh() const { return *fine_; }

  /// ||sum_m s_m w_m - u_h||^2_{L2} for coefficients s.
  double l2_error_sq(std::span<const double> s, std::span<const double> u) const {
    return std::max(0.0, quadratic(gram_l2_, s) - 2.0 * cross(l2_pair_, s, u) + dot(u, matvec(mass_, u)));
  }

  /// ||sum_m s_m w_m - u_h||^2_{H1} for coefficients s.
  double h1_error_sq(std::span<const double> s, std::span<const double> u) const {
    return std::max(0.0, quadratic(gram_h1_, s) - 2.0 * cross(h1_pair_, s, u) + dot(u, matvec(h1_, u)));
  }

  /// Fine-mesh data of a discrete derivative d: the pairing M_f P d and its
  /// Riesz representative, reusable for several coefficient vectors.
  struct DerivativeData {
    Vector pairing;
    Vector riesz;
  };

  DerivativeData prepare_derivative(std::span<const double> d, const Vector* warm = nullptr) const {
    DerivativeData out;
    out.pairing = matvec(fine_mass_, matvec(prolong_, d));
    if (norm_inf(out.pairing) == 0.0) {
      out.riesz.assign(out.pairing.size(), 0.0);
    } else {
      std::optional<std::span<const double>> x0;
      if (warm && warm->size() == out.pairing.size()) x0 = std::span<const double>(*warm);
      out.riesz = fine_dual_->riesz(out.pairing, x0);
    }
    return out;
  }

  /// ||sum_m s_m w_m - d||^2 in the discrete H^-1 norm of the fine mesh.
  double hm1_error_sq(std::span<const double> s, const DerivativeData& d) const {
    Vector f = d.pairing, x = d.riesz;
    for (auto& v : f) v = -v;
    for (auto& v : x) v = -v;
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (s[k] == 0.0) continue;
      axpy(s[k], fine_pair_[k], f);
      axpy(s[k], fine_riesz_[k], x);
    }
    return std::max(0.0, dot(f, x));
  }

  /// All error measures of a trajectory. Trajectories with derivative
  /// snapshots are integrated in time by composite Simpson (trapezoid for
  /// an odd number of intervals); otherwise the piecewise-linear
  /// interpolant is integrated by 3-point Gauss per interval.
  ErrorBundle evaluate(const Trajectory& traj, bool with_discrete = true) const {
    traj.validate();
    if (traj.mesh.get() != mesh_.get() && traj.mesh->n_free() != mesh_->n_free())
      throw std::invalid_argument("ErrorEvaluator: trajectory lives on a different mesh");
    const Index N = traj.n_steps();
    if (N < 1) throw std::invalid_argument("ErrorEvaluator: at least two time nodes required");
    ErrorBundle e;
    for (Index n = 0; n <= N; ++n)
      e.e_LinfL2 = std::max(e.e_LinfL2, l2_error_sq(exact_.coefficients(traj.times[n]), traj.values[n]));
    e.e_LinfL2 = std::sqrt(e.e_LinfL2);

    double int_h1 = 0.0, int_hm1 = 0.0;
    Vector warm;
    if (traj.has_derivatives()) {
      const std::vector<double> w = node_weights(traj.times);
      for (Index n = 0; n <= N; ++n) {
        const double t = traj.times[n];
        int_h1 += w[n] * h1_error_sq(exact_.coefficients(t), traj.values[n]);
        const DerivativeData d = prepare_derivative(traj.derivatives[n], &warm);
        int_hm1 += w[n] * hm1_error_sq(exact_.coefficients(t, 1), d);
        warm = d.riesz;
      }
    } else {
      const QuadratureRule g = quadrature::segment_gauss3();
      for (Index n = 1; n <= N; ++n) {
        const double t0 = traj.times[n - 1], t1 = traj.times[n], tau = t1 - t0;
        const Vector dq = linear_combination(1.0 / tau, traj.values[n], -1.0 / tau, traj.values[n - 1]);
        const DerivativeData d = prepare_derivative(dq, &warm);
        warm = d.riesz;
        for (std::size_t k = 0; k < g.size(); ++k) {
          const double theta = g.points[k][1];
          const double t = t0 + theta * tau;
          const Vector u = linear_combination(1.0 - theta, traj.values[n - 1], theta, traj.values[n]);
          int_h1 += tau * g.weights[k] * h1_error_sq(exact_.coefficients(t), u);
          int_hm1 += tau * g.weights[k] * hm1_error_sq(exact_.coefficients(t, 1), d);
        }
      }
    }
    e.e_L2H1 = std::sqrt(std::max(0.0, int_h1));
    e.e_Hm1 = std::sqrt(std::max(0.0, int_hm1));
    e.e_W = e.e_L2H1 + e.e_Hm1;

    if (with_discrete) {
      // discrete energy norm of the nodal errors, matching indices n <-> t^n
      double sum = 0.0;
      for (Index n = 1; n <= N; ++n) {
        const double t0 = traj.times[n - 1], t1 = traj.times[n], tau = t1 - t0;
        const Vector s1 = exact_.coefficients(t1), s0 = exact_.coefficients(t0);
        const Vector ds = linear_combination(1.0 / tau, s1, -1.0 / tau, s0);
        const Vector dq = linear_combination(1.0 / tau, traj.values[n], -1.0 / tau, traj.values[n - 1]);
        const DerivativeData d = prepare_derivative(dq, &warm);
        warm = d.riesz;
        sum += tau * (h1_error_sq(s1, traj.values[n]) + hm1_error_sq(ds, d));
      }
      e.e_disc = std::sqrt(sum);
    }
    return e;
  }

  /// Quadrature weights over the nodes of a uniform grid: composite Simpson
  /// for an even number of intervals, trapezoid otherwise.
  static std::vector<double> node_weights(const std::vector<double>& times) {
    const Index N = static_cast<Index>(times.size()) - 1;
    std::vector<double> w(times.size(), 0.0);
    if (N >= 2 && N % 2 == 0) {
      for (Index n = 0; n + 2 <= N; n += 2) {
        const double h = times[n + 2] - times[n];
        w[n] += h / 6.0;
        w[n + 1] += 4.0 * h / 6.0;
        w[n + 2] += h / 6.0;
      }
    } else {
      for (Index n = 1; n <= N; ++n) {
        const double h = times[n] - times[n - 1];
        w[n - 1] += 0.5 * h;
        w[n] += 0.5 * h;
      }
    }
    return w;
  }

 private:
  double quadratic(const std::vector<double>& gram, std::span<const double> s) const {
    const std::size_t m = s.size();
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (s[i] == 0.0) continue;
      double row = 0.0;
      for (std::size_t j = 0; j < m; ++j) row += gram[i * m + j] * s[j];
      sum += s[i] * row;
    }
    return sum;
  }

  static double cross(const std::vector<Vector>& pair, std::span<const double> s, std::span<const double> u) {
    double sum = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k)
      if (s[k] != 0.0) sum += s[k] * dot(pair[k], u);
    return sum;
  }

  ExactSolution exact_;
  MeshPtr mesh_;
  double tol_;
  CsrMatrix mass_, h1_;
  std::vector<Vector> l2_pair_, h1_pair_;
  std::vector<double> gram_l2_, gram_h1_;
  MeshPtr fine_;
  CsrMatrix prolong_, fine_mass_;
  std::unique_ptr<DualNorm> fine_dual_;
  std::vector<Vector> fine_pair_, fine_riesz_;
};

inline ErrorBundle w_norm_error(const Trajectory& traj, const ProblemSpec& problem,
                                double tol_rel = kDefaultSolverTolerance) {
  return ErrorEvaluator(problem, traj.mesh, tol_rel).evaluate(traj);
}

// ---------------------------------------------------------------------------
// Trajectory dump: "parafem-trajectory 1", the mesh block of write_mesh,
// "snapshots <n_times> <n_free> <with_derivatives>", then one line per time
// node "t v_1 ... v_n" (and as many derivative lines when present).

inline void write_trajectory(std::ostream& os, const Trajectory& traj) {
  traj.validate();
  os << "parafem-trajectory 1\n";
  write_mesh(os, *traj.mesh);
  os << "snapshots " << traj.times.size() << ' ' << traj.mesh->n_free() << ' '
     << (traj.has_derivatives() ? 1 : 0) << '\n';
  char buf[64];
  auto line = [&](double t, const Vector& v) {
    std::snprintf(buf, sizeof buf, "%.17g", t);
    os << buf;
    for (double x : v) {
      std::snprintf(buf, sizeof buf, " %.17g", x);
      os << buf;
    }
    os << '\n';
  };
  for (std::size_t n = 0; n < traj.times.size(); ++n) line(traj.times[n], traj.values[n]);
  for (std::size_t n = 0; n < traj.derivatives.size(); ++n) line(traj.times[n], traj.derivatives[n]);
}

inline Trajectory read_trajectory(std::istream& is) {
  std::string magic;
  int version = 0;
  if (!(is >> magic >> version) || magic != "parafem-trajectory" || version != 1)
    throw Error("read_trajectory: not a trajectory dump");
  Trajectory traj;
  traj.mesh = share(read_mesh(is));
  std::string tag;
  Index n_times = 0, n_free = 0;
  int with_derivatives = 0;
  if (!(is >> tag >> n_times >> n_free >> with_derivatives) || tag != "snapshots" || n_times < 1)
    throw Error("read_trajectory: malformed snapshot header");
  if (n_free != traj.mesh->n_free()) throw Error("read_trajectory: snapshot size does not match the mesh");
  auto block = [&](std::vector<Vector>& out, bool store_times) {
    out.assign(static_cast<std::size_t>(n_times), Vector(static_cast<std::size_t>(n_free)));
    for (Index n = 0; n < n_times; ++n) {
      double t = 0.0;
      if (!(is >> t)) throw Error("read_trajectory: truncated snapshot block");
      if (store_times) traj.times.push_back(t);
      for (auto& v : out[n])
        if (!(is >> v)) throw Error("read_trajectory: truncated snapshot block");
    }
  };
  block(traj.values, true);
  if (with_derivatives) block(traj.derivatives, false);
  traj.validate();
  return traj;
}

}  // namespace parafem
