#pragma once

#include "parafem/assembly.hpp"

namespace parafem {

/// (g, phi_i) for every free basis function, by the composite fine rule.
inline Vector l2_pairing(const Mesh& m, const ScalarFunction& g, int extra_levels = 0) {
  return integrate_against_basis(m, quadrature::fine_rule(m.dim(), extra_levels),
                                 [&](const Point& x, Index) { return BasisPairing{g(x), {0.0, 0.0}}; });
}

/// (g, phi_i)_{H1} for every free basis function.
inline Vector h1_pairing(const Mesh& m, const SpatialField& g, int extra_levels = 0) {
  return integrate_against_basis(m, quadrature::fine_rule(m.dim(), extra_levels),
                                 [&](const Point& x, Index) { return BasisPairing{g.value(x), g.gradient(x)}; });
}

/// L2-orthogonal projection onto V_h: solves M x = ((g, phi_i))_i.
inline FeFunction l2_project(MeshPtr m, const ScalarFunction& g, double tol_rel = kDefaultSolverTolerance,
                             int extra_levels = 0) {
  const Vector f = l2_pairing(*m, g, extra_levels);
  const CsrMatrix mass = assemble_mass(*m);
  Vector x = require_converged(solve_system(mass, f, true, tol_rel), "l2_project");
  return FeFunction(std::move(m), std::move(x));
}

/// L2 projection of a P1 function living on a finer nested mesh. The coarse
/// basis is linear on every fine cell, so the degree-2 rule is exact.
inline FeFunction l2_project(MeshPtr coarse, const FeFunction& fine, double tol_rel = kDefaultSolverTolerance) {
  const Mesh& mf = *fine.mesh;
  const Mesh& mc = *coarse;
  if (mf.dim() != mc.dim()) throw std::invalid_argument("l2_project: dimension mismatch");
  const PointLocator locator(coarse);
  const QuadratureRule q = quadrature::assembly_rule(mf.dim());
  Vector f(static_cast<std::size_t>(mc.n_free()), 0.0);
  for (Index c = 0; c < mf.n_cells(); ++c) {
    const Index cc = locator.locate(mf.centroid(c)).first;
    if (cc < 0) throw std::invalid_argument("l2_project: fine mesh not contained in the coarse mesh");
    const auto kf = mf.cell(c);
    const auto kc = mc.cell(cc);
    const double meas = mf.cell_measure(c);
    for (std::size_t p = 0; p < q.size(); ++p) {
      const auto lam = std::span<const double>(q.points[p].data(), 3);
      double gval = 0.0;
      for (std::size_t j = 0; j < kf.size(); ++j) {
        const Index d = mf.dof_of_vertex(kf[j]);
        if (d >= 0) gval += lam[j] * fine.values[d];
      }
      const Point x = mf.map_barycentric(c, lam);
      const auto lamc = mc.barycentric(cc, x);
      for (std::size_t i = 0; i < kc.size(); ++i) {
        const Index d = mc.dof_of_vertex(kc[i]);
        if (d >= 0) f[d] += q.weights[p] * meas * gval * lamc[i];
      }
    }
  }
  const CsrMatrix mass = assemble_mass(mc);
  Vector x = require_converged(solve_system(mass, f, true, tol_rel), "l2_project");
  return FeFunction(std::move(coarse), std::move(x));
}

/// H1-orthogonal projection onto V_h: solves G x = ((g, phi_i)_{H1})_i.
inline FeFunction h1_project(MeshPtr m, const SpatialField& g, double tol_rel = kDefaultSolverTolerance) {
  const Vector f = h1_pairing(*m, g);
  const CsrMatrix h1 = assemble_h1_matrix(*m);
  Vector x = require_converged(solve_system(h1, f, true, tol_rel), "h1_project");
  return FeFunction(std::move(m), std::move(x));
}

/// ||g||_{L2} by the composite fine rule.
inline double field_l2_norm(const Mesh& m, const ScalarFunction& g, int extra_levels = 0) {
  return std::sqrt(integrate(m, quadrature::fine_rule(m.dim(), extra_levels),
                             [&](const Point& x, Index, auto) { return g(x) * g(x); }));
}

/// ||g||_{H1} (full norm) by the composite fine rule.
inline double field_h1_norm(const Mesh& m, const SpatialField& g, int extra_levels = 0) {
  return std::sqrt(integrate(m, quadrature::fine_rule(m.dim(), extra_levels), [&](const Point& x, Index, auto) {
    const double v = g.value(x);
    const Vec2 d = g.gradient(x);
    return v * v + d[0] * d[0] + d[1] * d[1];
  }));
}

namespace detail {
inline double p1_value(const Mesh& m, std::span<const double> u, Index c, std::span<const double> lam) {
  const auto k = m.cell(c);
  double s = 0.0;
  for (std::size_t j = 0; j < k.size(); ++j) {
    const Index d = m.dof_of_vertex(k[j]);
    if (d >= 0) s += lam[j] * u[d];
  }
  return s;
}

inline Vec2 p1_gradient(const Mesh& m, std::span<const double> u, Index c) {
  const auto k = m.cell(c);
  const auto g = m.shape_gradients(c);
  Vec2 r{0.0, 0.0};
  for (std::size_t j = 0; j < k.size(); ++j) {
    const Index d = m.dof_of_vertex(k[j]);
    if (d < 0) continue;
    r[0] += g[j][0] * u[d];
    r[1] += g[j][1] * u[d];
  }
  return r;
}
}  // namespace detail

/// ||g - u_h||_{L2} by direct fine quadrature.
inline double l2_error(const FeFunction& u, const ScalarFunction& g, int extra_levels = 0) {
  const Mesh& m = *u.mesh;
  return std::sqrt(integrate(m, quadrature::fine_rule(m.dim(), extra_levels),
                             [&](const Point& x, Index c, auto lam) {
                               const double e = g(x) - detail::p1_value(m, u.values, c, lam);
                               return e * e;
                             }));
}

/// ||g - u_h||_{H1} by direct fine quadrature.
inline double h1_error(const FeFunction& u, const SpatialField& g, int extra_levels = 0) {
  const Mesh& m = *u.mesh;
  return std::sqrt(integrate(m, quadrature::fine_rule(m.dim(), extra_levels),
                             [&](const Point& x, Index c, auto lam) {
                               const double e = g.value(x) - detail::p1_value(m, u.values, c, lam);
                               const Vec2 gu = detail::p1_gradient(m, u.values, c);
                               const Vec2 gg = g.gradient(x);
                               const double ex = gg[0] - gu[0], ey = gg[1] - gu[1];
                               return e * e + ex * ex + ey * ey;
                             }));
}

/// ||pi_h g||_{H1} / ||g||_{H1}.
inline double h1_stability_ratio(MeshPtr m, const SpatialField& g, double tol_rel = kDefaultSolverTolerance) {
  const double gn = field_h1_norm(*m, g);
  if (!(gn > 0.0)) throw std::invalid_argument("h1_stability_ratio: zero input");
  const FeFunction p = l2_project(m, g.value, tol_rel);
  const CsrMatrix h1 = assemble_h1_matrix(*m);
  return std::sqrt(dot(p.values, matvec(h1, p.values))) / gn;
}

}  // namespace parafem
