#pragma once

#include <functional>
#include <sstream>

#include "parafem/mesh.hpp"
#include "parafem/quadrature.hpp"
#include "parafem/sparse.hpp"

namespace parafem {

using ScalarFunction = std::function<double(const Point&)>;
using VectorFunction = std::function<Vec2(const Point&)>;
using SpaceTimeFunction = std::function<double(const Point&, double)>;

/// Function of space with its gradient, for H1-type quantities.
struct SpatialField {
  ScalarFunction value;
  VectorFunction gradient;
};

/// Coefficients of a(u,v;t) = int a grad u . grad v + (b . grad u) v + c u v,
/// together with the bounds they are declared to satisfy. Empty b or c
/// functions mean the term is absent.
struct CoefficientField {
  std::function<double(const Point&, double)> a;
  std::function<Vec2(const Point&, double)> b;
  std::function<double(const Point&, double)> c;
  double a_lower = 1.0;
  double a_sup = 1.0;
  double b_sup = 0.0;
  double c_sup = 0.0;
  bool time_dependent = false;

  static CoefficientField constant(double a, Vec2 b = {0.0, 0.0}, double c = 0.0) {
    CoefficientField f;
    f.a = [a](const Point&, double) { return a; };
    if (b[0] != 0.0 || b[1] != 0.0) f.b = [b](const Point&, double) { return b; };
    if (c != 0.0) f.c = [c](const Point&, double) { return c; };
    f.a_lower = a;
    f.a_sup = a;
    f.b_sup = std::hypot(b[0], b[1]);
    f.c_sup = std::abs(c);
    return f;
  }

  bool has_advection() const { return static_cast<bool>(b); }

  /// Constants of the Garding inequality a(u,u) + eta |u|^2 >= alpha ||u||_{H1}^2.
  double garding_alpha() const { return 0.5 * a_lower; }
  double garding_eta() const { return 0.5 * a_lower + b_sup * b_sup / (2.0 * a_lower) + c_sup; }
  double continuity_constant() const { return a_sup + b_sup + c_sup; }

  struct Sample {
    double a;
    Vec2 b;
    double c;
  };

  /// Samples all coefficients and enforces the declared bounds.
  Sample sample(const Point& x, double t) const {
    Sample s{a(x, t), b ? b(x, t) : Vec2{0.0, 0.0}, c ? c(x, t) : 0.0};
    constexpr double slack = 1e-12;
    auto fail = [&](const char* what, double value) {
      std::ostringstream os;
      os << "coefficient " << what << " = " << value << " at (" << x[0] << ", " << x[1]
         << "), t = " << t << " violates its declared bound";
      throw CoefficientError(os.str());
    };
    if (!(s.a >= a_lower * (1.0 - slack))) fail("a (lower bound)", s.a);
    if (!(std::abs(s.a) <= a_sup * (1.0 + slack) + slack)) fail("a (upper bound)", s.a);
    const double bn = std::hypot(s.b[0], s.b[1]);
    if (!(bn <= b_sup * (1.0 + slack) + slack)) fail("|b|", bn);
    if (!(std::abs(s.c) <= c_sup * (1.0 + slack) + slack)) fail("c", s.c);
    return s;
  }
};

/// Element of V_h: coefficients over the free vertices of a mesh.
struct FeFunction {
  MeshPtr mesh;
  Vector values;

  FeFunction() = default;
  FeFunction(MeshPtr m, Vector v) : mesh(std::move(m)), values(std::move(v)) {
    if (!mesh || static_cast<Index>(values.size()) != mesh->n_free())
      throw std::invalid_argument("FeFunction: value count must equal the number of free vertices");
  }
  static FeFunction zero(MeshPtr m) {
    const auto n = static_cast<std::size_t>(m->n_free());
    return FeFunction(std::move(m), Vector(n, 0.0));
  }
};

/// Which vertices carry rows and columns of an assembled operator.
enum class DofScope { free, all };

namespace detail {

inline Index global_index(const Mesh& m, Index vertex, DofScope scope) {
  return scope == DofScope::all ? vertex : m.dof_of_vertex(vertex);
}

inline Index scope_size(const Mesh& m, DofScope scope) {
  return scope == DofScope::all ? m.n_vertices() : m.n_free();
}

/// Local element matrix accumulation shared by all bilinear forms.
template <class Local>
CsrMatrix assemble_cells(const Mesh& m, DofScope scope, Local&& local) {
  const Index n = scope_size(m, scope);
  TripletBuilder t(n, n);
  const int nl = m.dim() + 1;
  std::array<std::array<double, 3>, 3> ke{};
  for (Index c = 0; c < m.n_cells(); ++c) {
    for (auto& row : ke) row.fill(0.0);
    local(c, ke);
    const auto k = m.cell(c);
    for (int i = 0; i < nl; ++i) {
      const Index gi = global_index(m, k[i], scope);
      if (gi < 0) continue;
      for (int j = 0; j < nl; ++j) {
        const Index gj = global_index(m, k[j], scope);
        if (gj < 0) continue;
        t.add(gi, gj, ke[i][j]);
      }
    }
  }
  return t.build();
}

}  // namespace detail

/// M_ij = int phi_i phi_j.
inline CsrMatrix assemble_mass(const Mesh& m, DofScope scope = DofScope::free) {
  const QuadratureRule q = quadrature::assembly_rule(m.dim());
  const int nl = m.dim() + 1;
  return detail::assemble_cells(m, scope, [&](Index c, auto& ke) {
    const double meas = m.cell_measure(c);
    for (std::size_t p = 0; p < q.size(); ++p)
      for (int i = 0; i < nl; ++i)
        for (int j = 0; j < nl; ++j) ke[i][j] += q.weights[p] * meas * q.points[p][i] * q.points[p][j];
  });
}

/// Matrix of the bilinear form at time t with A_ij = a(phi_j, phi_i; t):
/// rows are test functions, columns trial functions.
inline CsrMatrix assemble_form(const Mesh& m, const CoefficientField& coeff, double t,
                               DofScope scope = DofScope::free) {
  const QuadratureRule q = quadrature::assembly_rule(m.dim());
  const int nl = m.dim() + 1;
  return detail::assemble_cells(m, scope, [&](Index c, auto& ke) {
    const double meas = m.cell_measure(c);
    const auto g = m.shape_gradients(c);
    for (std::size_t p = 0; p < q.size(); ++p) {
      const auto lam = std::span<const double>(q.points[p].data(), 3);
      const auto s = coeff.sample(m.map_barycentric(c, lam), t);
      const double w = q.weights[p] * meas;
      for (int i = 0; i < nl; ++i) {
        for (int j = 0; j < nl; ++j) {
          const double diff = s.a * (g[j][0] * g[i][0] + g[j][1] * g[i][1]);
          const double adv = (s.b[0] * g[j][0] + s.b[1] * g[j][1]) * lam[i];
          const double react = s.c * lam[j] * lam[i];
          ke[i][j] += w * (diff + adv + react);
        }
      }
    }
  });
}

inline CsrMatrix assemble_stiffness(const Mesh& m, DofScope scope = DofScope::free) {
  return assemble_form(m, CoefficientField::constant(1.0), 0.0, scope);
}

/// Gram matrix of the H1 inner product: stiffness plus mass.
inline CsrMatrix assemble_h1_matrix(const Mesh& m, DofScope scope = DofScope::free) {
  return add(1.0, assemble_stiffness(m, scope), 1.0, assemble_mass(m, scope));
}

/// Integrand value (s, g) at a quadrature point contributes
/// int s phi_i + g . grad phi_i to entry i.
struct BasisPairing {
  double value = 0.0;
  Vec2 gradient{0.0, 0.0};
};

/// F_i = int (s phi_i + g . grad phi_i) for an integrand evaluated at the
/// physical quadrature points of every cell.
template <class Integrand>
Vector integrate_against_basis(const Mesh& m, const QuadratureRule& q, Integrand&& integrand,
                               DofScope scope = DofScope::free) {
  Vector f(static_cast<std::size_t>(detail::scope_size(m, scope)), 0.0);
  const int nl = m.dim() + 1;
  for (Index c = 0; c < m.n_cells(); ++c) {
    const double meas = m.cell_measure(c);
    const auto g = m.shape_gradients(c);
    const auto k = m.cell(c);
    std::array<double, 3> local{0.0, 0.0, 0.0};
    for (std::size_t p = 0; p < q.size(); ++p) {
      const auto lam = std::span<const double>(q.points[p].data(), 3);
      const BasisPairing s = integrand(m.map_barycentric(c, lam), c);
      const double w = q.weights[p] * meas;
      for (int i = 0; i < nl; ++i)
        local[i] += w * (s.value * lam[i] + s.gradient[0] * g[i][0] + s.gradient[1] * g[i][1]);
    }
    for (int i = 0; i < nl; ++i) {
      const Index gi = detail::global_index(m, k[i], scope);
      if (gi >= 0) f[gi] += local[i];
    }
  }
  return f;
}

/// int f(x) dx over the mesh with the given rule.
template <class F>
double integrate(const Mesh& m, const QuadratureRule& q, F&& f) {
  double total = 0.0;
  for (Index c = 0; c < m.n_cells(); ++c) {
    const double meas = m.cell_measure(c);
    double cell_sum = 0.0;
    for (std::size_t p = 0; p < q.size(); ++p) {
      const auto lam = std::span<const double>(q.points[p].data(), 3);
      cell_sum += q.weights[p] * f(m.map_barycentric(c, lam), c, lam);
    }
    total += meas * cell_sum;
  }
  return total;
}

/// F_i = <f(t), phi_i> for a pointwise load, by the composite fine rule.
inline Vector assemble_load(const Mesh& m, const SpaceTimeFunction& f, double t,
                            const QuadratureRule& q) {
  return integrate_against_basis(m, q, [&](const Point& x, Index) {
    return BasisPairing{f(x, t), {0.0, 0.0}};
  });
}

inline Vector assemble_load(const Mesh& m, const SpaceTimeFunction& f, double t) {
  return assemble_load(m, f, t, quadrature::fine_rule(m.dim()));
}

/// Load defined by the weak recipe <f(t), v> = (u'(t), v) + a(u(t), v; t)
/// for a given space-time field u; no strong form of f is ever formed.
inline Vector assemble_weak_load(const Mesh& m, const CoefficientField& coeff, double t,
                                 const ScalarFunction& u, const VectorFunction& grad_u,
                                 const ScalarFunction& u_dot, const QuadratureRule& q) {
  return integrate_against_basis(m, q, [&](const Point& x, Index) {
    const auto s = coeff.sample(x, t);
    const Vec2 gu = grad_u(x);
    const double uv = u(x);
    return BasisPairing{u_dot(x) + s.b[0] * gu[0] + s.b[1] * gu[1] + s.c * uv,
                        {s.a * gu[0], s.a * gu[1]}};
  });
}

/// values_i = g(x_i) at the free vertices.
inline FeFunction interpolate_nodal(MeshPtr m, const ScalarFunction& g) {
  Vector v(static_cast<std::size_t>(m->n_free()));
  for (Index i = 0; i < m->n_free(); ++i) {
    v[i] = g(m->vertex(m->free_vertices()[i]));
    if (!std::isfinite(v[i])) throw Error("interpolate_nodal: non-finite sample at a free vertex");
  }
  return FeFunction(std::move(m), std::move(v));
}

/// Vertex values of a P1 function with zero boundary values.
inline Vector to_vertex_values(const Mesh& m, std::span<const double> free_values) {
  Vector v(static_cast<std::size_t>(m.n_vertices()), 0.0);
  for (Index i = 0; i < m.n_free(); ++i) v[m.free_vertices()[i]] = free_values[i];
  return v;
}

/// Evaluates P1 functions at arbitrary points by a linear search over cells.
class PointLocator {
 public:
  explicit PointLocator(MeshPtr mesh) : mesh_(std::move(mesh)) {}

  /// Returns the containing cell and barycentric coordinates, or cell -1.
  std::pair<Index, std::array<double, 3>> locate(const Point& x) const {
    const Mesh& m = *mesh_;
    constexpr double tol = 1e-12;
    for (Index c = 0; c < m.n_cells(); ++c) {
      const auto lam = m.barycentric(c, x);
      if (lam[0] >= -tol && lam[1] >= -tol && lam[2] >= -tol) return {c, lam};
    }
    return {-1, {0.0, 0.0, 0.0}};
  }

  double value(const FeFunction& u, const Point& x) const {
    const auto [c, lam] = locate(x);
    if (c < 0) return 0.0;
    double s = 0.0;
    const auto k = mesh_->cell(c);
    for (std::size_t j = 0; j < k.size(); ++j) {
      const Index d = mesh_->dof_of_vertex(k[j]);
      if (d >= 0) s += lam[j] * u.values[d];
    }
    return s;
  }

  Vec2 gradient(const FeFunction& u, const Point& x) const {
    const auto [c, lam] = locate(x);
    if (c < 0) return {0.0, 0.0};
    const auto g = mesh_->shape_gradients(c);
    const auto k = mesh_->cell(c);
    Vec2 r{0.0, 0.0};
    for (std::size_t j = 0; j < k.size(); ++j) {
      const Index d = mesh_->dof_of_vertex(k[j]);
      if (d < 0) continue;
      r[0] += g[j][0] * u.values[d];
      r[1] += g[j][1] * u.values[d];
    }
    return r;
  }

  /// The function as a SpatialField; holds copies of the mesh handle and values.
  SpatialField as_field(const FeFunction& u) const {
    auto self = std::make_shared<PointLocator>(*this);
    auto fu = std::make_shared<FeFunction>(u);
    return {[self, fu](const Point& x) { return self->value(*fu, x); },
            [self, fu](const Point& x) { return self->gradient(*fu, x); }};
  }

 private:
  MeshPtr mesh_;
};

/// Mass, stiffness and H1 matrices of a mesh, assembled once.
struct MeshOperators {
  MeshPtr mesh;
  CsrMatrix mass;
  CsrMatrix stiffness;
  CsrMatrix h1;

  explicit MeshOperators(MeshPtr m)
      : mesh(std::move(m)), mass(assemble_mass(*mesh)), stiffness(assemble_stiffness(*mesh)),
        h1(add(1.0, stiffness, 1.0, mass)) {}
};

/// Matrix P with P_fc = phi^coarse_c(x_f), mapping free coarse coefficients
/// to free fine coefficients; `fine` must descend from `coarse` through
/// `chain` (intermediate meshes, finest last, excluding coarse).
inline CsrMatrix prolongation(const Mesh& coarse, std::span<const Mesh* const> chain) {
  // vertex-level map from the coarse mesh to the current level
  CsrMatrix p = CsrMatrix::identity(coarse.n_vertices());
  const Mesh* parent = &coarse;
  for (const Mesh* child : chain) {
    if (static_cast<Index>(child->parents().size()) != child->n_vertices())
      throw std::invalid_argument("prolongation: mesh carries no refinement lineage");
    TripletBuilder t(child->n_vertices(), parent->n_vertices());
    for (Index v = 0; v < child->n_vertices(); ++v) {
      const auto [a, b] = child->parents()[v];
      if (a >= parent->n_vertices() || b >= parent->n_vertices())
        throw std::invalid_argument("prolongation: lineage does not match the parent mesh");
      if (a == b) {
        t.add(v, a, 1.0);
      } else {
        t.add(v, a, 0.5);
        t.add(v, b, 0.5);
      }
    }
    p = multiply(t.build(), p);
    parent = child;
  }
  const Mesh& fine = *parent;
  TripletBuilder t(fine.n_free(), coarse.n_free());
  for (Index i = 0; i < fine.n_free(); ++i) {
    const Index v = fine.free_vertices()[i];
    for (Index k = p.row_offsets()[v]; k < p.row_offsets()[v + 1]; ++k) {
      const Index d = coarse.dof_of_vertex(p.col_indices()[k]);
      if (d >= 0) t.add(i, d, p.values()[k]);
    }
  }
  return t.build();
}

}  // namespace parafem
