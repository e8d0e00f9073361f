#pragma once

#include "parafem/core.hpp"

namespace parafem {

/// Quadrature on the reference simplex in barycentric coordinates. Weights
/// are relative to the simplex measure and sum to one.
struct QuadratureRule {
  int dim = 1;
  int degree = 0;
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
};

namespace quadrature {

inline QuadratureRule segment_gauss2() {
  const double d = 0.5 / std::sqrt(3.0);
  return {1, 3, {{0.5 + d, 0.5 - d, 0.0}, {0.5 - d, 0.5 + d, 0.0}}, {0.5, 0.5}};
}

inline QuadratureRule segment_gauss3() {
  const double d = 0.5 * std::sqrt(0.6);
  return {1,
          5,
          {{0.5 + d, 0.5 - d, 0.0}, {0.5, 0.5, 0.0}, {0.5 - d, 0.5 + d, 0.0}},
          {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0}};
}

/// Degree-2 rule with points strictly inside the triangle.
inline QuadratureRule triangle_interior3() {
  const double a = 2.0 / 3.0, b = 1.0 / 6.0;
  return {2, 2, {{a, b, b}, {b, a, b}, {b, b, a}}, {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}};
}

/// Radon's seven-point degree-5 rule.
inline QuadratureRule triangle_radon7() {
  const double s = std::sqrt(15.0);
  const double a1 = (6.0 - s) / 21.0, b1 = (9.0 + 2.0 * s) / 21.0, w1 = (155.0 - s) / 1200.0;
  const double a2 = (6.0 + s) / 21.0, b2 = (9.0 - 2.0 * s) / 21.0, w2 = (155.0 + s) / 1200.0;
  return {2,
          5,
          {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0},
           {b1, a1, a1},
           {a1, b1, a1},
           {a1, a1, b1},
           {b2, a2, a2},
           {a2, b2, a2},
           {a2, a2, b2}},
          {9.0 / 40.0, w1, w1, w1, w2, w2, w2}};
}

/// Rule used for assembling the operator matrices.
inline QuadratureRule assembly_rule(int dim) {
  return dim == 1 ? segment_gauss2() : triangle_interior3();
}

/// Composite degree-5 rule: 1D cells are cut into 4 * 2^extra_levels
/// pieces, triangles into 4^(1 + extra_levels) by repeated midpoint splits.
inline QuadratureRule fine_rule(int dim, int extra_levels = 0) {
  if (extra_levels < 0) throw std::invalid_argument("fine_rule: extra_levels must be >= 0");
  QuadratureRule out{dim, 5, {}, {}};
  if (dim == 1) {
    const QuadratureRule g = segment_gauss3();
    const int pieces = 4 << extra_levels;
    for (int k = 0; k < pieces; ++k) {
      const double lo = static_cast<double>(k) / pieces, hi = static_cast<double>(k + 1) / pieces;
      for (std::size_t q = 0; q < g.size(); ++q) {
        // g.points[q][1] is the position along the reference segment
        const double s = lo + (hi - lo) * g.points[q][1];
        out.points.push_back({1.0 - s, s, 0.0});
        out.weights.push_back(g.weights[q] / pieces);
      }
    }
    return out;
  }
  using Tri = std::array<std::array<double, 3>, 3>;
  std::vector<Tri> tris{Tri{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}};
  for (int level = 0; level <= extra_levels; ++level) {
    std::vector<Tri> next;
    next.reserve(tris.size() * 4);
    auto mid = [](const std::array<double, 3>& a, const std::array<double, 3>& b) {
      return std::array<double, 3>{0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])};
    };
    for (const auto& t : tris) {
      const auto m01 = mid(t[0], t[1]), m12 = mid(t[1], t[2]), m20 = mid(t[2], t[0]);
      next.push_back({t[0], m01, m20});
      next.push_back({m01, t[1], m12});
      next.push_back({m20, m12, t[2]});
      next.push_back({m01, m12, m20});
    }
    tris = std::move(next);
  }
  const QuadratureRule r = triangle_radon7();
  const double wscale = 1.0 / static_cast<double>(tris.size());
  for (const auto& t : tris) {
    for (std::size_t q = 0; q < r.size(); ++q) {
      std::array<double, 3> p{0, 0, 0};
      for (int j = 0; j < 3; ++j)
        for (int c = 0; c < 3; ++c) p[c] += r.points[q][j] * t[j][c];
      out.points.push_back(p);
      out.weights.push_back(r.weights[q] * wscale);
    }
  }
  return out;
}

}  // namespace quadrature
}  // namespace parafem
