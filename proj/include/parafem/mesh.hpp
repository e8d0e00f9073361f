#pragma once

#include <algorithm>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <ostream>
#include <sstream>
#include <utility>

#include "parafem/core.hpp"

namespace parafem {

/// Vertex indices of a simplex; segments use the first two entries.
using Cell = std::array<Index, 3>;

/// Axis-aligned box that generated a structured mesh.
struct Box {
  Point lower{0.0, 0.0};
  Point upper{0.0, 0.0};
};

/// Conforming simplicial partition of an interval or a rectangle.
///
/// Vertices are stored in lexicographic coordinate order and the free
/// (interior) vertices inherit that order; they are the P1 degrees of freedom.
/// A refined mesh records, for each vertex, the pair of parent vertices whose
/// midpoint it is (both entries equal for inherited vertices).
class Mesh {
 public:
  static Mesh from_parts(int dim, std::vector<Point> vertices, std::vector<Cell> cells, Box box,
                         std::vector<std::array<Index, 2>> parents = {}, int level = 0) {
    if (dim != 1 && dim != 2) throw std::invalid_argument("Mesh: dim must be 1 or 2");
    Mesh m;
    m.dim_ = dim;
    m.box_ = box;
    m.level_ = level;

    // lexicographic renumbering
    const auto nv = static_cast<Index>(vertices.size());
    std::vector<Index> order(vertices.size());
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return vertices[a] < vertices[b]; });
    std::vector<Index> new_index(vertices.size());
    for (Index k = 0; k < nv; ++k) new_index[order[k]] = k;
    m.vertices_.resize(vertices.size());
    for (Index k = 0; k < nv; ++k) m.vertices_[k] = vertices[order[k]];
    if (!parents.empty()) {
      if (parents.size() != vertices.size())
        throw std::invalid_argument("Mesh: parent table size mismatch");
      m.parents_.resize(parents.size());
      for (Index k = 0; k < nv; ++k) m.parents_[k] = parents[order[k]];
    }
    for (std::size_t k = 1; k < m.vertices_.size(); ++k)
      if (m.vertices_[k] == m.vertices_[k - 1])
        throw std::invalid_argument("Mesh: duplicate vertex");

    m.cells_ = std::move(cells);
    for (auto& c : m.cells_) {
      for (int j = 0; j <= dim; ++j) {
        if (c[j] < 0 || c[j] >= nv) throw std::invalid_argument("Mesh: cell index out of range");
        c[j] = new_index[c[j]];
      }
      if (dim == 1) {
        c[2] = -1;
        if (m.vertices_[c[0]][0] > m.vertices_[c[1]][0]) std::swap(c[0], c[1]);
      } else if (signed_area(m.vertices_[c[0]], m.vertices_[c[1]], m.vertices_[c[2]]) < 0.0) {
        std::swap(c[1], c[2]);
      }
    }

    m.dof_.assign(vertices.size(), -1);
    for (Index v = 0; v < nv; ++v) {
      if (!m.on_box_boundary(m.vertices_[v])) {
        m.dof_[v] = static_cast<Index>(m.free_.size());
        m.free_.push_back(v);
      }
    }

    m.h_max_ = 0.0;
    m.gamma_ = std::numeric_limits<double>::infinity();
    for (Index c = 0; c < m.n_cells(); ++c) {
      const double meas = m.cell_measure(c);
      if (!(meas > 0.0)) throw std::invalid_argument("Mesh: degenerate cell");
      const auto [h, rho] = m.diameter_and_inradius(c);
      m.h_max_ = std::max(m.h_max_, h);
      m.gamma_ = std::min(m.gamma_, rho / h);
    }
    if (m.cells_.empty()) throw std::invalid_argument("Mesh: no cells");
    return m;
  }

  int dim() const { return dim_; }
  Index n_vertices() const { return static_cast<Index>(vertices_.size()); }
  Index n_cells() const { return static_cast<Index>(cells_.size()); }
  Index n_free() const { return static_cast<Index>(free_.size()); }

  const std::vector<Point>& vertices() const { return vertices_; }
  const Point& vertex(Index v) const { return vertices_[v]; }
  const std::vector<Cell>& cells() const { return cells_; }
  std::span<const Index> cell(Index c) const {
    return std::span<const Index>(cells_[c].data(), static_cast<std::size_t>(dim_ + 1));
  }
  const std::vector<Index>& free_vertices() const { return free_; }
  /// Degree-of-freedom index of a vertex, or -1 on the boundary.
  Index dof_of_vertex(Index v) const { return dof_[v]; }
  bool is_boundary(Index v) const { return dof_[v] < 0; }

  double h_max() const { return h_max_; }
  double gamma() const { return gamma_; }
  const Box& box() const { return box_; }
  int level() const { return level_; }
  const std::vector<std::array<Index, 2>>& parents() const { return parents_; }

  double domain_measure() const {
    double m = box_.upper[0] - box_.lower[0];
    if (dim_ == 2) m *= box_.upper[1] - box_.lower[1];
    return m;
  }

  double cell_measure(Index c) const {
    const auto& k = cells_[c];
    if (dim_ == 1) return vertices_[k[1]][0] - vertices_[k[0]][0];
    return signed_area(vertices_[k[0]], vertices_[k[1]], vertices_[k[2]]);
  }

  /// Diameter h_T and inscribed radius rho_T; segments use rho_T = h_T / 2.
  std::pair<double, double> diameter_and_inradius(Index c) const {
    const auto& k = cells_[c];
    if (dim_ == 1) {
      const double h = vertices_[k[1]][0] - vertices_[k[0]][0];
      return {h, 0.5 * h};
    }
    std::array<double, 3> e{distance(vertices_[k[0]], vertices_[k[1]]),
                            distance(vertices_[k[1]], vertices_[k[2]]),
                            distance(vertices_[k[2]], vertices_[k[0]])};
    // sorted so the perimeter is independent of the local vertex order
    std::sort(e.begin(), e.end());
    const double perimeter = (e[0] + e[1]) + e[2];
    const double area = std::abs(cell_measure(c));
    return {e[2], 2.0 * area / perimeter};
  }

  Point centroid(Index c) const {
    Point p{0.0, 0.0};
    for (Index v : cell(c)) {
      p[0] += vertices_[v][0];
      p[1] += vertices_[v][1];
    }
    const double s = 1.0 / (dim_ + 1);
    return {p[0] * s, p[1] * s};
  }

  Point map_barycentric(Index c, std::span<const double> lambda) const {
    Point p{0.0, 0.0};
    const auto k = cell(c);
    for (std::size_t j = 0; j < k.size(); ++j) {
      p[0] += lambda[j] * vertices_[k[j]][0];
      p[1] += lambda[j] * vertices_[k[j]][1];
    }
    return p;
  }

  /// Barycentric coordinates of x with respect to cell c.
  std::array<double, 3> barycentric(Index c, const Point& x) const {
    const auto& k = cells_[c];
    std::array<double, 3> lam{0.0, 0.0, 0.0};
    if (dim_ == 1) {
      const double a = vertices_[k[0]][0], b = vertices_[k[1]][0];
      lam[1] = (x[0] - a) / (b - a);
      lam[0] = 1.0 - lam[1];
      return lam;
    }
    const double area = cell_measure(c);
    lam[0] = signed_area(x, vertices_[k[1]], vertices_[k[2]]) / area;
    lam[1] = signed_area(vertices_[k[0]], x, vertices_[k[2]]) / area;
    lam[2] = 1.0 - lam[0] - lam[1];
    return lam;
  }

  /// Gradients of the local barycentric (P1 shape) functions on cell c.
  std::array<Vec2, 3> shape_gradients(Index c) const {
    const auto& k = cells_[c];
    std::array<Vec2, 3> g{};
    if (dim_ == 1) {
      const double h = vertices_[k[1]][0] - vertices_[k[0]][0];
      g[0] = {-1.0 / h, 0.0};
      g[1] = {1.0 / h, 0.0};
      return g;
    }
    const Point& p0 = vertices_[k[0]];
    const Point& p1 = vertices_[k[1]];
    const Point& p2 = vertices_[k[2]];
    const double det = 2.0 * signed_area(p0, p1, p2);
    g[0] = {(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det};
    g[1] = {(p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det};
    g[2] = {(p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det};
    return g;
  }

  bool on_box_boundary(const Point& p) const {
    if (p[0] == box_.lower[0] || p[0] == box_.upper[0]) return true;
    return dim_ == 2 && (p[1] == box_.lower[1] || p[1] == box_.upper[1]);
  }

  static double signed_area(const Point& a, const Point& b, const Point& c) {
    return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
  }

  static double distance(const Point& a, const Point& b) {
    return std::hypot(b[0] - a[0], b[1] - a[1]);
  }

 private:
  Mesh() = default;

  int dim_ = 1;
  int level_ = 0;
  Box box_;
  std::vector<Point> vertices_;
  std::vector<Cell> cells_;
  std::vector<Index> dof_;
  std::vector<Index> free_;
  std::vector<std::array<Index, 2>> parents_;
  double h_max_ = 0.0;
  double gamma_ = 0.0;
};

using MeshPtr = std::shared_ptr<const Mesh>;

inline Mesh build_interval_mesh(Index n_cells, double a, double b) {
  if (n_cells < 2)
    throw std::invalid_argument("build_interval_mesh: need at least 2 cells for an interior vertex");
  if (!(a < b)) throw std::invalid_argument("build_interval_mesh: require a < b");
  std::vector<Point> v(static_cast<std::size_t>(n_cells + 1));
  const double h = (b - a) / static_cast<double>(n_cells);
  for (Index i = 0; i <= n_cells; ++i) v[i] = {i == n_cells ? b : a + h * static_cast<double>(i), 0.0};
  std::vector<Cell> c(static_cast<std::size_t>(n_cells));
  for (Index i = 0; i < n_cells; ++i) c[i] = {i, i + 1, -1};
  return Mesh::from_parts(1, std::move(v), std::move(c), Box{{a, 0.0}, {b, 0.0}});
}

/// Structured triangulation of [x0,x1]^2: each of the n^2 squares is split
/// along its lower-left to upper-right diagonal. With even n and a symmetric
/// box the coordinate axes are unions of mesh edges.
inline Mesh build_square_mesh(Index n_per_side, double x0, double x1,
                              bool require_quadrant_alignment = false) {
  if (n_per_side < 2) throw std::invalid_argument("build_square_mesh: n_per_side must be >= 2");
  if (!(x0 < x1)) throw std::invalid_argument("build_square_mesh: require x0 < x1");
  if (require_quadrant_alignment && (n_per_side % 2 != 0 || x0 != -x1))
    throw std::invalid_argument(
        "build_square_mesh: quadrant alignment needs an even n_per_side on a symmetric box");
  const Index n = n_per_side;
  const double h = (x1 - x0) / static_cast<double>(n);
  auto coord = [&](Index i) { return i == n ? x1 : x0 + h * static_cast<double>(i); };
  auto id = [&](Index i, Index j) { return i * (n + 1) + j; };
  std::vector<Point> v;
  v.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
  for (Index i = 0; i <= n; ++i)
    for (Index j = 0; j <= n; ++j) v.push_back({coord(i), coord(j)});
  std::vector<Cell> c;
  c.reserve(static_cast<std::size_t>(2 * n * n));
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      c.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      c.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return Mesh::from_parts(2, std::move(v), std::move(c), Box{{x0, x0}, {x1, x1}});
}

/// Uniform refinement: segments are bisected, triangles split into four by
/// their edge midpoints.
inline Mesh refine_uniform(const Mesh& m) {
  std::vector<Point> v = m.vertices();
  std::vector<std::array<Index, 2>> parents(v.size());
  for (Index i = 0; i < m.n_vertices(); ++i) parents[i] = {i, i};
  std::map<std::pair<Index, Index>, Index> midpoint;
  auto mid = [&](Index a, Index b) {
    const auto key = std::minmax(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    const Point& pa = m.vertex(a);
    const Point& pb = m.vertex(b);
    const auto idx = static_cast<Index>(v.size());
    v.push_back({0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])});
    parents.push_back({key.first, key.second});
    midpoint.emplace(key, idx);
    return idx;
  };
  std::vector<Cell> cells;
  if (m.dim() == 1) {
    cells.reserve(static_cast<std::size_t>(2 * m.n_cells()));
    for (const auto& c : m.cells()) {
      const Index mm = mid(c[0], c[1]);
      cells.push_back({c[0], mm, -1});
      cells.push_back({mm, c[1], -1});
    }
  } else {
    cells.reserve(static_cast<std::size_t>(4 * m.n_cells()));
    for (const auto& c : m.cells()) {
      const Index m01 = mid(c[0], c[1]);
      const Index m12 = mid(c[1], c[2]);
      const Index m20 = mid(c[2], c[0]);
      cells.push_back({c[0], m01, m20});
      cells.push_back({m01, c[1], m12});
      cells.push_back({m20, m12, c[2]});
      cells.push_back({m01, m12, m20});
    }
  }
  return Mesh::from_parts(m.dim(), std::move(v), std::move(cells), m.box(), std::move(parents),
                          m.level() + 1);
}

inline Mesh refine_uniform(const Mesh& m, int times) {
  Mesh r = m;
  for (int k = 0; k < times; ++k) r = refine_uniform(r);
  return r;
}

inline double shape_regularity(const Mesh& m) { return m.gamma(); }

inline MeshPtr share(Mesh m) { return std::make_shared<const Mesh>(std::move(m)); }

/// Plain-text dump: "dim n_vertices n_cells", vertex coordinates, cell indices.
inline void write_mesh(std::ostream& os, const Mesh& m) {
  os << m.dim() << ' ' << m.n_vertices() << ' ' << m.n_cells() << '\n';
  char buf[64];
  for (const auto& p : m.vertices()) {
    std::snprintf(buf, sizeof buf, "%.17g", p[0]);
    os << buf;
    if (m.dim() == 2) {
      std::snprintf(buf, sizeof buf, " %.17g", p[1]);
      os << buf;
    }
    os << '\n';
  }
  for (Index c = 0; c < m.n_cells(); ++c) {
    const auto k = m.cell(c);
    for (std::size_t j = 0; j < k.size(); ++j) os << (j ? " " : "") << k[j];
    os << '\n';
  }
}

/// Reads a dump written by write_mesh; the bounding box of the vertices is
/// taken as the generating box.
inline Mesh read_mesh(std::istream& is) {
  int dim = 0;
  Index nv = 0, nc = 0;
  if (!(is >> dim >> nv >> nc) || (dim != 1 && dim != 2) || nv < 2 || nc < 1)
    throw Error("read_mesh: malformed header");
  std::vector<Point> v(static_cast<std::size_t>(nv), Point{0.0, 0.0});
  Box box{{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()},
          {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()}};
  for (auto& p : v) {
    for (int d = 0; d < dim; ++d)
      if (!(is >> p[d])) throw Error("read_mesh: truncated vertex block");
    for (int d = 0; d < 2; ++d) {
      box.lower[d] = std::min(box.lower[d], p[d]);
      box.upper[d] = std::max(box.upper[d], p[d]);
    }
  }
  std::vector<Cell> c(static_cast<std::size_t>(nc), Cell{-1, -1, -1});
  for (auto& k : c)
    for (int j = 0; j <= dim; ++j)
      if (!(is >> k[j])) throw Error("read_mesh: truncated cell block");
  return Mesh::from_parts(dim, std::move(v), std::move(c), box);
}

}  // namespace parafem
