#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <tuple>
#include <utility>

#include "parafem/core.hpp"

namespace parafem {

/// Compressed-sparse-row matrix. Column indices are strictly increasing
/// within each row. Square for all discrete operators; prolongations are
/// the only rectangular instances.
class CsrMatrix {
 public:
  CsrMatrix() : row_offsets_{0} {}

  CsrMatrix(Index rows, Index cols, std::vector<Index> row_offsets, std::vector<Index> col_indices,
            std::vector<double> values)
      : rows_(rows),
        cols_(cols),
        row_offsets_(std::move(row_offsets)),
        col_indices_(std::move(col_indices)),
        values_(std::move(values)) {
    if (row_offsets_.size() != static_cast<std::size_t>(rows_ + 1) || row_offsets_.front() != 0 ||
        row_offsets_.back() != static_cast<Index>(col_indices_.size()) ||
        col_indices_.size() != values_.size())
      throw std::invalid_argument("CsrMatrix: inconsistent arrays");
    for (Index i = 0; i < rows_; ++i) {
      if (row_offsets_[i] > row_offsets_[i + 1])
        throw std::invalid_argument("CsrMatrix: row offsets must be nondecreasing");
      for (Index k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
        if (col_indices_[k] < 0 || col_indices_[k] >= cols_)
          throw std::invalid_argument("CsrMatrix: column index out of range");
        if (k > row_offsets_[i] && col_indices_[k] <= col_indices_[k - 1])
          throw std::invalid_argument("CsrMatrix: column indices must increase within a row");
      }
    }
  }

  static CsrMatrix identity(Index n) {
    std::vector<Index> off(static_cast<std::size_t>(n + 1)), col(static_cast<std::size_t>(n));
    for (Index i = 0; i <= n; ++i) off[i] = i;
    for (Index i = 0; i < n; ++i) col[i] = i;
    return CsrMatrix(n, n, std::move(off), std::move(col), Vector(static_cast<std::size_t>(n), 1.0));
  }

  Index n() const { return rows_; }
  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index nnz() const { return static_cast<Index>(values_.size()); }
  const std::vector<Index>& row_offsets() const { return row_offsets_; }
  const std::vector<Index>& col_indices() const { return col_indices_; }
  const std::vector<double>& values() const { return values_; }

  double at(Index i, Index j) const {
    const auto first = col_indices_.begin() + row_offsets_[i];
    const auto last = col_indices_.begin() + row_offsets_[i + 1];
    const auto it = std::lower_bound(first, last, j);
    return (it != last && *it == j) ? values_[static_cast<std::size_t>(it - col_indices_.begin())]
                                    : 0.0;
  }

  Vector diagonal() const {
    Vector d(static_cast<std::size_t>(std::min(rows_, cols_)), 0.0);
    for (Index i = 0; i < static_cast<Index>(d.size()); ++i) d[i] = at(i, i);
    return d;
  }

  void multiply(std::span<const double> x, std::span<double> y) const {
    if (static_cast<Index>(x.size()) != cols_ || static_cast<Index>(y.size()) != rows_)
      throw std::invalid_argument("matvec: dimension mismatch");
    for (Index i = 0; i < rows_; ++i) {
      double s = 0.0;
      for (Index k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
        s += values_[k] * x[col_indices_[k]];
      y[i] = s;
    }
  }

  void multiply_transpose(std::span<const double> x, std::span<double> y) const {
    if (static_cast<Index>(x.size()) != rows_ || static_cast<Index>(y.size()) != cols_)
      throw std::invalid_argument("matvec_transpose: dimension mismatch");
    std::fill(y.begin(), y.end(), 0.0);
    for (Index i = 0; i < rows_; ++i)
      for (Index k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
        y[col_indices_[k]] += values_[k] * x[i];
  }

  bool is_symmetric(double tol) const {
    if (rows_ != cols_) return false;
    for (Index i = 0; i < rows_; ++i)
      for (Index k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
        if (std::abs(values_[k] - at(col_indices_[k], i)) > tol) return false;
    return true;
  }

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<Index> row_offsets_;
  std::vector<Index> col_indices_;
  std::vector<double> values_;
};

using SparseMatrix = CsrMatrix;

/// Accumulates (row, col, value) contributions; duplicates are summed.
class TripletBuilder {
 public:
  TripletBuilder(Index rows, Index cols) : rows_(rows), cols_(cols) {}

  void add(Index i, Index j, double v) { entries_.emplace_back(i, j, v); }

  CsrMatrix build() {
    std::sort(entries_.begin(), entries_.end(), [](const auto& a, const auto& b) {
      return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
    });
    std::vector<Index> off(static_cast<std::size_t>(rows_ + 1), 0);
    std::vector<Index> col;
    Vector val;
    col.reserve(entries_.size());
    val.reserve(entries_.size());
    Index last_i = -1, last_j = -1;
    for (const auto& [i, j, v] : entries_) {
      if (i < 0 || i >= rows_ || j < 0 || j >= cols_)
        throw std::invalid_argument("TripletBuilder: index out of range");
      if (i == last_i && j == last_j) {
        val.back() += v;
      } else {
        col.push_back(j);
        val.push_back(v);
        ++off[i + 1];
        last_i = i;
        last_j = j;
      }
    }
    for (Index i = 0; i < rows_; ++i) off[i + 1] += off[i];
    entries_.clear();
    return CsrMatrix(rows_, cols_, std::move(off), std::move(col), std::move(val));
  }

 private:
  Index rows_, cols_;
  std::vector<std::tuple<Index, Index, double>> entries_;
};

inline Vector matvec(const CsrMatrix& a, std::span<const double> x) {
  Vector y(static_cast<std::size_t>(a.rows()));
  a.multiply(x, y);
  return y;
}

inline Vector matvec_transpose(const CsrMatrix& a, std::span<const double> x) {
  Vector y(static_cast<std::size_t>(a.cols()));
  a.multiply_transpose(x, y);
  return y;
}

/// alpha*A + beta*B over the union of both sparsity patterns.
inline CsrMatrix add(double alpha, const CsrMatrix& a, double beta, const CsrMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("add: dimension mismatch");
  std::vector<Index> off(static_cast<std::size_t>(a.rows() + 1), 0);
  std::vector<Index> col;
  Vector val;
  col.reserve(static_cast<std::size_t>(std::max(a.nnz(), b.nnz())));
  val.reserve(col.capacity());
  const auto& ao = a.row_offsets();
  const auto& bo = b.row_offsets();
  const auto& ac = a.col_indices();
  const auto& bc = b.col_indices();
  const auto& av = a.values();
  const auto& bv = b.values();
  for (Index i = 0; i < a.rows(); ++i) {
    Index p = ao[i], q = bo[i];
    while (p < ao[i + 1] || q < bo[i + 1]) {
      if (q >= bo[i + 1] || (p < ao[i + 1] && ac[p] < bc[q])) {
        col.push_back(ac[p]);
        val.push_back(alpha * av[p++]);
      } else if (p >= ao[i + 1] || bc[q] < ac[p]) {
        col.push_back(bc[q]);
        val.push_back(beta * bv[q++]);
      } else {
        col.push_back(ac[p]);
        val.push_back(alpha * av[p++] + beta * bv[q++]);
      }
    }
    off[i + 1] = static_cast<Index>(col.size());
  }
  return CsrMatrix(a.rows(), a.cols(), std::move(off), std::move(col), std::move(val));
}

/// Sparse product A*B.
inline CsrMatrix multiply(const CsrMatrix& a, const CsrMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("multiply: dimension mismatch");
  TripletBuilder t(a.rows(), b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index k = a.row_offsets()[i]; k < a.row_offsets()[i + 1]; ++k) {
      const Index r = a.col_indices()[k];
      for (Index l = b.row_offsets()[r]; l < b.row_offsets()[r + 1]; ++l)
        t.add(i, b.col_indices()[l], a.values()[k] * b.values()[l]);
    }
  return t.build();
}

struct SolveReport {
  Index iterations = 0;
  double residual_rel = 0.0;
  bool converged = false;
  /// Tolerance missed, but the residual is within the rounding error of
  /// evaluating b - Ax in floating point, so no smaller value is certifiable.
  bool rounding_limited = false;

  bool acceptable() const { return converged || rounding_limited; }
};

struct SolveResult {
  Vector x;
  SolveReport report;
};

class SolverError : public Error {
 public:
  SolverError(const std::string& what, SolveReport report) : Error(what), report_(report) {}
  const SolveReport& report() const { return report_; }

 private:
  SolveReport report_;
};

inline constexpr double kDefaultSolverTolerance = 1e-10;

inline double relative_residual(const CsrMatrix& a, std::span<const double> x,
                                std::span<const double> b) {
  Vector r = matvec(a, x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  const double nb = norm2(b);
  return nb > 0.0 ? norm2(r) / nb : norm2(r);
}

/// Relative size of the rounding error made when evaluating b - Ax:
/// c eps || |A||x| + |b| ||_2 / ||b||_2 with c = 8 (max nonzeros per row).
inline double residual_rounding_floor(const CsrMatrix& a, std::span<const double> x,
                                      std::span<const double> b) {
  Index width = 1;
  double sum = 0.0;
  for (Index i = 0; i < a.rows(); ++i) {
    double s = std::abs(b[i]);
    for (Index k = a.row_offsets()[i]; k < a.row_offsets()[i + 1]; ++k)
      s += std::abs(a.values()[k]) * std::abs(x[a.col_indices()[k]]);
    width = std::max(width, a.row_offsets()[i + 1] - a.row_offsets()[i]);
    sum += s * s;
  }
  const double nb = norm2(b);
  return nb > 0.0 ? 8.0 * static_cast<double>(width) * std::numeric_limits<double>::epsilon() * std::sqrt(sum) / nb
                  : 0.0;
}

namespace detail {
inline Vector inverse_diagonal(const CsrMatrix& a) {
  Vector d = a.diagonal();
  for (auto& v : d) v = (v != 0.0) ? 1.0 / v : 1.0;
  return d;
}

inline void check_square_system(const CsrMatrix& a, std::span<const double> b, double tol_rel) {
  if (a.rows() != a.cols()) throw std::invalid_argument("solve: matrix must be square");
  if (static_cast<Index>(b.size()) != a.n()) throw std::invalid_argument("solve: dimension mismatch");
  if (!(tol_rel > 0.0 && tol_rel < 1.0)) throw std::invalid_argument("solve: tol_rel must lie in (0,1)");
}
}  // namespace detail

/// Jacobi-preconditioned conjugate gradient for SPD systems. Stops when
/// ||Ax - b|| <= tol_rel ||b||; the iteration cap defaults to 4n. The
/// recursive residual is replaced by the true one on restarts, so drift
/// cannot fake convergence. A report with converged == false is returned,
/// never thrown, on exhaustion.
inline SolveResult solve_spd(const CsrMatrix& a, std::span<const double> b,
                             double tol_rel = kDefaultSolverTolerance,
                             std::optional<std::span<const double>> x0 = std::nullopt,
                             std::optional<Index> max_iterations = std::nullopt) {
  detail::check_square_system(a, b, tol_rel);
  const Index n = a.n();
  const Index cap = max_iterations.value_or(std::max<Index>(4 * n, 1));
  SolveResult out;
  out.x.assign(static_cast<std::size_t>(n), 0.0);
  const double nb = norm2(b);
  if (nb == 0.0) {
    out.report = {0, 0.0, true, false};
    return out;
  }
  if (x0 && x0->size() == static_cast<std::size_t>(n)) std::copy(x0->begin(), x0->end(), out.x.begin());
  const Vector dinv = detail::inverse_diagonal(a);
  Vector r(static_cast<std::size_t>(n)), z(static_cast<std::size_t>(n)), p(static_cast<std::size_t>(n)),
      q(static_cast<std::size_t>(n));
  const double target = tol_rel * nb;
  Index it = 0;
  double best = std::numeric_limits<double>::infinity();
  constexpr int kMaxRestarts = 4;
  for (int restart = 0; restart <= kMaxRestarts && it < cap; ++restart) {
    a.multiply(out.x, q);
    for (Index i = 0; i < n; ++i) r[i] = b[i] - q[i];
    double rnorm = norm2(r);
    // stop restarting once the true residual no longer improves
    if (rnorm <= target || !(rnorm < 0.5 * best)) break;
    best = rnorm;
    for (Index i = 0; i < n; ++i) z[i] = dinv[i] * r[i];
    p = z;
    double rz = dot(r, z);
    while (rnorm > target && it < cap) {
      a.multiply(p, q);
      const double pq = dot(p, q);
      if (!(pq > 0.0)) break;  // not positive definite along p
      const double alpha = rz / pq;
      axpy(alpha, p, out.x);
      axpy(-alpha, q, r);
      for (Index i = 0; i < n; ++i) z[i] = dinv[i] * r[i];
      const double rz_new = dot(r, z);
      const double beta = rz_new / rz;
      rz = rz_new;
      for (Index i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
      rnorm = norm2(r);
      ++it;
    }
  }
  out.report.iterations = it;
  out.report.residual_rel = relative_residual(a, out.x, b);
  out.report.converged = out.report.residual_rel <= tol_rel;
  out.report.rounding_limited =
      !out.report.converged && out.report.residual_rel <= residual_rounding_floor(a, out.x, b);
  return out;
}

/// Dense row-major square matrix used as a verification oracle.
class DenseMatrix {
 public:
  explicit DenseMatrix(Index n = 0) : n_(n), a_(static_cast<std::size_t>(n * n), 0.0) {}
  Index n() const { return n_; }
  double& operator()(Index i, Index j) { return a_[static_cast<std::size_t>(i * n_ + j)]; }
  double operator()(Index i, Index j) const { return a_[static_cast<std::size_t>(i * n_ + j)]; }

  static DenseMatrix from_sparse(const CsrMatrix& s) {
    if (s.rows() != s.cols()) throw std::invalid_argument("DenseMatrix: square matrix required");
    DenseMatrix d(s.n());
    for (Index i = 0; i < s.n(); ++i)
      for (Index k = s.row_offsets()[i]; k < s.row_offsets()[i + 1]; ++k)
        d(i, s.col_indices()[k]) = s.values()[k];
    return d;
  }

 private:
  Index n_;
  std::vector<double> a_;
};

inline constexpr Index kDenseOracleLimit = 2000;

/// LU with partial pivoting. Pivots below 1e-14 in magnitude are reported
/// as singular.
inline Vector solve_dense_oracle(DenseMatrix a, std::span<const double> b) {
  const Index n = a.n();
  if (n > kDenseOracleLimit) throw std::invalid_argument("solve_dense_oracle: n exceeds 2000");
  if (static_cast<Index>(b.size()) != n) throw std::invalid_argument("solve_dense_oracle: dimension mismatch");
  Vector x(b.begin(), b.end());
  for (Index k = 0; k < n; ++k) {
    Index piv = k;
    for (Index i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    if (std::abs(a(piv, k)) < 1e-14) throw SingularMatrixError("solve_dense_oracle: singular matrix");
    if (piv != k) {
      for (Index j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      std::swap(x[k], x[piv]);
    }
    for (Index i = k + 1; i < n; ++i) {
      const double l = a(i, k) / a(k, k);
      if (l == 0.0) continue;
      for (Index j = k + 1; j < n; ++j) a(i, j) -= l * a(k, j);
      x[i] -= l * x[k];
    }
  }
  for (Index k = n - 1; k >= 0; --k) {
    double s = x[k];
    for (Index j = k + 1; j < n; ++j) s -= a(k, j) * x[j];
    x[k] = s / a(k, k);
  }
  return x;
}

/// Jacobi-preconditioned BiCGStab for general systems. Falls back to the
/// dense oracle for n <= 2000 when the iteration breaks down or stalls;
/// throws SolverError when no solution can be certified.
inline SolveResult solve_general(const CsrMatrix& a, std::span<const double> b,
                                 double tol_rel = kDefaultSolverTolerance,
                                 std::optional<std::span<const double>> x0 = std::nullopt) {
  detail::check_square_system(a, b, tol_rel);
  const Index n = a.n();
  const Index cap = std::max<Index>(4 * n, 1);
  SolveResult out;
  out.x.assign(static_cast<std::size_t>(n), 0.0);
  const double nb = norm2(b);
  if (nb == 0.0) {
    out.report = {0, 0.0, true, false};
    return out;
  }
  Vector r(b.begin(), b.end());
  if (x0 && x0->size() == static_cast<std::size_t>(n)) {
    std::copy(x0->begin(), x0->end(), out.x.begin());
    const Vector ax = matvec(a, out.x);
    for (Index i = 0; i < n; ++i) r[i] -= ax[i];
  }
  const Vector dinv = detail::inverse_diagonal(a);
  const Vector r_hat = r;
  Vector p(static_cast<std::size_t>(n), 0.0), v(static_cast<std::size_t>(n), 0.0);
  Vector y(static_cast<std::size_t>(n)), s(static_cast<std::size_t>(n)), z(static_cast<std::size_t>(n)),
      t(static_cast<std::size_t>(n));
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  const double target = tol_rel * nb;
  double rnorm = norm2(r);
  Index it = 0;
  bool breakdown = false;
  while (rnorm > target && it < cap) {
    const double rho_new = dot(r_hat, r);
    if (std::abs(rho_new) < 1e-300 || omega == 0.0) {
      breakdown = true;
      break;
    }
    const double beta = (rho_new / rho) * (alpha / omega);
    rho = rho_new;
    for (Index i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    for (Index i = 0; i < n; ++i) y[i] = dinv[i] * p[i];
    a.multiply(y, v);
    const double rv = dot(r_hat, v);
    if (std::abs(rv) < 1e-300) {
      breakdown = true;
      break;
    }
    alpha = rho / rv;
    for (Index i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
    ++it;
    if (norm2(s) <= target) {
      axpy(alpha, y, out.x);
      rnorm = norm2(s);
      break;
    }
    for (Index i = 0; i < n; ++i) z[i] = dinv[i] * s[i];
    a.multiply(z, t);
    const double tt = dot(t, t);
    if (tt == 0.0) {
      breakdown = true;
      break;
    }
    omega = dot(t, s) / tt;
    for (Index i = 0; i < n; ++i) {
      out.x[i] += alpha * y[i] + omega * z[i];
      r[i] = s[i] - omega * t[i];
    }
    rnorm = norm2(r);
  }
  out.report.iterations = it;
  out.report.residual_rel = relative_residual(a, out.x, b);
  out.report.converged = out.report.residual_rel <= tol_rel && std::isfinite(out.report.residual_rel);
  out.report.rounding_limited = !out.report.converged && std::isfinite(out.report.residual_rel) &&
                                out.report.residual_rel <= residual_rounding_floor(a, out.x, b);
  if (out.report.acceptable()) return out;
  if (n <= kDenseOracleLimit) {
    try {
      Vector xd = solve_dense_oracle(DenseMatrix::from_sparse(a), b);
      const double res = relative_residual(a, xd, b);
      if (res <= tol_rel) {
        out.x = std::move(xd);
        out.report.residual_rel = res;
        out.report.converged = true;
        return out;
      }
    } catch (const SingularMatrixError&) {
    }
  }
  throw SolverError(breakdown ? "solve_general: iteration broke down without convergence"
                              : "solve_general: no convergence within the iteration cap",
                    out.report);
}

/// Vertex order along the sparsity graph of `a` when that graph is a union
/// of simple paths (tridiagonal up to a symmetric permutation, as for every
/// 1D P1 system); empty otherwise.
inline std::vector<Index> path_ordering(const CsrMatrix& a) {
  const Index n = a.n();
  if (a.rows() != a.cols() || n == 0) return {};
  std::vector<std::array<Index, 2>> nb(static_cast<std::size_t>(n), {-1, -1});
  std::vector<int> degree(static_cast<std::size_t>(n), 0);
  for (Index i = 0; i < n; ++i)
    for (Index k = a.row_offsets()[i]; k < a.row_offsets()[i + 1]; ++k) {
      const Index j = a.col_indices()[k];
      if (j == i) continue;
      if (degree[i] == 2) return {};
      nb[i][degree[i]++] = j;
    }
  for (Index i = 0; i < n; ++i)
    for (int d = 0; d < degree[i]; ++d) {
      const Index j = nb[i][d];
      if (nb[j][0] != i && nb[j][1] != i) return {};  // structurally unsymmetric
    }
  std::vector<Index> order;
  order.reserve(static_cast<std::size_t>(n));
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (Index start = 0; start < n; ++start) {
    if (seen[start] || degree[start] == 2) continue;
    for (Index prev = -1, cur = start; cur >= 0;) {
      seen[cur] = 1;
      order.push_back(cur);
      Index next = -1;
      for (int d = 0; d < degree[cur]; ++d)
        if (nb[cur][d] != prev) next = nb[cur][d];
      prev = cur;
      cur = next;
    }
  }
  if (static_cast<Index>(order.size()) != n) return {};  // a cycle remains
  return order;
}

/// Direct solve along a path ordering by Gaussian elimination without
/// pivoting (Thomas algorithm). Returns nothing when a pivot vanishes or the
/// matrix is not a union of paths.
inline std::optional<Vector> solve_path_direct(const CsrMatrix& a, std::span<const double> b) {
  const std::vector<Index> order = path_ordering(a);
  if (order.empty() || static_cast<Index>(b.size()) != a.n()) return std::nullopt;
  const std::size_t n = order.size();
  Vector lower(n, 0.0), diag(n), upper(n, 0.0), rhs(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Index i = order[k];
    diag[k] = a.at(i, i);
    if (k > 0) lower[k] = a.at(i, order[k - 1]);
    if (k + 1 < n) upper[k] = a.at(i, order[k + 1]);
    rhs[k] = b[i];
  }
  for (std::size_t k = 1; k < n; ++k) {
    if (diag[k - 1] == 0.0) return std::nullopt;
    const double f = lower[k] / diag[k - 1];
    diag[k] -= f * upper[k - 1];
    rhs[k] -= f * rhs[k - 1];
  }
  if (diag[n - 1] == 0.0) return std::nullopt;
  Vector x(n);
  x[order[n - 1]] = rhs[n - 1] / diag[n - 1];
  for (std::size_t k = n - 1; k-- > 0;) x[order[k]] = (rhs[k] - upper[k] * x[order[k + 1]]) / diag[k];
  for (double v : x)
    if (!std::isfinite(v)) return std::nullopt;
  return x;
}

/// Library entry point for linear systems: a direct solve when the matrix
/// is a union of paths and its residual is certified, otherwise conjugate
/// gradients (symmetric) or BiCGStab, warm-started from x0.
inline SolveResult solve_system(const CsrMatrix& a, std::span<const double> b, bool symmetric,
                                double tol_rel = kDefaultSolverTolerance,
                                std::optional<std::span<const double>> x0 = std::nullopt) {
  detail::check_square_system(a, b, tol_rel);
  if (auto x = solve_path_direct(a, b)) {
    SolveResult out;
    out.report.residual_rel = relative_residual(a, *x, b);
    out.report.converged = out.report.residual_rel <= tol_rel;
    out.report.rounding_limited = !out.report.converged && out.report.residual_rel <= residual_rounding_floor(a, *x, b);
    out.x = std::move(*x);
    if (out.report.acceptable()) return out;
  }
  return symmetric ? solve_spd(a, b, tol_rel, x0) : solve_general(a, b, tol_rel, x0);
}

/// Throws SolverError unless the residual meets the tolerance or sits at
/// the rounding level of its own evaluation.
inline Vector require_converged(SolveResult r, const std::string& context) {
  if (!r.report.acceptable())
    throw SolverError(context + ": linear solve did not converge (relative residual " +
                          std::to_string(r.report.residual_rel) + ")",
                      r.report);
  return std::move(r.x);
}

}  // namespace parafem
