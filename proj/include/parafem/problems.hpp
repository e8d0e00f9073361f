#pragma once

#include <numbers>
#include <optional>
#include <variant>

#include "parafem/assembly.hpp"

namespace parafem {

/// Scalar function of time with its first two derivatives.
struct TemporalFactor {
  std::function<double(double)> value;
  std::function<double(double)> d1;
  std::function<double(double)> d2;
};

/// One product q(t) w(x) of an exact solution.
struct SeparableTerm {
  TemporalFactor time;
  SpatialField space;
};

/// Squared norms of an exact solution that are known in closed or series
/// form. Divergent quantities are stored as +infinity.
struct DeclaredNorms {
  std::optional<double> u_l2_h2;     ///< ||u||^2_{L2(0,T;H2)} (H2 seminorm)
  std::optional<double> du_l2_l2;    ///< ||u'||^2_{L2(0,T;L2)}
  std::optional<double> du_l2_h1;    ///< ||u'||^2_{L2(0,T;H1)}
  std::optional<double> ddu_l2_hm1;  ///< ||u''||^2_{L2(0,T;H^-1)}
};

/// Exact solution u(x,t) = sum_m q_m(t) w_m(x).
class ExactSolution {
 public:
  ExactSolution() = default;
  explicit ExactSolution(std::vector<SeparableTerm> terms) : terms_(std::move(terms)) {}

  const std::vector<SeparableTerm>& terms() const { return terms_; }
  std::size_t n_terms() const { return terms_.size(); }

  double value(const Point& x, double t) const {
    double s = 0.0;
    for (const auto& term : terms_) s += term.time.value(t) * term.space.value(x);
    return s;
  }
  double time_derivative(const Point& x, double t) const {
    double s = 0.0;
    for (const auto& term : terms_) s += term.time.d1(t) * term.space.value(x);
    return s;
  }
  Vec2 gradient(const Point& x, double t) const {
    Vec2 g{0.0, 0.0};
    for (const auto& term : terms_) {
      const double q = term.time.value(t);
      const Vec2 gw = term.space.gradient(x);
      g[0] += q * gw[0];
      g[1] += q * gw[1];
    }
    return g;
  }

  /// Temporal coefficients q_m(t), q_m'(t) or q_m''(t).
  Vector coefficients(double t, int derivative = 0) const {
    Vector c(terms_.size());
    for (std::size_t m = 0; m < terms_.size(); ++m) {
      const auto& f = terms_[m].time;
      c[m] = derivative == 0 ? f.value(t) : derivative == 1 ? f.d1(t) : f.d2(t);
    }
    return c;
  }

  SpatialField at_time(double t) const {
    auto self = std::make_shared<ExactSolution>(*this);
    return {[self, t](const Point& x) { return self->value(x, t); },
            [self, t](const Point& x) { return self->gradient(x, t); }};
  }

  std::optional<DeclaredNorms> declared_norms;

 private:
  std::vector<SeparableTerm> terms_;
};

/// Load "f = u' + A u of the exact solution", applied only in weak form.
struct WeakRecipe {};

/// Load given pointwise as f(x,t), integrated against the basis by quadrature.
struct PointwiseLoad {
  SpaceTimeFunction f;
};

using LoadSpec = std::variant<WeakRecipe, PointwiseLoad>;

/// Parabolic initial-boundary value problem with homogeneous Dirichlet data.
struct ProblemSpec {
  std::string name;
  int dim = 1;
  Box domain;
  double T = 1.0;
  CoefficientField coeff;
  LoadSpec load = WeakRecipe{};
  ScalarFunction u0;
  std::optional<ExactSolution> exact;
  /// Strong-form load when one exists; used only to cross-check the weak recipe.
  std::optional<SpaceTimeFunction> pointwise_f;
  /// Largest spatial wavenumber present in the exact solution (rad per unit length).
  double max_wavenumber = 0.0;
  /// Largest temporal angular frequency present in the exact solution.
  double max_frequency = 1.0;
  bool quadrant_aligned = false;
  /// Coarsest mesh of refinement studies.
  std::function<Mesh()> base_mesh;
};

/// Extra refinement levels of the fine rule needed to resolve the exact
/// solution's oscillations on the cells of m.
inline int fine_levels_for(const Mesh& m, const ProblemSpec& p) {
  const double per_piece = m.h_max() * p.max_wavenumber / 4.0;
  int levels = 0;
  while (per_piece / static_cast<double>(1 << levels) > 1.5 && levels < 12) ++levels;
  return levels;
}

inline SeparableTerm sine_in_time(double omega, SpatialField w) {
  return {{[omega](double t) { return std::sin(omega * t); },
           [omega](double t) { return omega * std::cos(omega * t); },
           [omega](double t) { return -omega * omega * std::sin(omega * t); }},
          std::move(w)};
}

inline ProblemSpec make_smooth_1d() {
  using std::numbers::pi;
  ProblemSpec p;
  p.name = "smooth1d";
  p.dim = 1;
  p.domain = Box{{0.0, 0.0}, {1.0, 0.0}};
  p.T = 1.0;
  p.coeff = CoefficientField::constant(1.0);
  p.u0 = [](const Point&) { return 0.0; };
  SpatialField w{[](const Point& x) { return std::sin(pi * x[0]); },
                 [](const Point& x) { return Vec2{pi * std::cos(pi * x[0]), 0.0}; }};
  p.exact = ExactSolution({sine_in_time(1.0, w)});
  p.pointwise_f = [](const Point& x, double t) {
    return (std::cos(t) + pi * pi * std::sin(t)) * std::sin(pi * x[0]);
  };
  p.max_wavenumber = pi;
  p.base_mesh = [] { return build_interval_mesh(4, 0.0, 1.0); };
  return p;
}

inline ProblemSpec make_smooth_2d() {
  using std::numbers::pi;
  ProblemSpec p;
  p.name = "smooth2d";
  p.dim = 2;
  p.domain = Box{{0.0, 0.0}, {1.0, 1.0}};
  p.T = 1.0;
  p.coeff = CoefficientField::constant(1.0);
  p.u0 = [](const Point&) { return 0.0; };
  SpatialField w{[](const Point& x) { return std::sin(pi * x[0]) * std::sin(pi * x[1]); },
                 [](const Point& x) {
                   return Vec2{pi * std::cos(pi * x[0]) * std::sin(pi * x[1]),
                               pi * std::sin(pi * x[0]) * std::cos(pi * x[1])};
                 }};
  p.exact = ExactSolution({sine_in_time(1.0, w)});
  p.pointwise_f = [](const Point& x, double t) {
    return (std::cos(t) + 2.0 * pi * pi * std::sin(t)) * std::sin(pi * x[0]) * std::sin(pi * x[1]);
  };
  p.max_wavenumber = pi;
  p.base_mesh = [] { return build_square_mesh(4, 0.0, 1.0); };
  return p;
}

/// Piecewise constant diffusion: 1 where x1*x2 > 0 and eps where x1*x2 < 0.
inline CoefficientField checkerboard_coefficient(double eps) {
  CoefficientField c;
  c.a = [eps](const Point& x, double) {
    const double s = x[0] * x[1];
    if (s > 0.0) return 1.0;
    if (s < 0.0) return eps;
    throw CoefficientError("checkerboard coefficient sampled on an interface");
  };
  c.a_lower = std::min(1.0, eps);
  c.a_sup = std::max(1.0, eps);
  return c;
}

/// Discontinuous-coefficient problem on (-1,1)^2 with a manufactured exact
/// solution u = sin(t) (1-x1^2)(1-x2^2) x1 x2 and weak-recipe load.
inline ProblemSpec make_checkerboard(double eps) {
  if (!(eps > 0.0 && eps < 1.0) && eps != 1.0)
    throw std::invalid_argument("make_checkerboard: eps must lie in (0,1]");
  ProblemSpec p;
  p.name = "checkerboard";
  p.dim = 2;
  p.domain = Box{{-1.0, -1.0}, {1.0, 1.0}};
  p.T = 0.5;
  p.coeff = checkerboard_coefficient(eps);
  p.u0 = [](const Point&) { return 0.0; };
  SpatialField w{[](const Point& x) {
                   return (x[0] - x[0] * x[0] * x[0]) * (x[1] - x[1] * x[1] * x[1]);
                 },
                 [](const Point& x) {
                   const double fx = x[0] - x[0] * x[0] * x[0], fy = x[1] - x[1] * x[1] * x[1];
                   return Vec2{(1.0 - 3.0 * x[0] * x[0]) * fy, fx * (1.0 - 3.0 * x[1] * x[1])};
                 }};
  p.exact = ExactSolution({sine_in_time(1.0, w)});
  if (eps == 1.0) {
    p.pointwise_f = [](const Point& x, double t) {
      const double fx = x[0] - x[0] * x[0] * x[0], fy = x[1] - x[1] * x[1] * x[1];
      const double lap = -6.0 * x[0] * fy - 6.0 * x[1] * fx;
      return std::cos(t) * fx * fy - std::sin(t) * lap;
    };
  }
  p.max_wavenumber = 4.0;
  p.quadrant_aligned = true;
  p.base_mesh = [] { return build_square_mesh(4, -1.0, 1.0, true); };
  return p;
}

// ---------------------------------------------------------------------------
// Rough spectral solutions u = sum_n u_n sin(n pi x) sin(n^p pi t).

/// Which Sobolev scale a series norm measures in space.
enum class SpaceNorm { hm1, l2, h1, h2_semi };

/// Value of a norm series with its certified truncation error. The value is
/// +infinity when the series diverges.
struct SeriesValue {
  double value = 0.0;
  double error_bound = 0.0;
  Index terms_summed = 0;
  bool finite() const { return std::isfinite(value); }
};

/// Mode amplitudes u_n = (1+n^2)^(-5/4-eps) and exact norm series.
class SpectralSeries {
 public:
  SpectralSeries(double p, double eps) : p_(p), eps_(eps) {
    if (p != 2.0 && p != 1.5) throw std::invalid_argument("SpectralSeries: p must be 2 or 3/2");
    if (!(eps > 0.0 && eps <= 0.25)) throw std::invalid_argument("SpectralSeries: eps must lie in (0, 1/4]");
  }

  double p() const { return p_; }
  double eps() const { return eps_; }
  double amplitude(double n) const { return std::pow(1.0 + n * n, -1.25 - eps_); }
  double frequency(double n) const { return std::pow(n, p_) * std::numbers::pi; }

  /// Spatial weight ||sin(n pi x)||^2 in the chosen scale, over (0,1).
  static double space_weight(SpaceNorm s, double n) {
    const double k2 = std::numbers::pi * std::numbers::pi * n * n;
    switch (s) {
      case SpaceNorm::hm1: return 0.5 / (1.0 + k2);
      case SpaceNorm::l2: return 0.5;
      case SpaceNorm::h1: return 0.5 * (1.0 + k2);
      case SpaceNorm::h2_semi: return 0.5 * k2 * k2;
    }
    return 0.0;
  }

  /// int_0^1 of sin^2 (even derivative order) or cos^2 (odd order) of omega t.
  double time_weight(int derivative, double n) const {
    if (p_ == 2.0) return 0.5;  // sin(2 pi n^2) vanishes
    const double omega = frequency(n);
    const double osc = std::sin(2.0 * omega) / (4.0 * omega);
    return derivative % 2 == 0 ? 0.5 - osc : 0.5 + osc;
  }

  /// n-th summand of ||d^r u / dt^r||^2_{L2(0,1; space)}.
  double term(SpaceNorm s, int derivative, double n) const {
    const double a = amplitude(n);
    return a * a * space_weight(s, n) * std::pow(frequency(n), 2.0 * derivative) *
           time_weight(derivative, n);
  }

  /// Sum of the first n_max summands.
  double partial_sum(SpaceNorm s, int derivative, Index n_max) const {
    double sum = 0.0;
    for (Index n = 1; n <= n_max; ++n) sum += term(s, derivative, static_cast<double>(n));
    return sum;
  }

  /// Algebraic decay exponent e of the summands, term(n) ~ n^e.
  double decay_exponent(SpaceNorm s, int derivative) const {
    const double sigma = s == SpaceNorm::hm1 ? -1.0 : s == SpaceNorm::l2 ? 0.0 : s == SpaceNorm::h1 ? 1.0 : 2.0;
    return -5.0 - 4.0 * eps_ + 2.0 * sigma + 2.0 * p_ * derivative;
  }

  /// Full (infinite) series: explicit sum up to n_max plus an asymptotic
  /// tail whose error is bounded rigorously for monotone tails.
  SeriesValue norm_squared(SpaceNorm s, int derivative, Index n_max = 1000) const {
    if (decay_exponent(s, derivative) >= -1.0)
      return {std::numeric_limits<double>::infinity(), 0.0, 0};
    if (n_max < kMinimumTailStart)
      throw std::invalid_argument("SpectralSeries: n_max below the tail-certification threshold");
    SeriesValue out;
    out.value = partial_sum(s, derivative, n_max);
    const auto [tail, bound] = smooth_tail(s, derivative, static_cast<double>(n_max));
    out.value += tail;
    out.error_bound = bound;
    out.terms_summed = n_max;
    if (p_ != 2.0) {
      // oscillatory part of the time weights beyond n_max
      const double e_osc = decay_exponent(s, derivative) - p_;
      const double c = leading_constant(s, derivative) / (4.0 * std::numbers::pi);
      Index n = n_max + 1;
      auto remainder = [&](Index m) { return c * std::pow(static_cast<double>(m), e_osc + 1.0) / (-e_osc - 1.0); };
      const double target = 1e-13 * std::max(out.value, 1e-300);
      while (remainder(n - 1) > target && n < kOscillatoryLimit) {
        const double dn = static_cast<double>(n);
        const double omega = frequency(dn);
        const double a = amplitude(dn);
        const double sign = derivative % 2 == 0 ? -1.0 : 1.0;
        out.value += sign * a * a * space_weight(s, dn) * std::pow(omega, 2.0 * derivative) *
                     std::sin(2.0 * omega) / (4.0 * omega);
        ++n;
      }
      out.error_bound += remainder(n - 1);
      out.terms_summed = n - 1;
    }
    return out;
  }

  DeclaredNorms declared_norms(Index n_max = 1000) const {
    DeclaredNorms d;
    d.u_l2_h2 = norm_squared(SpaceNorm::h2_semi, 0, n_max).value;
    d.du_l2_l2 = norm_squared(SpaceNorm::l2, 1, n_max).value;
    d.du_l2_h1 = norm_squared(SpaceNorm::h1, 1, n_max).value;
    d.ddu_l2_hm1 = norm_squared(SpaceNorm::hm1, 2, n_max).value;
    return d;
  }

  static constexpr Index kMinimumTailStart = 100;
  static constexpr Index kOscillatoryLimit = Index{1} << 27;

 private:
  /// Generalized power series sum_k c_k x^{e_k}.
  struct PowerSeries {
    std::vector<std::pair<double, double>> terms;  // (coefficient, exponent)

    double eval(double x, int derivative) const {
      double s = 0.0;
      for (const auto& [c, e] : terms) {
        double f = c;
        for (int d = 0; d < derivative; ++d) f *= e - d;
        s += f * std::pow(x, e - derivative);
      }
      return s;
    }
    double tail_integral(double x) const {
      double s = 0.0;
      for (const auto& [c, e] : terms) s += c * std::pow(x, e + 1.0) / (-e - 1.0);
      return s;
    }
  };

  static PowerSeries product(const PowerSeries& a, const PowerSeries& b, std::size_t keep) {
    PowerSeries r;
    for (const auto& [ca, ea] : a.terms)
      for (const auto& [cb, eb] : b.terms) r.terms.emplace_back(ca * cb, ea + eb);
    std::sort(r.terms.begin(), r.terms.end(), [](const auto& x, const auto& y) { return x.second > y.second; });
    // merge equal exponents
    PowerSeries m;
    for (const auto& t : r.terms) {
      if (!m.terms.empty() && std::abs(m.terms.back().second - t.second) < 1e-12)
        m.terms.back().first += t.first;
      else
        m.terms.push_back(t);
    }
    if (m.terms.size() > keep) m.terms.resize(keep);
    return m;
  }

  /// Large-x expansion of the smooth part of the summand.
  PowerSeries expansion(SpaceNorm s, int derivative) const {
    constexpr std::size_t K = 10;
    const double pi = std::numbers::pi;
    const double beta = 2.5 + 2.0 * eps_;
    PowerSeries base;  // (1+x^2)^-beta = x^-2beta sum_k binom(-beta,k) x^-2k
    double binom = 1.0;
    for (std::size_t k = 0; k < K; ++k) {
      base.terms.emplace_back(binom, -2.0 * beta - 2.0 * static_cast<double>(k));
      binom *= (-beta - static_cast<double>(k)) / static_cast<double>(k + 1);
    }
    PowerSeries weight;
    switch (s) {
      case SpaceNorm::l2: weight.terms = {{0.5, 0.0}}; break;
      case SpaceNorm::h1: weight.terms = {{0.5 * pi * pi, 2.0}, {0.5, 0.0}}; break;
      case SpaceNorm::h2_semi: weight.terms = {{0.5 * std::pow(pi, 4), 4.0}}; break;
      case SpaceNorm::hm1: {
        // 1/(2(1+pi^2 x^2)) = sum_k (-1)^k / 2 (pi x)^(-2k-2)
        for (std::size_t k = 0; k < K; ++k)
          weight.terms.emplace_back(0.5 * ((k % 2) ? -1.0 : 1.0) * std::pow(pi, -2.0 * static_cast<double>(k) - 2.0),
                                    -2.0 * static_cast<double>(k) - 2.0);
        break;
      }
    }
    PowerSeries time;
    time.terms = {{0.5 * std::pow(pi, 2.0 * derivative), 2.0 * p_ * derivative}};
    return product(product(base, weight, K), time, K);
  }

  double leading_constant(SpaceNorm s, int derivative) const {
    return 2.0 * std::abs(expansion(s, derivative).terms.front().first);
  }

  /// sum_{n>N} g(n) by Euler-Maclaurin through the g' correction; the bound
  /// is 2 zeta(4)/(2 pi)^4 |g'''(N)|.
  std::pair<double, double> smooth_tail(SpaceNorm s, int derivative, double n) const {
    const PowerSeries g = expansion(s, derivative);
    const double tail = g.tail_integral(n) - 0.5 * g.eval(n, 0) - g.eval(n, 1) / 12.0;
    const double zeta4 = std::pow(std::numbers::pi, 4) / 90.0;
    const double bound = 2.0 * zeta4 / std::pow(2.0 * std::numbers::pi, 4) * std::abs(g.eval(n, 3)) +
                         std::abs(g.eval(n, 0)) * 1e-15 * n;
    return {tail, bound};
  }

  double p_;
  double eps_;
};

/// Largest truncation of the spectral field.
inline constexpr Index kMaxSpectralModes = 512;

/// 1D heat problem whose exact solution is the spectral series truncated
/// after n_field modes; the declared norms are those of the full series.
inline ProblemSpec make_spectral(double p, double eps, Index n_field, Index n_norm = 1000) {
  using std::numbers::pi;
  if (n_field < 1 || n_field > kMaxSpectralModes)
    throw std::invalid_argument("make_spectral: n_field must lie in [1, 512]");
  const SpectralSeries series(p, eps);
  ProblemSpec prob;
  prob.name = p == 2.0 ? "spectral-p2" : "spectral-p32";
  prob.dim = 1;
  prob.domain = Box{{0.0, 0.0}, {1.0, 0.0}};
  prob.T = 1.0;
  prob.coeff = CoefficientField::constant(1.0);
  prob.u0 = [](const Point&) { return 0.0; };
  std::vector<SeparableTerm> terms;
  terms.reserve(static_cast<std::size_t>(n_field));
  for (Index n = 1; n <= n_field; ++n) {
    const double k = pi * static_cast<double>(n);
    const double un = series.amplitude(static_cast<double>(n));
    SpatialField w{[k, un](const Point& x) { return un * std::sin(k * x[0]); },
                   [k, un](const Point& x) { return Vec2{un * k * std::cos(k * x[0]), 0.0}; }};
    terms.push_back(sine_in_time(series.frequency(static_cast<double>(n)), std::move(w)));
  }
  prob.exact = ExactSolution(std::move(terms));
  prob.exact->declared_norms = series.declared_norms(n_norm);
  prob.pointwise_f = [series, n_field](const Point& x, double t) {
    double s = 0.0;
    for (Index n = 1; n <= n_field; ++n) {
      const double dn = static_cast<double>(n);
      const double om = series.frequency(dn);
      const double k = std::numbers::pi * dn;
      s += series.amplitude(dn) * (om * std::cos(om * t) + k * k * std::sin(om * t)) * std::sin(k * x[0]);
    }
    return s;
  };
  prob.max_wavenumber = pi * static_cast<double>(n_field);
  prob.max_frequency = series.frequency(static_cast<double>(n_field));
  prob.base_mesh = [] { return build_interval_mesh(16, 0.0, 1.0); };
  return prob;
}

inline constexpr double kDefaultSpectralEps = 0.05;
inline constexpr Index kDefaultSpectralModes = 128;

/// Catalog lookup by name: smooth1d, smooth2d, spectral-p2, spectral-p32,
/// checkerboard (eps = 0.1 unless given).
inline ProblemSpec make_problem(const std::string& name, std::optional<double> eps = std::nullopt,
                                std::optional<Index> modes = std::nullopt) {
  if (name == "smooth1d") return make_smooth_1d();
  if (name == "smooth2d") return make_smooth_2d();
  if (name == "spectral-p2")
    return make_spectral(2.0, eps.value_or(kDefaultSpectralEps), modes.value_or(kDefaultSpectralModes));
  if (name == "spectral-p32")
    return make_spectral(1.5, eps.value_or(kDefaultSpectralEps), modes.value_or(kDefaultSpectralModes));
  if (name == "checkerboard") return make_checkerboard(eps.value_or(0.1));
  throw std::invalid_argument("unknown problem '" + name +
                              "' (expected smooth1d, smooth2d, spectral-p2, spectral-p32 or checkerboard)");
}

}  // namespace parafem
