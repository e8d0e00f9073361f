#include <gtest/gtest.h>

#include "parafem/verify.hpp"

using namespace parafem;
using std::numbers::pi;

namespace {

/// max_i |F_weak - F_pointwise| / max_i |F_pointwise| at several times, both
/// recipes integrated with the same rule `extra` levels finer than the one
/// chosen for the mesh.
double load_path_mismatch(const ProblemSpec& p, const Mesh& m, int extra = 2) {
  const QuadratureRule rule = quadrature::fine_rule(m.dim(), fine_levels_for(m, p) + extra);
  const ExactSolution& u = *p.exact;
  double worst = 0.0;
  for (double t : {0.0, 0.13, 0.5 * p.T, p.T}) {
    const Vector a = assemble_weak_load(
        m, p.coeff, t, [&](const Point& x) { return u.value(x, t); }, [&](const Point& x) { return u.gradient(x, t); },
        [&](const Point& x) { return u.time_derivative(x, t); }, rule);
    const Vector b = assemble_load(m, *p.pointwise_f, t, rule);
    const double scale = std::max(norm_inf(b), 1e-300);
    worst = std::max(worst, norm_inf(linear_combination(1.0, a, -1.0, b)) / scale);
  }
  return worst;
}

/// max_i |LoadEvaluator - direct weak assembly| / max_i |direct| at several times.
double load_evaluator_mismatch(const ProblemSpec& p, const Mesh& m) {
  const LoadEvaluator eval(p, m);
  const QuadratureRule rule = quadrature::fine_rule(m.dim(), fine_levels_for(m, p));
  const ExactSolution& u = *p.exact;
  double worst = 0.0;
  for (double t : {0.0, 0.13, 0.5 * p.T, p.T}) {
    const Vector a = eval(t);
    const Vector b = assemble_weak_load(
        m, p.coeff, t, [&](const Point& x) { return u.value(x, t); }, [&](const Point& x) { return u.gradient(x, t); },
        [&](const Point& x) { return u.time_derivative(x, t); }, rule);
    const double scale = std::max(norm_inf(b), 1e-300);
    worst = std::max(worst, norm_inf(linear_combination(1.0, a, -1.0, b)) / scale);
  }
  return worst;
}

}  // namespace

TEST(Catalog, ExactSolutionsVanishInitiallyAndOnTheBoundary) {
  for (const char* name : {"smooth1d", "smooth2d", "spectral-p2", "spectral-p32", "checkerboard"}) {
    const ProblemSpec p = make_problem(name);
    ASSERT_TRUE(p.exact) << name;
    const Point mid = p.dim == 1 ? Point{0.5 * (p.domain.lower[0] + p.domain.upper[0]), 0.0}
                                 : Point{0.5 * (p.domain.lower[0] + p.domain.upper[0]) + 0.1,
                                         0.5 * (p.domain.lower[1] + p.domain.upper[1]) + 0.2};
    EXPECT_EQ(p.exact->value(mid, 0.0), 0.0) << name;
    EXPECT_EQ(p.u0(mid), 0.0) << name;
    for (double t : {0.1, 0.4}) {
      EXPECT_NEAR(p.exact->value(p.domain.lower, t), 0.0, 1e-14) << name;
      EXPECT_NEAR(p.exact->value(p.domain.upper, t), 0.0, 1e-14) << name;
    }
  }
}

TEST(Catalog, UnknownNameIsRejected) { EXPECT_THROW(make_problem("heat3d"), std::invalid_argument); }

TEST(Catalog, NamesAndDomains) {
  EXPECT_EQ(make_problem("smooth1d").name, "smooth1d");
  EXPECT_EQ(make_problem("spectral-p32").name, "spectral-p32");
  const ProblemSpec c = make_problem("checkerboard");
  EXPECT_EQ(c.domain.lower[0], -1.0);
  EXPECT_EQ(c.domain.upper[1], 1.0);
  EXPECT_TRUE(c.quadrant_aligned);
  EXPECT_EQ(c.coeff.sample({0.5, 0.5}, 0.0).a, 1.0);
  EXPECT_EQ(c.coeff.sample({0.5, -0.5}, 0.0).a, 0.1);
  EXPECT_EQ(c.coeff.sample({-0.5, -0.5}, 0.0).a, 1.0);
}

TEST(SmoothProblems, WeakRecipeMatchesPointwiseLoad) {
  EXPECT_LE(load_path_mismatch(make_smooth_1d(), build_interval_mesh(16, 0.0, 1.0)), 1e-9);
  EXPECT_LE(load_path_mismatch(make_smooth_2d(), build_square_mesh(8, 0.0, 1.0)), 1e-9);
}

TEST(SmoothProblems, LoadEvaluatorReproducesDirectWeakAssembly) {
  EXPECT_LE(load_evaluator_mismatch(make_smooth_1d(), build_interval_mesh(16, 0.0, 1.0)), 1e-13);
  EXPECT_LE(load_evaluator_mismatch(make_smooth_2d(), build_square_mesh(8, 0.0, 1.0)), 1e-13);
  EXPECT_LE(load_evaluator_mismatch(make_checkerboard(0.1), make_checkerboard(0.1).base_mesh()), 1e-13);
  EXPECT_LE(load_evaluator_mismatch(make_spectral(2.0, 0.05, 16), build_interval_mesh(32, 0.0, 1.0)), 1e-13);
}

TEST(SmoothProblems, ExactSolutionFormulas) {
  const ProblemSpec p = make_smooth_2d();
  const Point x{0.3, 0.8};
  const double t = 0.7;
  EXPECT_NEAR(p.exact->value(x, t), std::sin(pi * 0.3) * std::sin(pi * 0.8) * std::sin(t), 1e-15);
  EXPECT_NEAR(p.exact->time_derivative(x, t), std::sin(pi * 0.3) * std::sin(pi * 0.8) * std::cos(t), 1e-15);
  EXPECT_NEAR(p.exact->gradient(x, t)[1], pi * std::sin(pi * 0.3) * std::cos(pi * 0.8) * std::sin(t), 1e-14);
}

TEST(Checkerboard, UnitContrastLoadPathsAgree) {
  EXPECT_LE(load_path_mismatch(make_checkerboard(1.0), build_square_mesh(8, -1.0, 1.0, true)), 1e-9);
}

TEST(Checkerboard, ExactSolutionVanishesOnAxes) {
  const ProblemSpec p = make_checkerboard(0.1);
  for (double s : {-0.7, -0.2, 0.3, 0.9}) {
    EXPECT_EQ(p.exact->value({s, 0.0}, 0.3), 0.0);
    EXPECT_EQ(p.exact->value({0.0, s}, 0.3), 0.0);
  }
}

TEST(Checkerboard, QuadraturePointsSeeExactlyOneQuadrantValue) {
  const double eps = 0.1;
  const ProblemSpec p = make_checkerboard(eps);
  const Mesh m = refine_uniform(p.base_mesh(), 1);
  for (const QuadratureRule& q : {quadrature::assembly_rule(2), quadrature::fine_rule(2, 1)}) {
    for (Index c = 0; c < m.n_cells(); ++c) {
      const Point centre = m.centroid(c);
      const double expected = centre[0] * centre[1] > 0.0 ? 1.0 : eps;
      for (const auto& lam : q.points) {
        const double a = p.coeff.sample(m.map_barycentric(c, lam), 0.2).a;
        ASSERT_EQ(a, expected);
      }
    }
  }
}

TEST(Checkerboard, InterfaceSamplingAndInvalidContrastAreRejected) {
  EXPECT_THROW(checkerboard_coefficient(0.1).a({0.0, 0.4}, 0.0), CoefficientError);
  EXPECT_THROW(make_checkerboard(0.0), std::invalid_argument);
  EXPECT_THROW(make_checkerboard(1.5), std::invalid_argument);
}

TEST(Checkerboard, WeakStiffnessLoadIsInvariantUnderFinerQuadrature) {
  // the coefficient is constant per cell and grad u has degree 5, so the
  // degree-5 composite rule integrates a(u, phi) exactly
  const ProblemSpec p = make_checkerboard(0.1);
  const Mesh m = p.base_mesh();
  const ExactSolution& u = *p.exact;
  const double t = 0.3;
  auto load = [&](int levels) {
    return assemble_weak_load(
        m, p.coeff, t, [&](const Point& x) { return u.value(x, t); }, [&](const Point& x) { return u.gradient(x, t); },
        [](const Point&) { return 0.0; }, quadrature::fine_rule(2, levels));
  };
  const Vector a = load(0), b = load(2);
  EXPECT_LE(norm_inf(linear_combination(1.0, a, -1.0, b)), 1e-14 * norm_inf(a));
}

TEST(Spectral, DeclaredNormsMatchExternalHighPrecisionSums) {
  // eps = 0.05, p = 2: sum_n u_n^2 (n pi)^4 / 4 and sum_n u_n^2 (n^2 pi)^2 / 4,
  // evaluated in 40-digit arithmetic as an explicit sum to N plus an
  // Euler-Maclaurin tail whose integral is taken in the variable w = x^(-4 eps);
  // N = 1000 and N = 4000 agree to 30 digits
  const DeclaredNorms d = SpectralSeries(2.0, 0.05).declared_norms();
  EXPECT_NEAR(*d.u_l2_h2, 107.93924708547462247, 1e-10 * 107.94);
  EXPECT_NEAR(*d.du_l2_l2, 10.936532276163046289, 1e-10 * 10.94);
  EXPECT_TRUE(std::isinf(*d.du_l2_h1));
  EXPECT_TRUE(std::isinf(*d.ddu_l2_hm1));
}

TEST(Spectral, DeclaredNormsOfThreeHalvesFamily) {
  const DeclaredNorms d = SpectralSeries(1.5, 0.05).declared_norms();
  EXPECT_TRUE(std::isfinite(*d.u_l2_h2));
  EXPECT_TRUE(std::isfinite(*d.du_l2_l2));
  EXPECT_TRUE(std::isfinite(*d.ddu_l2_hm1));
  EXPECT_TRUE(std::isinf(*d.du_l2_h1));
}

TEST(Spectral, TruncationErrorIsCertified) {
  for (double p : {2.0, 1.5}) {
    const SpectralSeries s(p, 0.05);
    for (const auto& [space, d] : std::vector<std::pair<SpaceNorm, int>>{
             {SpaceNorm::h2_semi, 0}, {SpaceNorm::l2, 1}, {SpaceNorm::hm1, 2}}) {
      const SeriesValue v = s.norm_squared(space, d);
      if (!v.finite()) continue;
      EXPECT_LE(v.error_bound, 1e-10 * v.value);
      const SeriesValue w = s.norm_squared(space, d, 4000);
      EXPECT_NEAR(v.value, w.value, 1e-10 * w.value);
    }
  }
}

TEST(Spectral, DerivativeSeriesInFractionalSpaceDiverges) {
  // ||u'||^2 in H^{3 eps}: summands ~ n^{-5 - 4 eps + 6 eps + 4} = n^{-0.9}
  const double eps = 0.05;
  const SpectralSeries s(2.0, eps);
  auto partial = [&](Index n_max) {
    double sum = 0.0;
    for (Index n = 1; n <= n_max; ++n) {
      const double dn = static_cast<double>(n);
      const double a = s.amplitude(dn);
      sum += a * a * std::pow(dn * pi, 6.0 * eps) * std::pow(dn * dn * pi, 2.0) * 0.25;
    }
    return sum;
  };
  double prev_sum = partial(1000), prev_increment = 0.0;
  for (Index n_max : {2000, 4000, 8000, 16000}) {
    const double sum = partial(n_max);
    const double increment = sum - prev_sum;
    EXPECT_GT(increment, prev_increment);
    prev_increment = increment;
    prev_sum = sum;
  }
}

TEST(Spectral, InvalidParametersAreRejected) {
  EXPECT_THROW(SpectralSeries(3.0, 0.05), std::invalid_argument);
  EXPECT_THROW(SpectralSeries(2.0, 0.0), std::invalid_argument);
  EXPECT_THROW(SpectralSeries(2.0, 0.3), std::invalid_argument);
  EXPECT_THROW(make_spectral(2.0, 0.05, 513), std::invalid_argument);
  EXPECT_THROW(make_spectral(2.0, 0.05, 64, 50), std::invalid_argument);
}

TEST(Spectral, FieldIsTheTruncatedSeries) {
  const ProblemSpec p = make_spectral(1.5, 0.05, 8);
  const SpectralSeries s(1.5, 0.05);
  const Point x{0.37, 0.0};
  const double t = 0.61;
  double u = 0.0;
  for (int n = 1; n <= 8; ++n)
    u += s.amplitude(n) * std::sin(n * pi * x[0]) * std::sin(std::pow(n, 1.5) * pi * t);
  EXPECT_NEAR(p.exact->value(x, t), u, 1e-14);
}

TEST(Spectral, WeakRecipeMatchesModewiseLoad) {
  const ProblemSpec p = make_spectral(2.0, 0.05, 16);
  EXPECT_LE(load_path_mismatch(p, build_interval_mesh(32, 0.0, 1.0)), 1e-9);
}

TEST(Consistency, InterpolantResidualConvergesUnderSpaceTimeRefinement) {
  for (const char* name : {"smooth1d", "smooth2d", "checkerboard"}) {
    const ProblemSpec p = make_problem(name);
    std::vector<double> hs, rs;
    // the coarsest 1D level (h = 1/4, N = 4) is pre-asymptotic
    const int first = p.dim == 1 ? 2 : 1;
    for (int level = first; level < first + 3; ++level) {
      const MeshPtr m = study_mesh(p, level);
      const Index N = Index{4} << level;
      Trajectory traj;
      traj.mesh = m;
      for (Index n = 0; n <= N; ++n) {
        const double t = p.T * static_cast<double>(n) / static_cast<double>(N);
        traj.times.push_back(t);
        traj.values.push_back(interpolate_nodal(m, [&](const Point& x) { return p.exact->value(x, t); }).values);
      }
      double worst = 0.0;
      for (Index n = 1; n <= N; ++n) worst = std::max(worst, dual_norm_h(*m, galerkin_residual(traj, p, n)));
      hs.push_back(m->h_max());
      rs.push_back(worst);
    }
    EXPECT_GE(fit_rate(hs, rs), 0.9) << name;
  }
}
