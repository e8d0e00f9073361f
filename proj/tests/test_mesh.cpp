#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "parafem/verify.hpp"

using namespace parafem;

namespace {

double total_measure(const Mesh& m) {
  double s = 0.0;
  for (Index c = 0; c < m.n_cells(); ++c) s += m.cell_measure(c);
  return s;
}

}  // namespace

TEST(IntervalMesh, TwoCells) {
  const Mesh m = build_interval_mesh(2, 0.0, 1.0);
  EXPECT_EQ(m.n_vertices(), 3);
  EXPECT_EQ(m.n_free(), 1);
  EXPECT_DOUBLE_EQ(m.vertex(m.free_vertices()[0])[0], 0.5);
  EXPECT_DOUBLE_EQ(m.vertex(0)[0], 0.0);
  EXPECT_DOUBLE_EQ(m.vertex(2)[0], 1.0);
  EXPECT_DOUBLE_EQ(m.h_max(), 0.5);
}

TEST(IntervalMesh, FourCells) {
  const Mesh m = build_interval_mesh(4, 0.0, 1.0);
  EXPECT_EQ(m.n_vertices(), 5);
  EXPECT_EQ(m.n_free(), 3);
  EXPECT_DOUBLE_EQ(m.h_max(), 0.25);
}

TEST(IntervalMesh, RejectsMeshWithoutInteriorVertex) {
  EXPECT_THROW(build_interval_mesh(1, 0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(build_interval_mesh(4, 1.0, 0.0), std::invalid_argument);
}

TEST(SquareMesh, TwoPerSideOnSymmetricBox) {
  const Mesh m = build_square_mesh(2, -1.0, 1.0);
  EXPECT_EQ(m.n_vertices(), 9);
  EXPECT_EQ(m.n_cells(), 8);
  ASSERT_EQ(m.n_free(), 1);
  const Point& p = m.vertex(m.free_vertices()[0]);
  EXPECT_DOUBLE_EQ(p[0], 0.0);
  EXPECT_DOUBLE_EQ(p[1], 0.0);
  EXPECT_NEAR(m.h_max(), std::sqrt(2.0), 1e-15);
}

TEST(SquareMesh, FourPerSide) {
  const Mesh m = build_square_mesh(4, -1.0, 1.0);
  EXPECT_EQ(m.n_vertices(), 25);
  EXPECT_EQ(m.n_cells(), 32);
  EXPECT_EQ(m.n_free(), 9);
}

TEST(SquareMesh, UnitBoxScalesDiameter) {
  EXPECT_NEAR(build_square_mesh(2, 0.0, 1.0).h_max(), std::sqrt(2.0) / 2.0, 1e-15);
}

TEST(SquareMesh, QuadrantAlignmentNeedsEvenCountAndSymmetricBox) {
  EXPECT_NO_THROW(build_square_mesh(4, -1.0, 1.0, true));
  EXPECT_THROW(build_square_mesh(3, -1.0, 1.0, true), std::invalid_argument);
  EXPECT_THROW(build_square_mesh(4, 0.0, 1.0, true), std::invalid_argument);
  EXPECT_THROW(build_square_mesh(1, 0.0, 1.0), std::invalid_argument);
}

TEST(SquareMesh, AlignedMeshHasNoCellCrossingAnAxis) {
  const Mesh m = build_square_mesh(6, -1.0, 1.0, true);
  for (Index c = 0; c < m.n_cells(); ++c) {
    const Point x = m.centroid(c);
    for (Index v : m.cell(c)) {
      EXPECT_GE(m.vertex(v)[0] * x[0], 0.0);
      EXPECT_GE(m.vertex(v)[1] * x[1], 0.0);
    }
  }
}

TEST(Refinement, IntervalHalvesDiameter) {
  const Mesh m = refine_uniform(build_interval_mesh(2, 0.0, 1.0));
  EXPECT_DOUBLE_EQ(m.h_max(), 0.25);
  EXPECT_EQ(m.n_cells(), 4);
  EXPECT_EQ(m.level(), 1);
}

TEST(Refinement, SquareSplitsEveryTriangleIntoFour) {
  const Mesh m = refine_uniform(build_square_mesh(2, -1.0, 1.0));
  EXPECT_EQ(m.n_cells(), 32);
  EXPECT_EQ(m.n_vertices(), 25);
}

TEST(Refinement, TwiceQuartersDiameter) {
  const Mesh base = build_square_mesh(2, 0.0, 1.0);
  EXPECT_NEAR(refine_uniform(base, 2).h_max(), base.h_max() / 4.0, 1e-15);
  const Mesh line = build_interval_mesh(3, 0.0, 1.0);
  EXPECT_NEAR(refine_uniform(line, 2).h_max(), line.h_max() / 4.0, 1e-15);
}

TEST(Refinement, RecordsMidpointParents) {
  const Mesh coarse = build_square_mesh(2, 0.0, 1.0);
  const Mesh fine = refine_uniform(coarse);
  ASSERT_EQ(static_cast<Index>(fine.parents().size()), fine.n_vertices());
  for (Index v = 0; v < fine.n_vertices(); ++v) {
    const auto [a, b] = fine.parents()[v];
    const Point& pa = coarse.vertex(a);
    const Point& pb = coarse.vertex(b);
    EXPECT_DOUBLE_EQ(fine.vertex(v)[0], 0.5 * (pa[0] + pb[0]));
    EXPECT_DOUBLE_EQ(fine.vertex(v)[1], 0.5 * (pa[1] + pb[1]));
  }
}

TEST(ShapeRegularity, SegmentsUseHalfDiameterConvention) {
  EXPECT_DOUBLE_EQ(shape_regularity(build_interval_mesh(7, 0.0, 3.0)), 0.5);
}

TEST(ShapeRegularity, RightIsoscelesTriangle) {
  // incircle radius of a right triangle with legs 1: (a + b - c) / 2
  const double rho = (1.0 + 1.0 - std::sqrt(2.0)) / 2.0;
  const double expected = rho / std::sqrt(2.0);
  EXPECT_NEAR(expected, 0.2071067811865475, 1e-15);
  EXPECT_NEAR(shape_regularity(build_square_mesh(2, 0.0, 1.0)), expected, 1e-14);
  EXPECT_NEAR(shape_regularity(build_square_mesh(5, -2.0, 3.0)), expected, 1e-14);
}

TEST(ShapeRegularity, PreservedByRefinement) {
  const Mesh m = build_square_mesh(2, 0.0, 1.0);
  EXPECT_NEAR(shape_regularity(refine_uniform(m, 3)), shape_regularity(m), 1e-14);
}

TEST(MeshInvariants, MeasuresSumToDomainBeforeAndAfterRefinement) {
  std::mt19937_64 rng(5);
  std::vector<Mesh> meshes{build_interval_mesh(5, 0.0, 2.0), build_square_mesh(3, -1.0, 2.0),
                           checks::jittered_square_mesh(6, 0.0, 1.0, 0.3, rng),
                           checks::jittered_interval_mesh(9, 0.4, rng)};
  for (const Mesh& m : meshes) {
    EXPECT_NEAR(total_measure(m), m.domain_measure(), 1e-12 * m.domain_measure());
    const Mesh r = refine_uniform(m, 2);
    EXPECT_NEAR(total_measure(r), m.domain_measure(), 1e-12 * m.domain_measure());
  }
}

TEST(MeshInvariants, CellsArePositivelyOriented) {
  std::mt19937_64 rng(9);
  const Mesh m = refine_uniform(checks::jittered_square_mesh(5, 0.0, 1.0, 0.3, rng));
  for (Index c = 0; c < m.n_cells(); ++c) EXPECT_GT(m.cell_measure(c), 0.0);
}

TEST(MeshInvariants, FreeVerticesAreExactlyTheInteriorOnes) {
  const Mesh m = build_square_mesh(5, 0.0, 1.0);
  Index interior = 0;
  for (Index v = 0; v < m.n_vertices(); ++v) {
    const Point& p = m.vertex(v);
    const bool inside = p[0] > 0.0 && p[0] < 1.0 && p[1] > 0.0 && p[1] < 1.0;
    interior += inside;
    EXPECT_EQ(m.is_boundary(v), !inside);
  }
  EXPECT_EQ(m.n_free(), interior);
  EXPECT_EQ(interior, 16);
}

TEST(MeshConstruction, RejectsDegenerateAndMalformedInput) {
  const Box box{{0.0, 0.0}, {1.0, 1.0}};
  EXPECT_THROW(Mesh::from_parts(2, {{0, 0}, {1, 0}, {2, 0}}, {{0, 1, 2}}, box), std::invalid_argument);
  EXPECT_THROW(Mesh::from_parts(2, {{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 5}}, box), std::invalid_argument);
  EXPECT_THROW(Mesh::from_parts(2, {{0, 0}, {0, 0}, {0, 1}}, {{0, 1, 2}}, box), std::invalid_argument);
  EXPECT_THROW(Mesh::from_parts(3, {{0, 0}}, {}, box), std::invalid_argument);
}

TEST(MeshIo, RoundTripPreservesGeometry) {
  const Mesh m = refine_uniform(build_square_mesh(3, -1.0, 1.0));
  std::stringstream ss;
  write_mesh(ss, m);
  const Mesh r = read_mesh(ss);
  ASSERT_EQ(r.n_vertices(), m.n_vertices());
  ASSERT_EQ(r.n_cells(), m.n_cells());
  EXPECT_EQ(r.n_free(), m.n_free());
  EXPECT_EQ(r.vertices(), m.vertices());
  EXPECT_EQ(r.cells(), m.cells());
  EXPECT_DOUBLE_EQ(r.h_max(), m.h_max());
}

TEST(MeshIo, RejectsTruncatedInput) {
  std::stringstream ss("2 4 2\n0 0\n1 0\n");
  EXPECT_THROW(read_mesh(ss), Error);
  std::stringstream bad("7 1 1");
  EXPECT_THROW(read_mesh(bad), Error);
}
