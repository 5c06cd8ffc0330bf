#include <gtest/gtest.h>

#include <map>

#include "supgoc/mesh.hpp"
#include "supgoc/problem.hpp"

using namespace supgoc;

TEST(IntervalMesh, UniformPartition) {
  const auto m = build_interval_mesh(0.0, 1.0, 10);
  EXPECT_EQ(m.num_cells(), 10);
  EXPECT_EQ(m.num_vertices(), 11);
  EXPECT_DOUBLE_EQ(m.h, 0.1);
  for (Index i = 0; i <= 10; ++i) EXPECT_NEAR(m.vertices[i][0], 0.1 * i, 1e-15);
  EXPECT_EQ(m.vertices.back()[0], 1.0);
}

TEST(IntervalMesh, FinestStudyLevel) {
  const auto m = build_interval_mesh(0.0, 1.0, 1280);
  EXPECT_DOUBLE_EQ(m.h, 7.8125e-4);
}

TEST(IntervalMesh, SingleElement) {
  const auto m = build_interval_mesh(0.0, 1.0, 1);
  ASSERT_EQ(m.num_cells(), 1);
  EXPECT_EQ(m.vertices[0][0], 0.0);
  EXPECT_EQ(m.vertices[1][0], 1.0);
  EXPECT_EQ(m.boundary.size(), 2u);
}

TEST(IntervalMesh, RejectsBadInput) {
  EXPECT_THROW(build_interval_mesh(0.0, 1.0, 0), InvalidArgument);
  EXPECT_THROW(build_interval_mesh(1.0, 0.0, 4), InvalidArgument);
}

TEST(TriMesh, Example2Layout) {
  const auto m = build_structured_tri_mesh({{-1.0, 0.0}, {1.0, 1.0}}, 10, 5, example2_tagger());
  EXPECT_EQ(m.num_cells(), 100);
  EXPECT_EQ(m.num_vertices(), 66);
  int neumann = 0;
  for (const auto& f : m.boundary) {
    const auto& a = m.vertices[f.vertices[0]];
    const auto& b = m.vertices[f.vertices[1]];
    const bool on_gamma_n = a[1] == 0.0 && b[1] == 0.0 && std::min(a[0], b[0]) >= 0.0;
    EXPECT_EQ(f.tag == BoundaryTag::Neumann, on_gamma_n);
    neumann += f.tag == BoundaryTag::Neumann;
  }
  EXPECT_EQ(neumann, 5);
}

TEST(TriMesh, UnitSquareVertexCount) {
  const auto m = build_structured_tri_mesh({{0.0, 0.0}, {1.0, 1.0}}, 10, 10);
  EXPECT_EQ(m.num_vertices(), 121);
}

TEST(TriMesh, MinimalMesh) {
  const auto m = build_structured_tri_mesh({{0.0, 0.0}, {1.0, 1.0}}, 1, 1);
  EXPECT_EQ(m.num_cells(), 2);
  EXPECT_EQ(m.num_vertices(), 4);
}

TEST(TriMesh, RejectsUntaggedBoundary) {
  BoundaryTagger<2> none = [](const Point<2>&, const Vec<2>&) -> std::optional<BoundaryTag> { return {}; };
  EXPECT_THROW(build_structured_tri_mesh({{0.0, 0.0}, {1.0, 1.0}}, 2, 2, none), InvalidArgument);
}

TEST(TriMesh, CountsMeasureAndEdgeIncidence) {
  for (Index nx = 1; nx <= 64; nx += 7)
    for (Index ny = 1; ny <= 64; ny += 9) {
      const Box<2> box{{-1.0, 0.0}, {1.0, 1.0}};
      const auto m = build_structured_tri_mesh(box, nx, ny);
      ASSERT_EQ(m.num_vertices(), (nx + 1) * (ny + 1));
      ASSERT_EQ(m.num_cells(), 2 * nx * ny);
      double area = 0.0;
      for (Index e = 0; e < m.num_cells(); ++e) area += element_geometry(m, e).measure;
      EXPECT_NEAR(area, box.measure(), 1e-12 * box.measure());

      std::map<std::array<Index, 2>, int> uses;
      for (Index e = 0; e < m.num_cells(); ++e)
        for (auto edge : m.cell_edges[e]) ++uses[m.edges[edge]];
      std::map<std::array<Index, 2>, int> boundary;
      for (const auto& f : m.boundary) {
        std::array<Index, 2> k{std::min(f.vertices[0], f.vertices[1]), std::max(f.vertices[0], f.vertices[1])};
        ++boundary[k];
      }
      for (const auto& [edge, n] : uses) EXPECT_EQ(n, boundary.count(edge) ? 1 : 2);
      for (const auto& [edge, n] : boundary) EXPECT_EQ(n, 1);
      EXPECT_EQ(static_cast<Index>(boundary.size()), 2 * (nx + ny));
    }
}

TEST(IntervalMesh, MeasureSumsToDomain) {
  const auto m = build_interval_mesh(-0.5, 2.0, 37);
  double len = 0.0;
  for (Index e = 0; e < m.num_cells(); ++e) len += element_geometry(m, e).measure;
  EXPECT_NEAR(len, 2.5, 1e-12 * 2.5);
}

TEST(ElementGeometry, Interval) {
  Mesh1D m;
  m.domain = {{0.2}, {0.3}};
  m.vertices = {{0.2}, {0.3}};
  m.cells = {{0, 1}};
  m.h = 0.1;
  const auto g = element_geometry(m, 0);
  EXPECT_NEAR(g.measure, 0.1, 1e-15);
  EXPECT_NEAR(g.h_e, 0.1, 1e-15);
}

TEST(ElementGeometry, ReferenceTriangle) {
  TriMesh m;
  m.domain = {{0.0, 0.0}, {1.0, 1.0}};
  m.vertices = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
  m.cells = {{0, 1, 2}};
  m.h = 1.0;
  EXPECT_NEAR(element_geometry(m, 0).measure, 0.5, 1e-15);
  EXPECT_NEAR(circumradius(m, 0), std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(element_geometry(m, 0, ElementSize::Circumradius).h_e, std::sqrt(0.5), 1e-15);
}

TEST(ElementGeometry, StructuredSplitArea) {
  const auto m = build_structured_tri_mesh({{0.0, 0.0}, {1.0, 1.0}}, 5, 5);
  for (Index e = 0; e < m.num_cells(); ++e) {
    EXPECT_NEAR(element_geometry(m, e).measure, 0.02, 1e-15);
    EXPECT_NEAR(element_geometry(m, e).h_e, 0.2, 1e-15);
  }
}

TEST(ElementGeometry, OutOfRange) {
  const auto m = build_interval_mesh(0.0, 1.0, 3);
  EXPECT_THROW(element_geometry(m, 3), InvalidArgument);
  EXPECT_THROW(element_geometry(m, -1), InvalidArgument);
}

TEST(TriMesh, DiagonalRunsLowerLeftToUpperRight) {
  const auto m = build_structured_tri_mesh({{0.0, 0.0}, {1.0, 1.0}}, 1, 1);
  bool found = false;
  for (const auto& e : m.edges) {
    const auto& a = m.vertices[e[0]];
    const auto& b = m.vertices[e[1]];
    if (a[0] != b[0] && a[1] != b[1]) {
      found = true;
      EXPECT_EQ((b[0] - a[0]) * (b[1] - a[1]) > 0.0, true);
    }
  }
  EXPECT_TRUE(found);
}
