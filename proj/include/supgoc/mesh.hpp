#pragma once

// Simplicial meshes on intervals and axis-aligned rectangles.
//
// A mesh is immutable after construction. Vertex, cell and facet orderings
// are fixed by the builders so that everything downstream (DOF numbering,
// matrix dumps, CSV output) is reproducible run to run.

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "supgoc/types.hpp"

namespace supgoc {

template <int Dim>
struct Box {
  Point<Dim> lo{};
  Point<Dim> hi{};

  double measure() const {
    double m = 1.0;
    for (int d = 0; d < Dim; ++d) m *= hi[d] - lo[d];
    return m;
  }
  bool contains(const Point<Dim>& x, double tol = 0.0) const {
    for (int d = 0; d < Dim; ++d)
      if (x[d] < lo[d] - tol || x[d] > hi[d] + tol) return false;
    return true;
  }
};

/// Classifies a boundary facet from its midpoint and outward unit normal.
/// Returning nullopt means "no tag" and is rejected by the mesh builders.
template <int Dim>
using BoundaryTagger =
    std::function<std::optional<BoundaryTag>(const Point<Dim>&, const Vec<Dim>&)>;

template <int Dim>
BoundaryTagger<Dim> all_dirichlet() {
  return [](const Point<Dim>&, const Vec<Dim>&) -> std::optional<BoundaryTag> {
    return BoundaryTag::Dirichlet;
  };
}

template <int Dim>
struct BoundaryFacet {
  std::array<Index, Dim> vertices{};
  Index cell = -1;
  Vec<Dim> normal{};
  BoundaryTag tag = BoundaryTag::Dirichlet;
};

template <int Dim>
struct SimplexMesh {
  static constexpr int dim = Dim;
  static constexpr int vertices_per_cell = Dim + 1;

  Box<Dim> domain;
  std::vector<Point<Dim>> vertices;
  std::vector<std::array<Index, Dim + 1>> cells;
  std::vector<BoundaryFacet<Dim>> boundary;
  /// Grid parameter: interval length in 1D, square side in 2D.
  double h = 0.0;

  // 2D only: unique edges (sorted vertex pairs, lexicographic order) and the
  // cell-local edge table using local edges (0,1), (1,2), (2,0).
  std::vector<std::array<Index, 2>> edges;
  std::vector<std::array<Index, 3>> cell_edges;

  Index num_vertices() const { return static_cast<Index>(vertices.size()); }
  Index num_cells() const { return static_cast<Index>(cells.size()); }
  Index num_edges() const { return static_cast<Index>(edges.size()); }
};

using Mesh1D = SimplexMesh<1>;
using TriMesh = SimplexMesh<2>;

inline Mesh1D build_interval_mesh(double a, double b, Index n,
                                  const BoundaryTagger<1>& tagger = all_dirichlet<1>()) {
  SUPGOC_REQUIRE(n >= 1, "build_interval_mesh: element count must be >= 1");
  SUPGOC_REQUIRE(a < b, "build_interval_mesh: require a < b");
  Mesh1D mesh;
  mesh.domain = {{a}, {b}};
  mesh.h = (b - a) / static_cast<double>(n);
  mesh.vertices.resize(static_cast<std::size_t>(n + 1));
  for (Index i = 0; i <= n; ++i)
    mesh.vertices[i] = {i == n ? b : a + static_cast<double>(i) * mesh.h};
  mesh.cells.resize(static_cast<std::size_t>(n));
  for (Index e = 0; e < n; ++e) mesh.cells[e] = {e, e + 1};

  auto add = [&](Index v, Index cell, double nx) {
    BoundaryFacet<1> f;
    f.vertices = {v};
    f.cell = cell;
    f.normal = {nx};
    auto tag = tagger(mesh.vertices[v], f.normal);
    SUPGOC_REQUIRE(tag.has_value(), "build_interval_mesh: tagger left an endpoint untagged");
    f.tag = *tag;
    mesh.boundary.push_back(f);
  };
  add(0, 0, -1.0);
  add(n, n - 1, 1.0);
  return mesh;
}

/// nx*ny rectangles, each split along its lower-left to upper-right diagonal.
/// Vertex (i, j) has index j*(nx+1) + i. Boundary edges are listed
/// counter-clockwise starting at the lower-left corner.
inline TriMesh build_structured_tri_mesh(const Box<2>& rect, Index nx, Index ny,
                                         const BoundaryTagger<2>& tagger = all_dirichlet<2>()) {
  SUPGOC_REQUIRE(nx >= 1 && ny >= 1, "build_structured_tri_mesh: counts must be >= 1");
  SUPGOC_REQUIRE(rect.lo[0] < rect.hi[0] && rect.lo[1] < rect.hi[1],
                 "build_structured_tri_mesh: empty rectangle");
  TriMesh mesh;
  mesh.domain = rect;
  const double hx = (rect.hi[0] - rect.lo[0]) / static_cast<double>(nx);
  const double hy = (rect.hi[1] - rect.lo[1]) / static_cast<double>(ny);
  mesh.h = std::max(hx, hy);

  auto vid = [nx](Index i, Index j) { return j * (nx + 1) + i; };
  mesh.vertices.resize(static_cast<std::size_t>((nx + 1) * (ny + 1)));
  for (Index j = 0; j <= ny; ++j)
    for (Index i = 0; i <= nx; ++i)
      mesh.vertices[vid(i, j)] = {i == nx ? rect.hi[0] : rect.lo[0] + static_cast<double>(i) * hx,
                                  j == ny ? rect.hi[1] : rect.lo[1] + static_cast<double>(j) * hy};

  mesh.cells.reserve(static_cast<std::size_t>(2 * nx * ny));
  auto cid = [nx](Index i, Index j, Index half) { return 2 * (j * nx + i) + half; };
  for (Index j = 0; j < ny; ++j)
    for (Index i = 0; i < nx; ++i) {
      const Index v00 = vid(i, j), v10 = vid(i + 1, j), v11 = vid(i + 1, j + 1), v01 = vid(i, j + 1);
      mesh.cells.push_back({v00, v10, v11});
      mesh.cells.push_back({v00, v11, v01});
    }

  auto add = [&](Index a, Index b, Index cell, Vec<2> normal) {
    BoundaryFacet<2> f;
    f.vertices = {a, b};
    f.cell = cell;
    f.normal = normal;
    const auto& pa = mesh.vertices[a];
    const auto& pb = mesh.vertices[b];
    const Point<2> mid{0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])};
    auto tag = tagger(mid, normal);
    SUPGOC_REQUIRE(tag.has_value(), "build_structured_tri_mesh: tagger left a boundary edge untagged");
    f.tag = *tag;
    mesh.boundary.push_back(f);
  };
  for (Index i = 0; i < nx; ++i) add(vid(i, 0), vid(i + 1, 0), cid(i, 0, 0), {0.0, -1.0});
  for (Index j = 0; j < ny; ++j) add(vid(nx, j), vid(nx, j + 1), cid(nx - 1, j, 0), {1.0, 0.0});
  for (Index i = nx; i > 0; --i) add(vid(i, ny), vid(i - 1, ny), cid(i - 1, ny - 1, 1), {0.0, 1.0});
  for (Index j = ny; j > 0; --j) add(vid(0, j), vid(0, j - 1), cid(0, j - 1, 1), {-1.0, 0.0});

  std::map<std::pair<Index, Index>, Index> edge_ids;
  for (const auto& c : mesh.cells)
    for (int k = 0; k < 3; ++k) {
      Index a = c[k], b = c[(k + 1) % 3];
      edge_ids.emplace(std::minmax(a, b), 0);
    }
  mesh.edges.reserve(edge_ids.size());
  for (auto& [key, id] : edge_ids) {
    id = static_cast<Index>(mesh.edges.size());
    mesh.edges.push_back({key.first, key.second});
  }
  mesh.cell_edges.resize(mesh.cells.size());
  for (std::size_t e = 0; e < mesh.cells.size(); ++e)
    for (int k = 0; k < 3; ++k) {
      Index a = mesh.cells[e][k], b = mesh.cells[e][(k + 1) % 3];
      mesh.cell_edges[e][k] = edge_ids.at(std::minmax(a, b));
    }
  return mesh;
}

enum class ElementSize { GridParameter, Circumradius };

/// Affine map x = origin + jacobian * xi from the reference simplex.
template <int Dim>
struct ElementGeometry {
  Point<Dim> origin{};
  std::array<std::array<double, Dim>, Dim> jacobian{};
  std::array<std::array<double, Dim>, Dim> inverse_jacobian{};
  double det = 0.0;
  double measure = 0.0;
  double h_e = 0.0;

  Point<Dim> map(const Point<Dim>& xi) const {
    Point<Dim> x = origin;
    for (int r = 0; r < Dim; ++r)
      for (int c = 0; c < Dim; ++c) x[r] += jacobian[r][c] * xi[c];
    return x;
  }
  Point<Dim> to_reference(const Point<Dim>& x) const {
    Point<Dim> xi{};
    for (int r = 0; r < Dim; ++r)
      for (int c = 0; c < Dim; ++c) xi[r] += inverse_jacobian[r][c] * (x[c] - origin[c]);
    return xi;
  }
  /// Physical gradient from a reference gradient: J^{-T} g.
  Vec<Dim> push_gradient(const Vec<Dim>& g) const {
    Vec<Dim> out{};
    for (int r = 0; r < Dim; ++r)
      for (int c = 0; c < Dim; ++c) out[r] += inverse_jacobian[c][r] * g[c];
    return out;
  }
};

template <int Dim>
double circumradius(const SimplexMesh<Dim>& mesh, Index e) {
  const auto& c = mesh.cells.at(static_cast<std::size_t>(e));
  if constexpr (Dim == 1) {
    return 0.5 * std::abs(mesh.vertices[c[1]][0] - mesh.vertices[c[0]][0]);
  } else {
    auto len = [&](Index a, Index b) {
      const auto& p = mesh.vertices[a];
      const auto& q = mesh.vertices[b];
      return std::hypot(p[0] - q[0], p[1] - q[1]);
    };
    const double la = len(c[0], c[1]), lb = len(c[1], c[2]), lc = len(c[2], c[0]);
    const auto& p0 = mesh.vertices[c[0]];
    const auto& p1 = mesh.vertices[c[1]];
    const auto& p2 = mesh.vertices[c[2]];
    const double area = 0.5 * std::abs((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]));
    return la * lb * lc / (4.0 * area);
  }
}

template <int Dim>
ElementGeometry<Dim> element_geometry(const SimplexMesh<Dim>& mesh, Index e,
                                      ElementSize size = ElementSize::GridParameter) {
  if (e < 0 || e >= mesh.num_cells())
    throw InvalidArgument("element_geometry: element index " + std::to_string(e) + " out of range");
  const auto& c = mesh.cells[static_cast<std::size_t>(e)];
  ElementGeometry<Dim> g;
  g.origin = mesh.vertices[c[0]];
  for (int col = 0; col < Dim; ++col)
    for (int r = 0; r < Dim; ++r)
      g.jacobian[r][col] = mesh.vertices[c[col + 1]][r] - g.origin[r];
  if constexpr (Dim == 1) {
    g.det = g.jacobian[0][0];
    g.inverse_jacobian[0][0] = 1.0 / g.det;
    g.measure = std::abs(g.det);
  } else {
    const auto& J = g.jacobian;
    g.det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
    g.inverse_jacobian = {{{J[1][1] / g.det, -J[0][1] / g.det}, {-J[1][0] / g.det, J[0][0] / g.det}}};
    g.measure = 0.5 * std::abs(g.det);
  }
  if (!(g.measure > 0.0))
    throw InvalidArgument("element_geometry: degenerate element " + std::to_string(e));
  if (size == ElementSize::Circumradius)
    g.h_e = circumradius(mesh, e);
  else
    g.h_e = Dim == 1 ? g.measure : mesh.h;
  return g;
}

/// Plain-text dump: vertex list, cell list, tagged boundary facet list,
/// each section sorted by index. Columns are documented in the section headers.
template <int Dim>
void write_mesh(std::ostream& os, const SimplexMesh<Dim>& mesh) {
  const auto prec = os.precision(17);
  os << "# supgoc mesh dim " << Dim << " h " << mesh.h << "\n";
  os << "vertices " << mesh.num_vertices() << "  # index x" << (Dim == 2 ? " y" : "") << "\n";
  for (Index i = 0; i < mesh.num_vertices(); ++i) {
    os << i;
    for (int d = 0; d < Dim; ++d) os << ' ' << mesh.vertices[i][d];
    os << '\n';
  }
  os << "cells " << mesh.num_cells() << "  # index v0 v1" << (Dim == 2 ? " v2" : "") << "\n";
  for (Index e = 0; e < mesh.num_cells(); ++e) {
    os << e;
    for (auto v : mesh.cells[e]) os << ' ' << v;
    os << '\n';
  }
  os << "boundary " << mesh.boundary.size() << "  # index vertices... cell tag(D|N)\n";
  for (std::size_t b = 0; b < mesh.boundary.size(); ++b) {
    const auto& f = mesh.boundary[b];
    os << b;
    for (auto v : f.vertices) os << ' ' << v;
    os << ' ' << f.cell << ' ' << (f.tag == BoundaryTag::Dirichlet ? 'D' : 'N') << '\n';
  }
  os.precision(prec);
}

}  // namespace supgoc
