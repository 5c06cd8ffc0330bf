#pragma once

// Lagrange P1/P2 elements on simplices, DOF maps and mapped basis tables.

#include <Eigen/Core>
#include <algorithm>
#include <functional>
#include <memory>
#include <vector>

#include "supgoc/mesh.hpp"
#include "supgoc/quadrature.hpp"

namespace supgoc {

template <int Dim>
using Hessian = std::array<std::array<double, Dim>, Dim>;

/// Lagrange P_k on the reference simplex, k in {1,2}. Local ordering: vertex
/// functions first, then edge-midpoint functions for edges (0,1),(1,2),(2,0)
/// (the single edge (0,1) in 1D).
template <int Dim>
class ReferenceElement {
public:
  explicit ReferenceElement(int degree) : degree_(degree) {
    SUPGOC_REQUIRE(degree == 1 || degree == 2,
                   "ReferenceElement: unsupported degree " + std::to_string(degree));
    for (int v = 0; v <= Dim; ++v) {
      Point<Dim> p{};
      if (v > 0) p[v - 1] = 1.0;
      nodes_.push_back(p);
    }
    if (degree == 2) {
      if constexpr (Dim == 1) {
        edges_ = {{0, 1}};
      } else {
        edges_ = {{0, 1}, {1, 2}, {2, 0}};
      }
      for (auto [a, b] : edges_) {
        Point<Dim> p{};
        for (int d = 0; d < Dim; ++d) p[d] = 0.5 * (nodes_[a][d] + nodes_[b][d]);
        nodes_.push_back(p);
      }
    }
  }

  int degree() const { return degree_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  const std::vector<Point<Dim>>& nodes() const { return nodes_; }

  double value(int i, const Point<Dim>& xi) const {
    const auto L = barycentric(xi);
    if (degree_ == 1) return L[i];
    if (i <= Dim) return L[i] * (2.0 * L[i] - 1.0);
    const auto [a, b] = edges_[i - Dim - 1];
    return 4.0 * L[a] * L[b];
  }

  Vec<Dim> gradient(int i, const Point<Dim>& xi) const {
    const auto L = barycentric(xi);
    Vec<Dim> g{};
    if (degree_ == 1) return bary_grad(i);
    if (i <= Dim) {
      const auto gl = bary_grad(i);
      for (int d = 0; d < Dim; ++d) g[d] = (4.0 * L[i] - 1.0) * gl[d];
      return g;
    }
    const auto [a, b] = edges_[i - Dim - 1];
    const auto ga = bary_grad(a), gb = bary_grad(b);
    for (int d = 0; d < Dim; ++d) g[d] = 4.0 * (L[b] * ga[d] + L[a] * gb[d]);
    return g;
  }

  /// Reference Hessian; constant on the element for k <= 2.
  Hessian<Dim> hessian(int i) const {
    Hessian<Dim> H{};
    if (degree_ == 1) return H;
    if (i <= Dim) {
      const auto g = bary_grad(i);
      for (int r = 0; r < Dim; ++r)
        for (int c = 0; c < Dim; ++c) H[r][c] = 4.0 * g[r] * g[c];
      return H;
    }
    const auto [a, b] = edges_[i - Dim - 1];
    const auto ga = bary_grad(a), gb = bary_grad(b);
    for (int r = 0; r < Dim; ++r)
      for (int c = 0; c < Dim; ++c) H[r][c] = 4.0 * (ga[r] * gb[c] + gb[r] * ga[c]);
    return H;
  }

private:
  static std::array<double, Dim + 1> barycentric(const Point<Dim>& xi) {
    std::array<double, Dim + 1> L{};
    L[0] = 1.0;
    for (int d = 0; d < Dim; ++d) {
      L[d + 1] = xi[d];
      L[0] -= xi[d];
    }
    return L;
  }
  static Vec<Dim> bary_grad(int i) {
    Vec<Dim> g{};
    if (i == 0)
      g.fill(-1.0);
    else
      g[i - 1] = 1.0;
    return g;
  }

  int degree_;
  std::vector<Point<Dim>> nodes_;
  std::vector<std::pair<int, int>> edges_;
};

enum class SpaceRole { State, Adjoint, Control };

/// Continuous Lagrange space on a mesh. DOFs: vertices first (same index as
/// the vertex), then one per edge (2D) or per cell (1D) for P2.
template <int Dim>
class FeSpace {
public:
  FeSpace(std::shared_ptr<const SimplexMesh<Dim>> mesh, int degree, SpaceRole role)
      : mesh_(std::move(mesh)), ref_(degree), role_(role) {
    SUPGOC_REQUIRE(mesh_ != nullptr, "FeSpace: null mesh");
    const auto& m = *mesh_;
    const Index nv = m.num_vertices();
    per_cell_ = ref_.size();
    Index extra = 0;
    if (degree == 2) extra = Dim == 1 ? m.num_cells() : m.num_edges();
    ndofs_ = nv + extra;

    cell_dofs_.resize(static_cast<std::size_t>(m.num_cells() * per_cell_));
    for (Index e = 0; e < m.num_cells(); ++e) {
      Index* d = &cell_dofs_[static_cast<std::size_t>(e * per_cell_)];
      for (int v = 0; v <= Dim; ++v) d[v] = m.cells[e][v];
      if (degree == 2) {
        if constexpr (Dim == 1)
          d[2] = nv + e;
        else
          for (int k = 0; k < 3; ++k) d[3 + k] = nv + m.cell_edges[e][k];
      }
    }

    points_.resize(static_cast<std::size_t>(ndofs_));
    for (Index v = 0; v < nv; ++v) points_[v] = m.vertices[v];
    if (degree == 2) {
      for (Index e = 0; e < m.num_cells(); ++e) {
        const auto geo = element_geometry(m, e);
        for (int i = Dim + 1; i < per_cell_; ++i)
          points_[dof(e, i)] = geo.map(ref_.nodes()[i]);
      }
    }

    dirichlet_mask_.assign(static_cast<std::size_t>(ndofs_), false);
    if (role_ != SpaceRole::Control) {
      for (const auto& f : m.boundary) {
        if (f.tag != BoundaryTag::Dirichlet) continue;
        for (auto v : f.vertices) dirichlet_mask_[v] = true;
        if (degree == 2 && Dim == 2) {
          for (int k = 0; k < 3; ++k) {
            const auto& ed = m.edges[m.cell_edges[f.cell][k]];
            if (std::minmax(f.vertices[0], f.vertices[Dim - 1]) == std::minmax(ed[0], ed[1]))
              dirichlet_mask_[nv + m.cell_edges[f.cell][k]] = true;
          }
        }
      }
    }
    for (Index i = 0; i < ndofs_; ++i)
      if (dirichlet_mask_[i]) dirichlet_.push_back(i);
  }

  const SimplexMesh<Dim>& mesh() const { return *mesh_; }
  std::shared_ptr<const SimplexMesh<Dim>> mesh_ptr() const { return mesh_; }
  const ReferenceElement<Dim>& reference() const { return ref_; }
  int degree() const { return ref_.degree(); }
  SpaceRole role() const { return role_; }
  Index num_dofs() const { return ndofs_; }
  int dofs_per_cell() const { return per_cell_; }
  Index dof(Index cell, int local) const {
    return cell_dofs_[static_cast<std::size_t>(cell * per_cell_ + local)];
  }
  const Point<Dim>& dof_point(Index i) const { return points_[static_cast<std::size_t>(i)]; }
  const std::vector<Index>& dirichlet_dofs() const { return dirichlet_; }
  bool is_dirichlet(Index i) const { return dirichlet_mask_[static_cast<std::size_t>(i)]; }

private:
  std::shared_ptr<const SimplexMesh<Dim>> mesh_;
  ReferenceElement<Dim> ref_;
  SpaceRole role_;
  int per_cell_ = 0;
  Index ndofs_ = 0;
  std::vector<Index> cell_dofs_;
  std::vector<Point<Dim>> points_;
  std::vector<bool> dirichlet_mask_;
  std::vector<Index> dirichlet_;
};

template <int Dim>
FeSpace<Dim> make_space(std::shared_ptr<const SimplexMesh<Dim>> mesh, int degree, SpaceRole role) {
  return FeSpace<Dim>(std::move(mesh), degree, role);
}

/// Basis values, physical gradients and physical Laplacians of one space at
/// the points of one quadrature rule on one element. Reference values are
/// tabulated once; reinit() only applies the affine map.
template <int Dim>
class CellValues {
public:
  CellValues(const FeSpace<Dim>& space, const QuadratureRule<Dim>& rule,
             ElementSize size = ElementSize::GridParameter)
      : space_(&space), rule_(&rule), size_(size) {
    const auto& ref = space.reference();
    n_ = ref.size();
    nq_ = static_cast<int>(rule.size());
    ref_values_.resize(static_cast<std::size_t>(nq_ * n_));
    ref_grads_.resize(static_cast<std::size_t>(nq_ * n_));
    for (int q = 0; q < nq_; ++q)
      for (int i = 0; i < n_; ++i) {
        ref_values_[q * n_ + i] = ref.value(i, rule.points[q]);
        ref_grads_[q * n_ + i] = ref.gradient(i, rule.points[q]);
      }
    for (int i = 0; i < n_; ++i) ref_hessians_.push_back(ref.hessian(i));
    grads_.resize(ref_grads_.size());
    laplacians_.resize(static_cast<std::size_t>(n_));
    points_.resize(static_cast<std::size_t>(nq_));
    jxw_.resize(static_cast<std::size_t>(nq_));
  }

  void reinit(Index cell) {
    cell_ = cell;
    geo_ = element_geometry(space_->mesh(), cell, size_);
    for (int q = 0; q < nq_; ++q) {
      points_[q] = geo_.map(rule_->points[q]);
      jxw_[q] = rule_->weights[q] * std::abs(geo_.det);
      for (int i = 0; i < n_; ++i) grads_[q * n_ + i] = geo_.push_gradient(ref_grads_[q * n_ + i]);
    }
    // Laplacian = trace(J^{-T} H J^{-1})
    const auto& Ji = geo_.inverse_jacobian;
    for (int i = 0; i < n_; ++i) {
      double lap = 0.0;
      const auto& H = ref_hessians_[i];
      for (int d = 0; d < Dim; ++d)
        for (int a = 0; a < Dim; ++a)
          for (int b = 0; b < Dim; ++b) lap += Ji[a][d] * H[a][b] * Ji[b][d];
      laplacians_[i] = lap;
    }
  }

  int size() const { return n_; }
  int num_points() const { return nq_; }
  Index cell() const { return cell_; }
  Index dof(int i) const { return space_->dof(cell_, i); }
  const ElementGeometry<Dim>& geometry() const { return geo_; }
  const Point<Dim>& point(int q) const { return points_[q]; }
  double jxw(int q) const { return jxw_[q]; }
  double value(int q, int i) const { return ref_values_[q * n_ + i]; }
  const Vec<Dim>& gradient(int q, int i) const { return grads_[q * n_ + i]; }
  double laplacian(int i) const { return laplacians_[i]; }

  double interpolate(int q, const Eigen::VectorXd& coeffs) const {
    double s = 0.0;
    for (int i = 0; i < n_; ++i) s += coeffs[dof(i)] * value(q, i);
    return s;
  }
  Vec<Dim> interpolate_gradient(int q, const Eigen::VectorXd& coeffs) const {
    Vec<Dim> g{};
    for (int i = 0; i < n_; ++i)
      for (int d = 0; d < Dim; ++d) g[d] += coeffs[dof(i)] * gradient(q, i)[d];
    return g;
  }

private:
  const FeSpace<Dim>* space_;
  const QuadratureRule<Dim>* rule_;
  ElementSize size_;
  int n_ = 0, nq_ = 0;
  Index cell_ = -1;
  ElementGeometry<Dim> geo_;
  std::vector<double> ref_values_;
  std::vector<Vec<Dim>> ref_grads_;
  std::vector<Hessian<Dim>> ref_hessians_;
  std::vector<Vec<Dim>> grads_;
  std::vector<double> laplacians_;
  std::vector<Point<Dim>> points_;
  std::vector<double> jxw_;
};

template <int Dim>
struct MappedBasis {
  std::vector<Point<Dim>> points;
  std::vector<double> jxw;
  std::vector<std::vector<double>> values;      // [q][i]
  std::vector<std::vector<Vec<Dim>>> gradients; // [q][i]
  std::vector<double> laplacians;               // [i]
};

/// Snapshot of CellValues for one element, for callers that want plain data.
template <int Dim>
MappedBasis<Dim> eval_mapped_basis(const FeSpace<Dim>& space, Index cell, const QuadratureRule<Dim>& rule) {
  CellValues<Dim> cv(space, rule);
  cv.reinit(cell);
  MappedBasis<Dim> out;
  out.values.resize(cv.num_points());
  out.gradients.resize(cv.num_points());
  for (int q = 0; q < cv.num_points(); ++q) {
    out.points.push_back(cv.point(q));
    out.jxw.push_back(cv.jxw(q));
    for (int i = 0; i < cv.size(); ++i) {
      out.values[q].push_back(cv.value(q, i));
      out.gradients[q].push_back(cv.gradient(q, i));
    }
  }
  for (int i = 0; i < cv.size(); ++i) out.laplacians.push_back(cv.laplacian(i));
  return out;
}

template <int Dim>
Eigen::VectorXd interpolate(const FeSpace<Dim>& space, const std::function<double(const Point<Dim>&)>& fn) {
  Eigen::VectorXd c(space.num_dofs());
  for (Index i = 0; i < space.num_dofs(); ++i) c[i] = fn(space.dof_point(i));
  return c;
}

/// Point evaluation of a finite element function (linear cell search).
template <int Dim>
double evaluate(const FeSpace<Dim>& space, const Eigen::VectorXd& coeffs, const Point<Dim>& x) {
  const auto& m = space.mesh();
  constexpr double tol = 1e-12;
  for (Index e = 0; e < m.num_cells(); ++e) {
    const auto geo = element_geometry(m, e);
    const auto xi = geo.to_reference(x);
    double sum = 0.0;
    bool inside = true;
    for (int d = 0; d < Dim; ++d) {
      inside = inside && xi[d] >= -tol;
      sum += xi[d];
    }
    if (!inside || sum > 1.0 + tol) continue;
    double v = 0.0;
    for (int i = 0; i < space.dofs_per_cell(); ++i) v += coeffs[space.dof(e, i)] * space.reference().value(i, xi);
    return v;
  }
  throw InvalidArgument("evaluate: point outside mesh");
}

}  // namespace supgoc
