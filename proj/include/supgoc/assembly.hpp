#pragma once

// Galerkin and SUPG forms for the state equation and for the
// optimize-then-discretize adjoint equation.
//
// All matrices are built from per-element triplet lists concatenated in
// ascending element order; duplicates are summed by Eigen in that order, so
// the result is bitwise reproducible.

#include <Eigen/Sparse>
#include <algorithm>
#include <iomanip>
#include <ostream>
#include <vector>

#include "supgoc/fe_space.hpp"
#include "supgoc/problem.hpp"
#include "supgoc/stabilization.hpp"

namespace supgoc {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;
using Triplet = Eigen::Triplet<double>;

struct AssemblyOptions {
  /// Quadrature exactness; 0 means 2*max(degree)+2.
  int quadrature_degree = 0;
  ElementSize element_size = ElementSize::GridParameter;
};

namespace detail {

template <int Dim>
void require_same_mesh(const FeSpace<Dim>& a, const FeSpace<Dim>& b, const char* where) {
  if (a.mesh_ptr() != b.mesh_ptr())
    throw InvalidArgument(std::string(where) + ": spaces live on different meshes");
}

inline int assembly_degree(const AssemblyOptions& opts, int max_degree) {
  return opts.quadrature_degree > 0 ? opts.quadrature_degree : 2 * max_degree + 2;
}

inline SparseMatrix from_triplets(Index rows, Index cols, const std::vector<Triplet>& t) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

}  // namespace detail

/// max |c| over the element's quadrature points and vertices.
template <int Dim>
double element_velocity_bound(const VectorFn<Dim>& c, const SimplexMesh<Dim>& mesh, Index cell,
                              const QuadratureRule<Dim>& rule) {
  const auto geo = element_geometry(mesh, cell);
  double m = 0.0;
  for (const auto& xi : rule.points) m = std::max(m, norm<Dim>(c(geo.map(xi))));
  for (auto v : mesh.cells[cell]) m = std::max(m, norm<Dim>(c(mesh.vertices[v])));
  return m;
}

/// Per-element stabilization parameters for a space of the given degree.
template <int Dim>
std::vector<double> element_taus(const SimplexMesh<Dim>& mesh, int degree, const ProblemData<Dim>& problem,
                                 const StabilizationConfig& stab, const AssemblyOptions& opts = {}) {
  std::vector<double> taus(static_cast<std::size_t>(mesh.num_cells()), 0.0);
  if (stab.policy == TauPolicy::Zero) return taus;
  const auto rule = quadrature_rule<Dim>(detail::assembly_degree(opts, degree));
  for (Index e = 0; e < mesh.num_cells(); ++e) {
    const double c_sup = element_velocity_bound<Dim>(problem.velocity, mesh, e, rule);
    const double h_e = element_geometry(mesh, e, opts.element_size).h_e;
    taus[e] = tau(stab, problem.epsilon, c_sup, h_e, degree, Dim);
  }
  return taus;
}

/// M[i,j] = <phi_j, phi_i>, rows from `row`, columns from `col`.
template <int Dim>
SparseMatrix assemble_mass(const FeSpace<Dim>& row, const FeSpace<Dim>& col, const AssemblyOptions& opts = {}) {
  detail::require_same_mesh(row, col, "assemble_mass");
  const auto rule = quadrature_rule<Dim>(detail::assembly_degree(opts, std::max(row.degree(), col.degree())));
  CellValues<Dim> rv(row, rule), cv(col, rule);
  std::vector<Triplet> trip;
  const auto& mesh = row.mesh();
  for (Index e = 0; e < mesh.num_cells(); ++e) {
    rv.reinit(e);
    cv.reinit(e);
    for (int i = 0; i < rv.size(); ++i)
      for (int j = 0; j < cv.size(); ++j) {
        double s = 0.0;
        for (int q = 0; q < rv.num_points(); ++q) s += rv.jxw(q) * rv.value(q, i) * cv.value(q, j);
        trip.emplace_back(rv.dof(i), cv.dof(j), s);
      }
  }
  return detail::from_triplets(row.num_dofs(), col.num_dofs(), trip);
}

/// <fn, phi_i> + sum_e tau_e <fn, w . grad phi_i>_e, where `w` is the
/// streamline direction (c for the state, -c for the adjoint). Pass empty
/// taus for the plain Galerkin load.
template <int Dim>
Vector assemble_load(const FeSpace<Dim>& space, const ScalarFn<Dim>& fn, const std::vector<double>& taus = {},
                     const VectorFn<Dim>& streamline = {}, const AssemblyOptions& opts = {}) {
  const auto rule = quadrature_rule<Dim>(detail::assembly_degree(opts, space.degree()));
  CellValues<Dim> cv(space, rule);
  Vector b = Vector::Zero(space.num_dofs());
  std::vector<double> local(static_cast<std::size_t>(space.dofs_per_cell()));
  for (Index e = 0; e < space.mesh().num_cells(); ++e) {
    cv.reinit(e);
    std::fill(local.begin(), local.end(), 0.0);
    const double t = taus.empty() ? 0.0 : taus[e];
    for (int q = 0; q < cv.num_points(); ++q) {
      const double fq = fn(cv.point(q)) * cv.jxw(q);
      Vec<Dim> w{};
      if (t != 0.0) w = streamline(cv.point(q));
      for (int i = 0; i < cv.size(); ++i) {
        local[i] += fq * cv.value(q, i);
        if (t != 0.0) local[i] += t * fq * dot<Dim>(w, cv.gradient(q, i));
      }
    }
    for (int i = 0; i < cv.size(); ++i) b[cv.dof(i)] += local[i];
  }
  return b;
}

/// <g, phi_i> over the Neumann part of the boundary.
template <int Dim>
Vector assemble_neumann(const FeSpace<Dim>& space, const ProblemData<Dim>& problem, const AssemblyOptions& opts = {}) {
  Vector b = Vector::Zero(space.num_dofs());
  const auto& mesh = space.mesh();
  const auto& ref = space.reference();
  const auto edge_rule = quadrature_rule<1>(detail::assembly_degree(opts, space.degree()));
  for (const auto& f : mesh.boundary) {
    if (f.tag != BoundaryTag::Neumann) continue;
    const auto geo = element_geometry(mesh, f.cell);
    auto add_point = [&](const Point<Dim>& x, double weight) {
      const double g = problem.neumann(x, f.normal) * weight;
      const auto xi = geo.to_reference(x);
      for (int i = 0; i < space.dofs_per_cell(); ++i) b[space.dof(f.cell, i)] += g * ref.value(i, xi);
    };
    if constexpr (Dim == 1) {
      add_point(mesh.vertices[f.vertices[0]], 1.0);
    } else {
      const auto& a = mesh.vertices[f.vertices[0]];
      const auto& c = mesh.vertices[f.vertices[1]];
      const double len = std::hypot(c[0] - a[0], c[1] - a[1]);
      for (std::size_t q = 0; q < edge_rule.size(); ++q) {
        const double s = edge_rule.points[q][0];
        add_point({a[0] + s * (c[0] - a[0]), a[1] + s * (c[1] - a[1])}, edge_rule.weights[q] * len);
      }
    }
  }
  return b;
}

struct StateForms {
  SparseMatrix A;  ///< a_h^s(phi_j, phi_i), rows: test V_h, cols: Y_h
  SparseMatrix B;  ///< b_h^s(psi_j, phi_i), rows: test V_h, cols: U_h
  Vector F;        ///< <f, phi_i>_h^s
  Vector N;        ///< <g, phi_i>_{Gamma_n}
  std::vector<double> taus;
};

template <int Dim>
StateForms assemble_state_supg(const FeSpace<Dim>& state, const FeSpace<Dim>& control, const ProblemData<Dim>& p,
                               const StabilizationConfig& stab, const AssemblyOptions& opts = {}) {
  detail::require_same_mesh(state, control, "assemble_state_supg");
  SUPGOC_REQUIRE(stab.role == EquationRole::State, "assemble_state_supg: stabilization role must be State");
  const auto& mesh = state.mesh();
  const auto rule = quadrature_rule<Dim>(detail::assembly_degree(opts, std::max(state.degree(), control.degree())));
  CellValues<Dim> yv(state, rule), uv(control, rule);
  StateForms out;
  out.taus = element_taus(mesh, state.degree(), p, stab, opts);
  std::vector<Triplet> ta, tb;
  out.F = Vector::Zero(state.num_dofs());
  const int ny = state.dofs_per_cell(), nu = control.dofs_per_cell();
  std::vector<double> la(ny * ny), lb(ny * nu), lf(ny);
  std::vector<double> streamline(ny), operator_part(ny);

  for (Index e = 0; e < mesh.num_cells(); ++e) {
    yv.reinit(e);
    uv.reinit(e);
    const double t = out.taus[e];
    std::fill(la.begin(), la.end(), 0.0);
    std::fill(lb.begin(), lb.end(), 0.0);
    std::fill(lf.begin(), lf.end(), 0.0);
    for (int q = 0; q < yv.num_points(); ++q) {
      const auto& x = yv.point(q);
      const double w = yv.jxw(q);
      const auto c = p.velocity(x);
      const double r = p.reaction(x);
      const double f = p.source(x);
      for (int i = 0; i < ny; ++i) {
        streamline[i] = dot<Dim>(c, yv.gradient(q, i));
        operator_part[i] = -p.epsilon * yv.laplacian(i) + streamline[i] + r * yv.value(q, i);
      }
      for (int i = 0; i < ny; ++i) {
        const double vi = yv.value(q, i);
        for (int j = 0; j < ny; ++j) {
          const double galerkin = p.epsilon * dot<Dim>(yv.gradient(q, j), yv.gradient(q, i)) +
                                  streamline[j] * vi + r * yv.value(q, j) * vi;
          la[i * ny + j] += w * (galerkin + t * operator_part[j] * streamline[i]);
        }
        for (int j = 0; j < nu; ++j) lb[i * nu + j] -= w * uv.value(q, j) * (vi + t * streamline[i]);
        lf[i] += w * f * (vi + t * streamline[i]);
      }
    }
    for (int i = 0; i < ny; ++i) {
      for (int j = 0; j < ny; ++j) ta.emplace_back(yv.dof(i), yv.dof(j), la[i * ny + j]);
      for (int j = 0; j < nu; ++j) tb.emplace_back(yv.dof(i), uv.dof(j), lb[i * nu + j]);
      out.F[yv.dof(i)] += lf[i];
    }
  }
  out.A = detail::from_triplets(state.num_dofs(), state.num_dofs(), ta);
  out.B = detail::from_triplets(state.num_dofs(), control.num_dofs(), tb);
  out.N = assemble_neumann(state, p, opts);
  return out;
}

struct AdjointForms {
  SparseMatrix A;       ///< a_h^a(phi_i, phi_j), rows: test Lambda_h, cols: Lambda_h
  SparseMatrix M;       ///< <phi_j, phi_i>_h^a, rows: test Lambda_h, cols: Y_h
  Vector target_load;   ///< <yhat, phi_i>_h^a
  std::vector<double> taus;
};

/// SUPG discretization of the adjoint equation, advection -c and reaction
/// r - div(c); the equation reads A*lambda = -(M*y - target_load).
template <int Dim>
AdjointForms assemble_adjoint_supg_otd(const FeSpace<Dim>& state, const FeSpace<Dim>& adjoint,
                                       const ProblemData<Dim>& p, const StabilizationConfig& stab,
                                       const AssemblyOptions& opts = {}) {
  detail::require_same_mesh(state, adjoint, "assemble_adjoint_supg_otd");
  SUPGOC_REQUIRE(stab.role == EquationRole::Adjoint,
                 "assemble_adjoint_supg_otd: stabilization role must be Adjoint");
  const auto& mesh = adjoint.mesh();
  const auto rule = quadrature_rule<Dim>(detail::assembly_degree(opts, std::max(state.degree(), adjoint.degree())));
  CellValues<Dim> lv(adjoint, rule), yv(state, rule);
  AdjointForms out;
  out.taus = element_taus(mesh, adjoint.degree(), p, stab, opts);
  std::vector<Triplet> ta, tm;
  const int nl = adjoint.dofs_per_cell(), ny = state.dofs_per_cell();
  std::vector<double> la(nl * nl), lm(nl * ny);
  std::vector<double> streamline(nl), operator_part(nl);

  for (Index e = 0; e < mesh.num_cells(); ++e) {
    lv.reinit(e);
    yv.reinit(e);
    const double t = out.taus[e];
    std::fill(la.begin(), la.end(), 0.0);
    std::fill(lm.begin(), lm.end(), 0.0);
    for (int q = 0; q < lv.num_points(); ++q) {
      const auto& x = lv.point(q);
      const double w = lv.jxw(q);
      const auto c = p.velocity(x);
      const double r = p.reaction(x);
      const double rd = r - p.div_velocity(x);
      for (int i = 0; i < nl; ++i) {
        streamline[i] = dot<Dim>(c, lv.gradient(q, i));  // c.grad(phi_i); the test weight is -streamline
        operator_part[i] = -p.epsilon * lv.laplacian(i) - streamline[i] + rd * lv.value(q, i);
      }
      for (int i = 0; i < nl; ++i) {
        const double psi = lv.value(q, i);
        for (int j = 0; j < nl; ++j) {
          // a(psi_i, lambda_j) = eps grad psi.grad lambda + (c.grad psi) lambda + r psi lambda
          const double galerkin = p.epsilon * dot<Dim>(lv.gradient(q, i), lv.gradient(q, j)) +
                                  streamline[i] * lv.value(q, j) + r * psi * lv.value(q, j);
          la[i * nl + j] += w * (galerkin - t * operator_part[j] * streamline[i]);
        }
        for (int j = 0; j < ny; ++j) lm[i * ny + j] += w * yv.value(q, j) * (psi - t * streamline[i]);
      }
    }
    for (int i = 0; i < nl; ++i) {
      for (int j = 0; j < nl; ++j) ta.emplace_back(lv.dof(i), lv.dof(j), la[i * nl + j]);
      for (int j = 0; j < ny; ++j) tm.emplace_back(lv.dof(i), yv.dof(j), lm[i * ny + j]);
    }
  }
  out.A = detail::from_triplets(adjoint.num_dofs(), adjoint.num_dofs(), ta);
  out.M = detail::from_triplets(adjoint.num_dofs(), state.num_dofs(), tm);
  VectorFn<Dim> minus_c = [c = p.velocity](const Point<Dim>& x) {
    auto v = c(x);
    for (auto& a : v) a = -a;
    return v;
  };
  out.target_load = assemble_load<Dim>(adjoint, p.target, out.taus, minus_c, opts);
  return out;
}

/// Coordinate text dump: "row col value" with 17 significant digits,
/// entries in column-major order.
inline void write_coordinate(std::ostream& os, const SparseMatrix& m) {
  const auto prec = os.precision(17);
  for (Index k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
  os.precision(prec);
}

}  // namespace supgoc
