#pragma once

// Coupled (state, control, adjoint) optimality systems.
//
// Unknowns are ordered [y | u | lambda]. Equation rows are ordered
// [adjoint equation (tested with Lambda_h) | gradient equation (U_h) |
//  state equation (V_h)]:
//
//   DTO:  [ M_yy   0        A_s^T ] [y]   [ <yhat, psi>   ]
//         [ 0      w M_uu   B_s^T ] [u] = [ 0             ]
//         [ A_s    B_s      0     ] [l]   [ F_s + N_g     ]
//
//   OTD:  [ M_ya   0        A_a   ]       [ <yhat, psi>^a ]
//         [ 0      w M_uu  -M_ul  ]       [ 0             ]
//         [ A_s    B_s      0     ]       [ F_s + N_g     ]

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "supgoc/assembly.hpp"

namespace supgoc {

enum class Approach { DTO, OTD };

inline std::string to_string(Approach a) { return a == Approach::DTO ? "dto" : "otd"; }

struct Degrees {
  int state = 1;    // k
  int control = 1;  // m
  int adjoint = 1;  // l
};

/// All forms needed by either approach on one mesh.
struct FormSet {
  StateForms state;
  AdjointForms adjoint;      // empty unless OTD
  SparseMatrix M_yy;
  SparseMatrix M_uu;
  SparseMatrix M_ul;         // rows U_h, cols Lambda_h
  Vector target_load;        // <yhat, psi>, psi in Y_h
};

/// A Dirichlet constraint: unknown `column` is fixed to `value`, and equation
/// row `row` is replaced by the constraint.
struct Constraint {
  Index row;
  Index column;
  double value;
};

template <int Dim>
struct KktSystem {
  Approach approach = Approach::DTO;
  SparseMatrix K;
  Vector rhs;
  FeSpace<Dim> state;
  FeSpace<Dim> control;
  FeSpace<Dim> adjoint;
  std::vector<double> state_taus;
  std::vector<double> adjoint_taus;
  std::vector<Constraint> constraints;
  bool constrained = false;
  TauPolicy policy = TauPolicy::PaperExample;

  Index ny() const { return state.num_dofs(); }
  Index nu() const { return control.num_dofs(); }
  Index nl() const { return adjoint.num_dofs(); }
  Index dimension() const { return ny() + nu() + nl(); }
  // unknown offsets
  Index y_offset() const { return 0; }
  Index u_offset() const { return ny(); }
  Index l_offset() const { return ny() + nu(); }
  // equation row offsets
  Index adjoint_rows() const { return 0; }
  Index gradient_rows() const { return nl(); }
  Index state_rows() const { return nl() + nu(); }
};

namespace detail {

inline void append_block(std::vector<Triplet>& out, const SparseMatrix& m, Index row0, Index col0,
                         double scale = 1.0, bool transpose = false) {
  for (Index k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      const Index r = transpose ? it.col() : it.row();
      const Index c = transpose ? it.row() : it.col();
      out.emplace_back(row0 + r, col0 + c, scale * it.value());
    }
}

template <int Dim>
std::vector<Constraint> dirichlet_constraints(const KktSystem<Dim>& sys, const ProblemData<Dim>& p) {
  std::vector<Constraint> out;
  for (Index i : sys.adjoint.dirichlet_dofs()) out.push_back({sys.adjoint_rows() + i, sys.l_offset() + i, 0.0});
  if (!sys.state.dirichlet_dofs().empty() && !p.dirichlet)
    throw InvalidArgument("apply_boundary_conditions: Dirichlet boundary present but no Dirichlet data");
  for (Index i : sys.state.dirichlet_dofs())
    out.push_back({sys.state_rows() + i, sys.y_offset() + i, p.dirichlet(sys.state.dof_point(i))});
  return out;
}

}  // namespace detail

template <int Dim>
FormSet assemble_forms(Approach approach, const FeSpace<Dim>& Y, const FeSpace<Dim>& U, const FeSpace<Dim>& L,
                       const ProblemData<Dim>& p, const StabilizationConfig& stab_state,
                       const StabilizationConfig& stab_adjoint, const AssemblyOptions& opts = {}) {
  FormSet f;
  f.state = assemble_state_supg(Y, U, p, stab_state, opts);
  f.M_uu = assemble_mass(U, U, opts);
  if (approach == Approach::DTO) {
    f.M_yy = assemble_mass(Y, Y, opts);
    f.target_load = assemble_load<Dim>(Y, p.target, {}, {}, opts);
  } else {
    f.adjoint = assemble_adjoint_supg_otd(Y, L, p, stab_adjoint, opts);
    f.M_ul = assemble_mass(U, L, opts);
  }
  return f;
}

/// Discretize-then-optimize system (before boundary conditions).
template <int Dim>
KktSystem<Dim> build_dto(const ProblemData<Dim>& p, std::shared_ptr<const SimplexMesh<Dim>> mesh, Degrees deg,
                         StabilizationConfig stab_state, const AssemblyOptions& opts = {}) {
  SUPGOC_REQUIRE(deg.adjoint == deg.state, "build_dto: the adjoint space must equal the state space (l = k)");
  stab_state.role = EquationRole::State;
  KktSystem<Dim> sys{Approach::DTO,
                     {},
                     {},
                     make_space(mesh, deg.state, SpaceRole::State),
                     make_space(mesh, deg.control, SpaceRole::Control),
                     make_space(mesh, deg.adjoint, SpaceRole::Adjoint),
                     {},
                     {},
                     {}};
  sys.policy = stab_state.policy;
  const auto f = assemble_forms(Approach::DTO, sys.state, sys.control, sys.adjoint, p, stab_state, stab_state, opts);
  const Index ny = sys.ny();
  std::vector<Triplet> t;
  detail::append_block(t, f.M_yy, sys.adjoint_rows(), sys.y_offset());
  detail::append_block(t, f.state.A, sys.adjoint_rows(), sys.l_offset(), 1.0, true);
  detail::append_block(t, f.M_uu, sys.gradient_rows(), sys.u_offset(), p.omega);
  detail::append_block(t, f.state.B, sys.gradient_rows(), sys.l_offset(), 1.0, true);
  detail::append_block(t, f.state.A, sys.state_rows(), sys.y_offset());
  detail::append_block(t, f.state.B, sys.state_rows(), sys.u_offset());
  sys.K = detail::from_triplets(sys.dimension(), sys.dimension(), t);
  sys.rhs = Vector::Zero(sys.dimension());
  sys.rhs.segment(sys.adjoint_rows(), ny) = f.target_load;
  sys.rhs.segment(sys.state_rows(), ny) = f.state.F + f.state.N;
  sys.state_taus = f.state.taus;
  sys.adjoint_taus = f.state.taus;
  sys.constraints = detail::dirichlet_constraints(sys, p);
  return sys;
}

/// Optimize-then-discretize system (before boundary conditions).
template <int Dim>
KktSystem<Dim> build_otd(const ProblemData<Dim>& p, std::shared_ptr<const SimplexMesh<Dim>> mesh, Degrees deg,
                         StabilizationConfig stab_state, StabilizationConfig stab_adjoint,
                         const AssemblyOptions& opts = {}) {
  SUPGOC_REQUIRE(deg.adjoint >= 1, "build_otd: adjoint degree must be >= 1");
  stab_state.role = EquationRole::State;
  stab_adjoint.role = EquationRole::Adjoint;
  KktSystem<Dim> sys{Approach::OTD,
                     {},
                     {},
                     make_space(mesh, deg.state, SpaceRole::State),
                     make_space(mesh, deg.control, SpaceRole::Control),
                     make_space(mesh, deg.adjoint, SpaceRole::Adjoint),
                     {},
                     {},
                     {}};
  sys.policy = stab_state.policy;
  const auto f = assemble_forms(Approach::OTD, sys.state, sys.control, sys.adjoint, p, stab_state, stab_adjoint, opts);
  std::vector<Triplet> t;
  detail::append_block(t, f.adjoint.M, sys.adjoint_rows(), sys.y_offset());
  detail::append_block(t, f.adjoint.A, sys.adjoint_rows(), sys.l_offset());
  detail::append_block(t, f.M_uu, sys.gradient_rows(), sys.u_offset(), p.omega);
  detail::append_block(t, f.M_ul, sys.gradient_rows(), sys.l_offset(), -1.0);
  detail::append_block(t, f.state.A, sys.state_rows(), sys.y_offset());
  detail::append_block(t, f.state.B, sys.state_rows(), sys.u_offset());
  sys.K = detail::from_triplets(sys.dimension(), sys.dimension(), t);
  sys.rhs = Vector::Zero(sys.dimension());
  sys.rhs.segment(sys.adjoint_rows(), sys.nl()) = f.adjoint.target_load;
  sys.rhs.segment(sys.state_rows(), sys.ny()) = f.state.F + f.state.N;
  sys.state_taus = f.state.taus;
  sys.adjoint_taus = f.adjoint.taus;
  sys.constraints = detail::dirichlet_constraints(sys, p);
  return sys;
}

/// Replaces each constrained equation by a unit entry on the constrained
/// unknown (the diagonal of the A_s / A_a block) and folds the constrained
/// columns into the right-hand side. Total dimension is unchanged; for DTO
/// the operator stays symmetric.
template <int Dim>
KktSystem<Dim> apply_boundary_conditions(KktSystem<Dim> sys) {
  if (sys.constrained) return sys;
  const Index n = sys.dimension();
  std::vector<char> row_fixed(n, 0), col_fixed(n, 0);
  Vector col_value = Vector::Zero(n);
  for (const auto& c : sys.constraints) {
    row_fixed[c.row] = 1;
    col_fixed[c.column] = 1;
    col_value[c.column] = c.value;
  }
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(sys.K.nonZeros()));
  for (Index k = 0; k < sys.K.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(sys.K, k); it; ++it) {
      const Index r = it.row(), c = it.col();
      if (row_fixed[r]) continue;
      if (col_fixed[c]) {
        sys.rhs[r] -= it.value() * col_value[c];
        continue;
      }
      t.emplace_back(r, c, it.value());
    }
  for (const auto& c : sys.constraints) {
    t.emplace_back(c.row, c.column, 1.0);
    sys.rhs[c.row] = c.value;
  }
  sys.K = detail::from_triplets(n, n, t);
  sys.constrained = true;
  return sys;
}

template <int Dim>
KktSystem<Dim> apply_boundary_conditions(KktSystem<Dim> sys, const ProblemData<Dim>& p) {
  sys.constraints = detail::dirichlet_constraints(sys, p);
  return apply_boundary_conditions(std::move(sys));
}

/// max_ij |K_ij - K_ji| / max_ij |K_ij|.
inline double relative_asymmetry(const SparseMatrix& K) {
  const SparseMatrix Kt = K.transpose();
  const SparseMatrix D = K - Kt;
  double dmax = 0.0, kmax = 0.0;
  for (Index k = 0; k < D.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(D, k); it; ++it) dmax = std::max(dmax, std::abs(it.value()));
  for (Index k = 0; k < K.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(K, k); it; ++it) kmax = std::max(kmax, std::abs(it.value()));
  return kmax > 0.0 ? dmax / kmax : 0.0;
}

/// max row sum of |A| (the matrix infinity norm).
inline double norm_inf(const SparseMatrix& A) {
  Vector rows = Vector::Zero(A.rows());
  for (Index k = 0; k < A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(A, k); it; ++it) rows[it.row()] += std::abs(it.value());
  return A.rows() ? rows.maxCoeff() : 0.0;
}

/// Operator dump plus sidecar header (dimensions, approach, tau policy, level).
template <int Dim>
void write_system(std::ostream& matrix_out, std::ostream& header_out, const KktSystem<Dim>& sys, double h) {
  write_coordinate(matrix_out, sys.K);
  const auto prec = header_out.precision(17);
  header_out << "dimension " << sys.dimension() << "\n"
             << "blocks " << sys.ny() << ' ' << sys.nu() << ' ' << sys.nl() << "\n"
             << "nonzeros " << sys.K.nonZeros() << "\n"
             << "approach " << to_string(sys.approach) << "\n"
             << "tau " << to_string(sys.policy) << "\n"
             << "degrees " << sys.state.degree() << ' ' << sys.control.degree() << ' ' << sys.adjoint.degree() << "\n"
             << "h " << h << "\n"
             << "constrained " << (sys.constrained ? 1 : 0) << "\n";
  header_out << "rhs";
  for (Index i = 0; i < sys.rhs.size(); ++i) header_out << ' ' << sys.rhs[i];
  header_out << "\n";
  header_out.precision(prec);
}

}  // namespace supgoc
