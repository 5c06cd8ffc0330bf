#pragma once

// Direct sparse LU solve of the coupled system, and a reduced-space solver
// (state and adjoint eliminated, control system solved on its own) used as
// an independent check of the direct path for DTO systems.

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <sstream>

#include "supgoc/kkt.hpp"

namespace supgoc {

struct SolutionTriple {
  Vector y;
  Vector u;
  Vector lambda;
  /// ||K x - b||_2
  double residual = 0.0;
  /// residual contract bound 1e-10 (||b||_2 + ||K||_inf ||x||_2)
  double residual_bound = 0.0;
  Index matrix_nonzeros = 0;
  int refinement_steps = 0;

  Vector stacked() const {
    Vector x(y.size() + u.size() + lambda.size());
    x << y, u, lambda;
    return x;
  }
};

using SparseLUSolver = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;

namespace detail {

inline void factorize_or_throw(SparseLUSolver& lu, const SparseMatrix& A, const char* what) {
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << what << ": sparse LU failed: " << lu.lastErrorMessage();
    const std::string& err = lu.lastErrorMessage();
    const auto pos = err.find("COLUMN AT ");
    if (pos != std::string::npos) {
      const Index permuted = std::stol(err.substr(pos + 10)) - 1;
      const auto& pc = lu.colsPermutation().indices();
      for (Index j = 0; j < pc.size(); ++j)
        if (pc[j] == permuted) {
          msg << " (zero pivot in original column " << j << ")";
          break;
        }
    }
    throw NumericalFailure(msg.str());
  }
}

}  // namespace detail

/// Solves K x = b with pivoted sparse LU (COLAMD ordering) and up to three
/// steps of iterative refinement if the residual contract is not met.
inline Vector solve_sparse(const SparseMatrix& K, const Vector& b, double* residual = nullptr,
                           double* bound = nullptr, int* steps = nullptr) {
  SUPGOC_REQUIRE(K.rows() == K.cols() && K.rows() == b.size(), "solve_sparse: dimension mismatch");
  SparseLUSolver lu;
  detail::factorize_or_throw(lu, K, "solve_direct");
  Vector x = lu.solve(b);
  const double knorm = norm_inf(K);
  auto contract = [&](const Vector& xx) { return 1e-10 * (b.norm() + knorm * xx.norm()); };
  Vector r = b - K * x;
  int it = 0;
  while (r.norm() > contract(x) && it < 3) {
    x += lu.solve(r);
    r = b - K * x;
    ++it;
  }
  if (!x.allFinite()) throw NumericalFailure("solve_direct: non-finite solution");
  if (!(r.norm() <= contract(x))) throw NumericalFailure("solve_direct: residual contract violated after refinement");
  if (residual) *residual = r.norm();
  if (bound) *bound = contract(x);
  if (steps) *steps = it;
  return x;
}

template <int Dim>
SolutionTriple split_solution(const KktSystem<Dim>& sys, const Vector& x) {
  SolutionTriple s;
  s.y = x.segment(sys.y_offset(), sys.ny());
  s.u = x.segment(sys.u_offset(), sys.nu());
  s.lambda = x.segment(sys.l_offset(), sys.nl());
  return s;
}

template <int Dim>
SolutionTriple solve_direct(const KktSystem<Dim>& sys) {
  SUPGOC_REQUIRE(sys.constrained, "solve_direct: apply boundary conditions first");
  double res = 0.0, bound = 0.0;
  int steps = 0;
  const Vector x = solve_sparse(sys.K, sys.rhs, &res, &bound, &steps);
  auto s = split_solution(sys, x);
  s.residual = res;
  s.residual_bound = bound;
  s.refinement_steps = steps;
  s.matrix_nonzeros = sys.K.nonZeros();
  return s;
}

/// Blocks of a constrained DTO system in the notation
///   [ H   0   A^T ]
///   [ 0   W   B^T ]
///   [ A   B   0   ]
struct ReducedBlocks {
  SparseMatrix A, B, H, W;
  Vector r_adjoint, r_gradient, r_state;
};

template <int Dim>
ReducedBlocks extract_blocks(const KktSystem<Dim>& sys) {
  ReducedBlocks b;
  const Index ny = sys.ny(), nu = sys.nu(), nl = sys.nl();
  b.A = sys.K.block(sys.state_rows(), sys.y_offset(), ny, ny);
  b.B = sys.K.block(sys.state_rows(), sys.u_offset(), ny, nu);
  b.H = sys.K.block(sys.adjoint_rows(), sys.y_offset(), nl, ny);
  b.W = sys.K.block(sys.gradient_rows(), sys.u_offset(), nu, nu);
  b.r_adjoint = sys.rhs.segment(sys.adjoint_rows(), nl);
  b.r_gradient = sys.rhs.segment(sys.gradient_rows(), nu);
  b.r_state = sys.rhs.segment(sys.state_rows(), ny);
  return b;
}

/// Matrix-free reduced operator  Hhat = W + B^T A^{-T} H A^{-1} B  on the
/// control space.
class ReducedOperator {
public:
  explicit ReducedOperator(ReducedBlocks blocks) : b_(std::move(blocks)) {
    detail::factorize_or_throw(lu_, b_.A, "solve_reduced_oracle");
  }

  Index size() const { return b_.W.rows(); }

  Vector apply(const Vector& w) const {
    const Vector y = lu_.solve(Vector(b_.B * w));
    const Vector l = lu_.transpose().solve(Vector(b_.H * y));
    return b_.W * w + b_.B.transpose() * l;
  }

  Vector reduced_rhs() const {
    const Vector y0 = lu_.solve(b_.r_state);
    const Vector l0 = lu_.transpose().solve(Vector(b_.r_adjoint - b_.H * y0));
    return b_.r_gradient - b_.B.transpose() * l0;
  }

  /// Recovers (y, lambda) from a control.
  std::pair<Vector, Vector> recover(const Vector& u) const {
    const Vector y = lu_.solve(Vector(b_.r_state - b_.B * u));
    const Vector l = lu_.transpose().solve(Vector(b_.r_adjoint - b_.H * y));
    return {y, l};
  }

  const ReducedBlocks& blocks() const { return b_; }

private:
  ReducedBlocks b_;
  mutable SparseLUSolver lu_;
};

inline constexpr Index kDenseReducedLimit = 5000;

/// Control-space solve of a constrained DTO system. Dense Cholesky of the
/// assembled reduced operator up to kDenseReducedLimit controls, Jacobi
/// preconditioned conjugate gradients above.
template <int Dim>
SolutionTriple solve_reduced_oracle(const KktSystem<Dim>& sys, double tol = 1e-12) {
  if (sys.approach != Approach::DTO) throw InvalidArgument("solve_reduced_oracle: only DTO systems are supported");
  SUPGOC_REQUIRE(sys.constrained, "solve_reduced_oracle: apply boundary conditions first");
  const ReducedOperator op(extract_blocks(sys));
  const Index n = op.size();
  const Vector rhs = op.reduced_rhs();
  Vector u;
  if (n <= kDenseReducedLimit) {
    Eigen::MatrixXd Hd(n, n);
    Vector e = Vector::Zero(n);
    for (Index j = 0; j < n; ++j) {
      e[j] = 1.0;
      Hd.col(j) = op.apply(e);
      e[j] = 0.0;
    }
    Hd = 0.5 * (Hd + Hd.transpose());
    Eigen::LLT<Eigen::MatrixXd> llt(Hd);
    if (llt.info() != Eigen::Success) throw NumericalFailure("solve_reduced_oracle: reduced operator not positive definite");
    u = llt.solve(rhs);
  } else {
    const Vector diag = op.blocks().W.diagonal();
    u = Vector::Zero(n);
    Vector r = rhs;
    Vector z = r.cwiseQuotient(diag);
    Vector p = z;
    double rz = r.dot(z);
    const double stop = tol * rhs.norm();
    for (Index it = 0; it < 10 * n && r.norm() > stop; ++it) {
      const Vector Ap = op.apply(p);
      const double alpha = rz / p.dot(Ap);
      u += alpha * p;
      r -= alpha * Ap;
      z = r.cwiseQuotient(diag);
      const double rz_new = r.dot(z);
      p = z + (rz_new / rz) * p;
      rz = rz_new;
    }
    if (r.norm() > stop) throw NumericalFailure("solve_reduced_oracle: conjugate gradients did not converge");
  }
  auto [y, l] = op.recover(u);
  SolutionTriple s;
  s.y = std::move(y);
  s.u = std::move(u);
  s.lambda = std::move(l);
  const Vector x = s.stacked();
  s.residual = (sys.rhs - sys.K * x).norm();
  s.residual_bound = 1e-10 * (sys.rhs.norm() + norm_inf(sys.K) * x.norm());
  s.matrix_nonzeros = sys.K.nonZeros();
  return s;
}

}  // namespace supgoc
