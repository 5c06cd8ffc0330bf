#include <gtest/gtest.h>

#include <cstring>
#include <random>
#include <sstream>

#include "supgoc/analysis.hpp"
#include "supgoc/report.hpp"

using namespace supgoc;

namespace {

template <int Dim>
KktSystem<Dim> dto(const ProblemData<Dim>& p, double h, int k) {
  return build_system(p, make_mesh(p, h), Approach::DTO, {k, k, k}, {});
}

double inf(const Vector& v) { return v.lpNorm<Eigen::Infinity>(); }

}  // namespace

TEST(SolveSparse, Identity) {
  SparseMatrix I(5, 5);
  I.setIdentity();
  Vector b(5);
  b << 1, -2, 3, 0.5, 7;
  EXPECT_EQ(solve_sparse(I, b), b);
}

TEST(SolveSparse, SingularThrows) {
  // identity with one constraint row removed
  SparseMatrix K(4, 4);
  K.insert(0, 0) = 1.0;
  K.insert(1, 1) = 1.0;
  K.insert(3, 3) = 1.0;
  EXPECT_THROW(solve_sparse(K, Vector::Ones(4)), NumericalFailure);
}

TEST(SolveSparse, DimensionMismatch) {
  SparseMatrix I(3, 3);
  I.setIdentity();
  EXPECT_THROW(solve_sparse(I, Vector::Ones(4)), InvalidArgument);
}

TEST(SolveDirect, RequiresConstraints) {
  const auto p = example1();
  const auto sys = build_dto(p, make_mesh(p, 0.25), {1, 1, 1}, StabilizationConfig{});
  EXPECT_THROW(solve_direct(sys), InvalidArgument);
}

TEST(Oracle, SmallExample1) {
  const auto sys = dto(example1(), 0.25, 1);
  EXPECT_LE(inf(solve_direct(sys).stacked() - solve_reduced_oracle(sys).stacked()), 1e-8);
}

TEST(Oracle, Example1Linear) {
  const auto sys = dto(example1(), 0.1, 1);
  EXPECT_LE(inf(solve_direct(sys).stacked() - solve_reduced_oracle(sys).stacked()), 1e-8);
}

TEST(Oracle, RejectsOtd) {
  const auto p = example1();
  const auto sys = build_system(p, make_mesh(p, 0.1), Approach::OTD, {1, 1, 1}, {});
  EXPECT_THROW(solve_reduced_oracle(sys), InvalidArgument);
}

TEST(Oracle, LargeControlCost) {
  const auto p = example1(0.0025, 1e6);
  const auto sys = dto(p, 0.1, 1);
  const auto d = solve_direct(sys);
  const auto o = solve_reduced_oracle(sys);
  EXPECT_LE(inf(d.stacked() - o.stacked()), 1e-8);
  EXPECT_LE(inf(d.u), 1e-5);
  // uncontrolled state: A y = F
  const auto blocks = extract_blocks(sys);
  const Vector y0 = solve_sparse(blocks.A, blocks.r_state);
  EXPECT_LE(inf(d.y - y0), 1e-5 * std::max(1.0, inf(y0)));
}

TEST(Oracle, ZeroDataGivesZeroSolution) {
  ScalarField<2> zero{[](const Point<2>&) { return 0.0; }, [](const Point<2>&) { return Vec<2>{}; },
                      [](const Point<2>&) { return 0.0; }};
  const auto p = manufacture<2>(
      "zero", zero, zero, 1e-2, 1.0, [](const Point<2>&) { return Vec<2>{1.0, 0.0}; },
      [](const Point<2>&) { return 0.0; }, [](const Point<2>&) { return 0.0; }, Box<2>{{0.0, 0.0}, {1.0, 1.0}},
      all_dirichlet<2>());
  const auto sys = dto(p, 0.25, 2);
  EXPECT_EQ(inf(solve_direct(sys).stacked()), 0.0);
  EXPECT_EQ(inf(solve_reduced_oracle(sys).stacked()), 0.0);
}

TEST(Oracle, AllExamplesCoarseLevels) {
  for (int k : {1, 2}) {
    for (double h : {0.1, 0.05}) {
      const auto s = dto(example1(), h, k);
      EXPECT_LE(inf(solve_direct(s).stacked() - solve_reduced_oracle(s).stacked()), 1e-7) << "example1 k=" << k;
    }
    for (double h : {0.2, 0.1}) {
      const auto s2 = dto(example2(), h, k);
      EXPECT_LE(inf(solve_direct(s2).stacked() - solve_reduced_oracle(s2).stacked()), 1e-7) << "example2 k=" << k;
      const auto s3 = dto(example3(), h, k);
      EXPECT_LE(inf(solve_direct(s3).stacked() - solve_reduced_oracle(s3).stacked()), 1e-7) << "example3 k=" << k;
    }
  }
}

TEST(Oracle, ConjugateGradientPath) {
  // above the dense limit the oracle switches to matrix-free conjugate gradients
  const auto sys = dto(example3(), 0.0125, 1);
  ASSERT_GT(sys.nu(), kDenseReducedLimit);
  EXPECT_LE(inf(solve_direct(sys).stacked() - solve_reduced_oracle(sys).stacked()), 1e-7);
}

TEST(ReducedOperator, Positivity) {
  for (const auto& sys : {dto(example2(), 0.2, 1), dto(example3(), 0.2, 2)}) {
    const ReducedOperator op(extract_blocks(sys));
    const auto& W = op.blocks().W;  // omega * M_uu
    std::mt19937 rng(5);
    std::normal_distribution<double> N(0.0, 1.0);
    for (int s = 0; s < 50; ++s) {
      Vector w(op.size());
      for (Index i = 0; i < w.size(); ++i) w[i] = N(rng);
      EXPECT_GE(w.dot(op.apply(w)), w.dot(W * w) - 1e-10);
    }
  }
}

TEST(SolveDirect, ResidualContract) {
  auto check = [](const auto& sys) {
    const auto s = solve_direct(sys);
    EXPECT_LE(s.residual, s.residual_bound);
    EXPECT_LE((sys.rhs - sys.K * s.stacked()).norm(), 1e-10 * (sys.rhs.norm() + norm_inf(sys.K) * s.stacked().norm()));
  };
  check(dto(example1(), 0.1, 2));
  check(dto(example2(), 0.1, 1));
  check(dto(example3(), 0.1, 2));
}

TEST(SolveDirect, Deterministic) {
  const auto sys = dto(example3(), 0.1, 2);
  const auto a = solve_direct(sys).stacked();
  const auto b = solve_direct(sys).stacked();
  EXPECT_EQ(std::memcmp(a.data(), b.data(), sizeof(double) * a.size()), 0);
}

TEST(WriteSolution, Layout) {
  SolutionTriple s;
  s.y = Vector::LinSpaced(3, 0.0, 1.0);
  s.u = Vector::Constant(2, 0.25);
  s.lambda = Vector::Constant(3, -1.0);
  std::ostringstream os;
  write_solution(os, s);
  EXPECT_EQ(os.str(), "index,y,u,lambda\n0,0,0.25,-1\n1,0.5,0.25,-1\n2,1,,-1\n");
}
