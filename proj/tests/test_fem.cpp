#include <gtest/gtest.h>

#include <random>

#include "supgoc/fe_space.hpp"
#include "supgoc/problem.hpp"

using namespace supgoc;

namespace {

std::shared_ptr<const Mesh1D> interval(Index n) { return std::make_shared<const Mesh1D>(build_interval_mesh(0.0, 1.0, n)); }

std::shared_ptr<const TriMesh> square(Index n) {
  return std::make_shared<const TriMesh>(build_structured_tri_mesh({{0.0, 0.0}, {1.0, 1.0}}, n, n));
}

}  // namespace

TEST(MakeSpace, Example3LinearState) {
  const auto V = make_space<2>(square(10), 1, SpaceRole::State);
  EXPECT_EQ(V.num_dofs(), 121);
  EXPECT_EQ(V.dirichlet_dofs().size(), 40u);
}

TEST(MakeSpace, QuadraticInterval) {
  const auto V = make_space<1>(interval(10), 2, SpaceRole::State);
  EXPECT_EQ(V.num_dofs(), 21);
  EXPECT_EQ(V.dirichlet_dofs().size(), 2u);
}

TEST(MakeSpace, QuadraticTriangles) {
  const auto V = make_space<2>(square(4), 2, SpaceRole::State);
  EXPECT_EQ(V.num_dofs(), 81);
  EXPECT_EQ(V.dirichlet_dofs().size(), 32u);
}

TEST(MakeSpace, ControlHasNoDirichletDofs) {
  EXPECT_TRUE(make_space<2>(square(4), 1, SpaceRole::Control).dirichlet_dofs().empty());
  EXPECT_TRUE(make_space<1>(interval(4), 2, SpaceRole::Control).dirichlet_dofs().empty());
}

TEST(MakeSpace, RejectsUnsupportedDegree) {
  EXPECT_THROW(make_space<1>(interval(4), 3, SpaceRole::State), InvalidArgument);
  EXPECT_THROW(make_space<2>(square(2), 0, SpaceRole::State), InvalidArgument);
}

TEST(Quadrature, GaussOnUnitInterval) {
  const auto q = quadrature_rule<1>(9);
  EXPECT_EQ(q.size(), 5u);
  double s = 0.0;
  for (double w : q.weights) s += w;
  EXPECT_NEAR(s, 1.0, 1e-15);
}

TEST(Quadrature, TriangleWeightsSumToHalf) {
  const auto q = quadrature_rule<2>(8);
  double s = 0.0;
  for (double w : q.weights) s += w;
  EXPECT_NEAR(s, 0.5, 1e-14);
}

TEST(Quadrature, SubdividedInterval) {
  const auto q = quadrature_rule<1>(9, 8);
  EXPECT_EQ(q.size(), 40u);
  double s = 0.0;
  for (double w : q.weights) s += w;
  EXPECT_NEAR(s, 1.0, 1e-14);
}

TEST(Quadrature, RejectsBadArguments) {
  EXPECT_THROW(quadrature_rule<1>(kMaxQuadratureDegree + 1), InvalidArgument);
  EXPECT_THROW(quadrature_rule<2>(4, 0), InvalidArgument);
}

// int_0^1 x^p = 1/(p+1); int over the reference triangle of x^a y^b = a! b! / (a+b+2)!
TEST(Quadrature, MonomialExactness1D) {
  for (int deg = 1; deg <= 15; ++deg)
    for (int sub : {1, 3}) {
      const auto q = quadrature_rule<1>(deg, sub);
      for (int p = 0; p <= deg; ++p) {
        double s = 0.0;
        for (std::size_t i = 0; i < q.size(); ++i) s += q.weights[i] * std::pow(q.points[i][0], p);
        EXPECT_NEAR(s, 1.0 / (p + 1), 1e-13 / (p + 1)) << "deg " << deg << " p " << p;
      }
    }
}

TEST(Quadrature, MonomialExactness2D) {
  auto fact = [](int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
  };
  for (int deg : {1, 2, 3, 4, 5, 6, 8}) {
    for (int sub : {1, 2}) {
      const auto q = quadrature_rule<2>(deg, sub);
      for (int a = 0; a <= deg; ++a)
        for (int b = 0; a + b <= deg; ++b) {
          double s = 0.0;
          for (std::size_t i = 0; i < q.size(); ++i)
            s += q.weights[i] * std::pow(q.points[i][0], a) * std::pow(q.points[i][1], b);
          const double exact = fact(a) * fact(b) / fact(a + b + 2);
          EXPECT_NEAR(s, exact, 1e-13 * exact) << "deg " << deg << " sub " << sub << " a " << a << " b " << b;
        }
    }
  }
}

TEST(MappedBasis, LinearInterval) {
  const auto V = make_space<1>(interval(1), 1, SpaceRole::State);
  const auto mb = eval_mapped_basis(V, 0, quadrature_rule<1>(3));
  for (const auto& g : mb.gradients) {
    EXPECT_NEAR(std::abs(g[0][0]), 1.0, 1e-14);
    EXPECT_NEAR(g[0][0] + g[1][0], 0.0, 1e-14);
  }
  for (double l : mb.laplacians) EXPECT_EQ(l, 0.0);
}

TEST(MappedBasis, QuadraticMidpointSecondDerivative) {
  const auto V = make_space<1>(interval(1), 2, SpaceRole::State);
  const auto mb = eval_mapped_basis(V, 0, quadrature_rule<1>(3));
  bool found = false;
  for (int i = 0; i < V.dofs_per_cell(); ++i)
    if (std::abs(V.dof_point(V.dof(0, i))[0] - 0.5) < 1e-15) {
      EXPECT_NEAR(mb.laplacians[i], -8.0, 1e-12);
      found = true;
    }
  EXPECT_TRUE(found);
}

TEST(MappedBasis, ReferenceTriangleGradient) {
  const ReferenceElement<2> ref(1);
  const auto g = ref.gradient(0, {0.3, 0.3});
  EXPECT_EQ(ref.nodes()[0], (Point<2>{0.0, 0.0}));
  EXPECT_NEAR(g[0], -1.0, 1e-15);
  EXPECT_NEAR(g[1], -1.0, 1e-15);
}

TEST(MappedBasis, PartitionOfUnity) {
  const auto V = make_space<2>(square(3), 2, SpaceRole::State);
  const auto mb = eval_mapped_basis(V, 5, quadrature_rule<2>(6));
  for (std::size_t q = 0; q < mb.points.size(); ++q) {
    double s = 0.0;
    Vec<2> g{};
    for (int i = 0; i < V.dofs_per_cell(); ++i) {
      s += mb.values[q][i];
      g[0] += mb.gradients[q][i][0];
      g[1] += mb.gradients[q][i][1];
    }
    EXPECT_NEAR(s, 1.0, 1e-13);
    EXPECT_NEAR(g[0], 0.0, 1e-11);
    EXPECT_NEAR(g[1], 0.0, 1e-11);
  }
}

TEST(Interpolate, Constant) {
  const auto V = make_space<2>(square(3), 2, SpaceRole::State);
  const auto c = interpolate<2>(V, [](const Point<2>&) { return 1.0; });
  EXPECT_EQ(c, Eigen::VectorXd::Ones(V.num_dofs()));
}

TEST(Interpolate, IdentityOnLinearInterval) {
  const auto V = make_space<1>(interval(7), 1, SpaceRole::State);
  const auto c = interpolate<1>(V, [](const Point<1>& x) { return x[0]; });
  for (Index i = 0; i < V.num_dofs(); ++i) EXPECT_EQ(c[i], V.dof_point(i)[0]);
}

TEST(Interpolate, Example2DirichletData) {
  for (auto profile : {Example2Profile::SteepLayer, Example2Profile::Literal}) {
    const auto p = example2(1e-5, 1e-2, profile);
    auto mesh = std::make_shared<const TriMesh>(build_structured_tri_mesh(p.domain, 10, 5, p.tagger));
    const auto V = make_space<2>(mesh, 1, SpaceRole::State);
    const auto d = interpolate<2>(V, p.dirichlet);
    for (Index i : V.dirichlet_dofs()) EXPECT_DOUBLE_EQ(d[i], p.exact->y.value(V.dof_point(i)));
  }
}

TEST(Interpolate, LiteralExample2Profile) {
  const auto p = example2(1e-5, 1e-2, Example2Profile::Literal);
  const Point<2> x{0.3, 0.4};
  EXPECT_NEAR(p.exact->y.value(x), 1.0 + std::tanh(1.0 - (2.0 * 0.5 + 1.0)), 1e-15);
}

template <int Dim>
void check_polynomial_reproduction(std::shared_ptr<const SimplexMesh<Dim>> mesh, int k,
                                   const std::function<double(const Point<Dim>&)>& p) {
  const auto V = make_space<Dim>(mesh, k, SpaceRole::State);
  const auto c = interpolate<Dim>(V, p);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double worst = 0.0;
  for (int s = 0; s < 100; ++s) {
    Point<Dim> x{};
    for (int d = 0; d < Dim; ++d) x[d] = U(rng);
    worst = std::max(worst, std::abs(evaluate<Dim>(V, c, x) - p(x)));
  }
  EXPECT_LE(worst, 1e-12) << "degree " << k;
}

TEST(Interpolate, ReproducesPolynomials) {
  check_polynomial_reproduction<1>(interval(9), 1, [](const Point<1>& x) { return 3.0 - 2.0 * x[0]; });
  check_polynomial_reproduction<1>(interval(9), 2, [](const Point<1>& x) { return 1.0 + x[0] - 4.0 * x[0] * x[0]; });
  check_polynomial_reproduction<2>(square(6), 1, [](const Point<2>& x) { return 0.5 + 2.0 * x[0] - 3.0 * x[1]; });
  check_polynomial_reproduction<2>(square(6), 2, [](const Point<2>& x) {
    return 1.0 - x[0] + 2.0 * x[1] + 3.0 * x[0] * x[1] - x[0] * x[0] + 0.5 * x[1] * x[1];
  });
}

TEST(Evaluate, OutsideDomainThrows) {
  const auto V = make_space<2>(square(2), 1, SpaceRole::State);
  EXPECT_THROW(evaluate<2>(V, Eigen::VectorXd::Zero(V.num_dofs()), {1.5, 0.5}), InvalidArgument);
}
