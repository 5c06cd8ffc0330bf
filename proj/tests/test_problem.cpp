#include <gtest/gtest.h>

#include <random>

#include "supgoc/problem.hpp"
#include "supgoc/stabilization.hpp"

using namespace supgoc;

namespace {

constexpr double kStep = 1e-5;

// Five-point central differences: fourth order, so the truncation error stays
// below 1e-6 relative even inside layers of width 2.5e-3.
template <int Dim>
Vec<Dim> fd_gradient(const ScalarFn<Dim>& f, Point<Dim> x) {
  Vec<Dim> g{};
  for (int d = 0; d < Dim; ++d) {
    auto at = [&](double s) {
      auto y = x;
      y[d] += s * kStep;
      return f(y);
    };
    g[d] = (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * kStep);
  }
  return g;
}

template <int Dim>
double fd_laplacian(const ScalarFn<Dim>& f, Point<Dim> x) {
  double l = 0.0;
  for (int d = 0; d < Dim; ++d) {
    auto xp = x, xm = x;
    xp[d] += kStep;
    xm[d] -= kStep;
    l += (f(xp) - 2.0 * f(x) + f(xm)) / (kStep * kStep);
  }
  return l;
}

template <int Dim>
std::vector<Point<Dim>> interior_points(const Box<Dim>& box, int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<Point<Dim>> pts(n);
  for (auto& x : pts)
    for (int d = 0; d < Dim; ++d) x[d] = box.lo[d] + (0.01 + 0.98 * U(rng)) * (box.hi[d] - box.lo[d]);
  return pts;
}

/// Relative to the field's scale so layer regions are judged on their own size.
double rel(double a, double b, double scale) { return std::abs(a - b) / std::max(1.0, scale); }

// Closed-form first derivatives are checked against central differences.
// Second derivatives are checked against differences of the closed-form
// gradient, which avoids the h^-2 roundoff of a second difference.
template <int Dim>
void check_derivatives(const ScalarField<Dim>& f, const Box<Dim>& box, const char* what) {
  for (const auto& x : interior_points<Dim>(box, 200, 11)) {
    const auto g = f.gradient(x);
    const auto gfd = fd_gradient<Dim>(f.value, x);
    double gscale = 0.0;
    for (int d = 0; d < Dim; ++d) gscale = std::max(gscale, std::abs(g[d]));
    for (int d = 0; d < Dim; ++d) EXPECT_LE(rel(g[d], gfd[d], gscale), 1e-6) << what << " gradient";
    double lap = 0.0;
    for (int d = 0; d < Dim; ++d) {
      ScalarFn<Dim> gd = [&f, d](const Point<Dim>& y) { return f.gradient(y)[d]; };
      lap += fd_gradient<Dim>(gd, x)[d];
    }
    EXPECT_LE(rel(f.laplacian(x), lap, std::abs(f.laplacian(x))), 1e-6) << what << " laplacian";
  }
}

template <int Dim>
void check_residuals(const ProblemData<Dim>& p) {
  const auto& ex = *p.exact;
  for (const auto& x : interior_points<Dim>(p.domain, 1000, 3)) {
    const auto c = p.velocity(x);
    const double state = -p.epsilon * ex.y.laplacian(x) + dot<Dim>(c, ex.y.gradient(x)) +
                         p.reaction(x) * ex.y.value(x) - p.source(x) - ex.u.value(x);
    const double adjoint = -p.epsilon * ex.lambda.laplacian(x) - dot<Dim>(c, ex.lambda.gradient(x)) +
                           (p.reaction(x) - p.div_velocity(x)) * ex.lambda.value(x) -
                           (p.target(x) - ex.y.value(x));
    const double gradient = p.omega * ex.u.value(x) - ex.lambda.value(x);
    const double scale = std::max({1.0, std::abs(p.source(x)), std::abs(p.target(x))});
    EXPECT_LE(std::abs(state) / scale, 1e-8);
    EXPECT_LE(std::abs(adjoint) / scale, 1e-8);
    EXPECT_LE(std::abs(gradient), 1e-12);
  }
}

ScalarField<1> parabola() {
  return {[](const Point<1>& x) { return x[0] * (1.0 - x[0]); },
          [](const Point<1>& x) { return Vec<1>{1.0 - 2.0 * x[0]}; }, [](const Point<1>&) { return -2.0; }};
}

}  // namespace

TEST(Manufacture, ZeroSolutionGivesZeroData) {
  ScalarField<2> zero{[](const Point<2>&) { return 0.0; }, [](const Point<2>&) { return Vec<2>{}; },
                      [](const Point<2>&) { return 0.0; }};
  const auto p = manufacture<2>(
      "zero", zero, zero, 0.1, 2.0, [](const Point<2>&) { return Vec<2>{1.0, 0.5}; },
      [](const Point<2>&) { return 0.0; }, [](const Point<2>&) { return 0.0; }, Box<2>{{0, 0}, {1, 1}},
      all_dirichlet<2>());
  for (const auto& x : interior_points<2>(p.domain, 50, 1)) {
    EXPECT_EQ(p.source(x), 0.0);
    EXPECT_EQ(p.target(x), 0.0);
    EXPECT_EQ(p.exact->u.value(x), 0.0);
  }
}

TEST(Manufacture, HandDerivedParabola) {
  const auto p = manufacture<1>(
      "parabola", parabola(), parabola(), 1.0, 1.0, [](const Point<1>&) { return Vec<1>{1.0}; },
      [](const Point<1>&) { return 0.0; }, [](const Point<1>&) { return 0.0; }, Box<1>{{0.0}, {1.0}},
      all_dirichlet<1>());
  for (double t : {0.1, 0.37, 0.5, 0.81}) {
    const Point<1> x{t};
    EXPECT_NEAR(p.source(x), 2.0 + (1.0 - 2.0 * t) - t * (1.0 - t), 1e-14);
    EXPECT_NEAR(p.target(x), t * (1.0 - t) + 2.0 - (1.0 - 2.0 * t), 1e-14);
    // independent check through central differences of y and lambda
    const ScalarFn<1> y = parabola().value;
    const double f_fd = -fd_laplacian<1>(y, x) + fd_gradient<1>(y, x)[0] - y(x);
    const double yhat_fd = y(x) - fd_laplacian<1>(y, x) - fd_gradient<1>(y, x)[0];
    EXPECT_NEAR(p.source(x), f_fd, 1e-5);
    EXPECT_NEAR(p.target(x), yhat_fd, 1e-5);
  }
}

TEST(Manufacture, RejectsAdjointViolatingBoundaryConditions) {
  ScalarField<1> one{[](const Point<1>&) { return 1.0; }, [](const Point<1>&) { return Vec<1>{0.0}; },
                     [](const Point<1>&) { return 0.0; }};
  EXPECT_THROW(manufacture<1>(
                   "bad", parabola(), one, 1.0, 1.0, [](const Point<1>&) { return Vec<1>{1.0}; },
                   [](const Point<1>&) { return 0.0; }, [](const Point<1>&) { return 0.0; },
                   Box<1>{{0.0}, {1.0}}, all_dirichlet<1>()),
               InvalidArgument);
}

TEST(Example1, BoundaryValues) {
  const auto p = example1();
  const auto& ex = *p.exact;
  EXPECT_NEAR(ex.y.value({0.0}), 0.0, 1e-15);
  EXPECT_NEAR(ex.y.value({1.0}), 0.0, 1e-15);
  EXPECT_NEAR(ex.lambda.value({1.0}), 0.0, 1e-15);
  EXPECT_NEAR(ex.lambda.value({0.0}), 0.0, 1e-15);
}

TEST(Example1, ControlEqualsAdjoint) {
  const auto p = example1();
  for (double t : {0.0, 0.2, 0.999, 1.0}) EXPECT_EQ(p.exact->u.value({t}), p.exact->lambda.value({t}));
}

TEST(Example1, PecletUnityAtFiveThousandths) {
  const auto p = example1();
  EXPECT_NEAR(peclet(p.epsilon, 1.0, 5e-3), 1.0, 1e-14);
}

TEST(Example1, SmallEpsilonStaysFinite) {
  const auto p = example1(1e-8);
  for (double t : {0.0, 0.5, 1.0 - 1e-9, 1.0}) {
    EXPECT_TRUE(std::isfinite(p.exact->y.value({t})));
    EXPECT_TRUE(std::isfinite(p.exact->y.laplacian({t})));
    EXPECT_TRUE(std::isfinite(p.source({t})));
  }
}

TEST(Example2, DivergenceFree) {
  const auto p = example2();
  EXPECT_EQ(p.div_velocity({0.3, 0.7}), 0.0);
  // div c from central differences of c
  const Point<2> x{0.3, 0.7};
  const double h = 1e-6;
  const double div = (p.velocity({x[0] + h, x[1]})[0] - p.velocity({x[0] - h, x[1]})[0]) / (2 * h) +
                     (p.velocity({x[0], x[1] + h})[1] - p.velocity({x[0], x[1] - h})[1]) / (2 * h);
  EXPECT_NEAR(div, 0.0, 1e-8);
}

TEST(Example2, AdjointVanishesOnBottomEdge) {
  const auto p = example2();
  for (double t = -1.0; t <= 1.0; t += 0.05) EXPECT_EQ(p.exact->lambda.value({t, 0.0}), 0.0);
}

TEST(Example2, OutflowOnNeumannBoundary) {
  const auto p = example2();
  int checked = 0;
  for (const auto& s : boundary_samples<2>(p.domain, p.tagger, 100)) {
    if (s.tag != BoundaryTag::Neumann) continue;
    EXPECT_GE(dot<2>(p.velocity(s.x), s.normal), 0.0);
    EXPECT_NEAR(dot<2>(p.velocity(s.x), s.normal), 2.0 * s.x[0], 1e-15);
    ++checked;
  }
  EXPECT_EQ(checked, 50);
}

TEST(Example2, RobinAdjointConditionHolds) {
  const auto p = example2();
  for (const auto& s : boundary_samples<2>(p.domain, p.tagger, 100)) {
    if (s.tag != BoundaryTag::Neumann) continue;
    const double robin = p.epsilon * dot<2>(p.exact->lambda.gradient(s.x), s.normal) +
                         dot<2>(p.velocity(s.x), s.normal) * p.exact->lambda.value(s.x);
    EXPECT_NEAR(robin, 0.0, 1e-14);
  }
}

TEST(Example3, StateVanishesOnBoundary) {
  const auto p = example3();
  for (double t = 0.0; t <= 1.0; t += 0.1) {
    EXPECT_NEAR(p.exact->y.value({t, 0.0}), 0.0, 1e-14);
    EXPECT_NEAR(p.exact->y.value({t, 1.0}), 0.0, 1e-14);
    EXPECT_NEAR(p.exact->y.value({0.0, t}), 0.0, 1e-14);
    EXPECT_NEAR(p.exact->y.value({1.0, t}), 0.0, 1e-14);
  }
}

TEST(Example3, AdjointFactorVanishesAtOne) {
  const auto p = example3();
  EXPECT_NEAR(p.exact->lambda.value({1.0, 0.4}), 0.0, 1e-14);
  EXPECT_NEAR(p.exact->lambda.value({0.4, 1.0}), 0.0, 1e-14);
  for (double t : {0.1, 0.5, 0.9}) EXPECT_EQ(p.exact->u.value({t, t}), p.exact->lambda.value({t, t}));
}

TEST(Examples, ClosedFormDerivativesMatchDifferences) {
  // the step must resolve the layer width for the comparison to be meaningful
  const auto p1 = example1(0.0025);
  check_derivatives<1>(p1.exact->y, p1.domain, "example1 y");
  check_derivatives<1>(p1.exact->lambda, p1.domain, "example1 lambda");
  for (auto profile : {Example2Profile::SteepLayer, Example2Profile::Literal}) {
    const auto p2 = example2(1e-5, 1e-2, profile);
    check_derivatives<2>(p2.exact->y, p2.domain, "example2 y");
    check_derivatives<2>(p2.exact->lambda, p2.domain, "example2 lambda");
  }
  const auto p3 = example3();
  check_derivatives<2>(p3.exact->y, p3.domain, "example3 y");
  check_derivatives<2>(p3.exact->lambda, p3.domain, "example3 lambda");
}

TEST(Examples, StrongFormResiduals) {
  check_residuals<1>(example1());
  check_residuals<2>(example2());
  check_residuals<2>(example2(1e-5, 1e-2, Example2Profile::Literal));
  check_residuals<2>(example3());
}

TEST(Examples, ProblemInvariants) {
  EXPECT_NO_THROW(validate_problem<1>(example1()));
  EXPECT_NO_THROW(validate_problem<2>(example2()));
  EXPECT_NO_THROW(validate_problem<2>(example3()));
  for (const auto& s : boundary_samples<2>(example3().domain, example3().tagger))
    EXPECT_NEAR(example3().exact->lambda.value(s.x), 0.0, 1e-10);
}

TEST(Examples, RZeroIsZero) {
  EXPECT_EQ(example1().r0, 0.0);
  EXPECT_EQ(example2().r0, 0.0);
  EXPECT_EQ(example3().r0, 0.0);
}
