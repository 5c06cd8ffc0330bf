#pragma once

// Linear-quadratic control problems for
//   -eps*Lap(y) + c.grad(y) + r*y = f + u   in Omega,
//   y = d on Gamma_d,  eps*dy/dn = g on Gamma_n,
// with objective 1/2||y - yhat||^2 + omega/2||u||^2, and the manufactured
// examples used in the convergence studies.

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "supgoc/mesh.hpp"

namespace supgoc {

template <int Dim>
using ScalarFn = std::function<double(const Point<Dim>&)>;
template <int Dim>
using VectorFn = std::function<Vec<Dim>(const Point<Dim>&)>;

/// A scalar function together with its gradient and Laplacian.
template <int Dim>
struct ScalarField {
  ScalarFn<Dim> value;
  VectorFn<Dim> gradient;
  ScalarFn<Dim> laplacian;
};

template <int Dim>
struct ExactTriple {
  ScalarField<Dim> y;
  ScalarField<Dim> u;
  ScalarField<Dim> lambda;
};

template <int Dim>
struct ProblemData {
  std::string name;
  double epsilon = 1.0;
  double omega = 1.0;
  /// Lower bound r0 <= r - div(c)/2 used in the SD norm.
  double r0 = 0.0;
  VectorFn<Dim> velocity;
  ScalarFn<Dim> div_velocity;
  ScalarFn<Dim> reaction;
  ScalarFn<Dim> source;
  ScalarFn<Dim> target;
  ScalarFn<Dim> dirichlet;
  std::function<double(const Point<Dim>&, const Vec<Dim>&)> neumann;
  Box<Dim> domain;
  BoundaryTagger<Dim> tagger;
  std::optional<ExactTriple<Dim>> exact;
};

template <int Dim>
struct BoundarySample {
  Point<Dim> x;
  Vec<Dim> normal;
  BoundaryTag tag;
};

/// Points on the interior of each side of the box (endpoints in 1D), tagged
/// with the problem's boundary rule.
template <int Dim>
std::vector<BoundarySample<Dim>> boundary_samples(const Box<Dim>& box, const BoundaryTagger<Dim>& tagger,
                                                  int per_side = 100) {
  std::vector<BoundarySample<Dim>> out;
  auto push = [&](const Point<Dim>& x, const Vec<Dim>& n) {
    auto tag = tagger(x, n);
    SUPGOC_REQUIRE(tag.has_value(), "boundary_samples: tagger left a boundary point untagged");
    out.push_back({x, n, *tag});
  };
  if constexpr (Dim == 1) {
    push(box.lo, {-1.0});
    push(box.hi, {1.0});
  } else {
    for (int i = 0; i < per_side; ++i) {
      const double t = (i + 0.5) / per_side;
      const double x = box.lo[0] + t * (box.hi[0] - box.lo[0]);
      const double y = box.lo[1] + t * (box.hi[1] - box.lo[1]);
      push({x, box.lo[1]}, {0.0, -1.0});
      push({box.hi[0], y}, {1.0, 0.0});
      push({x, box.hi[1]}, {0.0, 1.0});
      push({box.lo[0], y}, {-1.0, 0.0});
    }
  }
  return out;
}

/// Checks c.n >= 0 on Gamma_n and r - div(c)/2 >= r0 at sample points.
template <int Dim>
void validate_problem(const ProblemData<Dim>& p, int per_side = 100, double tol = 1e-10) {
  SUPGOC_REQUIRE(p.epsilon > 0.0, "problem: epsilon must be positive");
  SUPGOC_REQUIRE(p.omega > 0.0, "problem: omega must be positive");
  for (const auto& s : boundary_samples<Dim>(p.domain, p.tagger, per_side))
    if (s.tag == BoundaryTag::Neumann)
      SUPGOC_REQUIRE(dot<Dim>(p.velocity(s.x), s.normal) >= -tol,
                     "problem: inflow (c.n < 0) on the Neumann boundary");
  const int m = Dim == 1 ? per_side * per_side : per_side;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < (Dim == 1 ? 1 : m); ++j) {
      Point<Dim> x{};
      x[0] = p.domain.lo[0] + (i + 0.5) / m * (p.domain.hi[0] - p.domain.lo[0]);
      if constexpr (Dim == 2) x[1] = p.domain.lo[1] + (j + 0.5) / m * (p.domain.hi[1] - p.domain.lo[1]);
      SUPGOC_REQUIRE(p.reaction(x) - 0.5 * p.div_velocity(x) >= p.r0 - tol,
                     "problem: r - div(c)/2 >= r0 violated");
    }
}

/// Derives f, yhat, d, g so that (y_ex, lambda_ex/omega, lambda_ex) solves the
/// optimality system. lambda_ex must satisfy the adjoint boundary conditions
/// (zero on Gamma_d, eps*dl/dn + c.n*l = 0 on Gamma_n); checked at samples.
template <int Dim>
ProblemData<Dim> manufacture(std::string name, const ScalarField<Dim>& y_ex, const ScalarField<Dim>& lam_ex,
                             double epsilon, double omega, VectorFn<Dim> c, ScalarFn<Dim> div_c,
                             ScalarFn<Dim> r, const Box<Dim>& domain, BoundaryTagger<Dim> tagger,
                             double tol = 1e-10) {
  SUPGOC_REQUIRE(epsilon > 0.0 && omega > 0.0, "manufacture: epsilon and omega must be positive");
  for (const auto& s : boundary_samples<Dim>(domain, tagger)) {
    if (s.tag == BoundaryTag::Dirichlet) {
      if (std::abs(lam_ex.value(s.x)) > tol)
        throw InvalidArgument("manufacture: adjoint does not vanish on the Dirichlet boundary");
    } else {
      const double robin = epsilon * dot<Dim>(lam_ex.gradient(s.x), s.normal) +
                           dot<Dim>(c(s.x), s.normal) * lam_ex.value(s.x);
      if (std::abs(robin) > tol)
        throw InvalidArgument("manufacture: adjoint violates the Robin condition on the Neumann boundary");
    }
  }

  ProblemData<Dim> p;
  p.name = std::move(name);
  p.epsilon = epsilon;
  p.omega = omega;
  p.velocity = c;
  p.div_velocity = div_c;
  p.reaction = r;
  p.domain = domain;
  p.tagger = std::move(tagger);

  ScalarField<Dim> u_ex{
      [lam = lam_ex.value, omega](const Point<Dim>& x) { return lam(x) / omega; },
      [g = lam_ex.gradient, omega](const Point<Dim>& x) {
        auto v = g(x);
        for (auto& a : v) a /= omega;
        return v;
      },
      [l = lam_ex.laplacian, omega](const Point<Dim>& x) { return l(x) / omega; }};

  p.source = [y_ex, u = u_ex.value, epsilon, c, r](const Point<Dim>& x) {
    return -epsilon * y_ex.laplacian(x) + dot<Dim>(c(x), y_ex.gradient(x)) + r(x) * y_ex.value(x) - u(x);
  };
  p.target = [y_ex, lam_ex, epsilon, c, r, div_c](const Point<Dim>& x) {
    return y_ex.value(x) + (-epsilon * lam_ex.laplacian(x) - dot<Dim>(c(x), lam_ex.gradient(x)) +
                            (r(x) - div_c(x)) * lam_ex.value(x));
  };
  p.dirichlet = y_ex.value;
  p.neumann = [g = y_ex.gradient, epsilon](const Point<Dim>& x, const Vec<Dim>& n) {
    return epsilon * dot<Dim>(g(x), n);
  };
  p.exact = ExactTriple<Dim>{y_ex, u_ex, lam_ex};
  return p;
}

// ---------------------------------------------------------------------------
// Built-in examples

namespace detail {

/// z - (exp((z-1)/eps) - exp(-1/eps)) / (1 - exp(-1/eps)); layer at z = 1.
struct OutflowLayer {
  double eps;
  double denom() const { return -std::expm1(-1.0 / eps); }
  double value(double z) const { return z - (std::exp((z - 1.0) / eps) - std::exp(-1.0 / eps)) / denom(); }
  double d1(double z) const { return 1.0 - std::exp((z - 1.0) / eps) / (eps * denom()); }
  double d2(double z) const { return -std::exp((z - 1.0) / eps) / (eps * eps * denom()); }
};

/// 1 - z - (exp(-z/eps) - exp(-1/eps)) / (1 - exp(-1/eps)); layer at z = 0.
struct InflowLayer {
  double eps;
  double denom() const { return -std::expm1(-1.0 / eps); }
  double value(double z) const { return 1.0 - z - (std::exp(-z / eps) - std::exp(-1.0 / eps)) / denom(); }
  double d1(double z) const { return -1.0 + std::exp(-z / eps) / (eps * denom()); }
  double d2(double z) const { return -std::exp(-z / eps) / (eps * eps * denom()); }
};

template <class F>
ScalarField<1> field_1d(F f) {
  return {[f](const Point<1>& x) { return f.value(x[0]); },
          [f](const Point<1>& x) { return Vec<1>{f.d1(x[0])}; },
          [f](const Point<1>& x) { return f.d2(x[0]); }};
}

template <class F>
ScalarField<2> tensor_field(F f) {
  return {[f](const Point<2>& x) { return f.value(x[0]) * f.value(x[1]); },
          [f](const Point<2>& x) {
            return Vec<2>{f.d1(x[0]) * f.value(x[1]), f.value(x[0]) * f.d1(x[1])};
          },
          [f](const Point<2>& x) { return f.d2(x[0]) * f.value(x[1]) + f.value(x[0]) * f.d2(x[1]); }};
}

}  // namespace detail

/// (0,1), c = 1, r = 0, Dirichlet at both ends; boundary layers at x = 1
/// (state) and x = 0 (adjoint).
inline ProblemData<1> example1(double epsilon = 0.0025, double omega = 1.0) {
  const detail::OutflowLayer eta{epsilon};
  const detail::InflowLayer mu{epsilon};
  return manufacture<1>(
      "example1", detail::field_1d(eta), detail::field_1d(mu), epsilon, omega,
      [](const Point<1>&) { return Vec<1>{1.0}; }, [](const Point<1>&) { return 0.0; },
      [](const Point<1>&) { return 0.0; }, Box<1>{{0.0}, {1.0}}, all_dirichlet<1>());
}

/// Gamma_n = (0,1) x {0}; everything else Dirichlet.
inline BoundaryTagger<2> example2_tagger() {
  return [](const Point<2>& mid, const Vec<2>& n) -> std::optional<BoundaryTag> {
    if (n[1] < -0.5 && mid[0] > 0.0 && mid[0] < 1.0) return BoundaryTag::Neumann;
    return BoundaryTag::Dirichlet;
  };
}

enum class Example2Profile {
  /// y = 1 + tanh(10 (1 - 2 rho)): the radial Smith-Hutton inflow profile.
  /// Reproduces the reference error tables.
  SteepLayer,
  /// y = 1 + tanh(1 - (2 rho + 1)) = 1 - tanh(2 rho), read literally.
  Literal,
};

/// (-1,1)x(0,1) with a rotating velocity field and a radial state profile
/// y = 1 + tanh(a (b - 2 rho)), rho = |x|.
inline ProblemData<2> example2(double epsilon = 1e-5, double omega = 1e-2,
                               Example2Profile profile = Example2Profile::SteepLayer) {
  const double a = profile == Example2Profile::SteepLayer ? 10.0 : 1.0;
  const double b = profile == Example2Profile::SteepLayer ? 1.0 : 0.0;
  ScalarField<2> y{
      [a, b](const Point<2>& x) { return 1.0 + std::tanh(a * (b - 2.0 * std::hypot(x[0], x[1]))); },
      [a, b](const Point<2>& x) {
        const double rho = std::hypot(x[0], x[1]);
        if (rho == 0.0) return Vec<2>{0.0, 0.0};
        const double s = 1.0 / std::cosh(a * (b - 2.0 * rho));
        const double dy = -2.0 * a * s * s;
        return Vec<2>{dy * x[0] / rho, dy * x[1] / rho};
      },
      // y'' + y'/rho; the 1/rho term is integrable at the origin
      [a, b](const Point<2>& x) {
        const double rho = std::hypot(x[0], x[1]);
        if (rho == 0.0) return 0.0;
        const double t = std::tanh(a * (b - 2.0 * rho));
        const double s2 = 1.0 - t * t;
        const double dy = -2.0 * a * s2;
        const double d2y = -8.0 * a * a * s2 * t;
        return d2y + dy / rho;
      }};
  ScalarField<2> lam{
      [](const Point<2>& x) { return (x[0] * x[0] - 1.0) * x[1] * x[1] * (x[1] - 1.0); },
      [](const Point<2>& x) {
        return Vec<2>{2.0 * x[0] * (x[1] * x[1] * x[1] - x[1] * x[1]),
                      (x[0] * x[0] - 1.0) * (3.0 * x[1] * x[1] - 2.0 * x[1])};
      },
      [](const Point<2>& x) {
        return 2.0 * (x[1] * x[1] * x[1] - x[1] * x[1]) + (x[0] * x[0] - 1.0) * (6.0 * x[1] - 2.0);
      }};
  return manufacture<2>(
      "example2", y, lam, epsilon, omega,
      [](const Point<2>& x) {
        return Vec<2>{2.0 * x[1] * (1.0 - x[0] * x[0]), -2.0 * x[0] * (1.0 - x[1] * x[1])};
      },
      [](const Point<2>& x) { return -4.0 * x[0] * x[1] + 4.0 * x[0] * x[1]; },
      [](const Point<2>&) { return 0.0; }, Box<2>{{-1.0, 0.0}, {1.0, 1.0}}, example2_tagger());
}

/// Unit square, constant 45 degree velocity, tensor-product layers.
inline ProblemData<2> example3(double epsilon = 1e-2, double omega = 1.0) {
  const double s = std::sqrt(0.5);
  return manufacture<2>(
      "example3", detail::tensor_field(detail::OutflowLayer{epsilon}),
      detail::tensor_field(detail::InflowLayer{epsilon}), epsilon, omega,
      [s](const Point<2>&) { return Vec<2>{s, s}; }, [](const Point<2>&) { return 0.0; },
      [](const Point<2>&) { return 0.0; }, Box<2>{{0.0, 0.0}, {1.0, 1.0}}, all_dirichlet<2>());
}

}  // namespace supgoc
