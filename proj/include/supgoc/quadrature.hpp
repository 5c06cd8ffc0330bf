#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "supgoc/types.hpp"

namespace supgoc {

/// Quadrature on the reference simplex: [0,1] in 1D, the triangle
/// (0,0),(1,0),(0,1) in 2D. Weights sum to the reference measure.
template <int Dim>
struct QuadratureRule {
  std::vector<Point<Dim>> points;
  std::vector<double> weights;
  int exactness = 0;
  int subdivisions = 1;

  std::size_t size() const { return weights.size(); }
};

inline constexpr int kMaxQuadratureDegree = 41;

namespace detail {

/// n-point Gauss-Legendre nodes/weights on [0,1] (Newton on P_n).
inline void gauss_legendre_01(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // recompute derivative at the converged root
    double p0 = 1.0, p1 = 0.0;
    for (int k = 1; k <= n; ++k) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
    }
    dp = n * (z * p0 - p1) / (z * z - 1.0);
    x[n - 1 - i] = 0.5 * (z + 1.0);
    w[n - 1 - i] = 1.0 / ((1.0 - z * z) * dp * dp);
  }
}

}  // namespace detail

/// Rule exact for polynomials of total degree <= `exactness` on every one of
/// the sub-simplices obtained by splitting each reference edge into
/// `subdivisions` pieces (s subintervals in 1D, s^2 subtriangles in 2D).
template <int Dim>
QuadratureRule<Dim> quadrature_rule(int exactness, int subdivisions = 1) {
  SUPGOC_REQUIRE(exactness >= 0 && exactness <= kMaxQuadratureDegree,
                 "quadrature_rule: exactness degree " + std::to_string(exactness) + " unavailable");
  SUPGOC_REQUIRE(subdivisions >= 1, "quadrature_rule: subdivisions must be >= 1");
  QuadratureRule<Dim> rule;
  rule.exactness = exactness;
  rule.subdivisions = subdivisions;
  const double s = static_cast<double>(subdivisions);
  std::vector<double> gx, gw;

  if constexpr (Dim == 1) {
    const int n = (exactness + 2) / 2;
    detail::gauss_legendre_01(n, gx, gw);
    for (int k = 0; k < subdivisions; ++k)
      for (int q = 0; q < n; ++q) {
        rule.points.push_back({(k + gx[q]) / s});
        rule.weights.push_back(gw[q] / s);
      }
  } else {
    // collapsed (Duffy) product rule; the (1-b) Jacobian costs one degree in b
    const int n = (exactness + 3) / 2;
    detail::gauss_legendre_01(n, gx, gw);
    std::vector<Point<2>> base_pts;
    std::vector<double> base_w;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double a = gx[i], b = gx[j];
        base_pts.push_back({a * (1.0 - b), b});
        base_w.push_back(gw[i] * gw[j] * (1.0 - b));
      }
    auto emit = [&](const Point<2>& p0, const Point<2>& p1, const Point<2>& p2) {
      for (std::size_t q = 0; q < base_pts.size(); ++q) {
        const auto& xi = base_pts[q];
        rule.points.push_back({p0[0] + (p1[0] - p0[0]) * xi[0] + (p2[0] - p0[0]) * xi[1],
                               p0[1] + (p1[1] - p0[1]) * xi[0] + (p2[1] - p0[1]) * xi[1]});
        rule.weights.push_back(base_w[q] / (s * s));
      }
    };
    for (int j = 0; j < subdivisions; ++j)
      for (int i = 0; i + j < subdivisions; ++i) {
        emit({i / s, j / s}, {(i + 1) / s, j / s}, {i / s, (j + 1) / s});
        if (i + j + 1 < subdivisions)
          emit({(i + 1) / s, j / s}, {(i + 1) / s, (j + 1) / s}, {i / s, (j + 1) / s});
      }
  }
  return rule;
}

}  // namespace supgoc
