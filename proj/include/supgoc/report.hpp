#pragma once

// Table and profile emitters for study results.

#include <cstdio>
#include <ostream>
#include <string>

#include "supgoc/analysis.hpp"

namespace supgoc {

inline std::string format_error(double e) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", e);
  return buf;
}

inline std::string format_order(double o) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", o);
  return buf;
}

namespace detail {

/// orders[c][i] relates rows i and i+1; row 0 has none.
inline std::vector<std::vector<double>> report_orders(const ErrorReport& r) {
  std::vector<std::vector<double>> out;
  for (auto c : kErrorColumns) out.push_back(r.rows.size() > 1 ? r.orders(c) : std::vector<double>{});
  return out;
}

}  // namespace detail

inline const char* kCsvHeader =
    "h,l2_y,order_l2_y,sd_y,order_sd_y,l2_u,order_l2_u,l2_lam,order_l2_lam,sd_lam,order_sd_lam";

inline void write_csv(std::ostream& os, const ErrorReport& r) {
  const auto orders = detail::report_orders(r);
  os << kCsvHeader << "\n";
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    os << format_error(r.rows[i].h);
    for (std::size_t c = 0; c < kErrorColumns.size(); ++c) {
      os << ',' << format_error(r.rows[i].get(kErrorColumns[c])) << ',';
      if (i > 0) os << format_order(orders[c][i - 1]);
    }
    os << "\n";
  }
}

inline void write_markdown(std::ostream& os, const ErrorReport& r) {
  const auto orders = detail::report_orders(r);
  os << "### " << r.problem << ", " << to_string(r.approach) << ", k = " << r.degrees.state
     << ", m = " << r.degrees.control << ", l = " << r.degrees.adjoint << ", tau = " << to_string(r.policy) << "\n\n";
  os << "| h | L2(y) | order | SD(y) | order | L2(u) | order | L2(lambda) | order | SD(lambda) | order |\n";
  os << "|---|---|---|---|---|---|---|---|---|---|---|\n";
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    os << "| " << format_error(r.rows[i].h);
    for (std::size_t c = 0; c < kErrorColumns.size(); ++c) {
      os << " | " << format_error(r.rows[i].get(kErrorColumns[c])) << " | ";
      if (i > 0) os << format_order(orders[c][i - 1]);
    }
    os << " |\n";
  }
  os << "\nerror quadrature: degree " << r.error_quadrature_degree << ", subdivisions";
  for (const auto& row : r.rows) os << ' ' << row.quadrature_subdivisions;
  os << (r.quadrature_stable() ? " (stable)" : " (UNSTABLE under doubled subdivision)") << "\n\n";
}

/// Nodal values at the state-space Lagrange nodes, sorted by (x2, x1).
/// Control and adjoint are read off directly when they share the state
/// space's degree, and evaluated at the node otherwise.
template <int Dim>
void write_profile(std::ostream& os, const KktSystem<Dim>& sys, const SolutionTriple& s) {
  const auto& Y = sys.state;
  std::vector<Index> order(static_cast<std::size_t>(Y.num_dofs()));
  for (Index i = 0; i < Y.num_dofs(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&Y](Index a, Index b) {
    const auto& pa = Y.dof_point(a);
    const auto& pb = Y.dof_point(b);
    for (int d = Dim - 1; d >= 0; --d)
      if (pa[d] != pb[d]) return pa[d] < pb[d];
    return a < b;
  });
  os << (Dim == 1 ? "x1" : "x1,x2") << ",y_h,u_h,lambda_h\n";
  const bool same_u = sys.control.degree() == Y.degree();
  const bool same_l = sys.adjoint.degree() == Y.degree();
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.10e", v);
    os << buf;
  };
  for (Index i : order) {
    const auto& x = Y.dof_point(i);
    for (int d = 0; d < Dim; ++d) {
      put(x[d]);
      os << ',';
    }
    put(s.y[i]);
    os << ',';
    put(same_u ? s.u[i] : evaluate<Dim>(sys.control, s.u, x));
    os << ',';
    put(same_l ? s.lambda[i] : evaluate<Dim>(sys.adjoint, s.lambda, x));
    os << "\n";
  }
}

/// One row per index up to the largest block; shorter blocks leave blanks.
inline void write_solution(std::ostream& os, const SolutionTriple& s) {
  os << "index,y,u,lambda\n";
  const Index n = std::max({s.y.size(), s.u.size(), s.lambda.size()});
  char buf[64];
  auto put = [&](const Vector& v, Index i) {
    if (i < v.size()) {
      std::snprintf(buf, sizeof buf, "%.17g", v[i]);
      os << buf;
    }
  };
  for (Index i = 0; i < n; ++i) {
    os << i << ',';
    put(s.y, i);
    os << ',';
    put(s.u, i);
    os << ',';
    put(s.lambda, i);
    os << "\n";
  }
}

}  // namespace supgoc
