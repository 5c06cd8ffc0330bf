#pragma once

#include <cmath>
#include <string>

#include "supgoc/types.hpp"

namespace supgoc {

enum class TauPolicy {
  /// h^2/(4 eps) for Pe <= 1; h/2 (1D) or h/(2|c|) (2D) otherwise.
  PaperExample,
  /// tau1 h^2/eps for Pe <= 1, tau2 h otherwise.
  General,
  /// h/(2|c|) (coth Pe - 1/Pe); 1D only.
  Coth,
  Zero,
};

enum class EquationRole { State, Adjoint };

struct StabilizationConfig {
  TauPolicy policy = TauPolicy::PaperExample;
  double tau1 = 0.25;
  double tau2 = 0.5;
  EquationRole role = EquationRole::State;
  /// Use h/k instead of h for degree-k elements.
  bool rescale_by_degree = true;
};

inline double peclet(double epsilon, double c_sup, double h_e) {
  SUPGOC_REQUIRE(epsilon > 0.0, "peclet: epsilon must be positive");
  SUPGOC_REQUIRE(h_e > 0.0, "peclet: h_e must be positive");
  return c_sup * h_e / (2.0 * epsilon);
}

/// Element stabilization parameter. `dim` selects the 1D or 2D branch of the
/// default policy.
inline double tau(const StabilizationConfig& cfg, double epsilon, double c_sup, double h_e, int degree,
                  int dim) {
  SUPGOC_REQUIRE(epsilon > 0.0, "tau: epsilon must be positive");
  const double h = cfg.rescale_by_degree ? h_e / degree : h_e;
  const double pe = peclet(epsilon, c_sup, h);
  switch (cfg.policy) {
    case TauPolicy::Zero:
      return 0.0;
    case TauPolicy::PaperExample:
      if (pe <= 1.0) return h * h / (4.0 * epsilon);
      return dim == 1 ? h / 2.0 : h / (2.0 * c_sup);
    case TauPolicy::General:
      return pe <= 1.0 ? cfg.tau1 * h * h / epsilon : cfg.tau2 * h;
    case TauPolicy::Coth:
      SUPGOC_REQUIRE(dim == 1, "tau: coth policy is only defined in 1D");
      SUPGOC_REQUIRE(pe > 0.0, "tau: coth policy requires Pe > 0");
      return h / (2.0 * c_sup) * (1.0 / std::tanh(pe) - 1.0 / pe);
  }
  return 0.0;
}

inline std::string to_string(TauPolicy p) {
  switch (p) {
    case TauPolicy::PaperExample: return "paper";
    case TauPolicy::General: return "general";
    case TauPolicy::Coth: return "coth";
    case TauPolicy::Zero: return "zero";
  }
  return "?";
}

}  // namespace supgoc
