#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace supgoc {

using Index = std::int64_t;

template <int Dim>
using Point = std::array<double, Dim>;

template <int Dim>
using Vec = std::array<double, Dim>;

enum class BoundaryTag { Dirichlet, Neumann };

/// Input that violates a documented precondition (bad sizes, degrees, configs).
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Failure inside a numerical kernel (singular factorization, residual blow-up).
class NumericalFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

#define SUPGOC_REQUIRE(cond, msg)                                              \
  do {                                                                         \
    if (!(cond)) throw ::supgoc::InvalidArgument(std::string(msg));            \
  } while (0)

template <int Dim>
inline double dot(const Vec<Dim>& a, const Vec<Dim>& b) {
  double s = 0.0;
  for (int d = 0; d < Dim; ++d) s += a[d] * b[d];
  return s;
}

template <int Dim>
inline double norm(const Vec<Dim>& a) {
  return std::sqrt(dot<Dim>(a, a));
}

}  // namespace supgoc
