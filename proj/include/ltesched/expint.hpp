#pragma once

// Exponential integral E1(x) = int_x^inf e^{-t}/t dt for x > 0.
// Power series below x = 1, modified Lentz continued fraction above.

#include <cmath>
#include <limits>
#include <numbers>

#include "error.hpp"

namespace ltesched {

namespace detail {

inline double expint_series(double x) {
  // E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
  double sum = 0.0;
  double term = 1.0;  // (-x)^k / k!
  for (int k = 1; k < 200; ++k) {
    term *= -x / static_cast<double>(k);
    const double inc = term / static_cast<double>(k);
    sum += inc;
    if (std::abs(inc) < std::abs(sum) * 1e-17) break;
  }
  return -std::numbers::egamma - std::log(x) - sum;
}

// e^x E1(x) via the continued fraction 1/(x+1-1/(x+3-4/(x+5-...))).
inline double expint_scaled_fraction(double x) {
  constexpr double kTiny = 1e-300;
  double b = x + 1.0;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -static_cast<double>(i) * static_cast<double>(i);
    b += 2.0;
    d = 1.0 / (an * d + b);
    c = b + an / c;
    const double del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) return h;
  }
  throw NumericalError("E1 continued fraction did not converge", x);
}

}  // namespace detail

inline double expint_e1(double x) {
  detail::require(x > 0.0, "E1 requires a positive argument");
  if (x <= 1.0) return detail::expint_series(x);
  return std::exp(-x) * detail::expint_scaled_fraction(x);
}

/// e^x E1(x), finite for large x where E1 itself underflows.
inline double expint_e1_scaled(double x) {
  detail::require(x > 0.0, "E1 requires a positive argument");
  if (x <= 1.0) return std::exp(x) * detail::expint_series(x);
  return detail::expint_scaled_fraction(x);
}

}  // namespace ltesched
