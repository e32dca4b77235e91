#pragma once

#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "uptheriver/errors.hpp"

namespace uptheriver::quadrature {

inline constexpr double kDefaultAbsTol = 1e-9;

struct Result {
  double value = 0.0;
  double error = 0.0;
};

/// Adaptive 15-point Gauss-Kronrod on a finite interval with an absolute
/// error target. Throws NumericalError when the estimate stays above abs_tol.
template <class F>
Result integrate(F&& f, double a, double b, double abs_tol = kDefaultAbsTol,
                 unsigned max_depth = 18) {
  using boost::math::quadrature::gauss_kronrod;
  if (a == b) return {};
  double err = 0.0;
  double l1 = 0.0;
  // Boost's tolerance is relative to the L1 norm; retry once with it rescaled.
  double value = gauss_kronrod<double, 15>::integrate(f, a, b, max_depth, abs_tol, &err, &l1);
  if (err > abs_tol && l1 > 1.0) {
    value = gauss_kronrod<double, 15>::integrate(f, a, b, max_depth, abs_tol / l1, &err, &l1);
  }
  if (!(err <= abs_tol) || !std::isfinite(value)) {
    throw NumericalError("Gauss-Kronrod quadrature did not converge on [" + std::to_string(a) +
                             ", " + std::to_string(b) + "]",
                         err);
  }
  return {value, err};
}

}  // namespace uptheriver::quadrature
