#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "invmean/error.hpp"

namespace invmean {

inline constexpr std::size_t kRootMaxIterations = 200;

/// Residual accepted by the monotone solver for a target value y.
inline double root_tolerance(double y) noexcept { return 1e-13 * (1.0 + std::fabs(y)); }

/// Solves f(t) = target for a continuous monotone f on [lo, hi].
///
/// Keeps a sign-changing bracket and takes secant (regula falsi) steps; the
/// next step is a bisection whenever a secant step lands outside the bracket
/// or fails to shrink it by a quarter.
template <class F>
double solve_monotone(F&& f, double lo, double hi, double target,
                      std::size_t max_iter = kRootMaxIterations) {
  const double tol = root_tolerance(target);
  double a = lo, b = hi;
  double fa = f(a) - target;
  double fb = f(b) - target;
  if (!std::isfinite(fa) || !std::isfinite(fb)) {
    throw Error(ErrorKind::NonFiniteValue, "root bracket endpoints evaluate to non-finite values");
  }
  if (std::fabs(fa) <= tol) return a;
  if (std::fabs(fb) <= tol) return b;
  if ((fa < 0) == (fb < 0)) {
    throw Error(ErrorKind::OutOfRange, "target value is not bracketed by the interval image");
  }

  bool bisect_next = false;
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    const double width = b - a;
    double c;
    bool secant = false;
    if (!bisect_next) {
      c = a - fa * (b - a) / (fb - fa);
      secant = c > a && c < b;
    }
    if (!secant) c = a + width / 2;
    if (c <= a || c >= b) {
      // bracket is down to adjacent doubles
      return std::fabs(fa) <= std::fabs(fb) ? a : b;
    }
    const double fc = f(c) - target;
    if (!std::isfinite(fc)) {
      throw Error(ErrorKind::NonFiniteValue, "function is not finite inside the bracket");
    }
    if (std::fabs(fc) <= tol) return c;
    if ((fc < 0) == (fa < 0)) {
      a = c;
      fa = fc;
    } else {
      b = c;
      fb = fc;
    }
    bisect_next = !secant || (b - a) > 0.75 * width;
  }
  throw Error(ErrorKind::ConvergenceFailure,
              "monotone root finder exceeded " + std::to_string(max_iter) + " iterations");
}

}  // namespace invmean
