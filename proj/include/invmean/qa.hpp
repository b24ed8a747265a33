#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "invmean/error.hpp"
#include "invmean/generator.hpp"
#include "invmean/measure.hpp"

namespace invmean {

/// Slack between numerical noise and a broken generator when checking that
/// a mean lies in the convex hull of the support.
inline constexpr double kMeanClampTolerance = 1e-10;

struct MeanValue {
  double value = 0.0;
  /// |f(value) - ∫ f dP| in the scale the mean was computed in.
  double residual = 0.0;
};

namespace detail {

inline double clamp_to_hull(double v, double lo, double hi) {
  const double slack = kMeanClampTolerance * std::max(1.0, std::max(std::fabs(lo), std::fabs(hi)));
  if (!(v >= lo - slack && v <= hi + slack)) {
    throw Error(ErrorKind::MeanOutOfBounds, "mean " + format_number(v) + " falls outside [" + format_number(lo) +
                                                ", " + format_number(hi) + "]");
  }
  return std::clamp(v, lo, hi);
}

// Box-Cox form (t^p - 1)/p of a power generator; same mean, no cancellation as p -> 0.
inline double box_cox(double p, double t) noexcept { return std::expm1(p * std::log(t)) / p; }
inline double box_cox_inverse(double p, double z) noexcept { return std::exp(std::log1p(p * z) / p); }

/// Quasiarithmetic mean of sorted atoms lying in f's domain.
///
/// Power generators on positive data are evaluated in a rescaled form that is
/// affinely equivalent to t^p (hence gives the same mean): Box-Cox for
/// |p| < 1, and scaling by the extreme atom for |p| > 300.
inline MeanValue qa_atoms(const Generator& f, std::span<const Atom> atoms) {
  const double lo = atoms.front().point;
  const double hi = atoms.back().point;
  if (lo == hi) return {lo, 0.0};

  if (const auto* pw = f.as<gen::Power>(); pw && lo > 0.0 && pw->p != 0.0 && pw->p != 1.0) {
    const double p = pw->p;
    if (std::fabs(p) > kLargeExponent) {
      const double scale = p > 0.0 ? hi : lo;
      double sum = 0.0;
      for (const Atom& a : atoms) sum += a.weight * std::exp(p * std::log(a.point / scale));
      return {clamp_to_hull(scale * std::exp(std::log(sum) / p), lo, hi), 0.0};
    }
    if (std::fabs(p) < 1.0) {
      double y = 0.0;
      for (const Atom& a : atoms) y += a.weight * box_cox(p, a.point);
      const double v = box_cox_inverse(p, y);
      if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteValue, "power mean overflowed");
      return {clamp_to_hull(v, lo, hi), std::fabs(box_cox(p, v) - y)};
    }
  }

  double y = 0.0;
  for (const Atom& a : atoms) {
    const double fv = f.value(a.point);
    if (!std::isfinite(fv)) {
      throw Error(ErrorKind::NonFiniteValue, f.label() + " is not finite at " + format_number(a.point));
    }
    y += a.weight * fv;
  }
  const double flo = f.value(lo);
  const double fhi = f.value(hi);
  y = std::clamp(y, std::min(flo, fhi), std::max(flo, fhi));
  const double v = f.inverse_value(y);
  return {clamp_to_hull(v, lo, hi), std::fabs(f.value(v) - y)};
}

}  // namespace detail

/// f^{-1}(∫ f dP).
inline MeanValue qa_mean(const Generator& f, const Measure& P) {
  if (!f.domain().contains(gamma(P))) {
    throw Error(ErrorKind::DomainMismatch, "support of the measure is not inside the domain of " + f.label());
  }
  return detail::qa_atoms(f, P.atoms());
}

/// p-th power mean (geometric mean for p = 0).
inline MeanValue power_mean(double p, const Measure& P) {
  return qa_mean(Generator::power(p, gamma(P)), P);
}

/// Image measure u_*P on the image interval of u.
inline Measure pushforward(const Generator& u, const Measure& P) {
  if (!u.domain().contains(gamma(P))) {
    throw Error(ErrorKind::DomainMismatch, "support of the measure is not inside the domain of " + u.label());
  }
  std::vector<Atom> atoms;
  atoms.reserve(P.size());
  for (const Atom& a : P.atoms()) atoms.push_back({u.value(a.point), a.weight});
  const Interval img = u.image();
  for (Atom& a : atoms) a.point = std::clamp(a.point, img.lo, img.hi);
  return Measure(std::move(atoms), img);
}

/// A mean as a value: measure in, point of the convex hull of its support out.
using MeanFunctional = std::function<double(const Measure&)>;

inline MeanFunctional arithmetic_mean() {
  return [](const Measure& P) { return mean_and_variance(P).mean; };
}

inline MeanFunctional qa_functional(Generator f) {
  return [f = std::move(f)](const Measure& P) { return qa_mean(f, P).value; };
}

/// M^[u](P) = u^{-1}(M(u_*P)).
inline MeanFunctional conjugate_mean(MeanFunctional M, Generator u) {
  return [M = std::move(M), u = std::move(u)](const Measure& P) {
    const double m = M(pushforward(u, P));
    const Interval img = u.image();
    return u.inverse_value(std::clamp(m, img.lo, img.hi));
  };
}

}  // namespace invmean
