#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "invmean/error.hpp"
#include "invmean/measure.hpp"
#include "invmean/root_finding.hpp"

namespace invmean {

/// Sample count of the strict-monotonicity check run on every new generator.
inline constexpr std::size_t kMonotonicityGrid = 1024;

/// Power generators with |p| above this are only ever handled in log space.
inline constexpr double kLargeExponent = 300.0;

namespace detail {
struct GeneratorImpl;

inline std::string format_number(double v) {
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}
}  // namespace detail

namespace gen {
/// t^p, or ln t when p == 0.
struct Power {
  double p;
};
struct Log {};
/// exp(c t)
struct Exp {
  double c;
};
/// a t + b
struct Affine {
  double a;
  double b;
};
/// Piecewise-linear interpolation through (t, value) knots.
struct Tabulated {
  std::vector<std::pair<double, double>> knots;
};
}  // namespace gen

/// A continuous strictly monotone function on a closed interval.
///
/// Generators are immutable and cheap to copy (shared ownership of the
/// representation). Every factory runs a dense-grid monotonicity check.
class Generator {
 public:
  static Generator power(double p, Interval domain, std::size_t grid = kMonotonicityGrid);
  static Generator log(Interval domain, std::size_t grid = kMonotonicityGrid);
  static Generator exp(double c, Interval domain, std::size_t grid = kMonotonicityGrid);
  static Generator affine(double a, double b, Interval domain, std::size_t grid = kMonotonicityGrid);
  static Generator tabulated(std::vector<std::pair<double, double>> knots,
                             std::size_t grid = kMonotonicityGrid);
  /// outer ∘ inner on inner's domain.
  static Generator composite(Generator outer, Generator inner, std::size_t grid = kMonotonicityGrid);

  /// Checked evaluation.
  double eval(double t) const;
  /// Checked inverse; the result lies in domain().
  double invert(double y) const;

  // Unchecked variants used on hot paths.
  double value(double t) const;
  double inverse_value(double y) const;

  const Interval& domain() const noexcept;
  /// Image of the domain; throws NonFiniteValue if an endpoint overflows.
  Interval image() const;
  bool increasing() const noexcept;
  std::string label() const;

  template <class Kind>
  const Kind* as() const noexcept;

 private:
  explicit Generator(std::shared_ptr<const detail::GeneratorImpl> impl) : impl_(std::move(impl)) {}
  static Generator finish(detail::GeneratorImpl impl, std::size_t grid);

  std::shared_ptr<const detail::GeneratorImpl> impl_;
};

namespace gen {
struct Composite {
  Generator outer;
  Generator inner;
};
}  // namespace gen

namespace detail {

using GeneratorKind =
    std::variant<gen::Power, gen::Log, gen::Exp, gen::Affine, gen::Composite, gen::Tabulated>;

struct GeneratorImpl {
  GeneratorKind kind;
  Interval domain;
  bool increasing = true;
  double image_lo = 0.0;
  double image_hi = 0.0;
};

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

inline bool is_integer(double p) noexcept { return std::nearbyint(p) == p && std::fabs(p) < 1e15; }

inline double power_value(double p, double t) noexcept {
  if (p == 0.0) return std::log(t);
  if (p == 1.0) return t;
  if (p == 2.0) return t * t;
  if (p == -1.0) return 1.0 / t;
  return std::pow(t, p);
}

// Inverse of t^p on a domain where it is monotone.
inline double power_inverse(double p, double y, const Interval& domain) noexcept {
  if (p == 0.0) return std::exp(y);
  if (p == 1.0) return y;
  if (p == -1.0) return 1.0 / y;
  double r = (p == 2.0) ? std::sqrt(std::fabs(y)) : std::pow(std::fabs(y), 1.0 / p);
  if (is_integer(p)) {
    const auto k = static_cast<long long>(p);
    if (k % 2 == 0) {
      if (domain.hi <= 0.0) r = -r;
    } else if (y < 0.0) {
      r = -r;
    }
  }
  return r;
}

inline double tabulated_value(const gen::Tabulated& tab, double t) noexcept {
  const auto& k = tab.knots;
  if (t <= k.front().first) return k.front().second;
  if (t >= k.back().first) return k.back().second;
  auto it = std::upper_bound(k.begin(), k.end(), t,
                             [](double v, const std::pair<double, double>& knot) { return v < knot.first; });
  const auto& [t1, v1] = *it;
  const auto& [t0, v0] = *(it - 1);
  const double s = (t - t0) / (t1 - t0);
  return v0 + s * (v1 - v0);
}

// A function with the same monotone ordering as the generator but without
// overflow or cancellation for extreme power exponents. Used for validation.
inline double order_key(const GeneratorImpl& impl, const Generator& self, double t) {
  if (const auto* pw = std::get_if<gen::Power>(&impl.kind); pw && impl.domain.lo > 0.0) {
    const double p = pw->p;
    if (std::fabs(p) > kLargeExponent) return p * std::log(t);
    // divide by |p|, not p: the key must keep the orientation of t^p
    if (p != 0.0 && std::fabs(p) < 1.0) return std::expm1(p * std::log(t)) / std::fabs(p);
  }
  return self.value(t);
}

}  // namespace detail

inline double Generator::value(double t) const {
  return std::visit(
      detail::Overloaded{
          [t](const gen::Power& k) { return detail::power_value(k.p, t); },
          [t](const gen::Log&) { return std::log(t); },
          [t](const gen::Exp& k) { return std::exp(k.c * t); },
          [t](const gen::Affine& k) { return k.a * t + k.b; },
          [t](const gen::Composite& k) { return k.outer.value(k.inner.value(t)); },
          [t](const gen::Tabulated& k) { return detail::tabulated_value(k, t); },
      },
      impl_->kind);
}

inline double Generator::inverse_value(double y) const {
  const Interval& dom = impl_->domain;
  double t = std::visit(
      detail::Overloaded{
          [&](const gen::Power& k) { return detail::power_inverse(k.p, y, dom); },
          [&](const gen::Log&) { return std::exp(y); },
          [&](const gen::Exp& k) { return std::log(y) / k.c; },
          [&](const gen::Affine& k) { return (y - k.b) / k.a; },
          [&](const gen::Composite& k) {
            const auto& inner = *k.inner.impl_;
            const double mid = std::clamp(k.outer.inverse_value(y), std::min(inner.image_lo, inner.image_hi),
                                          std::max(inner.image_lo, inner.image_hi));
            return k.inner.inverse_value(mid);
          },
          [&](const gen::Tabulated&) {
            return solve_monotone([this](double s) { return value(s); }, dom.lo, dom.hi, y);
          },
      },
      impl_->kind);
  return std::clamp(t, dom.lo, dom.hi);
}

inline const Interval& Generator::domain() const noexcept { return impl_->domain; }
inline bool Generator::increasing() const noexcept { return impl_->increasing; }

inline Interval Generator::image() const {
  if (!std::isfinite(impl_->image_lo) || !std::isfinite(impl_->image_hi)) {
    throw Error(ErrorKind::NonFiniteValue, "image of " + label() + " is not finite");
  }
  return Interval{std::min(impl_->image_lo, impl_->image_hi), std::max(impl_->image_lo, impl_->image_hi)};
}

template <class Kind>
const Kind* Generator::as() const noexcept {
  return std::get_if<Kind>(&impl_->kind);
}

inline std::string Generator::label() const {
  using detail::format_number;
  return std::visit(detail::Overloaded{
                        [](const gen::Power& k) { return "power(" + format_number(k.p) + ")"; },
                        [](const gen::Log&) { return std::string("log"); },
                        [](const gen::Exp& k) { return "exp(" + format_number(k.c) + ")"; },
                        [](const gen::Affine& k) {
                          return "affine(" + format_number(k.a) + ";" + format_number(k.b) + ")";
                        },
                        [](const gen::Composite& k) {
                          return "composite(" + k.outer.label() + ";" + k.inner.label() + ")";
                        },
                        [](const gen::Tabulated& k) {
                          return "tabulated(" + std::to_string(k.knots.size()) + ")";
                        },
                    },
                    impl_->kind);
}

inline double Generator::eval(double t) const {
  if (!impl_->domain.contains(t)) {
    throw Error(ErrorKind::OutOfDomain, label() + " evaluated at " + detail::format_number(t) +
                                            " outside its domain");
  }
  const double v = value(t);
  if (!std::isfinite(v)) {
    throw Error(ErrorKind::NonFiniteValue, label() + " is not finite at " + detail::format_number(t));
  }
  return v;
}

inline double Generator::invert(double y) const {
  const Interval img = image();
  if (!(img.lo <= y && y <= img.hi)) {
    throw Error(ErrorKind::OutOfRange, "value " + detail::format_number(y) + " is outside the image of " +
                                           label());
  }
  return inverse_value(y);
}

inline Generator Generator::finish(detail::GeneratorImpl impl, std::size_t grid) {
  auto ptr = std::make_shared<detail::GeneratorImpl>(std::move(impl));
  Generator g(ptr);
  const Interval dom = ptr->domain;
  const std::size_t n = dom.width() > 0.0 ? std::max<std::size_t>(grid, 2) : 1;

  double prev = 0.0;
  int direction = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = (i + 1 == n) ? dom.hi
                                  : dom.lo + dom.width() * (static_cast<double>(i) / static_cast<double>(n - 1));
    const double key = detail::order_key(*ptr, g, t);
    if (!std::isfinite(key)) {
      throw Error(ErrorKind::NonFiniteValue,
                  g.label() + " is not finite at " + detail::format_number(t) + " in its domain");
    }
    if (i > 0) {
      const int dir = key > prev ? 1 : (key < prev ? -1 : 0);
      if (dir == 0 || (direction != 0 && dir != direction)) {
        throw Error(ErrorKind::NotMonotone,
                    g.label() + " is not strictly monotone near " + detail::format_number(t));
      }
      direction = dir;
    }
    prev = key;
  }
  ptr->increasing = direction >= 0;
  ptr->image_lo = g.value(dom.lo);
  ptr->image_hi = g.value(dom.hi);
  return g;
}

inline Generator Generator::power(double p, Interval domain, std::size_t grid) {
  if (!std::isfinite(p)) throw Error(ErrorKind::InvalidArgument, "power exponent must be finite");
  if (std::fabs(p) > kLargeExponent && !(domain.lo > 0.0)) {
    throw Error(ErrorKind::DomainMismatch, "power exponents beyond 300 need a positive domain");
  }
  return finish({gen::Power{p}, domain}, grid);
}

inline Generator Generator::log(Interval domain, std::size_t grid) { return finish({gen::Log{}, domain}, grid); }

inline Generator Generator::exp(double c, Interval domain, std::size_t grid) {
  if (!std::isfinite(c) || c == 0.0) throw Error(ErrorKind::InvalidArgument, "exp rate must be finite and nonzero");
  return finish({gen::Exp{c}, domain}, grid);
}

inline Generator Generator::affine(double a, double b, Interval domain, std::size_t grid) {
  if (!std::isfinite(a) || !std::isfinite(b) || a == 0.0) {
    throw Error(ErrorKind::InvalidArgument, "affine slope must be finite and nonzero");
  }
  return finish({gen::Affine{a, b}, domain}, grid);
}

inline Generator Generator::tabulated(std::vector<std::pair<double, double>> knots, std::size_t grid) {
  if (knots.size() < 2) throw Error(ErrorKind::InvalidArgument, "tabulated generator needs at least two knots");
  int direction = 0;
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (!std::isfinite(knots[i].first) || !std::isfinite(knots[i].second)) {
      throw Error(ErrorKind::NonFiniteValue, "tabulated knot is not finite");
    }
    if (i == 0) continue;
    if (!(knots[i].first > knots[i - 1].first)) {
      throw Error(ErrorKind::NotMonotone, "tabulated knot abscissae must be strictly increasing");
    }
    const int dir = knots[i].second > knots[i - 1].second ? 1 : (knots[i].second < knots[i - 1].second ? -1 : 0);
    if (dir == 0 || (direction != 0 && dir != direction)) {
      throw Error(ErrorKind::NotMonotone, "tabulated knot values must be strictly monotone");
    }
    direction = dir;
  }
  const Interval domain{knots.front().first, knots.back().first};
  return finish({gen::Tabulated{std::move(knots)}, domain}, grid);
}

inline Generator Generator::composite(Generator outer, Generator inner, std::size_t grid) {
  const Interval img = inner.image();
  const Interval& od = outer.domain();
  // rounding in the image endpoints is tolerated
  const double slack = 1e-12 * (1.0 + std::max(std::fabs(img.lo), std::fabs(img.hi)));
  if (img.lo < od.lo - slack || img.hi > od.hi + slack) {
    throw Error(ErrorKind::DomainMismatch, "image of " + inner.label() + " is not inside the domain of " +
                                               outer.label());
  }
  const Interval domain = inner.domain();
  return finish({gen::Composite{std::move(outer), std::move(inner)}, domain}, grid);
}

/// g = f ∘ u on u's domain.
inline Generator compose_with(const Generator& f, const Generator& u) { return Generator::composite(f, u); }

/// Same function on a closed subinterval of its domain.
inline Generator restrict_to(const Generator& g, Interval sub) {
  if (!g.domain().contains(sub)) {
    throw Error(ErrorKind::DomainMismatch, "restriction interval is not inside the domain of " + g.label());
  }
  if (sub == g.domain()) return g;
  if (const auto* k = g.as<gen::Power>()) return Generator::power(k->p, sub);
  if (g.as<gen::Log>()) return Generator::log(sub);
  if (const auto* k = g.as<gen::Exp>()) return Generator::exp(k->c, sub);
  if (const auto* k = g.as<gen::Affine>()) return Generator::affine(k->a, k->b, sub);
  if (const auto* k = g.as<gen::Composite>()) return Generator::composite(k->outer, restrict_to(k->inner, sub));
  const auto* tab = g.as<gen::Tabulated>();
  std::vector<std::pair<double, double>> knots;
  knots.emplace_back(sub.lo, g.value(sub.lo));
  for (const auto& knot : tab->knots) {
    if (knot.first > sub.lo && knot.first < sub.hi) knots.push_back(knot);
  }
  knots.emplace_back(sub.hi, g.value(sub.hi));
  return Generator::tabulated(std::move(knots));
}

/// Inverse function as a generator on the image of g.
inline Generator inverse_of(const Generator& g) {
  const Interval img = g.image();
  if (const auto* k = g.as<gen::Power>()) {
    if (k->p == 0.0) return Generator::exp(1.0, img);
    if (std::fabs(k->p) > kLargeExponent || g.domain().lo < 0.0) {
      throw Error(ErrorKind::InvalidArgument, "inverse of " + g.label() + " is not representable");
    }
    return Generator::power(1.0 / k->p, img);
  }
  if (g.as<gen::Log>()) return Generator::exp(1.0, img);
  if (const auto* k = g.as<gen::Exp>()) {
    const Generator ln = Generator::log(img);
    return Generator::composite(Generator::affine(1.0 / k->c, 0.0, ln.image()), ln);
  }
  if (const auto* k = g.as<gen::Affine>()) return Generator::affine(1.0 / k->a, -k->b / k->a, img);
  if (const auto* k = g.as<gen::Composite>()) {
    // (outer o inner)^-1 = inner^-1 o outer^-1, with outer^-1 cut down to the composite image
    const Generator first = restrict_to(inverse_of(k->outer), img);
    const Generator second = inverse_of(k->inner);
    return Generator::composite(second, first);
  }
  const auto* tab = g.as<gen::Tabulated>();
  std::vector<std::pair<double, double>> knots;
  knots.reserve(tab->knots.size());
  for (const auto& [t, v] : tab->knots) knots.emplace_back(v, t);
  if (!g.increasing()) std::reverse(knots.begin(), knots.end());
  return Generator::tabulated(std::move(knots));
}

}  // namespace invmean
