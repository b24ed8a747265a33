#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "invmean/error.hpp"

namespace invmean {

/// Closed interval [lo, hi]; degenerate intervals are allowed.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  static Interval make(double lo, double hi) {
    if (!std::isfinite(lo) || !std::isfinite(hi)) {
      throw Error(ErrorKind::NonFiniteValue, "interval endpoints must be finite");
    }
    if (lo > hi) {
      throw Error(ErrorKind::InvalidArgument,
                  "interval lower end " + std::to_string(lo) + " exceeds upper end " + std::to_string(hi));
    }
    return Interval{lo, hi};
  }

  double width() const noexcept { return hi - lo; }
  double midpoint() const noexcept { return lo + (hi - lo) / 2; }
  bool contains(double x) const noexcept { return lo <= x && x <= hi; }
  bool contains(const Interval& other) const noexcept { return lo <= other.lo && other.hi <= hi; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

struct Atom {
  double point = 0.0;
  double weight = 0.0;

  friend bool operator==(const Atom&, const Atom&) = default;
};

/// Finite atomic probability measure on a closed interval.
///
/// Points are kept strictly increasing and weights positive with unit total.
/// Construction sorts its input, merges exactly equal points and divides the
/// weights by their sum; no other tolerance is applied.
class Measure {
 public:
  Measure(std::vector<Atom> atoms, Interval domain) : atoms_(std::move(atoms)), domain_(domain) {
    if (atoms_.empty()) {
      throw Error(ErrorKind::EmptySupport, "a measure needs at least one atom");
    }
    for (const Atom& a : atoms_) {
      if (!std::isfinite(a.point) || !std::isfinite(a.weight)) {
        throw Error(ErrorKind::NonFiniteValue, "atom with non-finite point or weight");
      }
      if (!(a.weight > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "atom weights must be positive");
      }
      if (!domain_.contains(a.point)) {
        throw Error(ErrorKind::OutOfDomain, "atom at " + std::to_string(a.point) + " lies outside [" +
                                                std::to_string(domain_.lo) + ", " +
                                                std::to_string(domain_.hi) + "]");
      }
    }
    std::stable_sort(atoms_.begin(), atoms_.end(),
                     [](const Atom& a, const Atom& b) { return a.point < b.point; });
    std::size_t out = 0;
    for (std::size_t i = 1; i < atoms_.size(); ++i) {
      if (atoms_[i].point == atoms_[out].point) {
        atoms_[out].weight += atoms_[i].weight;
      } else {
        atoms_[++out] = atoms_[i];
      }
    }
    atoms_.resize(out + 1);
    renormalize();
  }

  std::span<const Atom> atoms() const noexcept { return atoms_; }
  const Interval& domain() const noexcept { return domain_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  double front() const noexcept { return atoms_.front().point; }
  double back() const noexcept { return atoms_.back().point; }

  friend bool operator==(const Measure&, const Measure&) = default;

 private:
  void renormalize() {
    double total = 0.0;
    for (const Atom& a : atoms_) total += a.weight;
    for (Atom& a : atoms_) a.weight /= total;
  }

  std::vector<Atom> atoms_;
  Interval domain_;
};

inline Measure dirac(double x, Interval domain) {
  if (!domain.contains(x)) {
    throw Error(ErrorKind::OutOfDomain, "dirac point " + std::to_string(x) + " outside its domain");
  }
  return Measure({{x, 1.0}}, domain);
}

/// Discrete mean input: equal weights 1/k on the given points.
inline Measure uniform_atoms(std::span<const double> points, Interval domain) {
  if (points.empty()) {
    throw Error(ErrorKind::EmptySupport, "uniform_atoms needs at least one point");
  }
  const double w = 1.0 / static_cast<double>(points.size());
  std::vector<Atom> atoms;
  atoms.reserve(points.size());
  for (double x : points) atoms.push_back({x, w});
  return Measure(std::move(atoms), domain);
}

inline Measure uniform_atoms(std::initializer_list<double> points, Interval domain) {
  return uniform_atoms(std::span<const double>(points.begin(), points.size()), domain);
}

/// Convex hull of the support.
inline Interval gamma(const Measure& P) noexcept { return Interval{P.front(), P.back()}; }

/// Sum of w_i f(x_i) in ascending point order.
template <class F>
double integrate(const Measure& P, F&& f) {
  double sum = 0.0;
  for (const Atom& a : P.atoms()) {
    const double v = f(a.point);
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::NonFiniteValue, "integrand is not finite at " + std::to_string(a.point));
    }
    sum += a.weight * v;
  }
  return sum;
}

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

// Two-pass variance; strictly positive whenever two distinct atoms carry weight.
inline Moments mean_and_variance(const Measure& P) noexcept {
  double mean = 0.0;
  for (const Atom& a : P.atoms()) mean += a.weight * a.point;
  if (P.size() == 1) return {P.front(), 0.0};
  double var = 0.0;
  for (const Atom& a : P.atoms()) {
    const double d = a.point - mean;
    var += a.weight * d * d;
  }
  return {mean, std::max(var, 0.0)};
}

/// Merges runs of points lying within eps of the first point of the run,
/// replacing each run by its weight-averaged position.
inline Measure coalesce(const Measure& P, double eps) {
  std::vector<Atom> merged;
  merged.reserve(P.size());
  auto atoms = P.atoms();
  std::size_t i = 0;
  while (i < atoms.size()) {
    const double start = atoms[i].point;
    double weight = 0.0;
    double moment = 0.0;
    std::size_t j = i;
    for (; j < atoms.size() && atoms[j].point - start <= eps; ++j) {
      weight += atoms[j].weight;
      moment += atoms[j].weight * atoms[j].point;
    }
    double point = (j - i == 1) ? start : moment / weight;
    point = std::clamp(point, start, atoms[j - 1].point);
    merged.push_back({point, weight});
    i = j;
  }
  return Measure(std::move(merged), P.domain());
}

}  // namespace invmean
