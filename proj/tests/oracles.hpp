#pragma once

// Reference computations used as independent oracles by the test suites.
// None of this goes through the library's generator/mean machinery.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <vector>

#include "invmean/measure.hpp"

namespace oracle {

// AGM(1, 2) to 40 digits (mpmath.agm).
inline constexpr double kAgm12 = 1.456791031046906869186432383265081974974;

/// Gauss iteration a' = (a+b)/2, b' = sqrt(ab).
inline double gauss_agm(double a, double b) {
  for (int i = 0; i < 100; ++i) {
    const double an = 0.5 * (a + b);
    const double bn = std::sqrt(a * b);
    if (an == a && bn == b) break;
    a = an;
    b = bn;
  }
  return 0.5 * (a + b);
}

/// a' = (a+b)/2, b' = 2ab/(a+b); the product ab is invariant, so the
/// common limit is sqrt(ab).
inline double arithmetic_harmonic(double a, double b) {
  for (int i = 0; i < 100; ++i) {
    const double an = 0.5 * (a + b);
    const double bn = 2.0 * a * b / (a + b);
    if (an == a && bn == b) break;
    a = an;
    b = bn;
  }
  return 0.5 * (a + b);
}

/// Discrete quasiarithmetic mean f^{-1}((f(x_1)+...+f(x_k))/k).
inline double discrete_qa(const std::function<double(double)>& f, const std::function<double(double)>& finv,
                          const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += f(x);
  return finv(s / static_cast<double>(xs.size()));
}

inline double power_fn(double p, double x) { return p == 0.0 ? std::log(x) : std::pow(x, p); }
inline double power_inv(double p, double y) { return p == 0.0 ? std::exp(y) : std::pow(y, 1.0 / p); }

/// Weighted power mean computed directly from the definition.
inline double weighted_power_mean(double p, const std::vector<double>& xs, const std::vector<double>& ws) {
  double s = 0.0, wsum = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    s += ws[i] * power_fn(p, xs[i]);
    wsum += ws[i];
  }
  return power_inv(p, s / wsum);
}

/// Plain lattice scan of |P_p - P_q| over θδ_x + (1-θ)δ_y with x, y on the
/// grid lo + i|I|/grid, |x - y| <= t, θ = l/grid. No refinement.
inline double brute_force_power_separation(double p, double q, double lo, double hi, double t, int grid) {
  const double h = (hi - lo) / grid;
  double best = 0.0;
  std::vector<double> fx(grid + 1), gx(grid + 1);
  for (int i = 0; i <= grid; ++i) {
    const double x = lo + i * h;
    fx[i] = power_fn(p, x);
    gx[i] = power_fn(q, x);
  }
  for (int i = 0; i <= grid; ++i) {
    const double x = lo + i * h;
    for (int j = i + 1; j <= grid; ++j) {
      const double y = lo + j * h;
      if (y - x > t * (1 + 1e-12)) break;
      for (int l = 0; l <= grid; ++l) {
        const double th = static_cast<double>(l) / grid;
        const double a = power_inv(p, th * fx[i] + (1 - th) * fx[j]);
        const double b = power_inv(q, th * gx[i] + (1 - th) * gx[j]);
        best = std::max(best, std::fabs(a - b));
      }
    }
  }
  return best;
}

/// Random measure with 1..max_atoms atoms and random positive weights.
inline invmean::Measure random_measure(std::mt19937_64& rng, invmean::Interval domain, int max_atoms = 6) {
  std::uniform_int_distribution<int> count(1, max_atoms);
  std::uniform_real_distribution<double> pos(domain.lo, domain.hi);
  std::uniform_real_distribution<double> wt(0.05, 1.0);
  std::vector<invmean::Atom> atoms;
  const int k = count(rng);
  for (int i = 0; i < k; ++i) atoms.push_back({pos(rng), wt(rng)});
  return invmean::Measure(std::move(atoms), domain);
}

}  // namespace oracle
