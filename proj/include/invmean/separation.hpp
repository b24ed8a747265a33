#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "invmean/error.hpp"
#include "invmean/generator.hpp"
#include "invmean/measure.hpp"
#include "invmean/parallel.hpp"
#include "invmean/qa.hpp"

namespace invmean {

/// Density multiplier of the local pass around the coarse maximizer.
inline constexpr std::size_t kSeparationRefinement = 10;
inline constexpr std::size_t kPredictionCap = 1000000;

/// Lower estimate of sup |QA_f(P) - QA_g(P)| over measures with hull width
/// at most t, attained at the reported two-point measure
/// theta δ_x + (1 - theta) δ_y.
struct SeparationEstimate {
  double value = 0.0;
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  std::size_t grid = 0;
  std::size_t refinement = 0;
};

namespace detail {

// Quasiarithmetic mean of θδ_x + (1-θ)δ_y with the generator values at x and
// y cached, so a sweep over θ costs one inversion per point.
class TwoPointMean {
 public:
  explicit TwoPointMean(const Generator& g) : g_(g) {
    const bool positive = g.domain().lo > 0.0;
    if (g.as<gen::Log>()) {
      mode_ = Mode::Geometric;
    } else if (const auto* pw = g.as<gen::Power>()) {
      p_ = pw->p;
      if (p_ == 0.0) mode_ = Mode::Geometric;
      else if (p_ == 1.0) mode_ = Mode::Identity;
      else if (p_ == -1.0) mode_ = Mode::Reciprocal;
      else if (p_ == 2.0 && g.domain().lo >= 0.0) mode_ = Mode::Square;
      else if (positive && std::fabs(p_) > kLargeExponent) mode_ = Mode::Scaled;
      else if (positive && std::fabs(p_) < 1.0) mode_ = Mode::BoxCox;
    }
  }

  void set(double x, double y) {
    x_ = x;
    y_ = y;
    switch (mode_) {
      case Mode::Identity: fx_ = x; fy_ = y; break;
      case Mode::Geometric: fx_ = std::log(x); fy_ = std::log(y); break;
      case Mode::Reciprocal: fx_ = 1.0 / x; fy_ = 1.0 / y; break;
      case Mode::Square: fx_ = x * x; fy_ = y * y; break;
      case Mode::BoxCox: fx_ = box_cox(p_, x); fy_ = box_cox(p_, y); break;
      case Mode::Scaled:
        scale_ = p_ > 0.0 ? y : x;
        fx_ = std::exp(p_ * std::log(x / scale_));
        fy_ = std::exp(p_ * std::log(y / scale_));
        break;
      case Mode::Generic: fx_ = g_.value(x); fy_ = g_.value(y); break;
    }
  }

  double operator()(double theta) const {
    if (x_ == y_) return x_;
    const double z = theta * fx_ + (1.0 - theta) * fy_;
    double v;
    switch (mode_) {
      case Mode::Identity: v = z; break;
      case Mode::Geometric: v = std::exp(z); break;
      case Mode::Reciprocal: v = 1.0 / z; break;
      case Mode::Square: v = std::sqrt(z); break;
      case Mode::BoxCox: v = box_cox_inverse(p_, z); break;
      case Mode::Scaled: v = scale_ * std::exp(std::log(z) / p_); break;
      default: v = g_.inverse_value(std::clamp(z, std::min(fx_, fy_), std::max(fx_, fy_))); break;
    }
    return std::clamp(v, x_, y_);
  }

 private:
  enum class Mode { Identity, Geometric, Reciprocal, Square, BoxCox, Scaled, Generic };
  Generator g_;
  Mode mode_ = Mode::Generic;
  double p_ = 1.0;
  double x_ = 0.0, y_ = 0.0, fx_ = 0.0, fy_ = 0.0, scale_ = 1.0;
};

inline Interval common_domain(std::span<const Generator> gens) {
  Interval d = gens.front().domain();
  for (const Generator& g : gens) {
    d.lo = std::max(d.lo, g.domain().lo);
    d.hi = std::min(d.hi, g.domain().hi);
  }
  if (!(d.lo < d.hi)) {
    throw Error(ErrorKind::DomainMismatch, "generators do not share a nondegenerate compact domain");
  }
  return d;
}

}  // namespace detail

/// Estimates d_{f,g}(t) on the common domain I of f and g.
///
/// The supremum over measures is taken over two-point measures only, which
/// attain it. Those are parameterized by (u, s, theta) in [0,1] x [0,t] x [0,1]
/// with x = lo + u (|I| - s), y = x + s; a (grid+1)^3 lattice is scanned and
/// then a single pass at `kSeparationRefinement` times the density covers one
/// coarse cell around the best lattice point.
inline SeparationEstimate separation(const Generator& f, const Generator& g, double t, std::size_t grid,
                                     unsigned threads = 0, bool refine = true) {
  const Generator pair[] = {f, g};
  const Interval dom = detail::common_domain(pair);
  const double width = dom.width();
  if (!(t > 0.0) || t > width * (1.0 + 1e-15)) {
    throw Error(ErrorKind::InvalidArgument, "separation width " + detail::format_number(t) + " outside (0, |I|]");
  }
  t = std::min(t, width);
  if (grid < 2) throw Error(ErrorKind::InvalidArgument, "separation grid must be at least 2");

  const std::size_t n = grid + 1;
  const double G = static_cast<double>(grid);
  auto point = [&](double u, double s) {
    const double x = dom.lo + u * (width - s);
    return std::pair{x, std::min(x + s, dom.hi)};
  };

  struct Best {
    double value = -1.0;
    std::size_t index = 0;
  };
  std::vector<Best> rows(n);
  parallel_for(n, threads, [&](std::size_t iu) {
    detail::TwoPointMean mf(f), mg(g);
    Best best;
    const double u = static_cast<double>(iu) / G;
    for (std::size_t ks = 0; ks < n; ++ks) {
      const double s = t * static_cast<double>(ks) / G;
      const auto [x, y] = point(u, s);
      mf.set(x, y);
      mg.set(x, y);
      for (std::size_t lt = 0; lt < n; ++lt) {
        const double theta = static_cast<double>(lt) / G;
        const double m = std::fabs(mf(theta) - mg(theta));
        if (m > best.value) best = {m, (iu * n + ks) * n + lt};
      }
    }
    rows[iu] = best;
  });
  Best best = rows.front();
  for (const Best& r : rows) {
    if (r.value > best.value) best = r;
  }

  const std::size_t lt = best.index % n;
  const std::size_t ks = (best.index / n) % n;
  const std::size_t iu = best.index / (n * n);
  double bu = static_cast<double>(iu) / G;
  double bs = t * static_cast<double>(ks) / G;
  double bt = static_cast<double>(lt) / G;
  double bv = best.value;

  if (refine) {
    const std::size_t r = kSeparationRefinement;
    const double cu = bu, cs = bs, ct = bt;
    detail::TwoPointMean mf(f), mg(g);
    for (std::size_t a = 0; a <= 2 * r; ++a) {
      const double u = cu + (static_cast<double>(a) - static_cast<double>(r)) / (G * static_cast<double>(r));
      if (u < 0.0 || u > 1.0) continue;
      for (std::size_t b = 0; b <= 2 * r; ++b) {
        const double s = cs + t * (static_cast<double>(b) - static_cast<double>(r)) / (G * static_cast<double>(r));
        if (s < 0.0 || s > t) continue;
        const auto [x, y] = point(u, s);
        mf.set(x, y);
        mg.set(x, y);
        for (std::size_t c = 0; c <= 2 * r; ++c) {
          const double th = ct + (static_cast<double>(c) - static_cast<double>(r)) / (G * static_cast<double>(r));
          if (th < 0.0 || th > 1.0) continue;
          const double m = std::fabs(mf(th) - mg(th));
          if (m > bv) {
            bv = m;
            bu = u;
            bs = s;
            bt = th;
          }
        }
      }
    }
  }

  const auto [x, y] = point(bu, bs);
  return SeparationEstimate{bv, x, y, bt, grid, refine ? kSeparationRefinement : 1};
}

/// max over pairs in T of the separation estimate; zero for a singleton.
inline double contraction_bound(std::span<const Generator> T, double t, std::size_t grid, unsigned threads = 0) {
  if (T.empty()) throw Error(ErrorKind::InvalidArgument, "contraction bound needs a nonempty generator set");
  const Interval dom = T.size() > 1 ? detail::common_domain(T) : T.front().domain();
  if (!(t > 0.0) || t > dom.width() * (1.0 + 1e-15)) {
    throw Error(ErrorKind::InvalidArgument, "contraction width " + detail::format_number(t) + " outside (0, |I|]");
  }
  double out = 0.0;
  // d_{f,g} = d_{g,f}, so unordered pairs suffice
  for (std::size_t i = 0; i < T.size(); ++i) {
    for (std::size_t j = i + 1; j < T.size(); ++j) {
      out = std::max(out, separation(T[i], T[j], t, grid, threads).value);
    }
  }
  return out;
}

/// Sampled contraction function t ↦ d(t), linearly interpolated between
/// samples and along the chord to the origin below the first one.
struct SeparationCurve {
  std::vector<double> t_grid;
  std::vector<double> values;
  std::size_t refinement = kSeparationRefinement;

  double at(double t) const {
    if (t <= 0.0) return 0.0;
    if (t <= t_grid.front()) return values.front() * (t / t_grid.front());
    if (t >= t_grid.back()) return values.back();
    const auto it = std::upper_bound(t_grid.begin(), t_grid.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - t_grid.begin());
    const double s = (t - t_grid[i - 1]) / (t_grid[i] - t_grid[i - 1]);
    return values[i - 1] + s * (values[i] - values[i - 1]);
  }
};

inline SeparationCurve separation_curve(std::span<const Generator> T, std::span<const double> t_grid,
                                        std::size_t grid, unsigned threads = 0) {
  if (t_grid.empty()) throw Error(ErrorKind::InvalidArgument, "empty t grid");
  SeparationCurve curve;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (i > 0 && !(t_grid[i] > t_grid[i - 1])) {
      throw Error(ErrorKind::InvalidArgument, "t grid must be strictly increasing");
    }
    curve.t_grid.push_back(t_grid[i]);
    curve.values.push_back(contraction_bound(T, t_grid[i], grid, threads));
  }
  return curve;
}

/// Curve on the dyadic grid t0 2^-k, k = levels..0.
inline SeparationCurve dyadic_contraction_curve(std::span<const Generator> T, double t0, std::size_t grid,
                                                std::size_t levels = 40, unsigned threads = 0) {
  std::vector<double> ts;
  for (std::size_t k = levels + 1; k-- > 0;) ts.push_back(std::ldexp(t0, -static_cast<int>(k)));
  return separation_curve(T, ts, grid, threads);
}

/// Smallest n with d^n(t0) < tol for the interpolated curve.
inline std::size_t predict_iterations(const SeparationCurve& curve, double t0, double tol) {
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tolerance must be positive");
  std::size_t n = 0;
  double t = t0;
  while (t >= tol) {
    if (n >= kPredictionCap) {
      throw Error(ErrorKind::CapExceeded, "contraction estimate does not reach the tolerance within 10^6 steps");
    }
    t = curve.at(t);
    ++n;
  }
  return n;
}

inline std::size_t predict_iterations(std::span<const Generator> T, double t0, double tol, std::size_t grid,
                                      unsigned threads = 0) {
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tolerance must be positive");
  if (tol >= t0) return 0;
  return predict_iterations(dyadic_contraction_curve(T, t0, grid, 40, threads), t0, tol);
}

}  // namespace invmean
