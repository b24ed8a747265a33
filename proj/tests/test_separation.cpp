#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "families.hpp"
#include "invmean/invariance.hpp"
#include "invmean/separation.hpp"
#include "oracles.hpp"

using namespace invmean;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an invmean::Error";
  return ErrorKind::InvalidArgument;
}

const Interval k12{1, 2};

Generator pw(double p) { return Generator::power(p, k12); }

}  // namespace

TEST(Separation, IdenticalGeneratorsGiveZero) {
  for (double t : {0.01, 0.5, 1.0}) EXPECT_EQ(separation(pw(1), pw(1), t, 32).value, 0.0);
  // affinely equivalent generators define the same mean
  const Generator f = Generator::affine(-2, 7, k12);
  EXPECT_LT(separation(pw(1), f, 1.0, 32).value, 1e-15);
}

TEST(Separation, BelowDiagonal) {
  for (double p : {-1.0, 0.0, 2.0, 7.0}) {
    for (double t : {1e-6, 0.1, 0.7, 1.0}) {
      const SeparationEstimate e = separation(pw(1), pw(p), t, 24);
      EXPECT_LT(e.value, t) << p << " " << t;
      EXPECT_LE(e.y - e.x, t * (1 + 1e-12));
      EXPECT_GE(e.x, 1.0);
      EXPECT_LE(e.y, 2.0);
    }
  }
}

TEST(Separation, ArgmaxReproducesValue) {
  const SeparationEstimate e = separation(pw(1), pw(0), 1.0, 64);
  const double a = e.theta * e.x + (1 - e.theta) * e.y;
  const double g = std::exp(e.theta * std::log(e.x) + (1 - e.theta) * std::log(e.y));
  EXPECT_NEAR(std::fabs(a - g), e.value, 1e-15);
  EXPECT_EQ(e.grid, 64u);
  EXPECT_EQ(e.refinement, kSeparationRefinement);
}

TEST(Separation, CoarseMatchesBruteForceFineGrid) {
  const double coarse = separation(pw(1), pw(0), 1.0, 64).value;
  const double fine = oracle::brute_force_power_separation(1, 0, 1, 2, 1.0, 512);
  EXPECT_GT(coarse, 0.0);
  EXPECT_LT(coarse, 1.0);
  EXPECT_NEAR(coarse, fine, 1e-6);
}

TEST(Separation, RejectsBadArguments) {
  EXPECT_EQ(kind_of([] { separation(pw(1), pw(0), 0.0, 16); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { separation(pw(1), pw(0), 1.5, 16); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { separation(pw(1), pw(0), 0.5, 1); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { separation(pw(1), Generator::power(0, Interval{3, 4}), 0.5, 16); }), ErrorKind::DomainMismatch);
}

TEST(Contraction, Examples) {
  const std::vector<Generator> one = {pw(1)};
  for (double t : {0.1, 1.0}) EXPECT_EQ(contraction_bound(one, t, 16), 0.0);

  const std::vector<Generator> two = {pw(1), pw(0)};
  EXPECT_EQ(contraction_bound(two, 0.6, 32), separation(pw(1), pw(0), 0.6, 32).value);

  const std::vector<Generator> three = {pw(-1), pw(0), pw(1)};
  const double d = contraction_bound(three, 1.0, 64);
  EXPECT_NEAR(d, separation(pw(-1), pw(1), 1.0, 64).value, 1e-9);
  EXPECT_GT(d, separation(pw(-1), pw(0), 1.0, 64).value);
  EXPECT_GT(d, separation(pw(0), pw(1), 1.0, 64).value);
}

TEST(Contraction, CurveInterpolation) {
  SeparationCurve c;
  c.t_grid = {0.5, 1.0};
  c.values = {0.1, 0.4};
  EXPECT_EQ(c.at(0.0), 0.0);
  EXPECT_DOUBLE_EQ(c.at(0.25), 0.05);
  EXPECT_DOUBLE_EQ(c.at(0.75), 0.25);
  EXPECT_EQ(c.at(2.0), 0.4);
}

TEST(Predict, Examples) {
  const std::vector<Generator> one = {pw(1)};
  EXPECT_EQ(predict_iterations(one, 1.0, 1e-12, 16), 1u);
  EXPECT_EQ(predict_iterations(one, 0.3, 1e-3, 16), 1u);

  const std::vector<Generator> agm = {pw(1), pw(0)};
  EXPECT_EQ(predict_iterations(agm, 0.5, 0.5, 16), 0u);
  EXPECT_EQ(predict_iterations(agm, 0.5, 0.7, 16), 0u);

  const std::size_t n = predict_iterations(agm, 1.0, 1e-12, 64);
  const auto r = compute_invariant(fam::agm(k12), uniform_atoms({1, 2}, k12), Discretization{}, 1e-12).first;
  EXPECT_LE(r.iterations, n);
  EXPECT_LT(n, 100u);
}

TEST(Predict, CapExceededOnIdentityCurve) {
  SeparationCurve c;
  c.t_grid = {0.5, 1.0};
  c.values = {0.5, 1.0};
  EXPECT_EQ(kind_of([&] { predict_iterations(c, 1.0, 1e-3); }), ErrorKind::CapExceeded);
}

TEST(SeparationProperty, Symmetric) {
  const std::vector<double> ps = {-1, 0, 1, 2};
  for (double p : ps) {
    for (double q : ps) {
      for (double t : {0.05, 0.5, 1.0}) {
        EXPECT_EQ(separation(pw(p), pw(q), t, 24).value, separation(pw(q), pw(p), t, 24).value);
      }
    }
  }
}

TEST(SeparationProperty, NondecreasingInT) {
  const std::vector<double> ps = {-1, 0, 1, 2};
  for (std::size_t i = 0; i < ps.size(); ++i) {
    for (std::size_t j = i + 1; j < ps.size(); ++j) {
      double prev = 0.0;
      for (int k = 1; k <= 40; ++k) {
        const double d = separation(pw(ps[i]), pw(ps[j]), k / 40.0, 24).value;
        EXPECT_GE(d + 1e-12, prev) << ps[i] << " " << ps[j] << " t=" << k / 40.0;
        prev = d;
      }
    }
  }
}

TEST(SeparationProperty, GridDoublingFromBelow) {
  for (double q : {-1.0, 0.0, 2.0}) {
    for (double t : {0.3, 1.0}) {
      double raw = 0.0, refined = 0.0;
      for (std::size_t G : {8u, 16u, 32u, 64u}) {
        const double r = separation(pw(1), pw(q), t, G, 0, false).value;
        const double f = separation(pw(1), pw(q), t, G).value;
        EXPECT_GE(r, raw) << "raw G=" << G;
        EXPECT_GE(f, refined - 1e-15) << "refined G=" << G;
        EXPECT_GE(f, r);
        raw = r;
        refined = f;
      }
    }
  }
}

TEST(SeparationProperty, ThreadedScanIsIdentical) {
  const SeparationEstimate a = separation(pw(-1), pw(2), 0.8, 40, 0);
  const SeparationEstimate b = separation(pw(-1), pw(2), 0.8, 40, 4);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.y, b.y);
  EXPECT_EQ(a.theta, b.theta);
}

TEST(SeparationProperty, BoundsOneFamilyStep) {
  std::mt19937_64 rng(71);
  const AdmissibleFamily F = fam::power_pieces({-1, 1, 0, 2}, k12);
  const std::vector<Generator> T = family_generators(F);
  for (int trial = 0; trial < 20; ++trial) {
    const Measure P = oracle::random_measure(rng, k12, 6);
    const double w = P.back() - P.front();
    if (w == 0.0) continue;
    const Measure Q = apply_family(F, P, Discretization{});
    EXPECT_LE(Q.back() - Q.front(), contraction_bound(T, w, 32) + 1e-9);
  }
}
