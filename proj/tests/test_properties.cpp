#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cmath>

#include "devlab/experiment.hpp"
#include "test_support.hpp"

using namespace devlab;

namespace {

struct Case {
  DistributionModel model;
  double z_lo, z_hi;    // range for truncation levels
  double t_lo, t_hi;    // theta range inside the domain
};

std::vector<Case> cases() {
  return {{neg_exp(), -4.0, 0.0, -0.9, 8.0},
          {uniform01(), 0.05, 1.0, -30.0, 30.0},
          {exponential(1.5), 0.1, 5.0, -10.0, 10.0},
          {stretched_tail(1.7), 0.1, 3.0, -10.0, 10.0}};
}

}  // namespace

TEST(Property, KappaIsConvexInTheta) {
  testkit::Gen g(101);
  for (const auto& c : cases()) {
    const ConditionalCgf q(c.model);
    for (int k = 0; k < 60; ++k) {
      const double z = g.real(c.z_lo, c.z_hi);
      const double a = g.real(c.t_lo, c.t_hi), b = g.real(c.t_lo, c.t_hi), w = g.real(0.0, 1.0);
      const double mid = w * a + (1.0 - w) * b;
      const double lhs = q.kappa(mid, z).value();
      const double rhs = w * q.kappa(a, z).value() + (1.0 - w) * q.kappa(b, z).value();
      EXPECT_LE(lhs, rhs + 1e-8 * (1.0 + std::abs(rhs))) << c.model.name() << " z=" << z << " " << a << " " << b;
    }
  }
}

TEST(Property, KappaIncreasesWithZForPositiveTheta) {
  testkit::Gen g(102);
  for (const auto& c : cases()) {
    const ConditionalCgf q(c.model);
    for (int k = 0; k < 40; ++k) {
      double z1 = g.real(c.z_lo, c.z_hi), z2 = g.real(c.z_lo, c.z_hi);
      if (z1 > z2) std::swap(z1, z2);
      const double t = g.real(0.01, std::min({c.t_hi, -c.t_lo, 5.0}));
      EXPECT_LE(q.kappa(t, z1).value(), q.kappa(t, z2).value() + 1e-9) << c.model.name();
      EXPECT_GE(q.kappa(-t, z1).value(), q.kappa(-t, z2).value() - 1e-9) << c.model.name();
    }
  }
}

TEST(Property, KappaSlopeAtZeroIsTruncatedMean) {
  testkit::Gen g(103);
  for (const auto& c : cases()) {
    const ConditionalCgf q(c.model);
    for (int k = 0; k < 15; ++k) {
      const double z = g.real(c.z_lo, c.z_hi);
      const double h = 1e-4;
      const double slope = (q.kappa(h, z).value() - q.kappa(-h, z).value()) / (2.0 * h);
      EXPECT_NEAR(slope, truncate(c.model, z).mean(), 1e-5) << c.model.name() << " z=" << z;
    }
  }
}

TEST(Property, YoungFenchel) {
  testkit::Gen g(104);
  const auto all = cases();
  for (int k = 0; k < 1000; ++k) {
    const auto& c = all[static_cast<std::size_t>(k % 2)];  // the two bounded-above families
    const ConditionalCgf q(c.model);
    const double z = g.real(c.z_lo, c.z_hi);
    const double theta = g.real(c.t_lo, c.t_hi);
    const double x = g.real(c.model.support().lower.is_finite() ? c.model.support().lower.value() : -6.0, z);
    const ExtReal star = conjugate_kappa(q, x, ExtReal(z)).value;
    const double lhs = theta * x - q.kappa(theta, z).value();
    if (star.is_finite()) {
      EXPECT_LE(lhs, star.value() + 1e-7 * (1.0 + std::abs(star.value())));
    }
  }
}

TEST(Property, ConjugateIsConvexAndNonNegative) {
  testkit::Gen g(105);
  const ConditionalCgf q(uniform01());
  for (int k = 0; k < 100; ++k) {
    const double z = g.real(0.1, 1.0);
    const double a = g.real(0.01, 0.99) * z, b = g.real(0.01, 0.99) * z;
    const double fa = conjugate_kappa(q, a, ExtReal(z)).value.value();
    const double fb = conjugate_kappa(q, b, ExtReal(z)).value.value();
    const double fm = conjugate_kappa(q, 0.5 * (a + b), ExtReal(z)).value.value();
    EXPECT_GE(fa, -1e-12);
    EXPECT_LE(fm, 0.5 * (fa + fb) + 1e-7);
  }
}

TEST(Property, RatesAreNonNegative) {
  testkit::Gen g(106);
  rates::RateParams p;
  p.model = neg_exp();
  p.lambda = 1.3;
  p.alpha = 0.8;
  p.r0 = -1.0;
  p.mu = -1.0;
  for (const auto& key : rates::catalog_keys()) {
    const auto r = rates::make_rate(key, p);
    for (int k = 0; k < 40; ++k) {
      std::vector<double> pt;
      for (int d = 0; d < r.arity(); ++d) pt.push_back(g.real(-5.0, 5.0));
      const ExtReal v = r.evaluate(pt);
      EXPECT_TRUE(v.is_pos_inf() || v.value() >= -1e-12) << key;
    }
  }
}

TEST(Property, JointRateAdditivityForUniform) {
  testkit::Gen g(107);
  const auto c = std::make_shared<const ConditionalCgf>(uniform01());
  const auto ij = rates::i_joint(c);
  const auto ic = rates::i_cond(c);
  const auto iz = rates::i_z(uniform01());
  for (int k = 0; k < 60; ++k) {
    const double z = g.real(0.05, 1.0), y = g.real(0.01, 0.99) * z;
    EXPECT_NEAR(ij(y, z).value(), ic(y, z).value() + iz(z).value(), 1e-10);
  }
}

TEST(Property, TruncatedCdfIsRatio) {
  testkit::Gen g(108);
  for (const auto& c : cases()) {
    for (int k = 0; k < 30; ++k) {
      const double z = g.real(c.z_lo, c.z_hi);
      const auto t = truncate(c.model, z);
      const double w = z - g.real(0.0, 1.0) * (z - c.z_lo + 0.5);
      EXPECT_NEAR(t.cdf(w), c.model.cdf(w) / c.model.cdf(z), 1e-12) << c.model.name();
      EXPECT_EQ(t.cdf(z + 1.0), 1.0);
      const double p = g.real(1e-6, 1.0 - 1e-6);
      EXPECT_LE(t.quantile(p), z);
      EXPECT_NEAR(t.cdf(t.quantile(p)), p, 1e-9);
    }
  }
}

TEST(Property, WilsonIntervalBracketsTheFrequency) {
  testkit::Gen g(109);
  for (int k = 0; k < 500; ++k) {
    const std::size_t n = static_cast<std::size_t>(g.integer(1, 100000));
    const std::size_t h = static_cast<std::size_t>(g.integer(0, static_cast<int>(n)));
    const auto [lo, hi] = stats::wilson_interval(h, n);
    const double p = static_cast<double>(h) / static_cast<double>(n);
    EXPECT_LE(lo, p + 1e-15);
    EXPECT_GE(hi, p - 1e-15);
    EXPECT_GE(lo, 0.0);
    EXPECT_LE(hi, 1.0);
  }
}

TEST(Property, Log1pBoundHoldsInsideDelta) {
  testkit::Gen g(110);
  for (int k = 0; k < 50; ++k) {
    const double v = g.real(0.501, 5.0);
    const auto b = log1p_lower_bound_check(v, 2001);
    ASSERT_TRUE(b.holds);
    for (int j = 0; j < 50; ++j) {
      const double x = g.real(-b.delta, b.delta) * (1.0 - 1e-9);
      EXPECT_GE(std::log1p(x), x - v * x * x - 1e-15) << v << " " << x;
    }
  }
}

TEST(Property, MinimaLogMgfConvex) {
  testkit::Gen g(111);
  for (int k = 0; k < 200; ++k) {
    const double lambda = g.real(0.2, 3.0);
    const std::int64_t n = g.integer(1, 5000);
    const double a = g.real(-5.0, 0.95) * lambda, b = g.real(-5.0, 0.95) * lambda;
    const double fa = minima_log_mgf(lambda, n, a).value(), fb = minima_log_mgf(lambda, n, b).value();
    const double fm = minima_log_mgf(lambda, n, 0.5 * (a + b)).value();
    EXPECT_LE(fm, 0.5 * (fa + fb) + 1e-9 * (1.0 + std::abs(fa) + std::abs(fb)));
    if (a < b) {
      EXPECT_LE(fa, fb);
    }
  }
}

TEST(Property, FormatDoubleRoundTrips) {
  testkit::Gen g(112);
  for (int k = 0; k < 5000; ++k) {
    const double v = std::bit_cast<double>(g.u64());
    if (!std::isfinite(v)) continue;
    const double back = std::strtod(format_double(v).c_str(), nullptr);
    EXPECT_EQ(back, v == 0.0 ? 0.0 : v);
    EXPECT_EQ(std::strtod(format_short(v).c_str(), nullptr), back);
  }
}

TEST(Property, StreamsStayInTheOpenUnitInterval) {
  testkit::Gen g(113);
  for (int k = 0; k < 200; ++k) {
    Stream s = Rng(g.u64()).child(g.u64()).stream(g.u64());
    for (int j = 0; j < 100; ++j) {
      const double u = s.uniform();
      EXPECT_GT(u, 0.0);
      EXPECT_LT(u, 1.0);
    }
  }
}

TEST(Property, ExactMaxProbabilityIsMonotone) {
  testkit::Gen g(114);
  for (int k = 0; k < 200; ++k) {
    const std::int64_t n = g.integer(1, 100000);
    double a = g.real(0.0, 1.0), b = g.real(0.0, 1.0);
    if (a > b) std::swap(a, b);
    if (a == b) continue;
    const auto lo = exact_log_prob_max(uniform01(), n, 1.0, ExtReal::neg_inf(), ExtReal(a));
    const auto hi = exact_log_prob_max(uniform01(), n, 1.0, ExtReal::neg_inf(), ExtReal(b));
    EXPECT_LE(lo.value, hi.value);
    EXPECT_LE(hi.value, ExtReal(0.0));
  }
}
