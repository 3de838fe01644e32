#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "devlab/stats.hpp"
#include "test_support.hpp"

using namespace devlab::stats;

TEST(Stats, CompensatedSumKeepsSmallTerms) {
  CompensatedSum s;
  s.add(1e16);
  for (int i = 0; i < 1000; ++i) s.add(1.0);
  s.add(-1e16);
  EXPECT_EQ(s.value(), 1000.0);
}

TEST(Stats, NormalCdfAndChiSquare) {
  EXPECT_NEAR(normal_cdf(0.0), 0.5, 1e-16);
  EXPECT_NEAR(normal_cdf(1.959963984540054), 0.975, 1e-12);
  EXPECT_NEAR(chi2_1dof_sf(3.841458820694124), 0.05, 1e-12);
  EXPECT_EQ(chi2_1dof_sf(0.0), 1.0);
}

TEST(Stats, WilsonIntervalEdges) {
  const auto [lo0, hi0] = wilson_interval(0, 1000000);
  EXPECT_EQ(lo0, 0.0);
  EXPECT_NEAR(hi0, 3.8414588 / (1e6 + 3.8414588), 1e-12);
  const auto [lo1, hi1] = wilson_interval(10, 10);
  EXPECT_EQ(hi1, 1.0);
  EXPECT_LT(lo1, 1.0);
  const auto [lo, hi] = wilson_interval(30, 100);
  EXPECT_LT(lo, 0.3);
  EXPECT_GT(hi, 0.3);
}

TEST(Stats, KsAgainstKnownValues) {
  EXPECT_NEAR(ks_one_sample({0.5}, [](double x) { return x; }), 0.5, 1e-15);
  EXPECT_DOUBLE_EQ(ks_two_sample({1, 2, 3}, {1, 2, 3}), 0.0);
  EXPECT_DOUBLE_EQ(ks_two_sample({1, 2}, {3, 4}), 1.0);
  EXPECT_NEAR(ks_critical_two_sample_99(10000, 10000), 1.628 * std::sqrt(2e-4), 1e-15);
}

TEST(Stats, QuadrantTestDetectsDependence) {
  testkit::Gen g(5);
  std::vector<double> x, y, w;
  for (int i = 0; i < 4000; ++i) {
    x.push_back(g.real(0, 1));
    y.push_back(x.back() + 0.1 * g.real(0, 1));
    w.push_back(g.real(0, 1));
  }
  EXPECT_LT(quadrant_independence(x, y).p_value, 1e-6);
  EXPECT_GT(quadrant_independence(x, w).p_value, 1e-4);
}

TEST(Stats, Median) {
  EXPECT_EQ(median({3, 1, 2}), 2.0);
  EXPECT_EQ(median({4, 1, 3, 2}), 2.5);
}
