#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "devlab/quadrature.hpp"

using devlab::ExtReal;
namespace quad = devlab::quad;

TEST(Quadrature, FiniteInterval) {
  const auto r = quad::integrate([](double x) { return std::sin(x); }, ExtReal(0.0), ExtReal(std::numbers::pi));
  EXPECT_NEAR(r.value, 2.0, 1e-12);
}

TEST(Quadrature, HalfLineAndWholeLine) {
  const auto a = quad::integrate([](double x) { return std::exp(-x); }, ExtReal(0.0), ExtReal::pos_inf());
  EXPECT_NEAR(a.value, 1.0, 1e-11);
  const auto b = quad::integrate([](double x) { return std::exp(x); }, ExtReal::neg_inf(), ExtReal(-2.0));
  EXPECT_NEAR(b.value, std::exp(-2.0), 1e-12);
  const auto c = quad::integrate([](double x) { return std::exp(-x * x); }, ExtReal::neg_inf(), ExtReal::pos_inf());
  EXPECT_NEAR(c.value, std::sqrt(std::numbers::pi), 1e-11);
}

TEST(Quadrature, LogIntegrateSurvivesHugeExponents) {
  // log of int_0^1 e^{800 w} dw = 800 + log((1 - e^{-800}) / 800)
  const auto v = quad::log_integrate([](double w) { return 800.0 * w; }, ExtReal(0.0), ExtReal(1.0));
  ASSERT_TRUE(v.is_finite());
  EXPECT_NEAR(v.value(), 800.0 - std::log(800.0), 1e-9);
  const auto lo = quad::log_integrate([](double w) { return -900.0 * w; }, ExtReal(0.0), ExtReal::pos_inf());
  EXPECT_NEAR(lo.value(), -std::log(900.0), 1e-9);
}

TEST(Quadrature, LogIntegrateOfZeroIsMinusInfinity) {
  const auto v = quad::log_integrate([](double) { return -std::numeric_limits<double>::infinity(); }, ExtReal(0.0),
                                     ExtReal(1.0));
  EXPECT_TRUE(v.is_neg_inf());
}
