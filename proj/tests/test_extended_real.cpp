#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "devlab/errors.hpp"
#include "devlab/extended_real.hpp"

using devlab::ExtReal;

TEST(ExtReal, OrderingAcrossKinds) {
  EXPECT_LT(ExtReal::neg_inf(), ExtReal(-1e300));
  EXPECT_LT(ExtReal(1e300), ExtReal::pos_inf());
  EXPECT_EQ(ExtReal::pos_inf(), ExtReal::pos_inf());
  EXPECT_FALSE(ExtReal::pos_inf() < ExtReal::pos_inf());
  EXPECT_EQ(-ExtReal::pos_inf(), ExtReal::neg_inf());
}

TEST(ExtReal, ValueOfInfinityThrows) {
  EXPECT_THROW((void)ExtReal::pos_inf().value(), std::domain_error);
  EXPECT_EQ(ExtReal::pos_inf().to_double(), std::numeric_limits<double>::infinity());
}

TEST(ExtReal, FromDoubleRejectsNan) {
  EXPECT_THROW(ExtReal::from_double(std::nan("")), devlab::ArgumentError);
  EXPECT_TRUE(ExtReal::from_double(-INFINITY).is_neg_inf());
}

TEST(ExtReal, ArithmeticRefusesIndeterminateForms) {
  EXPECT_THROW((void)(ExtReal::pos_inf() + ExtReal::neg_inf()), std::domain_error);
  EXPECT_THROW((void)(ExtReal::pos_inf() - ExtReal::pos_inf()), std::domain_error);
  EXPECT_TRUE((ExtReal::pos_inf() + ExtReal(3.0)).is_pos_inf());
  EXPECT_DOUBLE_EQ((ExtReal(2.0) - ExtReal(0.5)).value(), 1.5);
}

TEST(ExtReal, Streams) {
  std::ostringstream s;
  s << ExtReal::neg_inf() << " " << ExtReal(1.5) << " " << ExtReal::pos_inf();
  EXPECT_EQ(s.str(), "-inf 1.5 +inf");
}
