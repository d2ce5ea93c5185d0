#include <gtest/gtest.h>

#include <cmath>

#include "obscura/bessel.hpp"
#include "support/oracles.hpp"

namespace {

TEST(BesselJ1, MatchesLongDoubleSeriesOnSmallArguments) {
  for (double x = 0.0; x <= 12.0; x += 0.0625) {
    const auto expected = static_cast<double>(obscura::testkit::series_j1(x, 60));
    EXPECT_NEAR(obscura::bessel_j1(x), expected, 1e-12) << "x=" << x;
  }
}

TEST(BesselJ1, MatchesStdCylBesselOnWideRange) {
  for (double x = 0.0; x <= 100.0; x += 0.01) {
    EXPECT_NEAR(obscura::bessel_j1(x), std::cyl_bessel_j(1.0, x), 1e-10) << "x=" << x;
  }
}

TEST(BesselJ1, IsOdd) {
  for (double x : {0.3, 2.5, 7.9, 8.1, 40.0}) EXPECT_DOUBLE_EQ(obscura::bessel_j1(-x), -obscura::bessel_j1(x));
}

TEST(BesselJ1, FirstZero) {
  EXPECT_NEAR(obscura::bessel_j1(obscura::kBesselJ1FirstZero), 0.0, 1e-13);
  EXPECT_GT(obscura::bessel_j1(obscura::kBesselJ1FirstZero - 1e-3), 0.0);
  EXPECT_LT(obscura::bessel_j1(obscura::kBesselJ1FirstZero + 1e-3), 0.0);
}

}  // namespace
