#include <gtest/gtest.h>

#include <cmath>

#include "bvocsr/resample.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace bvocsr;

TEST(CubicWeight, KnotValues) {
  EXPECT_DOUBLE_EQ(cubic_weight(0.0), 1.0);
  EXPECT_DOUBLE_EQ(cubic_weight(1.0), 0.0);
  EXPECT_DOUBLE_EQ(cubic_weight(-1.0), 0.0);
  EXPECT_DOUBLE_EQ(cubic_weight(2.0), 0.0);
  EXPECT_DOUBLE_EQ(cubic_weight(0.5), 0.5625);
  EXPECT_DOUBLE_EQ(cubic_weight(1.5), -0.0625);
}

TEST(CubicWeight, PartitionOfUnity) {
  for (int i = 0; i <= 1000; ++i) {
    const double t = i / 1000.0;
    const double s = cubic_weight(t + 1) + cubic_weight(t) + cubic_weight(t - 1) + cubic_weight(t - 2);
    EXPECT_NEAR(s, 1.0, 1e-12) << t;
  }
}

TEST(Bicubic, ConstantFieldIsPreserved) {
  const Field c(16, 12, 3.25);
  const auto down = bicubic_downsample(c), up = bicubic_upsample(c);
  for (double v : down.values()) EXPECT_NEAR(v, 3.25, 1e-12);
  for (double v : up.values()) EXPECT_NEAR(v, 3.25, 1e-12);
}

TEST(Bicubic, MatchesSeparableOracle) {
  const auto f = testing_support::random_field(8, 8, 3, -1.0, 1.0);
  for (auto [oh, ow] : {std::pair<std::size_t, std::size_t>{4, 4}, {16, 16}, {5, 11}}) {
    const auto got = bicubic_resize(f, oh, ow);
    const auto want = oracle::resize(f, oh, ow);
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got.values()[i], want.values()[i], 1e-12);
  }
}

TEST(Bicubic, ShapesAndDivisibility) {
  const Field f(32, 32, 1.0);
  EXPECT_EQ(bicubic_downsample(f).rows(), 16u);
  EXPECT_EQ(bicubic_upsample(Field(16, 8, 1.0)).cols(), 16u);
  try {
    bicubic_downsample(Field(31, 32, 1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Dimension);
  }
}

TEST(Bicubic, DownUpOnSmoothFieldIsAccurate) {
  Field f(64, 64);
  for (std::size_t r = 0; r < 64; ++r)
    for (std::size_t c = 0; c < 64; ++c) f(r, c) = 2.0 + std::sin(0.1 * r) * std::cos(0.07 * c);
  const auto back = bicubic_upsample(bicubic_downsample(f));
  double worst = 0;
  for (std::size_t r = 4; r < 60; ++r)
    for (std::size_t c = 4; c < 60; ++c) worst = std::max(worst, std::abs(back(r, c) - f(r, c)));
  EXPECT_LT(worst, 0.01);
}

TEST(Bicubic, OutputsAreNonNegative) {
  Field spike(8, 8, 0.0);
  spike(4, 4) = 1.0;
  const auto up = bicubic_upsample(spike);
  for (double v : up.values()) EXPECT_GE(v, 0.0);
  // the raw resize rings below zero next to an isolated spike
  EXPECT_LT(min_value(bicubic_resize(spike, 16, 16)), 0.0);
}
