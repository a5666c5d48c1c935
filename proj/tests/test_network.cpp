#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bvocsr/network.hpp"
#include "oracles.hpp"

using namespace bvocsr;

namespace {

template <typename T>
Tensor<T> random_tensor(Shape4 s, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> d(0.0, 1.0);
  Tensor<T> t(s);
  for (auto& v : t.values()) v = static_cast<T>(d(gen));
  return t;
}

}  // namespace

TEST(Conv2d, MatchesDirectLoops) {
  const ConvShape cs{3, 5, 3};
  const auto x = random_tensor<double>({2, 3, 7, 6}, 1);
  const auto w = random_tensor<double>({1, 1, 1, cs.weight_count()}, 2);
  const auto b = random_tensor<double>({1, 1, 1, cs.out}, 3);
  std::vector<double> scratch;
  const auto y = conv2d<double>(x, w.values(), b.values(), cs, scratch);
  ASSERT_EQ(y.shape(), (Shape4{2, 5, 7, 6}));
  for (std::size_t n = 0; n < 2; ++n) {
    std::vector<double> in(x.sample(n), x.sample(n) + 3 * 42);
    const auto ref = oracle::conv(in, 3, 7, 6, {w.values().begin(), w.values().end()},
                                {b.values().begin(), b.values().end()}, 5, 3);
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(y.sample(n)[i], ref[i], 1e-6);
  }
}

TEST(Conv2d, OneByOneIdentityKernelCopiesInput) {
  const std::size_t c = 4;
  std::vector<float> w(c * c, 0.0f), b(c, 0.0f);
  for (std::size_t i = 0; i < c; ++i) w[i * c + i] = 1.0f;
  const auto x = random_tensor<float>({1, c, 5, 5}, 4);
  std::vector<float> scratch;
  EXPECT_EQ(conv2d<float>(x, w, b, ConvShape{c, c, 1}, scratch), x);
}

TEST(Conv2d, RejectsChannelMismatch) {
  std::vector<float> w(9 * 2), b(1), scratch;
  const Tensor<float> x({1, 3, 4, 4});
  EXPECT_THROW(conv2d<float>(x, w, b, ConvShape{2, 1, 3}, scratch), Error);
}

TEST(PixelShuffle, PlacesChannelsOnTheSubpixelGrid) {
  Tensor<float> in({1, 4, 1, 1});
  for (std::size_t i = 0; i < 4; ++i) in.at(0, i, 0, 0) = static_cast<float>(i + 1);
  const auto out = pixel_shuffle(in);
  ASSERT_EQ(out.shape(), (Shape4{1, 1, 2, 2}));
  EXPECT_EQ(out.at(0, 0, 0, 0), 1.0f);
  EXPECT_EQ(out.at(0, 0, 0, 1), 2.0f);
  EXPECT_EQ(out.at(0, 0, 1, 0), 3.0f);
  EXPECT_EQ(out.at(0, 0, 1, 1), 4.0f);
}

TEST(PixelShuffle, RoundTripAndEnergy) {
  const auto x = random_tensor<double>({2, 8, 3, 5}, 5);
  const auto y = pixel_shuffle(x);
  EXPECT_EQ(y.shape(), (Shape4{2, 2, 6, 10}));
  EXPECT_EQ(pixel_unshuffle(y), x);
  double ex = 0, ey = 0;
  for (double v : x.values()) ex += v * v;
  for (double v : y.values()) ey += v * v;
  EXPECT_DOUBLE_EQ(ex, ey);
}

TEST(SrNetwork, ForwardMatchesNaiveOracle) {
  const NetworkConfig cfg{8, 2, 4};
  const auto params = init_parameters<float>(cfg, 7);
  const SrNetwork<float> net(cfg, params);
  const auto x = random_tensor<float>({2, 1, 6, 5}, 8);
  const auto y = net.forward(x);
  ASSERT_EQ(y.shape(), (Shape4{2, 1, 12, 10}));
  for (std::size_t n = 0; n < 2; ++n) {
    std::vector<double> in(x.sample(n), x.sample(n) + 30);
    const auto ref = oracle::forward(cfg, params, in, 6, 5);
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(y.sample(n)[i], ref[i], 1e-5 * (1 + std::abs(ref[i])));
  }
}

TEST(SrNetwork, DiracParametersReplicatePixels) {
  const NetworkConfig cfg{};
  const SrNetwork<float> net(cfg, dirac_parameters<float>(cfg));
  Tensor<float> x({1, 1, 4, 4}, 2.5f);
  const auto y = net.forward(x);
  for (float v : y.values()) EXPECT_FLOAT_EQ(v, 2.5f);
}

TEST(SrNetwork, RejectsWrongLayout) {
  auto p = zero_parameters<float>(NetworkConfig{8, 1, 4});
  EXPECT_THROW((SrNetwork<float>(NetworkConfig{8, 2, 4}, p)), Error);
  p.tensors[0].dims[0] = 7;
  EXPECT_THROW((SrNetwork<float>(NetworkConfig{8, 1, 4}, p)), Error);
}

TEST(SrNetwork, RejectsNonFiniteInput) {
  const NetworkConfig cfg{8, 1, 4};
  const SrNetwork<float> net(cfg, init_parameters<float>(cfg, 1));
  Tensor<float> x({1, 1, 4, 4}, 0.0f);
  x.at(0, 0, 1, 1) = std::nanf("");
  try {
    net.forward(x);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Numeric);
  }
}

class GradientCheck : public ::testing::TestWithParam<unsigned> {};

TEST_P(GradientCheck, BackwardMatchesCentralDifferences) {
  EXPECT_LT(oracle::gradient_check(NetworkConfig{4, 1, 2}, GetParam()), 1e-5);
}

INSTANTIATE_TEST_SUITE_P(Seeds, GradientCheck, ::testing::Values(1u, 2u, 3u, 4u, 5u));

TEST(Init, HeNormalStandardDeviation) {
  const NetworkConfig cfg{};
  const auto p = init_parameters<double>(cfg, 11);
  const auto layout = parameter_layout(cfg);
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const auto& v = p.tensors[i].data;
    if (layout[i].fan_in == 0) {
      for (double x : v) EXPECT_EQ(x, 0.0);
      continue;
    }
    if (v.size() < 200) continue;
    double s = 0, s2 = 0;
    for (double x : v) s += x, s2 += x * x;
    const double n = static_cast<double>(v.size());
    const double sd = std::sqrt(s2 / n - (s / n) * (s / n));
    EXPECT_NEAR(sd / std::sqrt(2.0 / static_cast<double>(layout[i].fan_in)), 1.0, 0.10) << layout[i].name;
  }
}

TEST(Init, DeterministicUnderSeed) {
  const NetworkConfig cfg{8, 2, 4};
  EXPECT_EQ(init_parameters<float>(cfg, 3), init_parameters<float>(cfg, 3));
  EXPECT_NE(init_parameters<float>(cfg, 3), init_parameters<float>(cfg, 4));
}

TEST(Layout, ParameterNamesAndShapes) {
  const auto layout = parameter_layout(NetworkConfig{32, 4, 8});
  ASSERT_EQ(layout.size(), 4u + 8u * 4u + 2u);
  EXPECT_EQ(layout[0].name, "head.w");
  EXPECT_EQ(layout[0].dims, (std::vector<std::size_t>{32, 1, 3, 3}));
  EXPECT_EQ(layout[6].name, "block0.ca1.w");
  EXPECT_EQ(layout[6].dims, (std::vector<std::size_t>{4, 32, 1, 1}));
  EXPECT_EQ(layout[34].name, "up.w");
  EXPECT_EQ(layout[34].dims, (std::vector<std::size_t>{128, 32, 3, 3}));
  EXPECT_EQ(layout[36].name, "tail.w");
}
