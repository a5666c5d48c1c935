#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "bvocsr/dataset.hpp"
#include "bvocsr/quantile.hpp"

using namespace bvocsr;

namespace {

QuantileTransform fit(std::vector<double> pool, std::size_t n, TransformTarget target = TransformTarget::StandardNormal) {
  FitOptions opt;
  opt.n_quantiles = n;
  opt.target = target;
  return fit_quantile_transform(pool, opt, 1);
}

std::vector<double> range(int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(i);
  return v;
}

}  // namespace

TEST(NormalQuantile, KnownValueAndSymmetry) {
  EXPECT_NEAR(gaussian_inverse_cdf(0.975), 1.959963984540054, 1e-9);
  EXPECT_NEAR(gaussian_inverse_cdf(0.5), 0.0, 1e-12);
  for (double u : {1e-7, 1e-4, 0.01, 0.2, 0.4}) {
    EXPECT_NEAR(gaussian_inverse_cdf(u), -gaussian_inverse_cdf(1 - u), 1e-9);
    EXPECT_NEAR(gaussian_cdf(gaussian_inverse_cdf(u)), u, 1e-9 * std::max(1.0, u * 1e3));
  }
}

TEST(Quantile, EvenlySpacedPool) {
  const auto t = fit(range(101), 11);
  ASSERT_EQ(t.n_quantiles(), 11u);
  for (std::size_t k = 0; k < 11; ++k) EXPECT_DOUBLE_EQ(t.quantiles()[k], 10.0 * k);
  EXPECT_NEAR(t.apply(50.0), 0.0, 1e-12);
  EXPECT_NEAR(fit(range(101), 11, TransformTarget::Uniform01).apply(50.0), 0.5, 1e-12);
  EXPECT_NEAR(fit(range(101), 11, TransformTarget::Uniform01).apply(25.0), 0.25, 1e-12);
}

TEST(Quantile, NormalPoolMedianNearCentre) {
  std::mt19937 gen(5);
  std::normal_distribution<double> d(5.0, 1.0);
  std::vector<double> pool(20000);
  for (auto& v : pool) v = d(gen);
  const auto t = fit(pool, 1000);
  EXPECT_NEAR(t.invert(0.0), 5.0, 0.05);
  EXPECT_NEAR(t.apply(6.0), 1.0, 0.05);
}

TEST(Quantile, ConstantPoolIsDegenerate) {
  const auto t = fit(std::vector<double>(50, 2.0), 10);
  EXPECT_TRUE(t.degenerate());
  EXPECT_DOUBLE_EQ(t.invert(0.3), 2.0);
  EXPECT_TRUE(std::isfinite(t.apply(2.0)));
}

TEST(Quantile, MonotoneAndRoundTrip) {
  std::mt19937 gen(9);
  std::lognormal_distribution<double> d(0.0, 1.5);
  std::vector<double> pool(5000);
  for (auto& v : pool) v = d(gen);
  const auto t = fit(pool, 1000);
  const double lo = t.quantiles().front(), hi = t.quantiles().back();
  double prev = -INFINITY;
  for (int i = 0; i <= 2000; ++i) {
    const double x = lo + (hi - lo) * i / 2000.0;
    const double z = t.apply(x);
    EXPECT_GE(z, prev);
    prev = z;
    EXPECT_NEAR(t.invert(z), x, 1e-3 * (hi - lo));
  }
}

TEST(Quantile, OutputsAreClippedToFiniteBounds) {
  const auto t = fit(range(101), 11);
  const double zmax = gaussian_inverse_cdf(1 - QuantileTransform::kBoundEps);
  EXPECT_NEAR(t.apply(1e9), zmax, 1e-9);
  EXPECT_NEAR(t.apply(-1e9), -zmax, 1e-9);
  EXPECT_DOUBLE_EQ(t.invert(40.0), 100.0);
  EXPECT_DOUBLE_EQ(t.invert(-40.0), 0.0);
}

TEST(Quantile, PoolSmallerThanQuantileCountIsDataError) {
  try {
    fit(range(5), 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Data);
  }
}

TEST(Quantile, NonFiniteInputIsNumericError) {
  const auto t = fit(range(101), 11);
  EXPECT_THROW(t.apply(NAN), Error);
  EXPECT_THROW(t.invert(INFINITY), Error);
}

TEST(Quantile, CsvRoundTrip) {
  FitOptions opt;
  opt.n_quantiles = 17;
  const auto t = fit_quantile_transform(range(300), opt, 77, DomainTag::observed(1), 0.25);
  EXPECT_EQ(parse_transform(format_transform(t)), t);
  EXPECT_THROW(parse_transform("nope\n"), Error);
}

TEST(FitFraction, DrawsRoundedPatchCount) {
  // patch i holds the constant i+1, so distinct quantile values count the patches drawn
  std::vector<PatchPair> patches;
  for (std::size_t i = 0; i < 1000; ++i)
    patches.push_back(make_patch_pair(Field(kPatchSize, kPatchSize, i + 1.0), "m", 0, 0, DomainTag::observed(1), 0));
  FitOptions opt;
  const auto ts = fit_fraction(patches, 0.05, 3, opt, 4, DomainTag::observed(1));
  ASSERT_EQ(ts.size(), 3u);
  for (const auto& t : ts) {
    EXPECT_EQ(std::set<double>(t.quantiles().begin(), t.quantiles().end()).size(), 50u);
    EXPECT_DOUBLE_EQ(t.fit_fraction(), 0.05);
  }
  EXPECT_NE(ts[0], ts[1]);
  EXPECT_EQ(fit_fraction(patches, 0.05, 3, opt, 4, DomainTag::observed(1)), ts);
  EXPECT_THROW(fit_fraction(patches, 0.0, 1, opt, 4, DomainTag::observed(1)), Error);
  EXPECT_THROW(fit_fraction(std::span(patches).first(10), 0.01, 1, opt, 4, DomainTag::observed(1)), Error);
}
