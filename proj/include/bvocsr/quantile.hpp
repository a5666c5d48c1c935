#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "bvocsr/binary_io.hpp"
#include "bvocsr/emission.hpp"
#include "bvocsr/random.hpp"
#include "bvocsr/text.hpp"

namespace bvocsr {

/// Standard normal CDF.
inline double gaussian_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

namespace detail {

// Lower-tail inverse for u <= 0.5: Acklam's rational approximation, then one Halley step on erfc.
inline double inverse_cdf_lower(double u) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01, -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  double x;
  if (u < 0.02425) {
    const double q = std::sqrt(-2.0 * std::log(u));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else {
    const double q = u - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  const double e = gaussian_cdf(x) - u;
  const double step = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - step / (1.0 + 0.5 * x * step);
}

}  // namespace detail

/// Φ⁻¹(u) for u in (0, 1). Exactly antisymmetric about 0.5.
inline double gaussian_inverse_cdf(double u) {
  if (!(u > 0.0 && u < 1.0)) fail(ErrorKind::Numeric, "inverse normal CDF argument outside (0,1)");
  if (u == 0.5) return 0.0;
  return u < 0.5 ? detail::inverse_cdf_lower(u) : -detail::inverse_cdf_lower(1.0 - u);
}

enum class TransformTarget : std::uint8_t { Uniform01, StandardNormal };

inline std::string to_string(TransformTarget t) { return t == TransformTarget::Uniform01 ? "uniform" : "normal"; }

inline TransformTarget parse_target(const std::string& s) {
  if (s == "uniform") return TransformTarget::Uniform01;
  if (s == "normal") return TransformTarget::StandardNormal;
  fail(ErrorKind::Config, "unknown transform target '" + s + "' (expected uniform|normal)");
}

struct FitOptions {
  std::size_t n_quantiles = 1000;
  TransformTarget target = TransformTarget::StandardNormal;
  std::size_t subsample_cap = 100000;
  bool nonzero_only = false;
};

/// Fitted monotone map from emission values onto a reference distribution, and its inverse.
class QuantileTransform {
 public:
  static constexpr double kBoundEps = 1e-7;

  QuantileTransform() = default;
  QuantileTransform(std::vector<double> quantiles, TransformTarget target, DomainTag fitted_on, double fit_fraction,
                    std::uint64_t seed)
      : quantiles_(std::move(quantiles)),
        target_(target),
        fitted_on_(fitted_on),
        fit_fraction_(fit_fraction),
        seed_(seed) {
    require(quantiles_.size() >= 2, ErrorKind::Data, "quantile transform needs at least 2 quantiles");
    for (std::size_t i = 0; i < quantiles_.size(); ++i) {
      require(std::isfinite(quantiles_[i]), ErrorKind::Data, "quantiles must be finite");
      require(i == 0 || quantiles_[i] >= quantiles_[i - 1], ErrorKind::Data, "quantiles must be non-decreasing");
    }
    require(fit_fraction_ > 0.0 && fit_fraction_ <= 1.0, ErrorKind::Data, "fit fraction must be in (0,1]");
  }

  std::span<const double> quantiles() const noexcept { return quantiles_; }
  std::size_t n_quantiles() const noexcept { return quantiles_.size(); }
  TransformTarget target() const noexcept { return target_; }
  const DomainTag& fitted_on() const noexcept { return fitted_on_; }
  double fit_fraction() const noexcept { return fit_fraction_; }
  std::uint64_t seed() const noexcept { return seed_; }
  bool fitted() const noexcept { return quantiles_.size() >= 2; }
  /// All quantiles equal (constant fit pool).
  bool degenerate() const noexcept { return fitted() && quantiles_.front() == quantiles_.back(); }

  /// Empirical CDF position in [0, 1]. Ties resolve to the middle of the tied rank range.
  double cdf(double x) const {
    require(std::isfinite(x), ErrorKind::Numeric, "quantile transform input is not finite");
    const auto& q = quantiles_;
    if (x <= q.front()) return 0.0;
    if (x >= q.back()) return 1.0;
    const double last = static_cast<double>(q.size() - 1);
    const auto lo = static_cast<std::size_t>(std::lower_bound(q.begin(), q.end(), x) - q.begin());
    const auto hi = static_cast<std::size_t>(std::upper_bound(q.begin(), q.end(), x) - q.begin());
    if (lo != hi) return 0.5 * static_cast<double>(lo + hi - 1) / last;
    const std::size_t i = lo - 1;
    return (static_cast<double>(i) + (x - q[i]) / (q[lo] - q[i])) / last;
  }

  double apply(double x) const {
    const double u = cdf(x);
    if (target_ == TransformTarget::Uniform01) return u;
    return gaussian_inverse_cdf(std::clamp(u, kBoundEps, 1.0 - kBoundEps));
  }

  double invert(double z) const {
    require(std::isfinite(z), ErrorKind::Numeric, "inverse quantile transform input is not finite");
    const double u = std::clamp(target_ == TransformTarget::Uniform01 ? z : gaussian_cdf(z), 0.0, 1.0);
    const auto& q = quantiles_;
    const double pos = u * static_cast<double>(q.size() - 1);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    if (i >= q.size() - 1) return q.back();
    const double x = q[i] + (pos - static_cast<double>(i)) * (q[i + 1] - q[i]);
    return std::clamp(x, q.front(), q.back());
  }

  Field apply(const Field& f) const {
    Field out(f.rows(), f.cols());
    auto src = f.values();
    auto dst = out.values();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = apply(src[i]);
    return out;
  }

  Field invert(const Field& f) const {
    Field out(f.rows(), f.cols());
    auto src = f.values();
    auto dst = out.values();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = invert(src[i]);
    return out;
  }

  bool operator==(const QuantileTransform&) const = default;

 private:
  std::vector<double> quantiles_;
  TransformTarget target_ = TransformTarget::StandardNormal;
  DomainTag fitted_on_;
  double fit_fraction_ = 1.0;
  std::uint64_t seed_ = 0;
};

/// Fits quantiles at ranks k/(n-1) with linear interpolation between order statistics.
/// Pools larger than subsample_cap are subsampled uniformly without replacement under seed.
inline QuantileTransform fit_quantile_transform(std::span<const double> pool, const FitOptions& opt, std::uint64_t seed,
                                                DomainTag fitted_on = {}, double fit_fraction = 1.0) {
  require(opt.n_quantiles >= 2, ErrorKind::Config, "n_quantiles must be >= 2");
  for (double v : pool) require(std::isfinite(v), ErrorKind::Numeric, "fit pool contains non-finite values");
  std::vector<double> values;
  if (opt.subsample_cap > 0 && pool.size() > opt.subsample_cap) {
    Rng rng(derive_seed(seed, 0x9a117));
    const auto idx = rng.sample_without_replacement(pool.size(), opt.subsample_cap);
    values.reserve(idx.size());
    for (auto i : idx) values.push_back(pool[i]);
  } else {
    values.assign(pool.begin(), pool.end());
  }
  require(values.size() >= opt.n_quantiles, ErrorKind::Data,
          "fit pool has " + std::to_string(values.size()) + " values, fewer than n_quantiles=" +
              std::to_string(opt.n_quantiles));
  std::sort(values.begin(), values.end());
  std::vector<double> q(opt.n_quantiles);
  const double span_m = static_cast<double>(values.size() - 1);
  for (std::size_t k = 0; k < q.size(); ++k) {
    const double pos = static_cast<double>(k) / static_cast<double>(q.size() - 1) * span_m;
    const auto lo = std::min(static_cast<std::size_t>(std::floor(pos)), values.size() - 1);
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    q[k] = values[lo] + frac * (values[hi] - values[lo]);
    if (k > 0) q[k] = std::max(q[k], q[k - 1]);
  }
  return QuantileTransform(std::move(q), opt.target, fitted_on, fit_fraction, seed);
}

/// Collects HR values of the given patches into a fit pool.
inline std::vector<double> pool_values(std::span<const PatchPair> patches, bool nonzero_only) {
  std::vector<double> pool;
  for (const auto& p : patches)
    for (double v : p.hr.values())
      if (!nonzero_only || v != 0.0) pool.push_back(v);
  return pool;
}

/// One transform per random subset of round(p*N) patches; subsets are drawn independently.
inline std::vector<QuantileTransform> fit_fraction(std::span<const PatchPair> patches, double p, std::size_t n_subsets,
                                                   const FitOptions& opt, std::uint64_t seed, DomainTag fitted_on) {
  require(p > 0.0 && p <= 1.0, ErrorKind::Config, "fit fraction must be in (0,1]");
  require(!patches.empty(), ErrorKind::Data, "fit pool is empty");
  const auto k = static_cast<std::size_t>(std::llround(p * static_cast<double>(patches.size())));
  require(k >= 1, ErrorKind::Data,
          "fraction " + text::format_double(p) + " of " + std::to_string(patches.size()) + " patches selects none");
  std::vector<QuantileTransform> out;
  out.reserve(n_subsets);
  for (std::size_t s = 0; s < n_subsets; ++s) {
    const auto subset_seed = derive_seed(seed, 0xf7ac, s);
    Rng rng(subset_seed);
    const auto idx = rng.sample_without_replacement(patches.size(), k);
    std::vector<PatchPair> chosen;
    chosen.reserve(k);
    for (auto i : idx) chosen.push_back(patches[i]);
    const auto pool = pool_values(chosen, opt.nonzero_only);
    out.push_back(fit_quantile_transform(pool, opt, subset_seed, fitted_on, p));
  }
  return out;
}

inline constexpr const char* kTransformHeader = "n_quantiles,target,fitted_on,fit_fraction,seed";

inline std::string format_transform(const QuantileTransform& t) {
  std::string out = std::string(kTransformHeader) + "\n";
  out += std::to_string(t.n_quantiles()) + "," + to_string(t.target()) + "," + t.fitted_on().label() + "," +
         text::format_double(t.fit_fraction()) + "," + std::to_string(t.seed()) + "\n";
  for (double q : t.quantiles()) out += text::format_double(q) + "\n";
  return out;
}

inline QuantileTransform parse_transform(const std::string& csv, const std::string& origin = "transform") {
  const auto ls = text::lines(csv);
  if (ls.size() < 2 || text::trim(ls[0]) != kTransformHeader) fail(ErrorKind::Data, origin + ": bad transform header");
  const auto h = text::split(ls[1], ',');
  if (h.size() != 5) fail(ErrorKind::Data, origin + ": bad transform metadata row");
  const auto n = static_cast<std::size_t>(text::parse_u64(h[0], origin));
  const auto target = parse_target(text::trim(h[1]));
  const auto domain = DomainTag::parse(text::trim(h[2]));
  const double fraction = text::parse_double(h[3], origin);
  const auto seed = text::parse_u64(h[4], origin);
  if (ls.size() != n + 2) fail(ErrorKind::Data, origin + ": expected " + std::to_string(n) + " quantile rows");
  std::vector<double> q;
  q.reserve(n);
  for (std::size_t i = 2; i < ls.size(); ++i) q.push_back(text::parse_double(ls[i], origin + ":" + std::to_string(i + 1)));
  return QuantileTransform(std::move(q), target, domain, fraction, seed);
}

inline void write_transform(const std::filesystem::path& path, const QuantileTransform& t) {
  io::write_text(path, format_transform(t));
}

inline QuantileTransform read_transform(const std::filesystem::path& path) {
  return parse_transform(io::read_text(path), path.string());
}

}  // namespace bvocsr
