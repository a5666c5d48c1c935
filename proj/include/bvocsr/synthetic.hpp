#pragma once

// Seeded generator of a simulated-like (S) emission series and an observed-like (O) series derived
// from it through temporal aggregation, smoothing, noise, a dynamic-range map and a coarser grid.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "bvocsr/emission.hpp"
#include "bvocsr/random.hpp"
#include "bvocsr/resample.hpp"

namespace bvocsr {

struct FieldConfig {
  std::size_t height = 128;
  std::size_t width = 128;
  std::size_t blob_count = 24;
  double spectral_slope = -3.0;  // power spectrum ~ |k|^slope
  double zero_fraction = 0.3;
  double amplitude = 1e-9;
  double texture_strength = 0.6;
  double relief_slope = -4.0;  // spectrum of the relief whose lowest cells become ocean; steeper = smoother coast
  double resolution_deg = 0.25;
  std::size_t supersample = 2;  // sub-cells per axis; coastal cells keep only their land share
  std::uint64_t seed = 42;

  void validate() const {
    require(height >= kPatchSize && width >= kPatchSize && height % kPatchSize == 0 && width % kPatchSize == 0,
            ErrorKind::Config, "field dimensions must be >= 32 and divisible by 32");
    require(zero_fraction >= 0.0 && zero_fraction < 1.0, ErrorKind::Config, "zero_fraction must be in [0,1)");
    require(amplitude > 0.0, ErrorKind::Config, "amplitude must be positive");
    require(texture_strength >= 0.0 && texture_strength < 1.0, ErrorKind::Config,
            "texture_strength must be in [0,1)");
    require(resolution_deg > 0.0, ErrorKind::Config, "resolution must be positive");
    require(relief_slope < 0.0, ErrorKind::Config, "relief_slope must be negative");
    require(supersample >= 1 && supersample <= 8, ErrorKind::Config, "supersample must be in [1,8]");
  }
};

struct DomainShiftConfig {
  std::size_t aggregation_window = 6;
  double blur_sigma = 1.5;
  double noise_level = 0.2;
  double gain = 2.5;
  double gamma = 0.85;
  std::size_t native_downscale = 2;

  static DomainShiftConfig null_shift() { return {1, 0.0, 0.0, 1.0, 1.0, 1}; }

  void validate() const {
    require(aggregation_window >= 1, ErrorKind::Config, "aggregation_window must be >= 1");
    require(blur_sigma >= 0.0, ErrorKind::Config, "blur_sigma must be >= 0");
    require(noise_level >= 0.0, ErrorKind::Config, "noise_level must be >= 0");
    require(gain > 0.0 && gamma > 0.0, ErrorKind::Config, "gain and gamma must be positive");
    require(native_downscale >= 1, ErrorKind::Config, "native_downscale must be >= 1");
  }
};

namespace detail {

// In-place 1-D inverse DFT of length n along a strided view.
inline void idft_strided(std::complex<double>* data, std::size_t n, std::size_t stride,
                         const std::vector<std::complex<double>>& twiddle, std::vector<std::complex<double>>& buf) {
  buf.assign(n, {});
  for (std::size_t j = 0; j < n; ++j) {
    std::complex<double> acc{};
    for (std::size_t k = 0; k < n; ++k) acc += data[k * stride] * twiddle[(j * k) % n];
    buf[j] = acc;
  }
  for (std::size_t j = 0; j < n; ++j) data[j * stride] = buf[j];
}

inline std::vector<std::complex<double>> twiddles(std::size_t n) {
  std::vector<std::complex<double>> t(n);
  for (std::size_t k = 0; k < n; ++k)
    t[k] = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
  return t;
}

inline double signed_freq(std::size_t k, std::size_t n) {
  return k <= n / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n);
}

}  // namespace detail

/// Zero-mean, unit-variance random field whose power spectrum follows |k|^slope.
inline Field power_law_field(std::size_t h, std::size_t w, double slope, Rng& rng) {
  std::vector<std::complex<double>> spec(h * w);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      const double fy = detail::signed_freq(y, h) / static_cast<double>(h);
      const double fx = detail::signed_freq(x, w) / static_cast<double>(w);
      const double k = std::sqrt(fy * fy + fx * fx);
      const double re = rng.normal(), im = rng.normal();
      spec[y * w + x] = k > 0.0 ? std::complex<double>(re, im) * std::pow(k, slope / 2.0) : 0.0;
    }
  std::vector<std::complex<double>> buf;
  const auto tw = detail::twiddles(w), th = detail::twiddles(h);
  for (std::size_t y = 0; y < h; ++y) detail::idft_strided(spec.data() + y * w, w, 1, tw, buf);
  for (std::size_t x = 0; x < w; ++x) detail::idft_strided(spec.data() + x, h, w, th, buf);
  Field out(h, w);
  double mean = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) mean += (out.values()[i] = spec[i].real());
  mean /= static_cast<double>(out.size());
  double var = 0.0;
  for (auto& v : out.values()) {
    v -= mean;
    var += v * v;
  }
  const double sd = std::sqrt(var / static_cast<double>(out.size()));
  if (sd > 0.0)
    for (auto& v : out.values()) v /= sd;
  return out;
}

/// Positive multiplicative texture 1 + strength * g / max|g| with power-law spectrum g.
inline Field power_law_texture(std::size_t h, std::size_t w, double slope, double strength, Rng& rng) {
  Field g = power_law_field(h, w, slope, rng);
  double peak = 0.0;
  for (double v : g.values()) peak = std::max(peak, std::abs(v));
  for (auto& v : g.values()) v = 1.0 + (peak > 0.0 ? strength * v / peak : 0.0);
  return g;
}

namespace detail {

inline Field relief_field(const FieldConfig& cfg) {
  Rng rng(derive_seed(cfg.seed, 0x0cea));
  return power_law_field(cfg.height, cfg.width, cfg.relief_slope, rng);
}

/// Ocean cells of the output grid and the relief level separating them from land.
inline std::pair<Grid<unsigned char>, double> ocean_cut(const FieldConfig& cfg, const Field& relief) {
  Grid<unsigned char> mask(cfg.height, cfg.width, 0);
  const auto n_ocean = static_cast<std::size_t>(std::ceil(cfg.zero_fraction * static_cast<double>(mask.size())));
  if (n_ocean == 0) return {mask, -std::numeric_limits<double>::infinity()};
  std::vector<std::size_t> order(relief.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return relief.values()[a] < relief.values()[b]; });
  for (std::size_t i = 0; i < n_ocean; ++i) mask.values()[order[i]] = 1;
  return {mask, relief.values()[order[n_ocean - 1]]};
}

}  // namespace detail

/// Static land/ocean mask: true = ocean. Exactly ceil(zero_fraction * H * W) cells are ocean.
inline Grid<unsigned char> ocean_mask(const FieldConfig& cfg) {
  return detail::ocean_cut(cfg, detail::relief_field(cfg)).first;
}

/// Simulated series: static bumps, texture and ocean mask are built once; frame(t) adds the
/// time-varying parts. Frame t is
/// (sum of seasonal anisotropic Gaussian bumps) x (power-law texture), rendered on a supersampled grid
/// and area-averaged. Sub-cells below the coastline relief level are water, so coastal land cells carry
/// partial values; ocean cells of the output grid are exactly zero.
class SimulatedGenerator {
 public:
  explicit SimulatedGenerator(FieldConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    const std::size_t ss = cfg_.supersample, hh = cfg_.height * ss, ww = cfg_.width * ss;
    Rng rng(derive_seed(cfg_.seed, 0xb10b));
    const double size = static_cast<double>(std::min(cfg_.height, cfg_.width));
    bumps_.resize(cfg_.blob_count);
    for (auto& b : bumps_) {
      b.cy = rng.uniform(0.0, static_cast<double>(cfg_.height));
      b.cx = rng.uniform(0.0, static_cast<double>(cfg_.width));
      const double major = rng.uniform(0.04, 0.18) * size;
      const double minor = major * rng.uniform(0.3, 1.0);
      b.inv_a = 1.0 / (2.0 * major * major);
      b.inv_b = 1.0 / (2.0 * minor * minor);
      const double theta = rng.uniform(0.0, std::numbers::pi);
      b.cos_t = std::cos(theta);
      b.sin_t = std::sin(theta);
      b.weight = rng.uniform(0.3, 1.0);
      b.phase = rng.uniform(0.0, std::numbers::pi);
    }
    Rng tex_rng(derive_seed(cfg_.seed, 0x7e47));
    texture_ = power_law_field(hh, ww, cfg_.spectral_slope, tex_rng);

    const Field relief = detail::relief_field(cfg_);
    auto [mask, level] = detail::ocean_cut(cfg_, relief);
    mask_ = std::move(mask);
    land_ = Grid<unsigned char>(hh, ww, 0);
    const Field fine_relief = ss == 1 ? relief : bicubic_resize(relief, hh, ww);
    for (std::size_t y = 0; y < cfg_.height; ++y)
      for (std::size_t x = 0; x < cfg_.width; ++x) {
        if (mask_(y, x)) continue;
        std::size_t n = 0, best = 0;
        double best_v = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < ss * ss; ++k) {
          const std::size_t sy = y * ss + k / ss, sx = x * ss + k % ss;
          const double r = fine_relief(sy, sx);
          if (r > level) {
            land_(sy, sx) = 1;
            ++n;
          }
          if (r > best_v) best_v = r, best = k;
        }
        if (n == 0) land_(y * ss + best / ss, x * ss + best % ss) = 1;
      }
  }

  const FieldConfig& config() const noexcept { return cfg_; }
  const Grid<unsigned char>& mask() const noexcept { return mask_; }

  EmissionMap frame(std::int64_t t) const {
    const std::size_t ss = cfg_.supersample, hh = cfg_.height * ss, ww = cfg_.width * ss;
    Rng frame_rng(derive_seed(cfg_.seed, 0x7e48, static_cast<std::uint64_t>(t)));
    const Field dynamic = power_law_field(hh, ww, cfg_.spectral_slope, frame_rng);
    Field tex(hh, ww);
    double peak = 0.0;
    for (std::size_t i = 0; i < tex.size(); ++i) {
      tex.values()[i] = std::numbers::sqrt2 / 2.0 * (texture_.values()[i] + dynamic.values()[i]);
      peak = std::max(peak, std::abs(tex.values()[i]));
    }
    for (auto& v : tex.values()) v = 1.0 + cfg_.texture_strength * v / peak;

    std::vector<double> season(bumps_.size());
    for (std::size_t i = 0; i < bumps_.size(); ++i) {
      const double s = std::sin(std::numbers::pi * static_cast<double>(t) / 12.0 + bumps_[i].phase);
      season[i] = 0.15 + 0.85 * s * s;
    }
    const double step = 1.0 / static_cast<double>(ss), cell = step * step;
    Field values(cfg_.height, cfg_.width, 0.0);
    for (std::size_t sy = 0; sy < hh; ++sy)
      for (std::size_t sx = 0; sx < ww; ++sx) {
        if (!land_(sy, sx)) continue;
        double acc = 0.05;
        const double py = (static_cast<double>(sy) + 0.5) * step, px = (static_cast<double>(sx) + 0.5) * step;
        for (std::size_t i = 0; i < bumps_.size(); ++i) {
          const auto& b = bumps_[i];
          const double dy = py - b.cy, dx = px - b.cx;
          const double u = b.cos_t * dx + b.sin_t * dy, v = -b.sin_t * dx + b.cos_t * dy;
          acc += b.weight * season[i] * std::exp(-(u * u * b.inv_a + v * v * b.inv_b));
        }
        values(sy / ss, sx / ss) += cell * cfg_.amplitude * acc * tex(sy, sx);
      }
    return EmissionMap(std::move(values), cfg_.resolution_deg, DomainTag::simulated(), t);
  }

 private:
  struct Bump {
    double cy, cx, inv_a, inv_b, cos_t, sin_t, weight, phase;
  };
  FieldConfig cfg_;
  std::vector<Bump> bumps_;
  Field texture_;             // supersampled grid
  Grid<unsigned char> mask_;  // output grid, 1 = ocean
  Grid<unsigned char> land_;  // supersampled grid, 1 = land
};

inline EmissionMap gen_simulated_frame(const FieldConfig& cfg, std::int64_t t) {
  return SimulatedGenerator(cfg).frame(t);
}

/// Separable Gaussian blur truncated at 3 sigma, clamp-to-edge borders. sigma = 0 is the identity.
inline Field gaussian_blur(const Field& f, double sigma) {
  if (sigma <= 0.0) return f;
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (std::ptrdiff_t i = -radius; i <= radius; ++i)
    sum += (k[static_cast<std::size_t>(i + radius)] = std::exp(-0.5 * static_cast<double>(i * i) / (sigma * sigma)));
  for (auto& v : k) v /= sum;
  const auto h = static_cast<std::ptrdiff_t>(f.rows()), w = static_cast<std::ptrdiff_t>(f.cols());
  Field tmp(f.rows(), f.cols()), out(f.rows(), f.cols());
  for (std::ptrdiff_t y = 0; y < h; ++y)
    for (std::ptrdiff_t x = 0; x < w; ++x) {
      double acc = 0.0;
      for (std::ptrdiff_t i = -radius; i <= radius; ++i)
        acc += k[static_cast<std::size_t>(i + radius)] *
               f(static_cast<std::size_t>(y), static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(x + i, 0, w - 1)));
      tmp(static_cast<std::size_t>(y), static_cast<std::size_t>(x)) = acc;
    }
  for (std::ptrdiff_t y = 0; y < h; ++y)
    for (std::ptrdiff_t x = 0; x < w; ++x) {
      double acc = 0.0;
      for (std::ptrdiff_t i = -radius; i <= radius; ++i)
        acc += k[static_cast<std::size_t>(i + radius)] *
               tmp(static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(y + i, 0, h - 1)), static_cast<std::size_t>(x));
      out(static_cast<std::size_t>(y), static_cast<std::size_t>(x)) = acc;
    }
  return out;
}

/// Bicubic decimation by `factor` that keeps ocean exactly zero: a coarse cell is ocean when all of its
/// fine parents are zero.
inline Field coarsen(const Field& f, std::size_t factor) {
  if (factor == 1) return f;
  Field out = bicubic_downsample(f, factor);
  for (std::size_t y = 0; y < out.rows(); ++y)
    for (std::size_t x = 0; x < out.cols(); ++x) {
      bool ocean = true;
      for (std::size_t dy = 0; dy < factor && ocean; ++dy)
        for (std::size_t dx = 0; dx < factor && ocean; ++dx) ocean = f(y * factor + dy, x * factor + dx) == 0.0;
      if (ocean) out(y, x) = 0.0;
    }
  return out;
}

/// Flux-conserving regrid: each coarse cell is the mean of its factor x factor parents.
inline Field area_average(const Field& f, std::size_t factor) {
  require(factor >= 1 && f.rows() % factor == 0 && f.cols() % factor == 0, ErrorKind::Dimension,
          "area_average: grid " + std::to_string(f.rows()) + "x" + std::to_string(f.cols()) +
              " is not divisible by " + std::to_string(factor));
  Field out(f.rows() / factor, f.cols() / factor, 0.0);
  const double w = 1.0 / static_cast<double>(factor * factor);
  for (std::size_t y = 0; y < f.rows(); ++y)
    for (std::size_t x = 0; x < f.cols(); ++x) out(y / factor, x / factor) += w * f(y, x);
  return out;
}

inline EmissionMap coarsen(const EmissionMap& m, std::size_t factor) {
  return EmissionMap(coarsen(m.values(), factor), m.resolution_deg() * static_cast<double>(factor), m.domain(),
                     m.time_index(), m.species());
}

/// Observed-like frame from k consecutive simulated frames:
/// temporal mean -> blur -> multiplicative lognormal noise -> gain * v^gamma -> coarser grid -> clamp >= 0.
/// Cells that are zero in the temporal mean (ocean) stay zero.
inline EmissionMap derive_observed_frame(std::span<const EmissionMap> frames, const DomainShiftConfig& shift,
                                         std::uint64_t seed, std::uint32_t instrument = 1) {
  shift.validate();
  require(!frames.empty(), ErrorKind::Data, "derive_observed_frame: no frames");
  const std::size_t h = frames[0].height(), w = frames[0].width();
  for (const auto& f : frames)
    require(f.height() == h && f.width() == w, ErrorKind::Dimension, "derive_observed_frame: frame shapes differ");
  Field mean(h, w, 0.0);
  for (const auto& f : frames)
    for (std::size_t i = 0; i < mean.size(); ++i) mean.values()[i] += f.values().values()[i];
  for (auto& v : mean.values()) v /= static_cast<double>(frames.size());

  Field v = gaussian_blur(mean, shift.blur_sigma);
  Rng rng(derive_seed(seed, 0x0b5e, static_cast<std::uint64_t>(frames.back().time_index())));
  const double s = shift.noise_level;
  for (std::size_t i = 0; i < v.size(); ++i) {
    double& x = v.values()[i];
    if (mean.values()[i] == 0.0) {
      x = 0.0;
      continue;
    }
    if (s > 0.0) x *= std::exp(s * rng.normal() - 0.5 * s * s);
    x = shift.gain * std::pow(std::max(x, 0.0), shift.gamma);
  }
  Field out = coarsen(v, shift.native_downscale);
  clamp_non_negative(out);
  return EmissionMap(std::move(out), frames[0].resolution_deg() * static_cast<double>(shift.native_downscale),
                     DomainTag::observed(instrument), frames.back().time_index(), frames[0].species());
}

/// 1-Wasserstein distance between two empirical distributions (equal-mass quantile matching).
inline double wasserstein1(std::vector<double> a, std::vector<double> b, std::size_t grid = 2000) {
  require(!a.empty() && !b.empty(), ErrorKind::Data, "wasserstein1: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const auto q = [](const std::vector<double>& v, double u) {
    const double pos = u * static_cast<double>(v.size() - 1);
    const auto i = static_cast<std::size_t>(pos);
    const auto j = std::min(i + 1, v.size() - 1);
    return v[i] + (pos - static_cast<double>(i)) * (v[j] - v[i]);
  };
  double acc = 0.0;
  for (std::size_t k = 0; k < grid; ++k) {
    const double u = (static_cast<double>(k) + 0.5) / static_cast<double>(grid);
    acc += std::abs(q(a, u) - q(b, u));
  }
  return acc / static_cast<double>(grid);
}

}  // namespace bvocsr
