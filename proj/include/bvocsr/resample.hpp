#pragma once

// Separable bicubic resampling with the Keys kernel, half-pixel (align-corners=false)
// sample placement and clamp-to-edge borders.

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "bvocsr/grid.hpp"

namespace bvocsr {

struct BicubicKernel {
  double a = -0.5;
};

inline double cubic_weight(double t, double a = -0.5) {
  const double x = std::abs(t);
  if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
  return 0.0;
}

namespace detail {

struct Taps {
  std::array<std::size_t, 4> index;
  std::array<double, 4> weight;
};

// Four taps per output sample along one axis of length n_in -> n_out.
inline std::vector<Taps> axis_taps(std::size_t n_in, std::size_t n_out, double a) {
  std::vector<Taps> taps(n_out);
  const double step = static_cast<double>(n_in) / static_cast<double>(n_out);
  const auto last = static_cast<std::ptrdiff_t>(n_in) - 1;
  for (std::size_t j = 0; j < n_out; ++j) {
    const double src = (static_cast<double>(j) + 0.5) * step - 0.5;
    const double base = std::floor(src);
    const double t = src - base;
    for (int k = 0; k < 4; ++k) {
      const auto i = static_cast<std::ptrdiff_t>(base) - 1 + k;
      taps[j].index[static_cast<std::size_t>(k)] = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i, 0, last));
      taps[j].weight[static_cast<std::size_t>(k)] = cubic_weight(t - static_cast<double>(k - 1), a);
    }
  }
  return taps;
}

}  // namespace detail

/// Linear bicubic resize to out_rows x out_cols, no clamping.
inline Field bicubic_resize(const Field& in, std::size_t out_rows, std::size_t out_cols, BicubicKernel kernel = {}) {
  require(!in.empty() && out_rows > 0 && out_cols > 0, ErrorKind::Dimension, "resize of empty grid");
  const auto col_taps = detail::axis_taps(in.cols(), out_cols, kernel.a);
  const auto row_taps = detail::axis_taps(in.rows(), out_rows, kernel.a);
  Field horiz(in.rows(), out_cols);
  for (std::size_t r = 0; r < in.rows(); ++r)
    for (std::size_t j = 0; j < out_cols; ++j) {
      const auto& tp = col_taps[j];
      double acc = 0.0;
      for (int k = 0; k < 4; ++k) acc += tp.weight[k] * in(r, tp.index[k]);
      horiz(r, j) = acc;
    }
  Field out(out_rows, out_cols);
  for (std::size_t i = 0; i < out_rows; ++i) {
    const auto& tp = row_taps[i];
    for (std::size_t j = 0; j < out_cols; ++j) {
      double acc = 0.0;
      for (int k = 0; k < 4; ++k) acc += tp.weight[k] * horiz(tp.index[k], j);
      out(i, j) = acc;
    }
  }
  return out;
}

inline Field bicubic_downsample(const Field& hr, std::size_t factor = 2, BicubicKernel kernel = {}) {
  require(factor >= 1, ErrorKind::Dimension, "downsample factor must be >= 1");
  require(hr.rows() % factor == 0 && hr.cols() % factor == 0 && !hr.empty(), ErrorKind::Dimension,
          "grid " + std::to_string(hr.rows()) + "x" + std::to_string(hr.cols()) + " not divisible by factor " +
              std::to_string(factor));
  Field out = bicubic_resize(hr, hr.rows() / factor, hr.cols() / factor, kernel);
  clamp_non_negative(out);
  return out;
}

inline Field bicubic_upsample(const Field& lr, std::size_t factor = 2, BicubicKernel kernel = {}) {
  require(factor >= 1 && !lr.empty(), ErrorKind::Dimension, "bad upsample input");
  Field out = bicubic_resize(lr, lr.rows() * factor, lr.cols() * factor, kernel);
  clamp_non_negative(out);
  return out;
}

}  // namespace bvocsr
