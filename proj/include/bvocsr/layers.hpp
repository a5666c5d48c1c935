#pragma once

// Convolution, pixel shuffle and their reverse-mode counterparts.
// Convolutions are "same" cross-correlations with zero padding, lowered to GEMM via im2col.

#include <Eigen/Core>
#include <span>
#include <vector>

#include "bvocsr/tensor.hpp"

namespace bvocsr {

/// Shape of a convolution kernel: weights laid out [out][in][k][k].
struct ConvShape {
  std::size_t in = 1;
  std::size_t out = 1;
  std::size_t k = 3;

  std::size_t weight_count() const noexcept { return out * in * k * k; }
};

namespace detail {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// col[(ci*k + ky)*k + kx][y*w + x] = in[ci][y + ky - p][x + kx - p] (0 outside)
template <typename T>
void im2col(const T* in, std::size_t cin, std::size_t h, std::size_t w, std::size_t k, std::vector<T>& col) {
  const std::size_t hw = h * w;
  const auto pad = static_cast<std::ptrdiff_t>(k / 2);
  col.assign(cin * k * k * hw, T{0});
  for (std::size_t ci = 0; ci < cin; ++ci) {
    const T* src = in + ci * hw;
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx) {
        T* dst = col.data() + ((ci * k + ky) * k + kx) * hw;
        const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - pad;
        const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - pad;
        const std::size_t x0 = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, -dx));
        const std::size_t x1 = static_cast<std::size_t>(std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(w),
                                                                                  static_cast<std::ptrdiff_t>(w) - dx));
        for (std::size_t y = 0; y < h; ++y) {
          const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y) + dy;
          if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(h)) continue;
          const T* srow = src + static_cast<std::size_t>(sy) * w;
          T* drow = dst + y * w;
          for (std::size_t x = x0; x < x1; ++x) drow[x] = srow[static_cast<std::ptrdiff_t>(x) + dx];
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const T* col, std::size_t cin, std::size_t h, std::size_t w, std::size_t k, T* in_grad) {
  const std::size_t hw = h * w;
  const auto pad = static_cast<std::ptrdiff_t>(k / 2);
  for (std::size_t ci = 0; ci < cin; ++ci) {
    T* dst = in_grad + ci * hw;
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx) {
        const T* src = col + ((ci * k + ky) * k + kx) * hw;
        const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - pad;
        const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - pad;
        const std::size_t x0 = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, -dx));
        const std::size_t x1 = static_cast<std::size_t>(std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(w),
                                                                                  static_cast<std::ptrdiff_t>(w) - dx));
        for (std::size_t y = 0; y < h; ++y) {
          const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y) + dy;
          if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(h)) continue;
          T* drow = dst + static_cast<std::size_t>(sy) * w;
          const T* srow = src + y * w;
          for (std::size_t x = x0; x < x1; ++x) drow[static_cast<std::ptrdiff_t>(x) + dx] += srow[x];
        }
      }
    }
  }
}

}  // namespace detail

template <typename T>
Tensor<T> conv2d(const Tensor<T>& in, std::span<const T> weights, std::span<const T> bias, const ConvShape& cs,
                 std::vector<T>& scratch) {
  const auto& s = in.shape();
  require(cs.k % 2 == 1, ErrorKind::Dimension, "convolution kernel size must be odd");
  require(s.c == cs.in, ErrorKind::Dimension, "conv input has " + std::to_string(s.c) + " channels, expected " +
                                                  std::to_string(cs.in));
  require(weights.size() == cs.weight_count() && bias.size() == cs.out, ErrorKind::Dimension,
          "conv parameter sizes do not match kernel shape");
  Tensor<T> out(Shape4{s.n, cs.out, s.h, s.w});
  const std::size_t hw = s.plane();
  const Eigen::Map<const detail::RowMat<T>> wmat(weights.data(), static_cast<Eigen::Index>(cs.out),
                                                  static_cast<Eigen::Index>(cs.in * cs.k * cs.k));
  const Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> bvec(bias.data(), static_cast<Eigen::Index>(cs.out));
  for (std::size_t n = 0; n < s.n; ++n) {
    Eigen::Map<detail::RowMat<T>> omat(out.sample(n), static_cast<Eigen::Index>(cs.out), static_cast<Eigen::Index>(hw));
    if (cs.k == 1) {
      const Eigen::Map<const detail::RowMat<T>> imat(in.sample(n), static_cast<Eigen::Index>(cs.in),
                                                      static_cast<Eigen::Index>(hw));
      omat.noalias() = wmat * imat;
    } else {
      detail::im2col(in.sample(n), cs.in, s.h, s.w, cs.k, scratch);
      const Eigen::Map<const detail::RowMat<T>> cmat(scratch.data(), static_cast<Eigen::Index>(cs.in * cs.k * cs.k),
                                                      static_cast<Eigen::Index>(hw));
      omat.noalias() = wmat * cmat;
    }
    omat.colwise() += bvec;
  }
  return out;
}

/// Accumulates weight/bias gradients into dweights/dbias and returns the input gradient.
template <typename T>
Tensor<T> conv2d_backward(const Tensor<T>& in, const Tensor<T>& dout, std::span<const T> weights,
                          std::span<T> dweights, std::span<T> dbias, const ConvShape& cs, std::vector<T>& scratch) {
  const auto& s = in.shape();
  require(dout.shape() == Shape4{s.n, cs.out, s.h, s.w}, ErrorKind::Dimension, "conv upstream gradient shape mismatch");
  require(dweights.size() == cs.weight_count() && dbias.size() == cs.out, ErrorKind::Dimension,
          "conv gradient buffer sizes do not match kernel shape");
  Tensor<T> din(s);
  const std::size_t hw = s.plane();
  const auto rows = static_cast<Eigen::Index>(cs.in * cs.k * cs.k);
  const Eigen::Map<const detail::RowMat<T>> wmat(weights.data(), static_cast<Eigen::Index>(cs.out), rows);
  Eigen::Map<detail::RowMat<T>> dwmat(dweights.data(), static_cast<Eigen::Index>(cs.out), rows);
  std::vector<T> dcol;
  for (std::size_t n = 0; n < s.n; ++n) {
    const Eigen::Map<const detail::RowMat<T>> gmat(dout.sample(n), static_cast<Eigen::Index>(cs.out),
                                                    static_cast<Eigen::Index>(hw));
    // plain loops: Eigen's vectorised reductions peel by pointer alignment, which breaks run-to-run bit equality
    for (std::size_t o = 0; o < cs.out; ++o) {
      const T* g = dout.sample(n) + o * hw;
      T acc = 0;
      for (std::size_t i = 0; i < hw; ++i) acc += g[i];
      dbias[o] += acc;
    }
    if (cs.k == 1) {
      const Eigen::Map<const detail::RowMat<T>> imat(in.sample(n), rows, static_cast<Eigen::Index>(hw));
      dwmat.noalias() += gmat * imat.transpose();
      Eigen::Map<detail::RowMat<T>> dimat(din.sample(n), rows, static_cast<Eigen::Index>(hw));
      dimat.noalias() = wmat.transpose() * gmat;
    } else {
      detail::im2col(in.sample(n), cs.in, s.h, s.w, cs.k, scratch);
      const Eigen::Map<const detail::RowMat<T>> cmat(scratch.data(), rows, static_cast<Eigen::Index>(hw));
      dwmat.noalias() += gmat * cmat.transpose();
      dcol.resize(scratch.size());
      Eigen::Map<detail::RowMat<T>> dcmat(dcol.data(), rows, static_cast<Eigen::Index>(hw));
      dcmat.noalias() = wmat.transpose() * gmat;
      detail::col2im_add(dcol.data(), cs.in, s.h, s.w, cs.k, din.sample(n));
    }
  }
  return din;
}

/// (N, 4C, H, W) -> (N, C, 2H, 2W); channel 4c + 2dy + dx at (y, x) lands on channel c at (2y+dy, 2x+dx).
template <typename T>
Tensor<T> pixel_shuffle(const Tensor<T>& in) {
  const auto& s = in.shape();
  require(s.c % 4 == 0, ErrorKind::Dimension, "pixel shuffle needs a channel count divisible by 4");
  Tensor<T> out(Shape4{s.n, s.c / 4, s.h * 2, s.w * 2});
  for (std::size_t n = 0; n < s.n; ++n)
    for (std::size_t c = 0; c < s.c / 4; ++c)
      for (std::size_t dy = 0; dy < 2; ++dy)
        for (std::size_t dx = 0; dx < 2; ++dx) {
          const T* src = in.plane(n, c * 4 + 2 * dy + dx);
          for (std::size_t y = 0; y < s.h; ++y)
            for (std::size_t x = 0; x < s.w; ++x) out.at(n, c, 2 * y + dy, 2 * x + dx) = src[y * s.w + x];
        }
  return out;
}

/// Exact inverse of pixel_shuffle; also its adjoint, so it is the backward pass.
template <typename T>
Tensor<T> pixel_unshuffle(const Tensor<T>& in) {
  const auto& s = in.shape();
  require(s.h % 2 == 0 && s.w % 2 == 0, ErrorKind::Dimension, "pixel unshuffle needs even spatial dimensions");
  Tensor<T> out(Shape4{s.n, s.c * 4, s.h / 2, s.w / 2});
  for (std::size_t n = 0; n < s.n; ++n)
    for (std::size_t c = 0; c < s.c; ++c)
      for (std::size_t dy = 0; dy < 2; ++dy)
        for (std::size_t dx = 0; dx < 2; ++dx) {
          T* dst = out.plane(n, c * 4 + 2 * dy + dx);
          for (std::size_t y = 0; y < s.h / 2; ++y)
            for (std::size_t x = 0; x < s.w / 2; ++x) dst[y * (s.w / 2) + x] = in.at(n, c, 2 * y + dy, 2 * x + dx);
        }
  return out;
}

}  // namespace bvocsr
