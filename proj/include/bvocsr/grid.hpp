#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "bvocsr/error.hpp"

namespace bvocsr {

/// Dense row-major 2-D array.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t rows, std::size_t cols, T fill = T{}) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Grid(std::size_t rows, std::size_t cols, std::vector<T> data) : rows_(rows), cols_(cols), data_(std::move(data)) {
    require(data_.size() == rows_ * cols_, ErrorKind::Dimension, "grid data length does not match shape");
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }
  std::vector<T>& storage() noexcept { return data_; }
  const std::vector<T>& storage() const noexcept { return data_; }

  /// Copy of the block [r0, r0+h) x [c0, c0+w).
  Grid crop(std::size_t r0, std::size_t c0, std::size_t h, std::size_t w) const {
    require(r0 + h <= rows_ && c0 + w <= cols_, ErrorKind::Dimension, "crop outside grid");
    Grid out(h, w);
    for (std::size_t r = 0; r < h; ++r)
      std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>((r0 + r) * cols_ + c0), w,
                  out.data_.begin() + static_cast<std::ptrdiff_t>(r * w));
    return out;
  }

  void paste(const Grid& block, std::size_t r0, std::size_t c0) {
    require(r0 + block.rows_ <= rows_ && c0 + block.cols_ <= cols_, ErrorKind::Dimension, "paste outside grid");
    for (std::size_t r = 0; r < block.rows_; ++r)
      std::copy_n(block.data_.begin() + static_cast<std::ptrdiff_t>(r * block.cols_), block.cols_,
                  data_.begin() + static_cast<std::ptrdiff_t>((r0 + r) * cols_ + c0));
  }

  bool operator==(const Grid&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using Field = Grid<double>;

template <typename T>
bool all_finite(const Grid<T>& g) {
  return std::all_of(g.values().begin(), g.values().end(), [](T v) { return std::isfinite(v); });
}

template <typename T>
T max_value(const Grid<T>& g) {
  return g.empty() ? T{} : *std::max_element(g.values().begin(), g.values().end());
}

template <typename T>
T min_value(const Grid<T>& g) {
  return g.empty() ? T{} : *std::min_element(g.values().begin(), g.values().end());
}

template <typename T>
void clamp_non_negative(Grid<T>& g) {
  for (auto& v : g.values()) v = std::max(v, T{0});
}

}  // namespace bvocsr
