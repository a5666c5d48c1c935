#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "bvocsr/error.hpp"

namespace bvocsr {

struct Shape4 {
  std::size_t n = 0, c = 0, h = 0, w = 0;

  std::size_t numel() const noexcept { return n * c * h * w; }
  std::size_t plane() const noexcept { return h * w; }
  bool operator==(const Shape4&) const = default;

  std::string str() const {
    return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) + "," + std::to_string(w) + ")";
  }
};

/// Dense NCHW activation tensor.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape4 s, T fill = T{}) : shape_(s), data_(s.numel(), fill) {}
  Tensor(Shape4 s, std::vector<T> data) : shape_(s), data_(std::move(data)) {
    require(data_.size() == shape_.numel(), ErrorKind::Dimension, "tensor data length does not match shape " + s.str());
  }

  const Shape4& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return data_.size(); }

  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }
  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }

  T* sample(std::size_t n) noexcept { return data_.data() + n * shape_.c * shape_.plane(); }
  const T* sample(std::size_t n) const noexcept { return data_.data() + n * shape_.c * shape_.plane(); }
  T* plane(std::size_t n, std::size_t c) noexcept { return data_.data() + (n * shape_.c + c) * shape_.plane(); }
  const T* plane(std::size_t n, std::size_t c) const noexcept {
    return data_.data() + (n * shape_.c + c) * shape_.plane();
  }

  T& at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) noexcept {
    return data_[((n * shape_.c + c) * shape_.h + y) * shape_.w + x];
  }
  const T& at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const noexcept {
    return data_[((n * shape_.c + c) * shape_.h + y) * shape_.w + x];
  }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
  }

  bool operator==(const Tensor&) const = default;

 private:
  Shape4 shape_;
  std::vector<T> data_;
};

}  // namespace bvocsr
