#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bvocsr/emission.hpp"
#include "bvocsr/grid.hpp"

namespace bvocsr {

/// 10 log10( mean((ref - est)^2) / mean(ref^2) ). Exact reconstruction yields -inf.
inline double nmse_db(const Field& reference, const Field& estimate) {
  require(reference.rows() == estimate.rows() && reference.cols() == estimate.cols() && !reference.empty(),
          ErrorKind::Dimension, "nmse: shapes differ");
  double err = 0.0, energy = 0.0;
  const auto r = reference.values();
  const auto e = estimate.values();
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double d = r[i] - e[i];
    err += d * d;
    energy += r[i] * r[i];
  }
  require(energy > 0.0, ErrorKind::Numeric, "nmse: reference is all zero (undefined denominator)");
  if (err == 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(err / energy);
}

/// Accumulates the pooled NMSE ratio sum ||ref - est||^2 / sum ||ref||^2 over many pairs.
class NmseAccumulator {
 public:
  void add(const Field& reference, const Field& estimate) {
    require(reference.rows() == estimate.rows() && reference.cols() == estimate.cols(), ErrorKind::Dimension,
            "nmse: shapes differ");
    const auto r = reference.values();
    const auto e = estimate.values();
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double d = r[i] - e[i];
      err_ += d * d;
      energy_ += r[i] * r[i];
    }
    ++count_;
  }

  void merge(const NmseAccumulator& o) {
    err_ += o.err_;
    energy_ += o.energy_;
    count_ += o.count_;
  }

  std::size_t count() const noexcept { return count_; }

  double db() const {
    require(count_ > 0, ErrorKind::Data, "nmse: no pairs");
    require(energy_ > 0.0, ErrorKind::Numeric, "nmse: every reference is all zero");
    if (err_ == 0.0) return -std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(err_ / energy_);
  }

 private:
  double err_ = 0.0;
  double energy_ = 0.0;
  std::size_t count_ = 0;
};

inline double dataset_nmse_db(std::span<const std::pair<Field, Field>> pairs) {
  NmseAccumulator acc;
  for (const auto& [ref, est] : pairs) acc.add(ref, est);
  return acc.db();
}

struct SsimParams {
  std::size_t window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
};

inline std::vector<double> gaussian_window(std::size_t size, double sigma) {
  std::vector<double> w(size);
  const double mid = static_cast<double>(size - 1) / 2.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    const double d = static_cast<double>(i) - mid;
    w[i] = std::exp(-d * d / (2.0 * sigma * sigma));
    sum += w[i];
  }
  for (auto& v : w) v /= sum;
  return w;
}

namespace detail {

// Separable weighted sum over every fully contained window ("valid" mode).
inline Field filter_valid(const Field& f, const std::vector<double>& w) {
  const std::size_t k = w.size();
  const std::size_t oh = f.rows() - k + 1, ow = f.cols() - k + 1;
  Field tmp(f.rows(), ow);
  for (std::size_t r = 0; r < f.rows(); ++r)
    for (std::size_t c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (std::size_t j = 0; j < k; ++j) acc += w[j] * f(r, c + j);
      tmp(r, c) = acc;
    }
  Field out(oh, ow);
  for (std::size_t r = 0; r < oh; ++r)
    for (std::size_t c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (std::size_t j = 0; j < k; ++j) acc += w[j] * tmp(r + j, c);
      out(r, c) = acc;
    }
  return out;
}

}  // namespace detail

/// Mean SSIM over all valid 11x11 Gaussian-weighted windows (sigma 1.5), population moments.
inline double ssim(const Field& reference, const Field& estimate, double data_range, const SsimParams& prm = {}) {
  require(reference.rows() == estimate.rows() && reference.cols() == estimate.cols(), ErrorKind::Dimension,
          "ssim: shapes differ");
  require(reference.rows() >= prm.window && reference.cols() >= prm.window, ErrorKind::Dimension,
          "ssim: image smaller than the window");
  require(data_range > 0.0 && std::isfinite(data_range), ErrorKind::Numeric, "ssim: data_range must be > 0");
  const auto w = gaussian_window(prm.window, prm.sigma);
  const double c1 = (prm.k1 * data_range) * (prm.k1 * data_range);
  const double c2 = (prm.k2 * data_range) * (prm.k2 * data_range);
  Field xx(reference.rows(), reference.cols()), yy = xx, xy = xx;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double x = reference.values()[i], y = estimate.values()[i];
    xx.values()[i] = x * x;
    yy.values()[i] = y * y;
    xy.values()[i] = x * y;
  }
  const Field mx = detail::filter_valid(reference, w), my = detail::filter_valid(estimate, w);
  const Field exx = detail::filter_valid(xx, w), eyy = detail::filter_valid(yy, w), exy = detail::filter_valid(xy, w);
  double total = 0.0;
  for (std::size_t i = 0; i < mx.size(); ++i) {
    const double ux = mx.values()[i], uy = my.values()[i];
    const double vx = exx.values()[i] - ux * ux;
    const double vy = eyy.values()[i] - uy * uy;
    const double cov = exy.values()[i] - ux * uy;
    total += ((2.0 * ux * uy + c1) * (2.0 * cov + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2));
  }
  return total / static_cast<double>(mx.size());
}

struct MetricReport {
  std::string scenario;
  DomainTag domain;
  double nmse_db = 0.0;
  double ssim = 0.0;
  std::size_t n_patches = 0;
  double data_range = 0.0;
  double bicubic_nmse_db = 0.0;
};

}  // namespace bvocsr
