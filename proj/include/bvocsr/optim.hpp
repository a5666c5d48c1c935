#pragma once

#include <cmath>
#include <numbers>
#include <cstdint>
#include <string>

#include "bvocsr/network.hpp"

namespace bvocsr {

enum class LossKind : std::uint8_t { L1, L2 };

inline std::string to_string(LossKind k) { return k == LossKind::L1 ? "l1" : "l2"; }

inline LossKind parse_loss(const std::string& s) {
  if (s == "l1" || s == "L1") return LossKind::L1;
  if (s == "l2" || s == "L2") return LossKind::L2;
  fail(ErrorKind::Config, "unknown loss '" + s + "' (expected l1|l2)");
}

enum class LrSchedule : std::uint8_t { Constant, Cosine };

inline std::string to_string(LrSchedule s) { return s == LrSchedule::Constant ? "constant" : "cosine"; }

inline LrSchedule parse_schedule(const std::string& s) {
  if (s == "constant") return LrSchedule::Constant;
  if (s == "cosine") return LrSchedule::Cosine;
  fail(ErrorKind::Config, "unknown learning-rate schedule '" + s + "' (expected constant or cosine)");
}

/// Learning rate for a 1-based epoch. Cosine decays from base to base*floor over `epochs`.
inline double scheduled_lr(double base, LrSchedule s, double floor, std::uint32_t epoch, std::uint32_t epochs) {
  if (s == LrSchedule::Constant || epochs <= 1) return base;
  const double t = static_cast<double>(epoch - 1) / static_cast<double>(epochs - 1);
  return base * (floor + (1.0 - floor) * 0.5 * (1.0 + std::cos(std::numbers::pi * t)));
}

template <typename T>
struct LossResult {
  double value = 0.0;
  Tensor<T> grad;
};

/// Mean absolute (L1, subgradient 0 at ties) or mean squared (L2) error with its gradient w.r.t. pred.
template <typename T>
LossResult<T> loss_value(const Tensor<T>& pred, const Tensor<T>& target, LossKind kind) {
  require(pred.shape() == target.shape(), ErrorKind::Dimension,
          "loss shapes differ: " + pred.shape().str() + " vs " + target.shape().str());
  LossResult<T> out{0.0, Tensor<T>(pred.shape())};
  const auto p = pred.values();
  const auto t = target.values();
  auto g = out.grad.values();
  const double inv_n = 1.0 / static_cast<double>(p.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = static_cast<double>(p[i]) - static_cast<double>(t[i]);
    if (kind == LossKind::L1) {
      acc += std::abs(d);
      g[i] = static_cast<T>(d > 0 ? inv_n : (d < 0 ? -inv_n : 0.0));
    } else {
      acc += d * d;
      g[i] = static_cast<T>(2.0 * d * inv_n);
    }
  }
  out.value = acc * inv_n;
  return out;
}

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename T>
struct AdamState {
  Parameters<T> m;
  Parameters<T> v;
  std::uint64_t step = 0;
  AdamHyper hyper;

  static AdamState zeros_like(const Parameters<T>& params) {
    AdamState s;
    s.m = params;
    s.m.zero();
    s.v = s.m;
    return s;
  }

  bool operator==(const AdamState& o) const { return m == o.m && v == o.v && step == o.step; }
};

/// One bias-corrected Adam update. Tensors flagged in `frozen` (by index) are left untouched.
template <typename T>
void adam_step(Parameters<T>& params, const Parameters<T>& grads, AdamState<T>& state, double lr,
               const std::vector<bool>& frozen = {}) {
  require(params.same_layout(grads) && params.same_layout(state.m) && params.same_layout(state.v),
          ErrorKind::Dimension, "adam: parameter/gradient/moment layouts differ");
  ++state.step;
  const auto& hp = state.hyper;
  const double c1 = 1.0 - std::pow(hp.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(hp.beta2, static_cast<double>(state.step));
  for (std::size_t t = 0; t < params.tensors.size(); ++t) {
    if (t < frozen.size() && frozen[t]) continue;
    auto& p = params.tensors[t].data;
    const auto& g = grads.tensors[t].data;
    auto& m = state.m.tensors[t].data;
    auto& v = state.v.tensors[t].data;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double gi = static_cast<double>(g[i]);
      const double mi = hp.beta1 * static_cast<double>(m[i]) + (1.0 - hp.beta1) * gi;
      const double vi = hp.beta2 * static_cast<double>(v[i]) + (1.0 - hp.beta2) * gi * gi;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      p[i] = static_cast<T>(static_cast<double>(p[i]) - lr * (mi / c1) / (std::sqrt(vi / c2) + hp.eps));
    }
  }
}

}  // namespace bvocsr
