#pragma once

// Residual channel-attention SR network, x2:
//   head conv(1->C) -> B x [conv -> ReLU -> conv -> channel attention -> +skip] -> +long skip
//   -> conv(C->4C) -> pixel shuffle -> conv(C->1)
// Channel attention: global average pool -> 1x1 (C->C/r) -> ReLU -> 1x1 (C/r->C) -> sigmoid gate.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "bvocsr/layers.hpp"
#include "bvocsr/random.hpp"
#include "bvocsr/tensor.hpp"

namespace bvocsr {

struct NetworkConfig {
  std::uint32_t channels = 32;
  std::uint32_t blocks = 4;
  std::uint32_t attention_reduction = 8;
  std::uint32_t scale = 2;
  std::uint32_t kernel = 3;

  std::uint32_t squeezed() const noexcept { return channels / attention_reduction; }

  void validate() const {
    require(attention_reduction >= 1 && channels >= attention_reduction, ErrorKind::Config,
            "need channels >= attention_reduction >= 1");
    require(scale == 2, ErrorKind::Config, "only scale 2 is supported");
    require(kernel % 2 == 1, ErrorKind::Config, "kernel size must be odd");
  }

  bool operator==(const NetworkConfig&) const = default;
};

template <typename T>
struct ParamTensor {
  std::string name;
  std::vector<std::size_t> dims;
  std::vector<T> data;

  bool operator==(const ParamTensor&) const = default;
};

/// Ordered named parameter tensors.
template <typename T>
struct Parameters {
  std::vector<ParamTensor<T>> tensors;

  std::size_t count() const {
    std::size_t n = 0;
    for (const auto& t : tensors) n += t.data.size();
    return n;
  }

  void zero() {
    for (auto& t : tensors) std::fill(t.data.begin(), t.data.end(), T{0});
  }

  template <typename U>
  Parameters<U> cast() const {
    Parameters<U> out;
    for (const auto& t : tensors) out.tensors.push_back({t.name, t.dims, std::vector<U>(t.data.begin(), t.data.end())});
    return out;
  }

  bool same_layout(const Parameters& other) const {
    if (tensors.size() != other.tensors.size()) return false;
    for (std::size_t i = 0; i < tensors.size(); ++i)
      if (tensors[i].name != other.tensors[i].name || tensors[i].dims != other.tensors[i].dims) return false;
    return true;
  }

  bool operator==(const Parameters&) const = default;
};

struct ParamSpec {
  std::string name;
  std::vector<std::size_t> dims;
  std::size_t fan_in = 0;  // 0 for biases
};

/// Parameter names and shapes implied by a config, in storage order.
inline std::vector<ParamSpec> parameter_layout(const NetworkConfig& cfg) {
  cfg.validate();
  const std::size_t c = cfg.channels, k = cfg.kernel, r = cfg.squeezed();
  std::vector<ParamSpec> out;
  const auto conv = [&](const std::string& name, std::size_t cin, std::size_t cout, std::size_t ks) {
    out.push_back({name + ".w", {cout, cin, ks, ks}, cin * ks * ks});
    out.push_back({name + ".b", {cout}, 0});
  };
  conv("head", 1, c, k);
  for (std::uint32_t b = 0; b < cfg.blocks; ++b) {
    const auto p = "block" + std::to_string(b);
    conv(p + ".conv1", c, c, k);
    conv(p + ".conv2", c, c, k);
    conv(p + ".ca1", c, r, 1);
    conv(p + ".ca2", r, c, 1);
  }
  conv("up", c, 4 * c, k);
  conv("tail", c, 1, k);
  return out;
}

template <typename T>
Parameters<T> zero_parameters(const NetworkConfig& cfg) {
  Parameters<T> p;
  for (const auto& spec : parameter_layout(cfg)) {
    std::size_t n = 1;
    for (auto d : spec.dims) n *= d;
    p.tensors.push_back({spec.name, spec.dims, std::vector<T>(n, T{0})});
  }
  return p;
}

/// He-normal conv weights (std = sqrt(2 / fan_in)), zero biases; deterministic under seed.
template <typename T>
Parameters<T> init_parameters(const NetworkConfig& cfg, std::uint64_t seed) {
  auto params = zero_parameters<T>(cfg);
  const auto layout = parameter_layout(cfg);
  for (std::size_t i = 0; i < layout.size(); ++i) {
    if (layout[i].fan_in == 0) continue;
    Rng rng(derive_seed(seed, 0x1a17, i));
    const double stddev = std::sqrt(2.0 / static_cast<double>(layout[i].fan_in));
    for (auto& v : params.tensors[i].data) v = static_cast<T>(stddev * rng.normal());
  }
  return params;
}

/// Intermediates retained by forward for the reverse pass.
template <typename T>
struct ForwardCache {
  struct Block {
    Tensor<T> in, a1, r1, a2;
    std::vector<T> pooled, z1, z1r, gate;  // per (n, channel)
  };
  bool valid = false;
  Tensor<T> x, head, body, up, shuffled;
  std::vector<Block> blocks;
};

template <typename T>
class SrNetwork {
 public:
  SrNetwork(NetworkConfig cfg, Parameters<T> params) : cfg_(cfg), params_(std::move(params)) {
    cfg_.validate();
    const auto layout = parameter_layout(cfg_);
    require(layout.size() == params_.tensors.size(), ErrorKind::Data, "parameter count does not match config");
    for (std::size_t i = 0; i < layout.size(); ++i)
      require(layout[i].name == params_.tensors[i].name && layout[i].dims == params_.tensors[i].dims, ErrorKind::Data,
              "parameter '" + params_.tensors[i].name + "' does not match config layout");
  }

  const NetworkConfig& config() const noexcept { return cfg_; }
  const Parameters<T>& parameters() const noexcept { return params_; }
  Parameters<T>& parameters() noexcept { return params_; }

  /// (N,1,H,W) -> (N,1,2H,2W). Fills cache when given.
  Tensor<T> forward(const Tensor<T>& x, ForwardCache<T>* cache = nullptr) const {
    require(x.shape().c == 1 && x.shape().n >= 1 && x.shape().h >= 1 && x.shape().w >= 1, ErrorKind::Dimension,
            "network input must be (N,1,H,W), got " + x.shape().str());
    require(x.all_finite(), ErrorKind::Numeric, "network input is not finite");
    std::vector<T> scratch;
    std::size_t layer = 0;
    const auto check = [&](const Tensor<T>& t, const char* what) {
      ++layer;
      if (!t.all_finite())
        fail(ErrorKind::Numeric, std::string("non-finite activation at layer ") + std::to_string(layer) + " (" + what + ")");
    };
    const std::size_t c = cfg_.channels, r = cfg_.squeezed(), n = x.shape().n, hw = x.shape().plane();
    const ConvShape body_conv{c, c, cfg_.kernel};

    Tensor<T> head = conv2d(x, w(kHead), b(kHead), ConvShape{1, c, cfg_.kernel}, scratch);
    check(head, "head");
    if (cache) {
      cache->x = x;
      cache->blocks.assign(cfg_.blocks, {});
    }
    Tensor<T> h = head;
    for (std::uint32_t blk = 0; blk < cfg_.blocks; ++blk) {
      const std::size_t base = block_base(blk);
      Tensor<T> a1 = conv2d(h, w(base), b(base), body_conv, scratch);
      check(a1, "conv1");
      Tensor<T> r1 = a1;
      for (auto& v : r1.values()) v = v > T{0} ? v : T{0};
      Tensor<T> a2 = conv2d(r1, w(base + 2), b(base + 2), body_conv, scratch);
      check(a2, "conv2");

      std::vector<T> pooled(n * c), z1(n * r), z1r(n * r), gate(n * c);
      const auto w1 = w(base + 4), b1 = b(base + 4), w2 = w(base + 6), b2 = b(base + 6);
      for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t ch = 0; ch < c; ++ch) {
          const T* p = a2.plane(s, ch);
          T acc{0};
          for (std::size_t i = 0; i < hw; ++i) acc += p[i];
          pooled[s * c + ch] = acc / static_cast<T>(hw);
        }
        for (std::size_t j = 0; j < r; ++j) {
          T acc = b1[j];
          for (std::size_t ch = 0; ch < c; ++ch) acc += w1[j * c + ch] * pooled[s * c + ch];
          z1[s * r + j] = acc;
          z1r[s * r + j] = acc > T{0} ? acc : T{0};
        }
        for (std::size_t ch = 0; ch < c; ++ch) {
          T acc = b2[ch];
          for (std::size_t j = 0; j < r; ++j) acc += w2[ch * r + j] * z1r[s * r + j];
          gate[s * c + ch] = T{1} / (T{1} + std::exp(-acc));
        }
      }
      Tensor<T> next = h;
      for (std::size_t s = 0; s < n; ++s)
        for (std::size_t ch = 0; ch < c; ++ch) {
          const T g = gate[s * c + ch];
          const T* src = a2.plane(s, ch);
          T* dst = next.plane(s, ch);
          for (std::size_t i = 0; i < hw; ++i) dst[i] += g * src[i];
        }
      check(next, "attention");
      if (cache) {
        auto& bc = cache->blocks[blk];
        bc.in = std::move(h);
        bc.a1 = std::move(a1);
        bc.r1 = std::move(r1);
        bc.a2 = std::move(a2);
        bc.pooled = std::move(pooled);
        bc.z1 = std::move(z1);
        bc.z1r = std::move(z1r);
        bc.gate = std::move(gate);
      }
      h = std::move(next);
    }
    Tensor<T> body = std::move(h);
    {
      auto dst = body.values();
      auto src = head.values();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    }
    Tensor<T> up = conv2d(body, w(up_index()), b(up_index()), ConvShape{c, 4 * c, cfg_.kernel}, scratch);
    check(up, "upsample conv");
    Tensor<T> shuffled = pixel_shuffle(up);
    Tensor<T> out = conv2d(shuffled, w(tail_index()), b(tail_index()), ConvShape{c, 1, cfg_.kernel}, scratch);
    check(out, "tail");
    if (cache) {
      cache->head = std::move(head);
      cache->body = std::move(body);
      cache->up = std::move(up);
      cache->shuffled = std::move(shuffled);
      cache->valid = true;
    }
    return out;
  }

  /// Reverse pass. Accumulates parameter gradients into grads (same layout) and returns d(loss)/d(input).
  Tensor<T> backward(const ForwardCache<T>& cache, const Tensor<T>& dout, Parameters<T>& grads) const {
    require(cache.valid, ErrorKind::Numeric, "backward called without a retained forward pass");
    require(grads.same_layout(params_), ErrorKind::Dimension, "gradient buffer layout does not match parameters");
    const auto& xs = cache.x.shape();
    require(dout.shape() == Shape4{xs.n, 1, xs.h * 2, xs.w * 2}, ErrorKind::Dimension,
            "upstream gradient must be " + Shape4{xs.n, 1, xs.h * 2, xs.w * 2}.str());
    std::vector<T> scratch;
    const std::size_t c = cfg_.channels, r = cfg_.squeezed(), n = xs.n, hw = xs.plane();
    const ConvShape body_conv{c, c, cfg_.kernel};

    Tensor<T> d_shuffled = conv2d_backward(cache.shuffled, dout, w(tail_index()), gw(grads, tail_index()),
                                           gb(grads, tail_index()), ConvShape{c, 1, cfg_.kernel}, scratch);
    Tensor<T> d_up = pixel_unshuffle(d_shuffled);
    Tensor<T> d_body = conv2d_backward(cache.body, d_up, w(up_index()), gw(grads, up_index()), gb(grads, up_index()),
                                       ConvShape{c, 4 * c, cfg_.kernel}, scratch);
    Tensor<T> d_head = d_body;  // long skip
    Tensor<T> dh = std::move(d_body);
    for (std::uint32_t blk = cfg_.blocks; blk-- > 0;) {
      const auto& bc = cache.blocks[blk];
      const std::size_t base = block_base(blk);
      const auto w1 = w(base + 4), w2 = w(base + 6);
      auto dw1 = gw(grads, base + 4), db1 = gb(grads, base + 4);
      auto dw2 = gw(grads, base + 6), db2 = gb(grads, base + 6);
      // out = in + a2 * gate
      Tensor<T> d_a2(bc.a2.shape());
      std::vector<T> d_pooled(n * c);
      for (std::size_t s = 0; s < n; ++s) {
        std::vector<T> d_z2(c), d_z1r(r, T{0});
        for (std::size_t ch = 0; ch < c; ++ch) {
          const T g = bc.gate[s * c + ch];
          const T* up = dh.plane(s, ch);
          const T* a = bc.a2.plane(s, ch);
          T* da = d_a2.plane(s, ch);
          T dg{0};
          for (std::size_t i = 0; i < hw; ++i) {
            da[i] = up[i] * g;
            dg += up[i] * a[i];
          }
          d_z2[ch] = dg * g * (T{1} - g);
          db2[ch] += d_z2[ch];
          for (std::size_t j = 0; j < r; ++j) {
            dw2[ch * r + j] += d_z2[ch] * bc.z1r[s * r + j];
            d_z1r[j] += w2[ch * r + j] * d_z2[ch];
          }
        }
        for (std::size_t j = 0; j < r; ++j) {
          const T dz1 = bc.z1[s * r + j] > T{0} ? d_z1r[j] : T{0};
          db1[j] += dz1;
          for (std::size_t ch = 0; ch < c; ++ch) {
            dw1[j * c + ch] += dz1 * bc.pooled[s * c + ch];
            d_pooled[s * c + ch] += w1[j * c + ch] * dz1;
          }
        }
        for (std::size_t ch = 0; ch < c; ++ch) {
          const T add = d_pooled[s * c + ch] / static_cast<T>(hw);
          T* da = d_a2.plane(s, ch);
          for (std::size_t i = 0; i < hw; ++i) da[i] += add;
        }
      }
      Tensor<T> d_r1 = conv2d_backward(bc.r1, d_a2, w(base + 2), gw(grads, base + 2), gb(grads, base + 2), body_conv,
                                       scratch);
      {
        auto d = d_r1.values();
        auto a = bc.a1.values();
        for (std::size_t i = 0; i < d.size(); ++i)
          if (!(a[i] > T{0})) d[i] = T{0};
      }
      Tensor<T> d_in = conv2d_backward(bc.in, d_r1, w(base), gw(grads, base), gb(grads, base), body_conv, scratch);
      auto dst = dh.values();
      auto src = d_in.values();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    }
    {
      auto dst = d_head.values();
      auto src = dh.values();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    }
    return conv2d_backward(cache.x, d_head, w(kHead), gw(grads, kHead), gb(grads, kHead),
                           ConvShape{1, c, cfg_.kernel}, scratch);
  }

 private:
  static constexpr std::size_t kHead = 0;
  static std::size_t block_base(std::size_t blk) noexcept { return 2 + 8 * blk; }
  std::size_t up_index() const noexcept { return 2 + 8 * cfg_.blocks; }
  std::size_t tail_index() const noexcept { return up_index() + 2; }

  std::span<const T> w(std::size_t i) const { return params_.tensors[i].data; }
  std::span<const T> b(std::size_t i) const { return params_.tensors[i + 1].data; }
  static std::span<T> gw(Parameters<T>& g, std::size_t i) { return g.tensors[i].data; }
  static std::span<T> gb(Parameters<T>& g, std::size_t i) { return g.tensors[i + 1].data; }

  NetworkConfig cfg_;
  Parameters<T> params_;
};

/// Degenerate network that upsamples by pixel replication: Dirac head/up/tail kernels, zeroed residual blocks.
template <typename T>
Parameters<T> dirac_parameters(const NetworkConfig& cfg) {
  auto p = zero_parameters<T>(cfg);
  const std::size_t k = cfg.kernel, center = (k / 2) * k + k / 2, c = cfg.channels;
  // head: input -> channel 0
  p.tensors[0].data[center] = T{1};
  // up: channel 0 -> channels 0..3, halved because the long skip doubles channel 0
  auto& up = p.tensors[2 + 8 * cfg.blocks].data;
  for (std::size_t j = 0; j < 4; ++j) up[(j * c + 0) * k * k + center] = T{0.5};
  // tail: channel 0 -> output
  p.tensors[4 + 8 * cfg.blocks].data[center] = T{1};
  return p;
}

}  // namespace bvocsr
