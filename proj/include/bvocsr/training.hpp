#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "bvocsr/checkpoint.hpp"
#include "bvocsr/metrics.hpp"
#include "bvocsr/quantile.hpp"
#include "bvocsr/resample.hpp"

namespace bvocsr {

struct TrainConfig {
  std::uint32_t epochs = 50;
  std::size_t batch_size = 64;
  double learning_rate = 1e-4;
  double fine_tune_lr = 1e-5;
  LossKind loss = LossKind::L1;
  LrSchedule schedule = LrSchedule::Constant;
  double min_lr_factor = 0.01;  // cosine floor as a fraction of the base rate
  std::uint32_t patience = 10;
  std::uint64_t seed = 0;
  bool drop_empty_patches = true;
  std::vector<std::string> freeze_prefixes;  // parameter-name prefixes held fixed
  std::size_t threads = 1;                   // evaluation only; the optimizer loop is sequential

  void validate() const {
    require(batch_size >= 1, ErrorKind::Config, "batch_size must be >= 1");
    require(learning_rate > 0 && fine_tune_lr > 0, ErrorKind::Config, "learning rates must be positive");
    require(patience >= 1, ErrorKind::Config, "patience must be >= 1");
    require(epochs == 0 || patience <= epochs, ErrorKind::Config, "patience must not exceed epochs");
    require(threads >= 1, ErrorKind::Config, "threads must be >= 1");
    require(min_lr_factor > 0 && min_lr_factor <= 1, ErrorKind::Config, "min_lr_factor must be in (0,1]");
  }
};

struct EpochRecord {
  std::uint32_t epoch = 0;
  double train_loss = 0.0;
  double val_nmse_db = 0.0;
  double val_ssim = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  Checkpoint checkpoint;  // best validation epoch
  std::vector<EpochRecord> history;
  std::uint32_t best_epoch = 0;
  double best_val_nmse_db = std::numeric_limits<double>::infinity();
};

/// Splits [0, n) into contiguous chunks, one per worker. Results must not depend on the split.
inline void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t, std::size_t)>& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  const std::size_t chunk = (n + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t b = t * chunk, e = std::min(n, b + chunk);
    pool.emplace_back([&, b, e, t] {
      try {
        if (b < e) fn(b, e);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);
}

namespace detail {

inline void transform_into(const QuantileTransform& t, const Field& f, float* dst) {
  const auto v = f.values();
  for (std::size_t i = 0; i < v.size(); ++i) dst[i] = static_cast<float>(t.apply(v[i]));
}

inline std::vector<bool> frozen_mask(const Parameters<float>& p, const std::vector<std::string>& prefixes) {
  std::vector<bool> mask(p.tensors.size(), false);
  for (std::size_t i = 0; i < p.tensors.size(); ++i)
    for (const auto& pre : prefixes)
      if (p.tensors[i].name.rfind(pre, 0) == 0) mask[i] = true;
  return mask;
}

}  // namespace detail

/// T⁻¹(N(T(lr))) for every LR patch, clamped at 0. The same transform is used on both ends.
inline std::vector<Field> super_resolve(const SrNetwork<float>& net, const QuantileTransform& transform,
                                        std::span<const Field> lr_patches, std::size_t threads = 1,
                                        std::size_t batch = 32) {
  require(transform.fitted(), ErrorKind::Config, "super_resolve: transform is not fitted");
  std::vector<Field> out(lr_patches.size());
  if (lr_patches.empty()) return out;
  const std::size_t h = lr_patches[0].rows(), w = lr_patches[0].cols();
  for (const auto& p : lr_patches)
    require(p.rows() == h && p.cols() == w, ErrorKind::Dimension, "super_resolve: LR patches differ in shape");
  const std::size_t n_batches = (lr_patches.size() + batch - 1) / batch;
  parallel_for(n_batches, threads, [&](std::size_t b0, std::size_t b1) {
    for (std::size_t b = b0; b < b1; ++b) {
      const std::size_t first = b * batch, last = std::min(lr_patches.size(), first + batch);
      Tensor<float> x(Shape4{last - first, 1, h, w});
      for (std::size_t i = first; i < last; ++i) detail::transform_into(transform, lr_patches[i], x.sample(i - first));
      const Tensor<float> y = net.forward(x);
      for (std::size_t i = first; i < last; ++i) {
        Field f(2 * h, 2 * w);
        const float* src = y.sample(i - first);
        for (std::size_t k = 0; k < f.size(); ++k) f.values()[k] = std::max(0.0, transform.invert(src[k]));
        out[i] = std::move(f);
      }
    }
  });
  return out;
}

inline std::vector<Field> lr_of(std::span<const PatchPair> patches) {
  std::vector<Field> v;
  v.reserve(patches.size());
  for (const auto& p : patches) v.push_back(p.lr);
  return v;
}

/// Pooled NMSE and mean SSIM of estimates against the patches' HR references.
/// SSIM data range is the global max - min over the references.
inline MetricReport score_estimates(std::span<const PatchPair> patches, std::span<const Field> estimates) {
  require(!patches.empty() && patches.size() == estimates.size(), ErrorKind::Data,
          "score: need one estimate per patch (and at least one patch)");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& p : patches) {
    lo = std::min(lo, min_value(p.hr));
    hi = std::max(hi, max_value(p.hr));
  }
  MetricReport rep;
  rep.data_range = hi - lo;
  NmseAccumulator acc, base;
  double ssim_sum = 0.0;
  for (std::size_t i = 0; i < patches.size(); ++i) {
    acc.add(patches[i].hr, estimates[i]);
    base.add(patches[i].hr, bicubic_upsample(patches[i].lr, kScale));
    ssim_sum += rep.data_range > 0 ? ssim(patches[i].hr, estimates[i], rep.data_range) : 1.0;
  }
  rep.nmse_db = acc.db();
  rep.bicubic_nmse_db = base.db();
  rep.ssim = ssim_sum / static_cast<double>(patches.size());
  rep.n_patches = patches.size();
  rep.domain = patches.front().domain;
  return rep;
}

/// Runs super_resolve over the patches and scores the result.
inline MetricReport evaluate(const Checkpoint& ck, const QuantileTransform& transform,
                             std::span<const PatchPair> patches, std::size_t threads = 1) {
  require(!patches.empty(), ErrorKind::Data, "evaluate: no test patches");
  const auto lr = lr_of(patches);
  const auto est = super_resolve(ck.network(), transform, lr, threads);
  return score_estimates(patches, est);
}

/// Mini-batch Adam in transformed space with best-validation selection and early stopping.
/// Validation NMSE is measured in the original (untransformed) space.
inline TrainResult train_network(const TrainConfig& cfg, std::span<const PatchPair> train_set,
                                 std::span<const PatchPair> val_set, const QuantileTransform& transform,
                                 const Checkpoint& init, Provenance provenance, double lr) {
  cfg.validate();
  TrainResult result;
  result.checkpoint = init;
  if (cfg.epochs == 0) return result;
  require(transform.fitted(), ErrorKind::Config, "train: transform is not fitted");
  require(!val_set.empty(), ErrorKind::Data, "train: validation set is empty");

  std::vector<const PatchPair*> usable;
  for (const auto& p : train_set)
    if (!(cfg.drop_empty_patches && p.empty)) usable.push_back(&p);
  require(!usable.empty(), ErrorKind::Data, "train: training set is empty");
  const std::size_t lh = usable[0]->lr.rows(), lw = usable[0]->lr.cols();
  const std::size_t lr_n = lh * lw, hr_n = 4 * lr_n;
  for (const auto* p : usable)
    require(p->lr.rows() == lh && p->lr.cols() == lw && p->hr.rows() == 2 * lh && p->hr.cols() == 2 * lw,
            ErrorKind::Dimension, "train: inconsistent patch shapes");

  // transformed copies, computed once
  std::vector<float> lr_t(usable.size() * lr_n), hr_t(usable.size() * hr_n);
  for (std::size_t i = 0; i < usable.size(); ++i) {
    detail::transform_into(transform, usable[i]->lr, lr_t.data() + i * lr_n);
    detail::transform_into(transform, usable[i]->hr, hr_t.data() + i * hr_n);
  }
  const auto val_lr = lr_of(val_set);

  SrNetwork<float> net = init.network();
  AdamState<float> adam = AdamState<float>::zeros_like(net.parameters());
  Parameters<float> grads = net.parameters();
  const auto frozen = detail::frozen_mask(net.parameters(), cfg.freeze_prefixes);
  std::vector<std::size_t> order(usable.size());
  std::uint32_t since_best = 0;

  for (std::uint32_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    const double epoch_lr = scheduled_lr(lr, cfg.schedule, cfg.min_lr_factor, epoch, cfg.epochs);
    Rng rng(derive_seed(cfg.seed, 0xe90c, epoch));
    rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t first = 0; first < order.size(); first += cfg.batch_size) {
      const std::size_t last = std::min(order.size(), first + cfg.batch_size);
      const std::size_t bn = last - first;
      Tensor<float> x(Shape4{bn, 1, lh, lw}), target(Shape4{bn, 1, 2 * lh, 2 * lw});
      for (std::size_t j = 0; j < bn; ++j) {
        const std::size_t idx = order[first + j];
        std::copy_n(lr_t.data() + idx * lr_n, lr_n, x.sample(j));
        std::copy_n(hr_t.data() + idx * hr_n, hr_n, target.sample(j));
      }
      ForwardCache<float> cache;
      const Tensor<float> pred = net.forward(x, &cache);
      const auto loss = loss_value(pred, target, cfg.loss);
      if (!std::isfinite(loss.value))
        fail(ErrorKind::Numeric,
             "training diverged at epoch " + std::to_string(epoch) + ", batch " + std::to_string(batches));
      grads.zero();
      net.backward(cache, loss.grad, grads);
      adam_step(net.parameters(), grads, adam, epoch_lr, frozen);
      loss_sum += loss.value;
      ++batches;
    }

    const auto est = super_resolve(net, transform, val_lr, cfg.threads);
    const MetricReport val = score_estimates(val_set, est);
    result.history.push_back({epoch, loss_sum / static_cast<double>(batches), val.nmse_db, val.ssim, epoch_lr});
    if (val.nmse_db < result.best_val_nmse_db) {
      result.best_val_nmse_db = val.nmse_db;
      result.best_epoch = epoch;
      result.checkpoint.config = net.config();
      result.checkpoint.params = net.parameters();
      result.checkpoint.optimizer = adam;
      result.checkpoint.epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  result.checkpoint.provenance = provenance;
  result.checkpoint.train_seed = cfg.seed;
  return result;
}

/// Training from scratch (or from `init`) at the base learning rate.
inline TrainResult train(const TrainConfig& cfg, std::span<const PatchPair> train_set,
                         std::span<const PatchPair> val_set, const QuantileTransform& transform,
                         const Checkpoint& init, Provenance provenance) {
  return train_network(cfg, train_set, val_set, transform, init, provenance, cfg.learning_rate);
}

struct InjectionConfig {
  double fraction = 0.0;
  std::size_t total_budget = 0;
  std::span<const PatchPair> source_pool;  // S_T
  std::span<const PatchPair> target_pool;  // O
  std::uint64_t seed = 0;
};

inline std::size_t injected_count(double fraction, std::size_t budget) {
  return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(budget)));
}

/// Equal-budget mix: round(p*N) target-domain patches plus N - round(p*N) source-domain patches, shuffled.
inline std::vector<PatchPair> build_injection_set(const InjectionConfig& cfg) {
  require(cfg.fraction >= 0.0 && cfg.fraction <= 1.0, ErrorKind::Config, "injection fraction must be in [0,1]");
  require(cfg.total_budget >= 1, ErrorKind::Config, "injection budget must be >= 1");
  const std::size_t k = injected_count(cfg.fraction, cfg.total_budget);
  require(k <= cfg.target_pool.size(), ErrorKind::Data,
          "target (observed) pool has " + std::to_string(cfg.target_pool.size()) + " patches, need " +
              std::to_string(k));
  require(cfg.total_budget - k <= cfg.source_pool.size(), ErrorKind::Data,
          "source (simulated) pool has " + std::to_string(cfg.source_pool.size()) + " patches, need " +
              std::to_string(cfg.total_budget - k));
  Rng rng(derive_seed(cfg.seed, 0x1913c7));
  std::vector<PatchPair> out;
  out.reserve(cfg.total_budget);
  for (auto i : rng.sample_without_replacement(cfg.target_pool.size(), k)) out.push_back(cfg.target_pool[i]);
  for (auto i : rng.sample_without_replacement(cfg.source_pool.size(), cfg.total_budget - k))
    out.push_back(cfg.source_pool[i]);
  rng.shuffle(out);
  return out;
}

/// Continues training a simulated-domain network on an injection set under the adapted transform.
inline TrainResult fine_tune(const Checkpoint& base, std::span<const PatchPair> injection_set,
                             std::span<const PatchPair> val_set, const QuantileTransform& adapted,
                             const TrainConfig& cfg, double fraction) {
  require(base.provenance.kind == Provenance::Kind::TrainedOnS ||
              base.provenance.kind == Provenance::Kind::TrainedOnST,
          ErrorKind::Config, "fine-tuning needs a base network trained on simulated data, got " +
                                 base.provenance.label());
  const Provenance prov{Provenance::Kind::FineTunedDA, static_cast<float>(fraction)};
  auto result = train_network(cfg, injection_set, val_set, adapted, base, prov, cfg.fine_tune_lr);
  result.checkpoint.provenance = prov;
  return result;
}

inline constexpr const char* kHistoryHeader = "epoch,train_loss,val_nmse_db,val_ssim,lr";

inline std::string format_history(const std::vector<EpochRecord>& history) {
  std::string out = std::string(kHistoryHeader) + "\n";
  for (const auto& r : history)
    out += std::to_string(r.epoch) + "," + text::format_double(r.train_loss) + "," +
           text::format_double(r.val_nmse_db) + "," + text::format_double(r.val_ssim) + "," +
           text::format_double(r.lr) + "\n";
  return out;
}

}  // namespace bvocsr
