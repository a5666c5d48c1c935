#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bvocsr/config.hpp"
#include "bvocsr/dataset.hpp"
#include "bvocsr/quantile.hpp"
#include "bvocsr/training.hpp"

namespace bvocsr {

/// Fully resolved settings for the synthetic experiment suite.
struct ExperimentConfig {
  SyntheticScenario synthetic;
  std::size_t frames_per_year = 12;
  NetworkConfig network;
  TrainConfig train;
  std::uint32_t finetune_epochs = 20;
  std::uint32_t finetune_patience = 10;
  std::vector<std::string> finetune_freeze;
  FitOptions transform;
  std::vector<double> transform_fractions{0.01, 0.02, 0.05, 0.10, 0.25, 0.50, 1.00};
  std::size_t transform_subsets = 3;
  std::vector<double> injection_fractions{0.0, 0.05, 0.10, 0.20, 0.40, 0.60, 0.80, 1.00};
  std::size_t injection_budget = 0;  // 0: smallest of the two training pools
  std::uint64_t seed = 42;
  std::size_t threads = 1;
  bool deterministic = false;

  std::map<std::string, std::uint32_t> epochs_by_dataset;  // per-dataset override of train.epochs

  TrainConfig train_config(const std::string& dataset) const {
    TrainConfig t = train;
    if (const auto it = epochs_by_dataset.find(dataset); it != epochs_by_dataset.end()) t.epochs = it->second;
    return t;
  }

  TrainConfig finetune_config() const {
    TrainConfig t = train;
    t.epochs = finetune_epochs;
    t.patience = finetune_patience;
    t.freeze_prefixes = finetune_freeze;
    return t;
  }

  /// Every resolved setting as sorted "key = value" lines.
  std::string effective() const {
    Config c;
    const auto d = [](double v) { return text::format_double(v); };
    const auto list = [&](const std::vector<double>& v) {
      std::string s;
      for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + d(v[i]);
      return s;
    };
    const auto strs = [](const std::vector<std::string>& v) {
      std::string s;
      for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
      return s;
    };
    const auto& f = synthetic.field;
    const auto& sh = synthetic.shift;
    const auto& by = synthetic.splits.by_year;
    const auto& rf = synthetic.splits.fine_fractions;
    c.set("run.seed", std::to_string(seed));
    c.set("run.threads", std::to_string(threads));
    c.set("run.deterministic", deterministic ? "true" : "false");
    c.set("synthetic.height", std::to_string(f.height));
    c.set("synthetic.width", std::to_string(f.width));
    c.set("synthetic.n_frames", std::to_string(synthetic.n_frames));
    c.set("synthetic.blob_count", std::to_string(f.blob_count));
    c.set("synthetic.spectral_slope", d(f.spectral_slope));
    c.set("synthetic.zero_fraction", d(f.zero_fraction));
    c.set("synthetic.amplitude", d(f.amplitude));
    c.set("synthetic.texture_strength", d(f.texture_strength));
    c.set("synthetic.relief_slope", d(f.relief_slope));
    c.set("synthetic.resolution_deg", d(f.resolution_deg));
    c.set("synthetic.supersample", std::to_string(f.supersample));
    c.set("synthetic.frames_per_year", std::to_string(frames_per_year));
    c.set("shift.aggregation_window", std::to_string(sh.aggregation_window));
    c.set("shift.blur_sigma", d(sh.blur_sigma));
    c.set("shift.noise_level", d(sh.noise_level));
    c.set("shift.gain", d(sh.gain));
    c.set("shift.gamma", d(sh.gamma));
    c.set("shift.native_downscale", std::to_string(sh.native_downscale));
    c.set("split.fine_fractions", list({rf.train, rf.val, rf.test}));
    c.set("split.train_years", std::to_string(by.train_first) + "-" + std::to_string(by.train_last));
    c.set("split.val_year", std::to_string(by.val));
    c.set("split.test_year", std::to_string(by.test));
    c.set("network.channels", std::to_string(network.channels));
    c.set("network.blocks", std::to_string(network.blocks));
    c.set("network.attention_reduction", std::to_string(network.attention_reduction));
    c.set("train.epochs", std::to_string(train.epochs));
    c.set("train.batch_size", std::to_string(train.batch_size));
    c.set("train.learning_rate", d(train.learning_rate));
    c.set("train.loss", to_string(train.loss));
    c.set("train.patience", std::to_string(train.patience));
    c.set("train.schedule", to_string(train.schedule));
    c.set("train.min_lr_factor", d(train.min_lr_factor));
    for (const auto& [name, e] : epochs_by_dataset) c.set("train.epochs." + name, std::to_string(e));
    c.set("train.drop_empty", train.drop_empty_patches ? "true" : "false");
    c.set("train.freeze", strs(train.freeze_prefixes));
    c.set("finetune.epochs", std::to_string(finetune_epochs));
    c.set("finetune.patience", std::to_string(finetune_patience));
    c.set("finetune.learning_rate", d(train.fine_tune_lr));
    c.set("finetune.freeze", strs(finetune_freeze));
    c.set("transform.n_quantiles", std::to_string(transform.n_quantiles));
    c.set("transform.target", to_string(transform.target));
    c.set("transform.subsample_cap", std::to_string(transform.subsample_cap));
    c.set("transform.fit_nonzero_only", transform.nonzero_only ? "true" : "false");
    c.set("sweep.transform_fractions", list(transform_fractions));
    c.set("sweep.transform_subsets", std::to_string(transform_subsets));
    c.set("sweep.injection_fractions", list(injection_fractions));
    c.set("sweep.injection_budget", std::to_string(injection_budget));
    c.set("resample.kernel", "keys a=-0.5, align_corners=false, clamp-to-edge");
    c.set("metrics.nmse_aggregation", "pooled");
    c.set("metrics.ssim_data_range", "test-set global max-min");
    return c.canonical();
  }

  /// Hash of the settings that can change results (thread count excluded).
  std::string config_hash() const {
    std::string e;
    for (const auto& line : text::lines(effective()))
      if (line.rfind("run.threads", 0) != 0) e += line + "\n";
    return text::hex64(text::fnv1a(e));
  }

  static ExperimentConfig from(const Config& c) {
    ExperimentConfig x;
    x.seed = static_cast<std::uint64_t>(c.get_int("run.seed", 42));
    x.threads = c.get_size("run.threads", 1);
    x.deterministic = c.get_bool("run.deterministic", false);

    auto& f = x.synthetic.field;
    f.height = c.get_size("synthetic.height", f.height);
    f.width = c.get_size("synthetic.width", f.width);
    x.synthetic.n_frames = c.get_size("synthetic.n_frames", x.synthetic.n_frames);
    f.blob_count = c.get_size("synthetic.blob_count", f.blob_count);
    f.spectral_slope = c.get_double("synthetic.spectral_slope", f.spectral_slope);
    f.zero_fraction = c.get_double("synthetic.zero_fraction", f.zero_fraction);
    f.amplitude = c.get_double("synthetic.amplitude", f.amplitude);
    f.texture_strength = c.get_double("synthetic.texture_strength", f.texture_strength);
    f.relief_slope = c.get_double("synthetic.relief_slope", f.relief_slope);
    f.resolution_deg = c.get_double("synthetic.resolution_deg", f.resolution_deg);
    f.supersample = c.get_size("synthetic.supersample", f.supersample);
    x.frames_per_year = c.get_size("synthetic.frames_per_year", x.frames_per_year);
    require(x.frames_per_year >= 1, ErrorKind::Config, "synthetic.frames_per_year must be >= 1");

    auto& sh = x.synthetic.shift;
    sh.aggregation_window = c.get_size("shift.aggregation_window", sh.aggregation_window);
    sh.blur_sigma = c.get_double("shift.blur_sigma", sh.blur_sigma);
    sh.noise_level = c.get_double("shift.noise_level", sh.noise_level);
    sh.gain = c.get_double("shift.gain", sh.gain);
    sh.gamma = c.get_double("shift.gamma", sh.gamma);
    sh.native_downscale = c.get_size("shift.native_downscale", sh.native_downscale);

    const auto fr = c.get_list("split.fine_fractions", {0.70, 0.20, 0.10});
    require(fr.size() == 3, ErrorKind::Config, "split.fine_fractions needs three values");
    x.synthetic.splits.fine_fractions = {fr[0], fr[1], fr[2]};
    const auto years = static_cast<std::int64_t>(x.synthetic.n_frames / x.frames_per_year);
    require(years >= 3, ErrorKind::Config, "need at least three years of frames for the by-year split");
    auto& by = x.synthetic.splits.by_year;
    by.period = static_cast<std::int64_t>(x.frames_per_year);
    by.train_first = 0;
    by.train_last = years - 3;
    if (c.has("split.train_years")) {
      const auto parts = text::split(c.get_string("split.train_years", ""), '-');
      require(parts.size() == 2, ErrorKind::Config, "split.train_years must look like 'first-last'");
      by.train_first = text::parse_int(parts[0], "split.train_years");
      by.train_last = text::parse_int(parts[1], "split.train_years");
    }
    by.val = c.get_int("split.val_year", years - 2);
    by.test = c.get_int("split.test_year", years - 1);

    x.network.channels = static_cast<std::uint32_t>(c.get_size("network.channels", x.network.channels));
    x.network.blocks = static_cast<std::uint32_t>(c.get_size("network.blocks", x.network.blocks));
    x.network.attention_reduction =
        static_cast<std::uint32_t>(c.get_size("network.attention_reduction", x.network.attention_reduction));
    x.network.validate();

    auto& t = x.train;
    t.epochs = static_cast<std::uint32_t>(c.get_size("train.epochs", t.epochs));
    t.batch_size = c.get_size("train.batch_size", t.batch_size);
    t.learning_rate = c.get_double("train.learning_rate", t.learning_rate);
    t.loss = parse_loss(c.get_string("train.loss", to_string(t.loss)));
    t.patience = static_cast<std::uint32_t>(c.get_size("train.patience", t.patience));
    t.schedule = parse_schedule(c.get_string("train.schedule", to_string(t.schedule)));
    t.min_lr_factor = c.get_double("train.min_lr_factor", t.min_lr_factor);
    for (const char* name : {"s_fine", "s_coarse", "o"})
      if (const std::string key = std::string("train.epochs.") + name; c.has(key)) {
        x.epochs_by_dataset[name] = static_cast<std::uint32_t>(c.get_size(key, 0));
        TrainConfig check = t;
        check.epochs = x.epochs_by_dataset[name];
        check.validate();
      }
    t.drop_empty_patches = c.get_bool("train.drop_empty", t.drop_empty_patches);
    t.freeze_prefixes = c.get_strings("train.freeze");
    t.fine_tune_lr = c.get_double("finetune.learning_rate", t.fine_tune_lr);
    t.seed = x.seed;
    t.threads = x.threads;
    x.finetune_epochs = static_cast<std::uint32_t>(c.get_size("finetune.epochs", x.finetune_epochs));
    x.finetune_patience = static_cast<std::uint32_t>(c.get_size("finetune.patience", x.finetune_patience));
    x.finetune_freeze = c.get_strings("finetune.freeze");
    t.validate();
    x.finetune_config().validate();

    x.transform.n_quantiles = c.get_size("transform.n_quantiles", x.transform.n_quantiles);
    x.transform.target = parse_target(c.get_string("transform.target", to_string(x.transform.target)));
    x.transform.subsample_cap = c.get_size("transform.subsample_cap", x.transform.subsample_cap);
    x.transform.nonzero_only = c.get_bool("transform.fit_nonzero_only", x.transform.nonzero_only);

    x.transform_fractions = c.get_list("sweep.transform_fractions", x.transform_fractions);
    for (double p : x.transform_fractions)
      require(p > 0.0 && p <= 1.0, ErrorKind::Config, "transform sweep fractions must lie in (0,1]");
    x.transform_subsets = c.get_size("sweep.transform_subsets", x.transform_subsets);
    require(x.transform_subsets >= 1, ErrorKind::Config, "sweep.transform_subsets must be >= 1");
    x.injection_fractions = c.get_list("sweep.injection_fractions", x.injection_fractions);
    for (double p : x.injection_fractions)
      require(p >= 0.0 && p <= 1.0, ErrorKind::Config, "injection sweep fractions must lie in [0,1]");
    x.injection_budget = c.get_size("sweep.injection_budget", x.injection_budget);

    x.synthetic.seed = x.seed;
    x.synthetic.field.seed = x.seed;
    x.synthetic.field.validate();
    x.synthetic.shift.validate();

    if (const auto unused = c.unused_keys(); !unused.empty()) {
      std::string list;
      for (const auto& k : unused) list += (list.empty() ? "" : ", ") + k;
      fail(ErrorKind::Config, "unknown configuration keys: " + list);
    }
    return x;
  }
};

}  // namespace bvocsr
