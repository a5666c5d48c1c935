#pragma once

// Scenario runners over one output directory:
//   <out>/data         EMG maps and manifests
//   <out>/checkpoints  SRCK files
//   <out>/transforms   quantile transform CSVs
//   <out>/reports      per-scenario CSVs, histories, merged metrics and plot data

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "bvocsr/checkpoint.hpp"
#include "bvocsr/dataset.hpp"
#include "bvocsr/experiment_config.hpp"
#include "bvocsr/training.hpp"

namespace bvocsr {

namespace fs = std::filesystem;

struct RunPaths {
  fs::path root;

  fs::path data() const { return root / "data"; }
  fs::path checkpoints() const { return root / "checkpoints"; }
  fs::path transforms() const { return root / "transforms"; }
  fs::path reports() const { return root / "reports"; }
};

/// Exclusive <out>/.lock for the lifetime of the object.
class OutputLock {
 public:
  explicit OutputLock(const fs::path& root) : path_(root / ".lock") {
    fs::create_directories(root);
    std::FILE* f = std::fopen(path_.c_str(), "wx");
    if (!f) fail(ErrorKind::Config, "output directory " + root.string() + " is locked by another run (" +
                                        path_.string() + ")");
    std::fclose(f);
  }
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;
  ~OutputLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }

 private:
  fs::path path_;
};

struct ExperimentContext {
  ExperimentConfig cfg;
  RunPaths paths;
  std::function<void(const std::string&)> log = [](const std::string& m) { std::cerr << m << "\n"; };

  std::string hash() const { return cfg.config_hash(); }
  void say(const std::string& m) const {
    if (log) log(m);
  }
};

struct DatasetSpec {
  const char* name;
  const char* manifest;
  std::uint64_t stream;
};

inline constexpr DatasetSpec kFine{"s_fine", kFineManifest, 1};
inline constexpr DatasetSpec kCoarse{"s_coarse", kCoarseManifest, 2};
inline constexpr DatasetSpec kObserved{"o", kObservedManifest, 3};

struct LoadedDataset {
  std::string name;
  double resolution_deg = 0.0;  // HR grid spacing
  std::vector<PatchPair> train, val, test;
};

inline double hr_resolution(const ExperimentConfig& cfg, const DatasetSpec& spec) {
  const double r = cfg.synthetic.field.resolution_deg;
  if (std::string(spec.name) == kFine.name) return r;
  if (std::string(spec.name) == kCoarse.name) return r * kScale;
  return r * static_cast<double>(cfg.synthetic.shift.native_downscale);
}

inline LoadedDataset load_dataset(const ExperimentContext& ctx, const DatasetSpec& spec) {
  const fs::path mpath = ctx.paths.data() / spec.manifest;
  require(fs::exists(mpath), ErrorKind::Data, "missing manifest " + mpath.string() + " (run synth first)");
  const auto manifest = read_manifest(mpath);
  LoadedDataset d;
  d.name = spec.name;
  d.resolution_deg = hr_resolution(ctx.cfg, spec);
  const bool drop = ctx.cfg.train.drop_empty_patches;
  auto pick = [&](Split s) {
    auto v = load_patches(manifest, ctx.paths.data(), {s});
    return drop ? non_empty(std::move(v)) : v;
  };
  d.train = pick(Split::Train);
  d.val = pick(Split::Val);
  d.test = pick(Split::Test);
  require(!d.train.empty() && !d.val.empty() && !d.test.empty(), ErrorKind::Data,
          std::string("dataset ") + spec.name + " has an empty train, val or test split");
  return d;
}

namespace detail {

inline constexpr const char* kMetricsHeader = "scenario,domain,n_patches,nmse_db,ssim,seed,config_hash";

inline std::string num(double v) { return text::format_fixed(v, 6); }

inline std::string metric_line(const ExperimentContext& ctx, const std::string& scenario, const std::string& domain,
                               std::size_t n, double nmse, double ssim_v) {
  return scenario + "," + domain + "," + std::to_string(n) + "," + num(nmse) + "," + num(ssim_v) + "," +
         std::to_string(ctx.cfg.seed) + "," + ctx.hash();
}

inline void write_metrics(const ExperimentContext& ctx, const std::string& scenario,
                          const std::vector<std::string>& rows) {
  std::string out = std::string(kMetricsHeader) + "\n";
  for (const auto& r : rows) out += r + "\n";
  io::write_text(ctx.paths.reports() / (scenario + "_metrics.csv"), out);
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline std::string label(double p) { return text::format_double(p); }

}  // namespace detail

inline GeneratedDataset run_synth(const ExperimentContext& ctx) {
  ctx.say("synth: generating " + std::to_string(ctx.cfg.synthetic.n_frames) + " frames into " +
          ctx.paths.data().string());
  std::error_code ec;
  fs::remove_all(ctx.paths.data(), ec);
  auto ds = gen_dataset(ctx.cfg.synthetic, ctx.paths.data());
  io::write_text(ctx.paths.data() / "effective_config.ini", ctx.cfg.effective());
  ctx.say("synth: " + std::to_string(ds.s_fine.records.size()) + " fine, " +
          std::to_string(ds.s_coarse.records.size()) + " coarse, " + std::to_string(ds.observed.records.size()) +
          " observed patches");
  return ds;
}

struct PerfectKnowledgeRow {
  std::string dataset;
  double resolution_deg = 0.0;
  MetricReport report;
  std::uint32_t best_epoch = 0;
  double seconds = 0.0;
};

/// Trains and tests one network per dataset with a transform fitted on that dataset's training split.
inline PerfectKnowledgeRow train_dataset(const ExperimentContext& ctx, const DatasetSpec& spec) {
  const auto d = load_dataset(ctx, spec);
  const auto domain = d.train.front().domain;
  const auto t_seed = derive_seed(ctx.cfg.seed, 0x7f17, spec.stream);
  const auto transform =
      fit_quantile_transform(pool_values(d.train, ctx.cfg.transform.nonzero_only), ctx.cfg.transform, t_seed, domain);
  TrainConfig tc = ctx.cfg.train_config(spec.name);
  tc.seed = derive_seed(ctx.cfg.seed, 0x74a1, spec.stream);
  const auto init = init_checkpoint(ctx.cfg.network, derive_seed(ctx.cfg.seed, 0x1417, spec.stream));
  ctx.say(std::string("train: ") + spec.name + " on " + std::to_string(d.train.size()) + " patches");
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = train(tc, d.train, d.val, transform, init, provenance_for(domain));
  const double secs = detail::seconds_since(t0);
  save_checkpoint(ctx.paths.checkpoints() / (std::string(spec.name) + ".srck"), res.checkpoint);
  write_transform(ctx.paths.transforms() / (std::string(spec.name) + ".csv"), transform);
  io::write_text(ctx.paths.reports() / ("history_" + std::string(spec.name) + ".csv"), format_history(res.history));

  PerfectKnowledgeRow row;
  row.dataset = spec.name;
  row.resolution_deg = d.resolution_deg;
  row.report = evaluate(res.checkpoint, transform, d.test, ctx.cfg.threads);
  row.best_epoch = res.best_epoch;
  row.seconds = secs;
  ctx.say(std::string("train: ") + spec.name + " best epoch " + std::to_string(res.best_epoch) + ", test NMSE " +
          detail::num(row.report.nmse_db) + " dB (bicubic " + detail::num(row.report.bicubic_nmse_db) + " dB), " +
          text::format_fixed(secs, 1) + " s");
  return row;
}

inline std::vector<PerfectKnowledgeRow> run_perfect_knowledge(const ExperimentContext& ctx) {
  std::vector<PerfectKnowledgeRow> rows;
  for (const auto& spec : {kFine, kCoarse, kObserved}) rows.push_back(train_dataset(ctx, spec));
  std::string csv = "dataset,spatial_resolution,n_patches,nmse_db,ssim,bicubic_nmse_db,seed,config_hash,"
                    "train_time_pct,train_seconds\n";
  std::vector<std::string> metrics;
  const double ref = rows.front().seconds > 0 ? rows.front().seconds : 1.0;
  for (const auto& r : rows) {
    csv += r.dataset + "," + text::format_double(r.resolution_deg) + "deg," + std::to_string(r.report.n_patches) +
           "," + detail::num(r.report.nmse_db) + "," + detail::num(r.report.ssim) + "," +
           detail::num(r.report.bicubic_nmse_db) + "," + std::to_string(ctx.cfg.seed) + "," + ctx.hash() + "," +
           text::format_fixed(100.0 * r.seconds / ref, 1) + "," + text::format_fixed(r.seconds, 2) + "\n";
    metrics.push_back(detail::metric_line(ctx, "perfect_knowledge/" + r.dataset, r.report.domain.label(),
                                          r.report.n_patches, r.report.nmse_db, r.report.ssim));
  }
  io::write_text(ctx.paths.reports() / "perfect_knowledge.csv", csv);
  detail::write_metrics(ctx, "perfect_knowledge", metrics);
  return rows;
}

inline Checkpoint load_trained(const ExperimentContext& ctx, const DatasetSpec& spec) {
  const auto p = ctx.paths.checkpoints() / (std::string(spec.name) + ".srck");
  require(fs::exists(p), ErrorKind::Data, "missing checkpoint " + p.string() + " (run perfect-knowledge first)");
  return load_checkpoint(p);
}

inline QuantileTransform load_fitted(const ExperimentContext& ctx, const std::string& name) {
  const auto p = ctx.paths.transforms() / (name + ".csv");
  require(fs::exists(p), ErrorKind::Data, "missing transform " + p.string());
  return read_transform(p);
}

struct ZeroKnowledgeRow {
  std::string checkpoint;
  MetricReport report;
};

/// Simulated-domain network and transform applied unchanged to the observed test split.
inline std::vector<ZeroKnowledgeRow> run_zero_knowledge(const ExperimentContext& ctx) {
  const auto o = load_dataset(ctx, kObserved);
  std::vector<ZeroKnowledgeRow> rows;
  std::string csv = "checkpoint,transform,n_patches,nmse_db,ssim,bicubic_nmse_db,seed,config_hash\n";
  std::vector<std::string> metrics;
  for (const auto& spec : {kFine, kCoarse}) {
    const auto ck = load_trained(ctx, spec);
    const auto t = load_fitted(ctx, spec.name);
    require(t.fitted_on().kind != DomainTag::Kind::Observed, ErrorKind::Config,
            "zero-knowledge evaluation must not use a transform fitted on observed data");
    ZeroKnowledgeRow r{spec.name, evaluate(ck, t, o.test, ctx.cfg.threads)};
    csv += r.checkpoint + "," + t.fitted_on().label() + "," + std::to_string(r.report.n_patches) + "," +
           detail::num(r.report.nmse_db) + "," + detail::num(r.report.ssim) + "," +
           detail::num(r.report.bicubic_nmse_db) + "," + std::to_string(ctx.cfg.seed) + "," + ctx.hash() + "\n";
    metrics.push_back(detail::metric_line(ctx, "zero_knowledge/" + r.checkpoint, r.report.domain.label(),
                                          r.report.n_patches, r.report.nmse_db, r.report.ssim));
    ctx.say("zero-knowledge: " + r.checkpoint + " on O test NMSE " + detail::num(r.report.nmse_db) + " dB");
    rows.push_back(std::move(r));
  }
  io::write_text(ctx.paths.reports() / "zero_knowledge.csv", csv);
  detail::write_metrics(ctx, "zero_knowledge", metrics);
  return rows;
}

struct TransformSweepPoint {
  std::string checkpoint;
  double fraction = 0.0;
  bool skipped = false;
  std::vector<double> nmse_db;  // one per subset
  std::vector<double> ssim;
  double mean_nmse_db = 0.0;
  double mean_ssim = 0.0;
};

struct TransformSweepResult {
  std::vector<TransformSweepPoint> points;
  double best_fraction = 0.0;
  std::size_t best_subset = 0;

  /// Lowest mean NMSE over fractions for one checkpoint.
  const TransformSweepPoint* best(const std::string& checkpoint) const {
    const TransformSweepPoint* b = nullptr;
    for (const auto& p : points)
      if (p.checkpoint == checkpoint && !p.skipped && (!b || p.mean_nmse_db < b->mean_nmse_db)) b = &p;
    return b;
  }
  const TransformSweepPoint* at(const std::string& checkpoint, double fraction) const {
    for (const auto& p : points)
      if (p.checkpoint == checkpoint && p.fraction == fraction) return &p;
    return nullptr;
  }
};

inline constexpr const char* kBestAdaptedTransform = "t_da_best";

/// Refits the transform on random fractions of the observed training split and keeps the simulated networks.
/// The best adapted transform is chosen on the coarse simulated network, which later seeds fine-tuning.
inline TransformSweepResult run_transform_sweep(const ExperimentContext& ctx) {
  const auto o = load_dataset(ctx, kObserved);
  const DomainTag domain = o.train.front().domain;
  const std::vector<std::pair<const DatasetSpec*, Checkpoint>> nets{{&kFine, load_trained(ctx, kFine)},
                                                                    {&kCoarse, load_trained(ctx, kCoarse)}};
  TransformSweepResult res;
  std::map<double, std::vector<QuantileTransform>> fitted;
  std::string csv = "checkpoint,fraction,subset,k_patches,nmse_db,ssim,seed,config_hash\n";
  std::vector<std::string> metrics;
  const std::string tail = "," + std::to_string(ctx.cfg.seed) + "," + ctx.hash() + "\n";
  for (std::size_t pi = 0; pi < ctx.cfg.transform_fractions.size(); ++pi) {
    const double p = ctx.cfg.transform_fractions[pi];
    const auto k = static_cast<std::size_t>(std::llround(p * static_cast<double>(o.train.size())));
    std::vector<QuantileTransform> ts;
    try {
      ts = fit_fraction(o.train, p, ctx.cfg.transform_subsets, ctx.cfg.transform,
                        derive_seed(ctx.cfg.seed, 0x75e3, pi), domain);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Data) throw;
      ctx.say("transform sweep: skipping p=" + detail::label(p) + ": " + e.what());
    }
    for (const auto& [spec, ck] : nets) {
      TransformSweepPoint pt;
      pt.checkpoint = spec->name;
      pt.fraction = p;
      pt.skipped = ts.empty();
      if (pt.skipped) {
        csv += pt.checkpoint + "," + detail::label(p) + ",skipped," + std::to_string(k) + ",," + tail;
        res.points.push_back(pt);
        continue;
      }
      for (std::size_t s = 0; s < ts.size(); ++s) {
        const auto rep = evaluate(ck, ts[s], o.test, ctx.cfg.threads);
        pt.nmse_db.push_back(rep.nmse_db);
        pt.ssim.push_back(rep.ssim);
        csv += pt.checkpoint + "," + detail::label(p) + "," + std::to_string(s) + "," + std::to_string(k) + "," +
               detail::num(rep.nmse_db) + "," + detail::num(rep.ssim) + tail;
      }
      for (std::size_t s = 0; s < ts.size(); ++s) {
        pt.mean_nmse_db += pt.nmse_db[s] / static_cast<double>(ts.size());
        pt.mean_ssim += pt.ssim[s] / static_cast<double>(ts.size());
      }
      csv += pt.checkpoint + "," + detail::label(p) + ",mean," + std::to_string(k) + "," +
             detail::num(pt.mean_nmse_db) + "," + detail::num(pt.mean_ssim) + tail;
      metrics.push_back(detail::metric_line(ctx, "transform_sweep/" + pt.checkpoint + "/p=" + detail::label(p),
                                            domain.label(), o.test.size(), pt.mean_nmse_db, pt.mean_ssim));
      ctx.say("transform sweep: " + pt.checkpoint + " p=" + detail::label(p) + " mean NMSE " +
              detail::num(pt.mean_nmse_db) + " dB");
      res.points.push_back(pt);
    }
    if (!ts.empty()) fitted.emplace(p, std::move(ts));
  }
  const auto* best = res.best(kCoarse.name);
  require(best != nullptr, ErrorKind::Data, "transform sweep: every fraction was skipped");
  res.best_fraction = best->fraction;
  for (std::size_t s = 1; s < best->nmse_db.size(); ++s)
    if (best->nmse_db[s] < best->nmse_db[res.best_subset]) res.best_subset = s;
  write_transform(ctx.paths.transforms() / (std::string(kBestAdaptedTransform) + ".csv"),
                  fitted.at(res.best_fraction)[res.best_subset]);
  io::write_text(ctx.paths.reports() / "transform_sweep.csv", csv);
  detail::write_metrics(ctx, "transform_sweep", metrics);
  return res;
}

struct InjectionPoint {
  double fraction = 0.0;
  std::size_t n_observed = 0;
  std::size_t n_simulated = 0;
  MetricReport report;
  double delta_nmse_db = 0.0;  // relative to fraction 0
  std::uint32_t best_epoch = 0;
};

/// Fine-tunes the coarse simulated network on equal-budget mixes of observed and simulated patches,
/// under the best adapted transform from the transform sweep.
inline std::vector<InjectionPoint> run_injection_sweep(const ExperimentContext& ctx) {
  const auto o = load_dataset(ctx, kObserved);
  const auto st = load_dataset(ctx, kCoarse);
  const auto base = load_trained(ctx, kCoarse);
  const auto t_da = load_fitted(ctx, kBestAdaptedTransform);
  require(t_da.fitted_on().kind == DomainTag::Kind::Observed, ErrorKind::Config,
          "injection sweep needs a transform fitted on observed data (run transform-sweep first)");
  const std::size_t budget =
      ctx.cfg.injection_budget ? ctx.cfg.injection_budget : std::min(o.train.size(), st.train.size());
  const auto tc = ctx.cfg.finetune_config();
  std::vector<InjectionPoint> pts;
  for (std::size_t i = 0; i < ctx.cfg.injection_fractions.size(); ++i) {
    const double p = ctx.cfg.injection_fractions[i];
    InjectionConfig ic{p, budget, st.train, o.train, derive_seed(ctx.cfg.seed, 0x1b7e, i)};
    const auto set = build_injection_set(ic);
    TrainConfig ti = tc;
    ti.seed = derive_seed(ctx.cfg.seed, 0xf1e7);
    const auto res = fine_tune(base, set, o.val, t_da, ti, p);
    save_checkpoint(ctx.paths.checkpoints() / ("n_da_p" + detail::label(p) + ".srck"), res.checkpoint);
    InjectionPoint pt;
    pt.fraction = p;
    pt.n_observed = injected_count(p, budget);
    pt.n_simulated = budget - pt.n_observed;
    pt.report = evaluate(res.checkpoint, t_da, o.test, ctx.cfg.threads);
    pt.best_epoch = res.best_epoch;
    ctx.say("injection sweep: p=" + detail::label(p) + " (" + std::to_string(pt.n_observed) + " O + " +
            std::to_string(pt.n_simulated) + " ST) NMSE " + detail::num(pt.report.nmse_db) + " dB, best epoch " +
            std::to_string(pt.best_epoch));
    pts.push_back(pt);
  }
  const InjectionPoint* zero = nullptr;
  for (const auto& pt : pts)
    if (pt.fraction == 0.0) zero = &pt;
  const double ref = zero ? zero->report.nmse_db : pts.front().report.nmse_db;
  std::string csv = "fraction,n_observed,n_simulated,nmse_db,ssim,delta_nmse_db,best_epoch,seed,config_hash\n";
  std::vector<std::string> metrics;
  for (auto& pt : pts) {
    pt.delta_nmse_db = pt.report.nmse_db - ref;
    csv += detail::label(pt.fraction) + "," + std::to_string(pt.n_observed) + "," + std::to_string(pt.n_simulated) +
           "," + detail::num(pt.report.nmse_db) + "," + detail::num(pt.report.ssim) + "," +
           detail::num(pt.delta_nmse_db) + "," + std::to_string(pt.best_epoch) + "," +
           std::to_string(ctx.cfg.seed) + "," + ctx.hash() + "\n";
    metrics.push_back(detail::metric_line(ctx, "injection_sweep/p=" + detail::label(pt.fraction),
                                          pt.report.domain.label(), pt.report.n_patches, pt.report.nmse_db,
                                          pt.report.ssim));
  }
  io::write_text(ctx.paths.reports() / "injection_sweep.csv", csv);
  detail::write_metrics(ctx, "injection_sweep", metrics);
  return pts;
}

namespace detail {

using CsvRows = std::vector<std::vector<std::string>>;

/// Header-keyed rows of a simple CSV (no quoting).
inline CsvRows read_csv(const fs::path& path, std::vector<std::string>* header = nullptr) {
  const auto ls = text::lines(io::read_text(path));
  require(!ls.empty(), ErrorKind::Data, path.string() + ": empty CSV");
  if (header) *header = text::split(ls[0], ',');
  CsvRows rows;
  for (std::size_t i = 1; i < ls.size(); ++i)
    if (!text::trim(ls[i]).empty()) rows.push_back(text::split(ls[i], ','));
  return rows;
}

inline std::size_t column(const std::vector<std::string>& header, const std::string& name, const fs::path& path) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (text::trim(header[i]) == name) return i;
  fail(ErrorKind::Data, path.string() + ": no column '" + name + "'");
}

}  // namespace detail

inline constexpr const char* kScenarioOrder[] = {"perfect_knowledge", "zero_knowledge", "transform_sweep",
                                                 "injection_sweep"};

/// Merges the per-scenario metrics of one or more run directories into <out>/metrics.csv and writes
/// x,y,series plot-data files. Runs with different config hashes get a warning row.
inline std::size_t run_report(const std::vector<fs::path>& runs, const fs::path& out_dir) {
  require(!runs.empty(), ErrorKind::Config, "report: no run directories given");
  std::string merged = std::string(detail::kMetricsHeader) + "\n";
  std::string pk_plot = "x,y,series\n", ta_plot = "x,y,series\n", na_plot = "x,y,series\n";
  std::vector<std::string> hashes;
  std::size_t blocks = 0;
  for (const auto& run : runs) {
    const RunPaths rp{run};
    const std::string prefix = runs.size() > 1 ? run.filename().string() + ":" : "";
    bool any = false;
    for (const char* scenario : kScenarioOrder) {
      const auto path = rp.reports() / (std::string(scenario) + "_metrics.csv");
      if (!fs::exists(path)) continue;
      std::vector<std::string> header;
      for (auto row : detail::read_csv(path, &header)) {
        require(row.size() == 7, ErrorKind::Data, path.string() + ": malformed metrics row");
        if (std::find(hashes.begin(), hashes.end(), row[6]) == hashes.end()) hashes.push_back(row[6]);
        row[0] = prefix + row[0];
        std::string line;
        for (std::size_t i = 0; i < row.size(); ++i) line += (i ? "," : "") + row[i];
        merged += line + "\n";
      }
      any = true;
    }
    require(any, ErrorKind::Data, "report: no scenario metrics under " + rp.reports().string());
    ++blocks;

    if (const auto p = rp.reports() / "perfect_knowledge.csv"; fs::exists(p)) {
      std::vector<std::string> h;
      for (const auto& r : detail::read_csv(p, &h)) {
        std::string res = r[detail::column(h, "spatial_resolution", p)];
        if (res.size() > 3 && res.ends_with("deg")) res.resize(res.size() - 3);
        pk_plot += res + "," + r[detail::column(h, "nmse_db", p)] + "," + prefix + r[0] + "\n";
      }
    }
    if (const auto p = rp.reports() / "transform_sweep.csv"; fs::exists(p)) {
      std::vector<std::string> h;
      for (const auto& r : detail::read_csv(p, &h))
        if (r[detail::column(h, "subset", p)] == "mean")
          ta_plot += r[detail::column(h, "fraction", p)] + "," + r[detail::column(h, "nmse_db", p)] + "," + prefix +
                     r[0] + "\n";
    }
    if (const auto p = rp.reports() / "injection_sweep.csv"; fs::exists(p)) {
      std::vector<std::string> h;
      for (const auto& r : detail::read_csv(p, &h))
        na_plot += r[detail::column(h, "fraction", p)] + "," + r[detail::column(h, "nmse_db", p)] + "," + prefix +
                   "fine_tuned\n";
    }
  }
  if (hashes.size() > 1) {
    std::string joined;
    for (const auto& h : hashes) joined += (joined.empty() ? "" : ";") + h;
    merged += "WARNING,config_hash_mismatch,,,,," + joined + "\n";
  }
  io::write_text(out_dir / "metrics.csv", merged);
  io::write_text(out_dir / "plot_perfect_knowledge.csv", pk_plot);
  io::write_text(out_dir / "plot_transform_sweep.csv", ta_plot);
  io::write_text(out_dir / "plot_injection_sweep.csv", na_plot);
  return blocks;
}

struct TrendSummary {
  std::vector<PerfectKnowledgeRow> perfect;
  std::vector<ZeroKnowledgeRow> zero;
  TransformSweepResult transform;
  std::vector<InjectionPoint> injection;
};

/// synth, all four scenarios and the report, in order.
inline TrendSummary run_trend_suite(const ExperimentContext& ctx) {
  io::write_text(ctx.paths.root / "effective_config.ini", ctx.cfg.effective());
  TrendSummary s;
  run_synth(ctx);
  s.perfect = run_perfect_knowledge(ctx);
  s.zero = run_zero_knowledge(ctx);
  s.transform = run_transform_sweep(ctx);
  s.injection = run_injection_sweep(ctx);
  run_report({ctx.paths.root}, ctx.paths.reports());
  return s;
}

}  // namespace bvocsr
