// bvocsr: synthetic data, training, evaluation and sweeps for x2 emission-map super-resolution.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "bvocsr/experiments.hpp"

namespace fs = std::filesystem;
using namespace bvocsr;

namespace {

struct Common {
  std::string config;
  std::string out = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::size_t threads = 0;
  bool deterministic = false;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "scenario INI file");
  app->add_option("--out", c.out, "output directory");
  app->add_option("--seed", c.seed, "master seed (overrides run.seed)");
  app->add_option("--threads", c.threads, "evaluation threads (overrides run.threads)");
  app->add_flag("--deterministic", c.deterministic, "force single-threaded evaluation");
  app->add_option("--set", c.overrides, "override a config key: section.key=value");
}

ExperimentConfig resolve(const Common& c, const CLI::App* app) {
  Config cfg = c.config.empty() ? Config{} : Config::load(c.config);
  for (const auto& o : c.overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) fail(ErrorKind::Config, "--set expects section.key=value, got '" + o + "'");
    cfg.set(text::trim(o.substr(0, eq)), text::trim(o.substr(eq + 1)));
  }
  if (app->count("--seed")) cfg.set("run.seed", std::to_string(c.seed));
  if (app->count("--threads")) cfg.set("run.threads", std::to_string(c.threads));
  if (c.deterministic) {
    cfg.set("run.deterministic", "true");
    cfg.set("run.threads", "1");
  }
  return ExperimentConfig::from(cfg);
}

ExperimentContext context(const Common& c, const CLI::App* app) {
  ExperimentContext ctx;
  ctx.cfg = resolve(c, app);
  ctx.paths.root = c.out;
  return ctx;
}

void echo(const ExperimentContext& ctx) {
  io::write_text(ctx.paths.root / "effective_config.ini", ctx.cfg.effective());
  std::cerr << "# effective configuration (hash " << ctx.hash() << ")\n" << ctx.cfg.effective();
}

DomainTag parse_domain(const std::string& s) { return DomainTag::parse(s); }

std::vector<Split> parse_splits(const std::string& s) {
  std::vector<Split> out;
  if (s == "all") return out;
  for (const auto& part : text::split(s, ',')) out.push_back(parse_split(text::trim(part)));
  return out;
}

std::string report_line(const MetricReport& r) {
  return r.domain.label() + "," + std::to_string(r.n_patches) + "," + text::format_fixed(r.nmse_db, 6) + "," +
         text::format_fixed(r.ssim, 6) + "," + text::format_fixed(r.bicubic_nmse_db, 6);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"x2 super-resolution of gridded emission maps with domain adaptation"};
  app.require_subcommand(1);

  Common c;
  auto* synth = app.add_subcommand("synth", "generate the synthetic S, S_T and O datasets");
  add_common(synth, c);

  std::string maps_dir, domain = "S", split_mode = "random", manifest_out;
  auto* patchify = app.add_subcommand("patchify", "slice EMG maps into 32x32 patches and write a manifest");
  add_common(patchify, c);
  patchify->add_option("--maps", maps_dir, "directory of .emg files")->required();
  patchify->add_option("--domain", domain, "S, ST or O<id>");
  patchify->add_option("--split", split_mode, "random or by-year")->check(CLI::IsMember({"random", "by-year"}));
  patchify->add_option("--manifest", manifest_out, "manifest CSV to write")->required();

  std::string manifest, split = "train", transform_out, domain_tag;
  double fraction = 1.0;
  std::size_t subset = 0;
  auto* fit = app.add_subcommand("fit-transform", "fit a quantile transform on a manifest split");
  add_common(fit, c);
  fit->add_option("--manifest", manifest, "manifest CSV")->required();
  fit->add_option("--split", split, "split(s) to pool, comma separated, or 'all'");
  fit->add_option("--fraction", fraction, "fraction of non-empty patches to use");
  fit->add_option("--subset", subset, "which random subset of the fraction");
  fit->add_option("--transform", transform_out, "transform CSV to write")->required();

  std::string transform_in, checkpoint, init_ck;
  auto* trn = app.add_subcommand("train", "train a network on a manifest's train split");
  add_common(trn, c);
  trn->add_option("--manifest", manifest, "manifest CSV")->required();
  trn->add_option("--transform", transform_in, "transform CSV")->required();
  trn->add_option("--checkpoint", checkpoint, "checkpoint to write")->required();
  trn->add_option("--init", init_ck, "start from this checkpoint instead of a random init");

  auto* pk = app.add_subcommand("perfect-knowledge", "train and test on each dataset separately");
  add_common(pk, c);
  auto* zk = app.add_subcommand("zero-knowledge", "apply simulated-domain networks to observed data");
  add_common(zk, c);
  auto* ta = app.add_subcommand("transform-sweep", "refit the transform on fractions of observed data");
  add_common(ta, c);
  auto* na = app.add_subcommand("injection-sweep", "fine-tune on mixes of observed and simulated patches");
  add_common(na, c);
  auto* all = app.add_subcommand("all", "synth, every scenario and the report");
  add_common(all, c);

  std::string eval_split = "test";
  auto* ev = app.add_subcommand("eval", "score a checkpoint and transform on a manifest split");
  add_common(ev, c);
  ev->add_option("--checkpoint", checkpoint, "checkpoint")->required();
  ev->add_option("--transform", transform_in, "transform CSV")->required();
  ev->add_option("--manifest", manifest, "manifest CSV")->required();
  ev->add_option("--split", eval_split, "split(s) to score, comma separated, or 'all'");

  std::vector<std::string> runs;
  std::string report_dir;
  auto* rep = app.add_subcommand("report", "merge run directories into metrics.csv and plot data");
  rep->add_option("runs", runs, "run directories")->required();
  rep->add_option("--into", report_dir, "where to write the merged files (default: first run's reports/)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_code(ErrorKind::Config);
  }

  try {
    if (rep->parsed()) {
      std::vector<fs::path> paths(runs.begin(), runs.end());
      const fs::path into = report_dir.empty() ? RunPaths{paths.front()}.reports() : fs::path(report_dir);
      const auto blocks = run_report(paths, into);
      std::cerr << "report: merged " << blocks << " run(s) into " << (into / "metrics.csv").string() << "\n";
      return 0;
    }

    CLI::App* sub = app.get_subcommands().front();
    auto ctx = context(c, sub);

    if (patchify->parsed()) {
      const DomainTag tag = parse_domain(domain);
      const fs::path mpath(manifest_out);
      const fs::path base = mpath.has_parent_path() ? mpath.parent_path() : fs::path(".");
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(maps_dir))
        if (e.path().extension() == ".emg") files.push_back(e.path());
      require(!files.empty(), ErrorKind::Data, "no .emg files in " + maps_dir);
      std::sort(files.begin(), files.end());
      DatasetManifest m;
      for (const auto& f : files) {
        auto map = read_emg(f);
        const auto rel = fs::relative(fs::absolute(f), fs::absolute(base)).generic_string();
        auto recs = records_for_map(map, rel, f.stem().string(), tag);
        m.records.insert(m.records.end(), recs.begin(), recs.end());
      }
      m = split_mode == "random" ? split_random(std::move(m), ctx.cfg.synthetic.splits.fine_fractions, ctx.cfg.seed)
                                 : split_by_year(std::move(m), ctx.cfg.synthetic.splits.by_year);
      write_manifest(mpath, m);
      std::cerr << "patchify: " << m.records.size() << " patches (" << m.count(Split::Train) << " train, "
                << m.count(Split::Val) << " val, " << m.count(Split::Test) << " test)\n";
      return 0;
    }

    if (fit->parsed()) {
      const auto m = read_manifest(manifest);
      const fs::path base = fs::path(manifest).parent_path();
      const auto patches = non_empty(load_patches(m, base, parse_splits(split)));
      require(!patches.empty(), ErrorKind::Data, "fit-transform: no non-empty patches in the selected split");
      const auto ts = fit_fraction(patches, fraction, subset + 1, ctx.cfg.transform,
                                   derive_seed(ctx.cfg.seed, 0x75e3), patches.front().domain);
      write_transform(transform_out, ts[subset]);
      std::cerr << "fit-transform: " << ts[subset].n_quantiles() << " quantiles fitted on "
                << ts[subset].fitted_on().label() << "\n";
      return 0;
    }

    if (trn->parsed()) {
      echo(ctx);
      const auto m = read_manifest(manifest);
      const fs::path base = fs::path(manifest).parent_path();
      auto tr = load_patches(m, base, {Split::Train});
      auto va = load_patches(m, base, {Split::Val});
      if (ctx.cfg.train.drop_empty_patches) va = non_empty(std::move(va));
      require(!tr.empty(), ErrorKind::Data, "train: manifest has no training patches");
      const auto t = read_transform(transform_in);
      const auto init = init_ck.empty() ? init_checkpoint(ctx.cfg.network, derive_seed(ctx.cfg.seed, 0x1417))
                                        : load_checkpoint(init_ck);
      TrainConfig tc = ctx.cfg.train;
      const auto res = train(tc, tr, va, t, init, provenance_for(tr.front().domain));
      save_checkpoint(checkpoint, res.checkpoint);
      std::cout << format_history(res.history);
      std::cerr << "train: best epoch " << res.best_epoch << ", val NMSE " << res.best_val_nmse_db << " dB\n";
      return 0;
    }

    if (ev->parsed()) {
      const auto m = read_manifest(manifest);
      const fs::path base = fs::path(manifest).parent_path();
      auto patches = load_patches(m, base, parse_splits(eval_split));
      if (ctx.cfg.train.drop_empty_patches) patches = non_empty(std::move(patches));
      const auto r = evaluate(load_checkpoint(checkpoint), read_transform(transform_in), patches, ctx.cfg.threads);
      std::cout << "domain,n_patches,nmse_db,ssim,bicubic_nmse_db\n" << report_line(r) << "\n";
      return 0;
    }

    OutputLock lock(ctx.paths.root);
    echo(ctx);
    if (synth->parsed()) run_synth(ctx);
    if (pk->parsed()) run_perfect_knowledge(ctx);
    if (zk->parsed()) run_zero_knowledge(ctx);
    if (ta->parsed()) run_transform_sweep(ctx);
    if (na->parsed()) run_injection_sweep(ctx);
    if (all->parsed()) run_trend_suite(ctx);
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(ErrorKind::Data);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
