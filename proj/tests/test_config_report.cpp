#include <gtest/gtest.h>

#include "bvocsr/experiments.hpp"
#include "support.hpp"

using namespace bvocsr;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::Numeric;
}

ExperimentConfig from_text(const std::string& ini) { return ExperimentConfig::from(Config::parse(ini)); }

}  // namespace

TEST(Config, ParsesSectionsAndOverrides) {
  auto cfg = Config::parse("# c\n[run]\nseed = 5 # trailing\n[train]\nloss = l2\n");
  EXPECT_EQ(cfg.get_int("run.seed", 0), 5);
  EXPECT_EQ(cfg.get_string("train.loss", ""), "l2");
  cfg.set("run.seed", "9");
  EXPECT_EQ(cfg.get_int("run.seed", 0), 9);
  EXPECT_EQ(cfg.get_int("run.missing", 3), 3);
}

TEST(Config, MalformedInputIsConfigError) {
  EXPECT_EQ(kind_of([] { Config::parse("[run\nseed = 1\n"); }), ErrorKind::Config);
  EXPECT_EQ(kind_of([] { Config::parse("[run]\nseed\n"); }), ErrorKind::Config);
  EXPECT_EQ(kind_of([] { Config::parse("[run]\nseed = x\n").get_int("run.seed", 0); }), ErrorKind::Config);
  EXPECT_EQ(kind_of([] { Config::load("/nonexistent/scenario.ini"); }), ErrorKind::Config);
}

TEST(ExperimentConfig, DefaultsAndOverrides) {
  const auto d = from_text("");
  EXPECT_EQ(d.seed, 42u);
  EXPECT_EQ(d.network.channels, 32u);
  EXPECT_EQ(d.network.blocks, 4u);
  EXPECT_EQ(d.transform.n_quantiles, 1000u);
  const auto c = from_text("[run]\nseed = 7\n[train]\nepochs = 3\npatience = 2\nepochs.o = 5\n");
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.train_config("s_fine").epochs, 3u);
  EXPECT_EQ(c.train_config("o").epochs, 5u);
}

TEST(ExperimentConfig, RejectsUnknownKeysAndBadValues) {
  EXPECT_EQ(kind_of([] { from_text("[train]\nepoch = 3\n"); }), ErrorKind::Config);
  EXPECT_EQ(kind_of([] { from_text("[train]\nloss = huber\n"); }), ErrorKind::Config);
  EXPECT_EQ(kind_of([] { from_text("[synthetic]\nzero_fraction = 1.5\n"); }), ErrorKind::Config);
  EXPECT_EQ(kind_of([] { from_text("[sweep]\ninjection_fractions = 0, 1.5\n"); }), ErrorKind::Config);
}

TEST(ExperimentConfig, HashIgnoresThreadsOnly) {
  const auto a = from_text("[run]\nthreads = 1\n");
  const auto b = from_text("[run]\nthreads = 4\n");
  const auto c = from_text("[run]\nseed = 1\n");
  EXPECT_EQ(a.config_hash(), b.config_hash());
  EXPECT_NE(a.config_hash(), c.config_hash());
  EXPECT_NE(a.effective().find("train.learning_rate = "), std::string::npos);
}

TEST(ExitCodes, ByErrorKind) {
  EXPECT_EQ(exit_code(ErrorKind::Config), 2);
  EXPECT_EQ(exit_code(ErrorKind::Data), 3);
  EXPECT_EQ(exit_code(ErrorKind::Dimension), 3);
  EXPECT_EQ(exit_code(ErrorKind::Numeric), 4);
}

TEST(OutputLock, SecondLockIsRefused) {
  const auto dir = testing_support::scratch_dir("lock");
  {
    OutputLock lock(dir);
    EXPECT_EQ(kind_of([&] { OutputLock again(dir); }), ErrorKind::Config);
  }
  OutputLock after(dir);
  SUCCEED();
}

namespace {

void fake_run(const fs::path& root, const std::string& hash) {
  fs::create_directories(root / "reports");
  io::write_text(root / "reports" / "perfect_knowledge_metrics.csv",
                 "scenario,domain,n_patches,nmse_db,ssim,seed,config_hash\n"
                 "perfect_knowledge,S,10,-20.000000,0.900000,42," + hash + "\n");
  io::write_text(root / "reports" / "perfect_knowledge.csv",
                 "dataset,spatial_resolution,n_patches,nmse_db,ssim,bicubic_nmse_db,seed,config_hash,train_time_pct,"
                 "train_seconds\n"
                 "s_fine,0.25deg,10,-20.000000,0.900000,-18.000000,42," + hash + ",100.0,1.0\n");
}

}  // namespace

TEST(Report, MergesRunsIntoBlocks) {
  const auto dir = testing_support::scratch_dir("report");
  fake_run(dir / "a", "h1");
  fake_run(dir / "b", "h1");
  EXPECT_EQ(run_report({dir / "a", dir / "b"}, dir), 2u);
  const auto merged = io::read_text(dir / "metrics.csv");
  EXPECT_NE(merged.find("a:perfect_knowledge,S"), std::string::npos);
  EXPECT_NE(merged.find("b:perfect_knowledge,S"), std::string::npos);
  EXPECT_EQ(merged.find("WARNING"), std::string::npos);
  EXPECT_NE(io::read_text(dir / "plot_perfect_knowledge.csv").find("0.25,-20.000000,a:s_fine"), std::string::npos);
  // a second run over the same inputs writes the same files
  run_report({dir / "a", dir / "b"}, dir);
  EXPECT_EQ(io::read_text(dir / "metrics.csv"), merged);
}

TEST(Report, HashMismatchAddsWarningRow) {
  const auto dir = testing_support::scratch_dir("report_warn");
  fake_run(dir / "a", "h1");
  fake_run(dir / "b", "h2");
  run_report({dir / "a", dir / "b"}, dir);
  EXPECT_NE(io::read_text(dir / "metrics.csv").find("WARNING,config_hash_mismatch,,,,,h1;h2"), std::string::npos);
}

TEST(Report, EmptyRunIsDataError) {
  const auto dir = testing_support::scratch_dir("report_empty");
  fs::create_directories(dir / "x" / "reports");
  EXPECT_EQ(kind_of([&] { run_report({dir / "x"}, dir); }), ErrorKind::Data);
}
