#include <gtest/gtest.h>

#include "bvocsr/dataset.hpp"
#include "bvocsr/training.hpp"

using namespace bvocsr;

namespace {

struct Data {
  std::vector<PatchPair> train, val, test;
  QuantileTransform transform;
};

// Non-empty simulated patches: 200 train, 40 validation, the rest for testing.
const Data& data() {
  static const Data d = [] {
    FieldConfig fc;
    fc.seed = 3;
    const SimulatedGenerator gen(fc);
    std::vector<PatchPair> all;
    for (std::int64_t t = 0; all.size() < 280; ++t)
      for (auto& p : slice_into_patches(gen.frame(t), kPatchSize))
        if (!p.empty) all.push_back(make_patch_pair(std::move(p.hr), "f", p.row, p.col, DomainTag::simulated(), t));
    Data out;
    out.train.assign(all.begin(), all.begin() + 200);
    out.val.assign(all.begin() + 200, all.begin() + 240);
    out.test.assign(all.begin() + 240, all.begin() + 280);
    out.transform = fit_quantile_transform(pool_values(out.train, false), FitOptions{}, 1, DomainTag::simulated());
    return out;
  }();
  return d;
}

TrainConfig small_config(std::uint32_t epochs) {
  TrainConfig tc;
  tc.epochs = epochs;
  tc.patience = std::max<std::uint32_t>(1, epochs);
  tc.batch_size = 16;
  tc.learning_rate = 3e-3;
  tc.fine_tune_lr = 1e-3;
  tc.seed = 17;
  return tc;
}

const NetworkConfig kSmall{8, 1, 4};

}  // namespace

TEST(Training, ZeroEpochsReturnsInitialCheckpoint) {
  const auto init = init_checkpoint(kSmall, 5);
  const auto res = train(small_config(0), data().train, data().val, data().transform, init,
                         provenance_for(DomainTag::simulated()));
  EXPECT_EQ(res.checkpoint.params, init.params);
  EXPECT_TRUE(res.history.empty());
}

TEST(Training, ShortRunLearnsAndIsReproducible) {
  const auto init = init_checkpoint(kSmall, 5);
  const auto cfg = small_config(12);
  const auto a = train(cfg, data().train, data().val, data().transform, init, provenance_for(DomainTag::simulated()));
  ASSERT_EQ(a.history.size(), 12u);
  EXPECT_EQ(a.checkpoint.provenance.kind, Provenance::Kind::TrainedOnS);
  EXPECT_GE(a.best_epoch, 1u);
  EXPECT_DOUBLE_EQ(a.best_val_nmse_db, a.history[a.best_epoch - 1].val_nmse_db);
  const auto rep = evaluate(a.checkpoint, data().transform, data().test);
  EXPECT_EQ(rep.n_patches, data().test.size());
  EXPECT_LT(rep.nmse_db, evaluate(init, data().transform, data().test).nmse_db - 6.0);

  const auto b = train(cfg, data().train, data().val, data().transform, init, provenance_for(DomainTag::simulated()));
  EXPECT_EQ(format_history(a.history), format_history(b.history));
  EXPECT_EQ(a.checkpoint, b.checkpoint);
}

TEST(Training, EvaluationDoesNotDependOnThreadCount) {
  const auto ck = init_checkpoint(kSmall, 8);
  const auto one = evaluate(ck, data().transform, data().test, 1);
  const auto four = evaluate(ck, data().transform, data().test, 4);
  EXPECT_EQ(one.nmse_db, four.nmse_db);
  EXPECT_EQ(one.ssim, four.ssim);
}

TEST(Training, RejectsEmptyValidationSet) {
  EXPECT_THROW(train(small_config(2), data().train, {}, data().transform, init_checkpoint(kSmall, 1), {}), Error);
}

TEST(Injection, CountsFollowTheFraction) {
  std::vector<PatchPair> sim(1000), obs(1000);
  for (auto& p : sim) p.domain = DomainTag::simulated_time_limited();
  for (auto& p : obs) p.domain = DomainTag::observed(1);
  const auto count_obs = [](const std::vector<PatchPair>& s) {
    return std::count_if(s.begin(), s.end(), [](const PatchPair& p) { return p.domain.kind == DomainTag::Kind::Observed; });
  };
  for (auto [p, n_obs] : {std::pair{0.2, 200}, {0.0, 0}, {1.0, 1000}}) {
    const auto set = build_injection_set({p, 1000, sim, obs, 9});
    ASSERT_EQ(set.size(), 1000u);
    EXPECT_EQ(count_obs(set), n_obs) << p;
  }
  EXPECT_EQ(injected_count(0.6, 5), 3u);
  EXPECT_THROW(build_injection_set({1.0, 1000, sim, std::span(obs).first(10), 9}), Error);
  EXPECT_THROW(build_injection_set({1.5, 10, sim, obs, 9}), Error);
}

TEST(Injection, FineTuneProvenanceAndBaseCheck) {
  auto base = init_checkpoint(kSmall, 2);
  const auto cfg = small_config(0);
  EXPECT_THROW(fine_tune(base, data().train, data().val, data().transform, cfg, 0.4), Error);
  base.provenance = provenance_for(DomainTag::simulated_time_limited());
  const auto res = fine_tune(base, data().train, data().val, data().transform, cfg, 0.4);
  EXPECT_EQ(res.checkpoint.provenance.kind, Provenance::Kind::FineTunedDA);
  EXPECT_FLOAT_EQ(res.checkpoint.provenance.injection_fraction, 0.4f);
  EXPECT_EQ(res.checkpoint.params, base.params);
}

TEST(Injection, FrozenLayersStayFixedDuringFineTune) {
  auto base = init_checkpoint(kSmall, 2);
  base.provenance = provenance_for(DomainTag::simulated());
  auto cfg = small_config(2);
  cfg.freeze_prefixes = {"head", "block0"};
  const auto res = fine_tune(base, data().train, data().val, data().transform, cfg, 1.0);
  const auto& before = base.params.tensors;
  const auto& after = res.checkpoint.params.tensors;
  for (std::size_t i = 0; i < before.size(); ++i) {
    if (before[i].name.starts_with("head") || before[i].name.starts_with("block0"))
      EXPECT_EQ(before[i], after[i]) << before[i].name;
    else if (before[i].name == "tail.w")
      EXPECT_NE(before[i], after[i]);
  }
}
