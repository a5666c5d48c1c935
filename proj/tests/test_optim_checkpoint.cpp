#include <gtest/gtest.h>

#include <cmath>

#include "bvocsr/checkpoint.hpp"
#include "support.hpp"

using namespace bvocsr;

TEST(Loss, SquaredErrorSingleCell) {
  const Tensor<float> pred({1, 1, 1, 1}, 2.0f), target({1, 1, 1, 1}, 0.0f);
  const auto r = loss_value(pred, target, LossKind::L2);
  EXPECT_DOUBLE_EQ(r.value, 4.0);
  EXPECT_FLOAT_EQ(r.grad.values()[0], 4.0f);
}

TEST(Loss, AbsoluteErrorMeanAndSign) {
  const Tensor<double> pred({1, 1, 1, 4}, std::vector<double>{1, 2, 3, 4});
  const Tensor<double> target({1, 1, 1, 4}, std::vector<double>{2, 2, 1, 0});
  const auto r = loss_value(pred, target, LossKind::L1);
  EXPECT_DOUBLE_EQ(r.value, (1 + 0 + 2 + 4) / 4.0);
  EXPECT_DOUBLE_EQ(r.grad.values()[0], -0.25);
  EXPECT_DOUBLE_EQ(r.grad.values()[1], 0.0);
  EXPECT_DOUBLE_EQ(r.grad.values()[2], 0.25);
}

TEST(Loss, GradientMatchesFiniteDifference) {
  Tensor<double> pred({1, 1, 3, 3}), target({1, 1, 3, 3});
  for (std::size_t i = 0; i < 9; ++i) {
    pred.values()[i] = std::sin(1.0 + i);
    target.values()[i] = std::cos(2.0 * i);
  }
  for (auto kind : {LossKind::L1, LossKind::L2}) {
    const auto r = loss_value(pred, target, kind);
    for (std::size_t i = 0; i < 9; ++i) {
      auto p = pred;
      p.values()[i] += 1e-6;
      const double up = loss_value(p, target, kind).value;
      p.values()[i] -= 2e-6;
      const double dn = loss_value(p, target, kind).value;
      EXPECT_NEAR((up - dn) / 2e-6, r.grad.values()[i], 1e-6);
    }
  }
}

TEST(Loss, ShapeMismatchIsDimensionError) {
  const Tensor<float> a({1, 1, 2, 2}), b({1, 1, 2, 3});
  try {
    loss_value(a, b, LossKind::L1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Dimension);
  }
}

namespace {
Parameters<double> single(std::vector<double> v) {
  Parameters<double> p;
  p.tensors.push_back({"x", {v.size()}, std::move(v)});
  return p;
}
}  // namespace

TEST(Adam, FirstStepMovesByLearningRate) {
  auto p = single({1.0, -2.0, 0.5});
  const auto g = single({0.3, -7.0, 1e-3});
  auto st = AdamState<double>::zeros_like(p);
  adam_step(p, g, st, 0.01);
  EXPECT_NEAR(p.tensors[0].data[0], 1.0 - 0.01, 1e-7);
  EXPECT_NEAR(p.tensors[0].data[1], -2.0 + 0.01, 1e-7);
  EXPECT_NEAR(p.tensors[0].data[2], 0.5 - 0.01, 1e-5);
  EXPECT_EQ(st.step, 1u);
}

TEST(Adam, ZeroGradientLeavesParameters) {
  auto p = single({1.0, 2.0});
  const auto before = p;
  auto st = AdamState<double>::zeros_like(p);
  for (int i = 0; i < 5; ++i) adam_step(p, single({0.0, 0.0}), st, 0.1);
  EXPECT_EQ(p, before);
}

TEST(Adam, FrozenTensorsAreSkipped) {
  auto p = single({1.0});
  p.tensors.push_back({"y", {1}, {1.0}});
  auto g = single({1.0});
  g.tensors.push_back({"y", {1}, {1.0}});
  auto st = AdamState<double>::zeros_like(p);
  adam_step(p, g, st, 0.1, {true, false});
  EXPECT_EQ(p.tensors[0].data[0], 1.0);
  EXPECT_NEAR(p.tensors[1].data[0], 0.9, 1e-7);
}

TEST(Schedule, CosineRunsFromBaseToFloor) {
  EXPECT_DOUBLE_EQ(scheduled_lr(1e-3, LrSchedule::Constant, 0.01, 7, 10), 1e-3);
  EXPECT_NEAR(scheduled_lr(1e-3, LrSchedule::Cosine, 0.01, 1, 11), 1e-3, 1e-15);
  EXPECT_NEAR(scheduled_lr(1e-3, LrSchedule::Cosine, 0.01, 6, 11), 1e-3 * (0.01 + 0.99 * 0.5), 1e-15);
  EXPECT_NEAR(scheduled_lr(1e-3, LrSchedule::Cosine, 0.01, 11, 11), 1e-5, 1e-15);
}

namespace {
Checkpoint sample_checkpoint(bool with_optimizer) {
  const NetworkConfig cfg{8, 2, 4};
  auto ck = init_checkpoint(cfg, 99);
  ck.provenance = {Provenance::Kind::FineTunedDA, 0.6f};
  ck.epoch = 12;
  if (with_optimizer) {
    auto st = AdamState<float>::zeros_like(ck.params);
    adam_step(ck.params, init_parameters<float>(cfg, 5), st, 1e-3);
    ck.optimizer = st;
  }
  return ck;
}
}  // namespace

TEST(Checkpoint, RoundTripIsExact) {
  for (bool opt : {false, true}) {
    const auto ck = sample_checkpoint(opt);
    const auto back = decode_checkpoint(encode_checkpoint(ck));
    EXPECT_EQ(back, ck);
    EXPECT_EQ(back.provenance.label(), "FineTunedDA(0.6)");
  }
}

TEST(Checkpoint, FileRoundTripAndNetworkOutput) {
  const auto dir = testing_support::scratch_dir("ckpt");
  const auto ck = sample_checkpoint(false);
  save_checkpoint(dir / "a.srck", ck);
  const auto back = load_checkpoint(dir / "a.srck");
  const Tensor<float> x({1, 1, 4, 4}, 0.3f);
  EXPECT_EQ(back.network().forward(x), ck.network().forward(x));
}

TEST(Checkpoint, TruncationAndCorruptionAreDataErrors) {
  const auto bytes = encode_checkpoint(sample_checkpoint(true));
  const auto kind_of = [](std::vector<unsigned char> b) {
    try {
      decode_checkpoint(std::move(b));
    } catch (const Error& e) {
      return static_cast<int>(e.kind());
    }
    return -1;
  };
  const int data = static_cast<int>(ErrorKind::Data);
  for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{20}, bytes.size() / 2, bytes.size() - 1})
    EXPECT_EQ(kind_of({bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(cut)}), data) << cut;
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_EQ(kind_of(bad), data);
  bad = bytes;
  bad.push_back(0);
  EXPECT_EQ(kind_of(bad), data);
}

TEST(Checkpoint, ProvenanceFromDomain) {
  EXPECT_EQ(provenance_for(DomainTag::simulated()).kind, Provenance::Kind::TrainedOnS);
  EXPECT_EQ(provenance_for(DomainTag::simulated_time_limited()).kind, Provenance::Kind::TrainedOnST);
  EXPECT_EQ(provenance_for(DomainTag::observed(1)).kind, Provenance::Kind::TrainedOnO);
  EXPECT_EQ(init_checkpoint(NetworkConfig{}, 1).provenance.kind, Provenance::Kind::Initialized);
}
