// SPDX-License-Identifier: Apache-2.0
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "slicekit/baselines/models.hpp"
#include "slicekit/errors.hpp"
#include "slicekit/training.hpp"
#include "test_support.hpp"

namespace slicekit::train {
namespace {

struct Problem {
  data::Dataset ds;
  slicing::SliceMatrix lambda;
  Batch train;
  ValidData valid;
};

Problem problem(std::uint64_t seed = 4, std::size_t n = 2000) {
  Problem p;
  p.ds = data::stratified_split(
      data::gen_perturbed_boundary(data::SynthSpec::perturbed_boundary(seed, n)), {0.7, 0.15, 0.15}, seed);
  p.lambda = slicing::from_columns({p.ds.slices.column(0), p.ds.slices.column(1)}, {"s_1", "s_2"});
  p.train = make_batch(p.ds, p.lambda, data::Split::kTrain);
  p.valid = make_valid(p.ds);
  return p;
}

Hyperparams quick(double lr = 0.01, double l2 = 0.0) {
  Hyperparams hp;
  hp.lr = lr;
  hp.l2 = l2;
  hp.seed = 3;
  hp.pretrain_epochs = 4;
  hp.finetune_epochs = 4;
  return hp;
}

TEST(Hyperparams, ValidateRejectsBadValues) {
  Hyperparams hp = quick();
  EXPECT_NO_THROW(validate(hp));
  hp.lr = 0.0;
  EXPECT_THROW(validate(hp), TrainingError);
  hp = quick();
  hp.l2 = -1e-3;
  EXPECT_THROW(validate(hp), TrainingError);
  hp = quick();
  hp.finetune_epochs = 0;
  EXPECT_THROW(validate(hp), TrainingError);
  EXPECT_THROW(parse_optimizer("rmsprop"), ConfigError);
  EXPECT_EQ(parse_optimizer("sgd"), OptimizerKind::kSgd);
}

TEST(MakeBatch, UsesTrainingRowsOnly) {
  const Problem p = problem();
  EXPECT_EQ(p.train.size(), p.ds.indices(data::Split::kTrain).size());
  EXPECT_EQ(p.train.lambda.cols(), 3u);
  EXPECT_EQ(p.valid.y.size(), p.ds.indices(data::Split::kValid).size());
}

TEST(Fit, IdenticalSeedGivesIdenticalResult) {
  const Problem p = problem();
  baselines::VanillaModel a(nn::BackboneConfig{}, 1), b(nn::BackboneConfig{}, 1);
  const RunRecord ra = fit(a, p.train, p.valid, quick(), 5);
  const RunRecord rb = fit(b, p.train, p.valid, quick(), 5);
  EXPECT_NEAR(ra.selected_valid_f1, rb.selected_valid_f1, 1e-12);
  EXPECT_EQ(a.predict_proba(p.valid.X), b.predict_proba(p.valid.X));
}

TEST(Fit, SelectsEarliestBestEpochAndRestoresIt) {
  const Problem p = problem();
  baselines::VanillaModel m(nn::BackboneConfig{}, 2);
  const RunRecord r = fit(m, p.train, p.valid, quick(), 8);
  ASSERT_EQ(r.epochs.size(), 8u);
  double best = -1.0;
  std::size_t best_epoch = 0;
  for (const auto& e : r.epochs) {
    EXPECT_TRUE(std::isfinite(e.train_loss));
    if (e.valid_f1 > best) {
      best = e.valid_f1;
      best_epoch = e.epoch;
    }
  }
  EXPECT_EQ(r.selected_epoch, best_epoch);
  EXPECT_DOUBLE_EQ(r.selected_valid_f1, best);
  const auto preds = m.predict(p.valid.X);
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    tp += preds[i] == 1 && p.valid.y[i] == 1;
    fp += preds[i] == 1 && p.valid.y[i] == 0;
    fn += preds[i] == 0 && p.valid.y[i] == 1;
  }
  EXPECT_NEAR(200.0 * tp / (2.0 * tp + fp + fn), best, 1e-9);
}

TEST(Fit, DivergenceReportsLastFiniteLoss) {
  const Problem p = problem();
  baselines::VanillaModel m(nn::BackboneConfig{}, 2);
  Hyperparams hp = quick(1e300);
  hp.optimizer = OptimizerKind::kSgd;
  try {
    (void)fit(m, p.train, p.valid, hp, 3);
    FAIL() << "expected DivergenceError";
  } catch (const DivergenceError& e) {
    EXPECT_TRUE(std::isfinite(e.last_finite_loss()));
    EXPECT_NE(std::string(e.what()).find("non-finite"), std::string::npos);
  }
}

TEST(RegularizedLoss, ZeroCoefficientIsPlainLoss) {
  const Problem p = problem();
  const baselines::VanillaModel m(nn::BackboneConfig{}, 3);
  EXPECT_EQ(regularized_loss(m, p.train, 0.0), slicekit::testing::loss_value(m, p.train));
}

TEST(RegularizedLoss, PenalizesWeightsButNotBiases) {
  const Problem p = problem();
  baselines::VanillaModel m(nn::BackboneConfig{}, 3);
  for (auto& param : m.params()) {
    if (param.is_bias) {
      for (double& v : param.value.data()) v = 0.5;
    }
  }
  double sq = 0.0;
  for (const auto& param : m.params()) {
    if (!param.is_bias) {
      for (double v : param.value.data()) sq += v * v;
    }
  }
  const double plain = regularized_loss(m, p.train, 0.0);
  EXPECT_NEAR(regularized_loss(m, p.train, 1e-3) - plain, 1e-3 * sq, 1e-12);
}

TEST(Pretrain, PicksBestCellFirstOnTies) {
  const Problem p = problem();
  Grid grid;
  grid.lr = {0.003, 0.01};
  grid.l2 = {0.0, 1e-4};
  const Pretrained pre = pretrain_backbone(p.train, p.valid, nn::BackboneConfig{}, grid, quick());
  ASSERT_EQ(pre.cells.size(), 4u);
  std::size_t best = 0;
  for (std::size_t i = 1; i < pre.cells.size(); ++i) {
    if (pre.cells[i].valid_f1 > pre.cells[best].valid_f1) best = i;
  }
  EXPECT_EQ(pre.best.lr, pre.cells[best].lr);
  EXPECT_EQ(pre.best.l2, pre.cells[best].l2);
  EXPECT_EQ(pre.best_valid_f1, pre.cells[best].valid_f1);
  for (const auto& param : pre.backbone) EXPECT_TRUE(param.name.starts_with("backbone."));
  EXPECT_EQ(pre.backbone.count(), 221u);
}

TEST(Finetune, StartsFromPretrainedBackbone) {
  const Problem p = problem();
  Grid grid;
  grid.lr = {0.01};
  grid.l2 = {0.0};
  const Pretrained pre = pretrain_backbone(p.train, p.valid, nn::BackboneConfig{}, grid, quick());
  baselines::HpsModel m(nn::BackboneConfig{}, 2, 9);
  const RunRecord r = finetune(m, pre.backbone, p.train, p.valid, pre.best);
  EXPECT_EQ(r.backbone_checksum, nn::checksum(pre.backbone, "backbone."));
  EXPECT_EQ(r.epochs.size(), pre.best.finetune_epochs);
}

TEST(RunRecord, JsonLinesHaveOneObjectPerEpochPlusSummary) {
  const Problem p = problem();
  baselines::VanillaModel m(nn::BackboneConfig{}, 2);
  const RunRecord r = fit(m, p.train, p.valid, quick(), 3);
  std::stringstream out;
  write_jsonl(r, out);
  std::string line;
  std::size_t lines = 0;
  nlohmann::json last;
  while (std::getline(out, line)) {
    last = nlohmann::json::parse(line);
    ++lines;
  }
  EXPECT_EQ(lines, 4u);
  EXPECT_EQ(last.at("selected_epoch").get<std::size_t>(), r.selected_epoch);
}

TEST(Parallel, RunsEveryIndexAndRethrows) {
  std::vector<int> hits(50, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; }, 4);
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(
                   10, [](std::size_t i) { if (i == 7) throw TrainingError("seven"); }, 3),
               TrainingError);
}

TEST(Parallel, WorkerCountHonorsEnvironment) {
  ::setenv("SLICEKIT_THREADS", "3", 1);
  EXPECT_EQ(worker_count(), 3u);
  ::unsetenv("SLICEKIT_THREADS");
  EXPECT_GE(worker_count(), 1u);
}

TEST(Parallel, RunSeedsKeepsSeedOrder) {
  const std::vector<std::uint64_t> seeds{5, 1, 9};
  const auto out = run_seeds<std::uint64_t>(seeds, [](std::uint64_t s) { return s * 2; });
  EXPECT_EQ(out, (std::vector<std::uint64_t>{10, 2, 18}));
}

}  // namespace
}  // namespace slicekit::train
