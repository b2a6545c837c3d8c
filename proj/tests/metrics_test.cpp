// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "slicekit/baselines/models.hpp"
#include "slicekit/metrics.hpp"
#include "slicekit/model_sram.hpp"

namespace slicekit::metrics {
namespace {

// Parameter count of a dense layer stack, from shapes alone.
std::size_t mlp_params(std::initializer_list<std::size_t> widths) {
  std::size_t total = 0;
  auto it = widths.begin();
  std::size_t in = *it++;
  for (; it != widths.end(); ++it) {
    total += in * *it + *it;
    in = *it;
  }
  return total;
}

TEST(F1, PerfectPredictions) {
  const std::vector<int> y{1, 0, 1, 1};
  EXPECT_DOUBLE_EQ(f1(y, y), 100.0);
}

TEST(F1, AllNegativeWithPositiveLabels) {
  EXPECT_DOUBLE_EQ(f1(std::vector<int>{0, 0, 0}, std::vector<int>{1, 0, 1}), 0.0);
}

TEST(F1, HandComputedHalf) {
  EXPECT_DOUBLE_EQ(f1(std::vector<int>{1, 1, 0, 0}, std::vector<int>{1, 0, 1, 0}), 50.0);
}

TEST(F1, NoPositivesAnywhereIsZero) {
  EXPECT_DOUBLE_EQ(f1(std::vector<int>{0, 0}, std::vector<int>{0, 0}), 0.0);
}

TEST(SliceF1, FullDatasetSliceEqualsOverall) {
  const std::vector<int> preds{1, 0, 1, 1, 0, 1}, labels{1, 1, 0, 1, 0, 1};
  BinaryMatrix all(6, 1, 1);
  const SliceReport r = slice_f1(preds, labels, all);
  EXPECT_EQ(r.slice_f1[0], r.overall);
  EXPECT_EQ(r.support[0], 6u);
}

TEST(SliceF1, RestrictsToMembers) {
  const std::vector<int> preds{1, 0, 1, 0}, labels{1, 1, 1, 0};
  BinaryMatrix s(4, 2);
  s.set(0, 0, true);
  s.set(2, 0, true);
  s.set(1, 1, true);
  const SliceReport r = slice_f1(preds, labels, s);
  EXPECT_DOUBLE_EQ(r.slice_f1[0], 100.0);
  EXPECT_DOUBLE_EQ(r.slice_f1[1], 0.0);
  EXPECT_DOUBLE_EQ(r.mean_slice(), 50.0);
  EXPECT_EQ(r.support, (std::vector<std::size_t>{2, 1}));
}

TEST(SliceF1, LiftAgainstReference) {
  SliceReport a, ref;
  a.slice_f1 = {80.0, 60.0};
  ref.slice_f1 = {50.0, 70.0};
  apply_lift(a, ref);
  EXPECT_EQ(a.lift, (std::vector<double>{30.0, -10.0}));
}

TEST(CountParams, VanillaMatchesShapeArithmetic) {
  const baselines::VanillaModel m(nn::BackboneConfig{}, 1);
  const ParamCount c = count_params(m);
  EXPECT_EQ(c.total, 235u);
  EXPECT_EQ(c.total, mlp_params({2, 13, 13, 1}));
  EXPECT_EQ(c.backbone, mlp_params({2, 13, 13}));
  EXPECT_EQ(c.heads, 14u);
  EXPECT_EQ(c.asymptotic, "O(M+r)");
}

TEST(CountParams, HpsAddsOneHeadPerSlice) {
  const baselines::HpsModel m(nn::BackboneConfig{}, 3, 1);
  const ParamCount c = count_params(m);
  EXPECT_EQ(c.total, 221u + 14u * 4u);
  EXPECT_EQ(c.asymptotic, "O(M+kr)");
}

TEST(CountParams, SblMatchesLayerEnumeration) {
  for (std::size_t k : {0u, 1u, 2u, 4u}) {
    sram::SramConfig cfg;
    cfg.k = k;
    const sram::SramModel m(nn::BackboneConfig{}, cfg, 1);
    const std::size_t d = 13, dp = 13;
    const std::size_t enumerated = mlp_params({2, 13, 13}) + mlp_params({d, k + 1}) +
                                   (k + 1) * mlp_params({d, dp}) + 2 * mlp_params({dp, 1});
    const ParamCount c = count_params(m);
    EXPECT_EQ(c.total, enumerated);
    EXPECT_EQ(c.total, 221u + (k + 1) * (d + 1) * (dp + 1) + 2 * (dp + 1));
    EXPECT_EQ(c.asymptotic, "O(M+krd')");
  }
}

TEST(CountParams, MoeIsExpertsPlusGate) {
  std::vector<baselines::VanillaModel> experts;
  for (int e = 0; e < 3; ++e) experts.emplace_back(nn::BackboneConfig{}, e, "expert");
  const baselines::MoeModel m(std::move(experts), nn::BackboneConfig{}, 1);
  const ParamCount c = count_params(m);
  EXPECT_EQ(c.total, 3u * 235u + mlp_params({2, 13, 13, 3}));
  EXPECT_EQ(c.total, 968u);
  EXPECT_EQ(c.asymptotic, "O(kM+kr)");
}

TEST(CountParams, IndependentOfValues) {
  baselines::VanillaModel m(nn::BackboneConfig{}, 1);
  const std::size_t before = count_params(m).total;
  for (auto& p : m.params()) {
    for (double& v : p.value.data()) v = 42.0;
  }
  EXPECT_EQ(count_params(m).total, before);
}

TEST(Aggregate, SingleReportHasZeroStd) {
  SliceReport r;
  r.overall = 91.0;
  r.slice_f1 = {70.0, 80.0};
  const AggregateReport a = aggregate(std::vector<SliceReport>{r});
  EXPECT_EQ(a.runs, 1u);
  EXPECT_DOUBLE_EQ(a.overall.mean, 91.0);
  EXPECT_DOUBLE_EQ(a.overall.std, 0.0);
  EXPECT_DOUBLE_EQ(a.mean_slice.mean, 75.0);
}

TEST(Aggregate, SampleStandardDeviation) {
  const Summary s = summarize(std::vector<double>{1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_NEAR(s.std, std::sqrt(5.0 / 3.0), 1e-12);
}

}  // namespace
}  // namespace slicekit::metrics
