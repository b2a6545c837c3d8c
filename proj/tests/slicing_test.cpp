// SPDX-License-Identifier: Apache-2.0
#include <stdexcept>

#include <gtest/gtest.h>

#include "slicekit/errors.hpp"
#include "slicekit/slicing.hpp"

namespace slicekit::slicing {
namespace {

SlicingFunction threshold(std::string name, std::size_t dim, double cut) {
  return {std::move(name), [dim, cut](std::span<const double> x) { return x[dim] > cut; }};
}

num::Tensor2 points() { return {{1.0, 0.0}, {-1.0, 0.0}, {0.5, 0.9}, {-0.2, -0.7}}; }

TEST(ApplySfs, NoSlicesGivesBaseColumnOnly) {
  const SliceMatrix m = apply_sfs({}, points());
  EXPECT_EQ(m.k(), 0u);
  ASSERT_EQ(m.lambda.cols(), 1u);
  for (std::size_t r = 0; r < m.rows(); ++r) EXPECT_EQ(m.lambda(r, 0), 1);
  EXPECT_EQ(m.names.back(), kBaseSliceName);
}

TEST(ApplySfs, ThresholdExample) {
  const SlicingFunction sfs[] = {threshold("x1_pos", 0, 0.0)};
  const SliceMatrix m = apply_sfs(sfs, num::Tensor2{{1.0, 0.0}, {-1.0, 0.0}});
  EXPECT_EQ(m.lambda.column(0), (std::vector<std::uint8_t>{1, 0}));
  EXPECT_EQ(m.lambda.column(1), (std::vector<std::uint8_t>{1, 1}));
}

TEST(ApplySfs, DisjointGeometricSlicesAreOrthogonal) {
  SfSpec left{"left", SfKind::kDisc, {{"cx", -0.5}, {"cy", 0.0}, {"radius", 0.4}}, 0.0, 0};
  SfSpec right{"right", SfKind::kRect, {{"cx", 0.5}, {"cy", 0.0}, {"half_w", 0.3}, {"half_h", 0.3}},
               0.0, 0};
  num::Tensor2 X(400, 2);
  for (std::size_t i = 0; i < 400; ++i) {
    X(i, 0) = -1.0 + 2.0 * static_cast<double>(i % 20) / 19.0;
    X(i, 1) = -1.0 + 2.0 * static_cast<double>(i / 20) / 19.0;
  }
  const SlicingFunction sfs[] = {make_function(left), make_function(right)};
  const SliceMatrix m = apply_sfs(sfs, X);
  std::size_t dot = 0;
  for (std::size_t r = 0; r < m.rows(); ++r) dot += m.lambda(r, 0) * m.lambda(r, 1);
  EXPECT_EQ(dot, 0u);
  EXPECT_GT(m.lambda.column_count(0), 0u);
  EXPECT_GT(m.lambda.column_count(1), 0u);
}

TEST(ApplySfs, ThrowingPredicateNamesFunctionAndRow) {
  const SlicingFunction sfs[] = {
      threshold("fine", 0, 0.0),
      {"broken", [](std::span<const double> x) -> bool {
         if (x[1] > 0.5) throw std::runtime_error("boom");
         return false;
       }}};
  try {
    (void)apply_sfs(sfs, points());
    FAIL() << "expected EvaluationError";
  } catch (const EvaluationError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("broken"), std::string::npos);
    EXPECT_NE(what.find('2'), std::string::npos);
  }
}

TEST(ApplySfs, IdempotentAndOrderStable) {
  const SlicingFunction ab[] = {threshold("a", 0, 0.0), threshold("b", 1, 0.0)};
  const SlicingFunction ba[] = {threshold("b", 1, 0.0), threshold("a", 0, 0.0)};
  const SliceMatrix m1 = apply_sfs(ab, points());
  EXPECT_EQ(apply_sfs(ab, points()).lambda, m1.lambda);
  const SliceMatrix m2 = apply_sfs(ba, points());
  EXPECT_EQ(m1.lambda.column(0), m2.lambda.column(1));
  EXPECT_EQ(m1.lambda.column(1), m2.lambda.column(0));
  EXPECT_EQ(m2.names[0], "b");
}

TEST(FromColumns, AppendsBase) {
  const SliceMatrix m = from_columns({{0, 1, 1}}, {"s"});
  EXPECT_EQ(m.k(), 1u);
  EXPECT_EQ(m.lambda.column(1), (std::vector<std::uint8_t>{1, 1, 1}));
  const SliceMatrix sub = m.select(std::vector<std::size_t>{2, 0});
  EXPECT_EQ(sub.lambda.column(0), (std::vector<std::uint8_t>{1, 0}));
  EXPECT_EQ(sub.lambda.column(1), (std::vector<std::uint8_t>{1, 1}));
}

TEST(MakeFunction, HalfplaneAndMissingParameters) {
  const auto f = make_function({"hp", SfKind::kHalfplane, {{"w1", 1.0}, {"w2", -1.0}, {"b", 0.0}}, 0.0, 0});
  EXPECT_TRUE(f.predicate(std::vector<double>{1.0, 0.0}));
  EXPECT_FALSE(f.predicate(std::vector<double>{0.0, 1.0}));
  EXPECT_THROW(make_function({"bad", SfKind::kDisc, {{"cx", 0.0}}, 0.0, 0}), ConfigError);
  EXPECT_THROW(make_function({"nt", SfKind::kNoisyTruth, {{"slice", 0.0}}, 0.0, 0}), ConfigError);
  EXPECT_THROW(parse_sf_kind("ellipse"), ConfigError);
}

TEST(BuildSliceMatrix, NoisyTruthMatchesGroundTruthAtZeroRate) {
  const data::Dataset ds = data::gen_perturbed_boundary(data::SynthSpec::perturbed_boundary(2));
  const SfSpec specs[] = {{"t1", SfKind::kNoisyTruth, {{"slice", 0.0}}, 0.0, 1},
                          {"t2", SfKind::kNoisyTruth, {{"slice", 1.0}}, 0.0, 1}};
  const SliceMatrix m = build_slice_matrix(specs, ds);
  EXPECT_EQ(m.lambda.column(0), ds.slices.column(0));
  EXPECT_EQ(m.lambda.column(1), ds.slices.column(1));
  EXPECT_EQ(m.lambda.column_count(2), ds.size());
}

TEST(BuildSliceMatrix, GeometricFlipsAreSeeded) {
  const data::Dataset ds = data::gen_perturbed_boundary(data::SynthSpec::perturbed_boundary(2));
  const SfSpec a[] = {{"d", SfKind::kDisc, {{"cx", 0.0}, {"cy", 0.0}, {"radius", 0.3}}, 0.2, 5}};
  EXPECT_EQ(build_slice_matrix(a, ds).lambda, build_slice_matrix(a, ds).lambda);
  const SfSpec b[] = {{"d", SfKind::kDisc, {{"cx", 0.0}, {"cy", 0.0}, {"radius", 0.3}}, 0.2, 6}};
  EXPECT_NE(build_slice_matrix(a, ds).lambda, build_slice_matrix(b, ds).lambda);
}

TEST(SliceStats, CoverageOverlapAndNoise) {
  const SliceMatrix m = from_columns({{1, 1, 0, 0}, {0, 1, 1, 0}}, {"a", "b"});
  BinaryMatrix truth(4, 2);
  truth.set(0, 0, true);
  truth.set(1, 0, true);
  truth.set(2, 1, true);
  const SliceStats s = slice_stats(m, &truth);
  EXPECT_DOUBLE_EQ(s.coverage[0], 0.5);
  EXPECT_DOUBLE_EQ(s.coverage[2], 1.0);
  EXPECT_DOUBLE_EQ(s.jaccard[0][1], 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.jaccard[0][0], 1.0);
  ASSERT_TRUE(s.noise.has_value());
  EXPECT_DOUBLE_EQ((*s.noise)[0], 0.0);
  EXPECT_DOUBLE_EQ((*s.noise)[1], 0.25);
  EXPECT_FALSE(slice_stats(m).noise.has_value());
}

}  // namespace
}  // namespace slicekit::slicing
