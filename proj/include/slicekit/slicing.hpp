// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "slicekit/binary_matrix.hpp"
#include "slicekit/datasets.hpp"
#include "slicekit/numcore/tensor.hpp"

namespace slicekit::slicing {

inline constexpr std::string_view kBaseSliceName = "BASE";

/// A user heuristic mapping one example's features to slice membership.
struct SlicingFunction {
  std::string name;
  std::function<bool(std::span<const double>)> predicate;
};

/// SF outputs for every example, plus a trailing all-ones base column.
struct SliceMatrix {
  BinaryMatrix lambda;  // n x (k+1)
  std::vector<std::string> names;

  std::size_t k() const noexcept { return lambda.cols() == 0 ? 0 : lambda.cols() - 1; }
  std::size_t rows() const noexcept { return lambda.rows(); }
  /// Restriction to the given example indices.
  SliceMatrix select(std::span<const std::size_t> idx) const;
};

/// Evaluates every SF over the rows of X and appends the base column.
/// A throwing predicate is reported as EvaluationError with SF name and row.
SliceMatrix apply_sfs(std::span<const SlicingFunction> sfs, const num::Tensor2& X);

/// Wraps already-evaluated SF columns and appends the base column.
SliceMatrix from_columns(std::vector<std::vector<std::uint8_t>> columns,
                         std::vector<std::string> names);

enum class SfKind : std::uint8_t { kDisc, kRect, kHalfplane, kNoisyTruth };

std::string_view to_string(SfKind kind);
SfKind parse_sf_kind(std::string_view s);

/// Declarative SF as written in experiment configs.
///   disc:        cx, cy, radius
///   rect:        cx, cy, half_w, half_h
///   halfplane:   w1, w2, b      (member iff w1*x1 + w2*x2 + b > 0)
///   noisy_truth: slice          (0-based ground-truth slice index)
/// Each output bit is flipped with probability flip_rate.
struct SfSpec {
  std::string name;
  SfKind kind = SfKind::kDisc;
  std::map<std::string, double> params;
  double flip_rate = 0.0;
  std::uint64_t seed = 0;
};

/// Pure predicate for the geometric kinds. Throws ConfigError for noisy_truth
/// or missing parameters.
SlicingFunction make_function(const SfSpec& spec);

/// Evaluates declarative SFs over a dataset; noisy_truth reads its ground truth.
SliceMatrix build_slice_matrix(std::span<const SfSpec> specs, const data::Dataset& dataset);

struct SliceStats {
  std::vector<double> coverage;              // per column, including base
  std::vector<std::vector<double>> jaccard;  // (k+1) x (k+1)
  std::optional<std::vector<double>> noise;  // SF i vs ground-truth slice i
};

SliceStats slice_stats(const SliceMatrix& lambda, const BinaryMatrix* truth = nullptr);

}  // namespace slicekit::slicing
