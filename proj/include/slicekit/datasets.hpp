// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "slicekit/binary_matrix.hpp"
#include "slicekit/numcore/tensor.hpp"

namespace slicekit::data {

enum class Split : std::uint8_t { kTrain = 0, kValid = 1, kTest = 2 };

std::string_view to_string(Split s);
Split parse_split(std::string_view s);

enum class SliceShape : std::uint8_t { kDisc, kRect };

/// Axis-aligned disc or rectangle in the input plane.
struct SliceGeometry {
  SliceShape shape = SliceShape::kDisc;
  double cx = 0.0;
  double cy = 0.0;
  double radius = 0.0;  // disc
  double half_w = 0.0;  // rect
  double half_h = 0.0;  // rect

  static SliceGeometry disc(double cx, double cy, double radius);
  static SliceGeometry rect(double cx, double cy, double half_w, double half_h);

  bool contains(double x1, double x2) const noexcept;
  double area() const noexcept;
};

/// Parameters of a synthetic two-class problem in [-extent, extent]^2.
///
/// The global rule is y = 1 iff x1 + x2 > 0. Points within `margin` of that
/// line are never sampled. Inside any slice the label is flipped.
struct SynthSpec {
  std::size_t n = 5000;
  std::vector<SliceGeometry> slices;
  double margin = 0.02;
  double extent = 1.0;
  std::uint64_t seed = 0;

  /// Two discs on the boundary, each about 2.5% of the square.
  static SynthSpec perturbed_boundary(std::uint64_t seed, std::size_t n = 5000);
  /// Four slices of random shape, size (2% to 3.5% of the square) and position
  /// along the boundary, drawn from `seed`.
  static SynthSpec random_slices(std::uint64_t seed, std::size_t n = 5000);
};

/// The linear rule shared by all generators.
int linear_label(double x1, double x2) noexcept;

struct Dataset {
  num::Tensor2 X;            // n x 2
  std::vector<int> y;        // {0,1}
  BinaryMatrix slices;       // n x k_true ground-truth membership
  std::vector<Split> split;  // empty until stratified_split
  std::optional<SynthSpec> spec;

  std::size_t size() const noexcept { return y.size(); }
  std::size_t slice_count() const noexcept { return slices.cols(); }
  std::vector<std::size_t> indices(Split s) const;
};

Dataset gen_perturbed_boundary(const SynthSpec& spec);
Dataset gen_random_slices(const SynthSpec& spec);

/// Ground-truth membership of one slice with each bit flipped independently
/// with probability `flip_rate`.
std::vector<std::uint8_t> noisy_sf_from_truth(const Dataset& dataset, std::size_t slice_index,
                                              double flip_rate, std::uint64_t seed);

/// Assigns split tags so that every slice pattern and class keeps its global
/// proportion in each split. Throws SplitError naming the first slice that
/// misses a split or drifts more than 20% (relative) from its proportion.
Dataset stratified_split(Dataset dataset, std::array<double, 3> fractions, std::uint64_t seed);

/// Rows of X restricted to the given indices.
num::Tensor2 gather_rows(const num::Tensor2& X, std::span<const std::size_t> idx);

/// CSV layout: x1,x2,y,s_1..s_k,split. Reals use 17 significant digits.
void write_csv(const Dataset& dataset, std::ostream& out);
Dataset read_csv(std::istream& in);

}  // namespace slicekit::data
