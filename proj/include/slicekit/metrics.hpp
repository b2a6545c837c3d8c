// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "slicekit/binary_matrix.hpp"
#include "slicekit/model.hpp"

namespace slicekit::metrics {

/// Binary F1 of the positive class, scaled to [0, 100]. A zero denominator
/// in precision, recall or their harmonic mean yields 0.
double f1(std::span<const int> preds, std::span<const int> labels);

struct SliceReport {
  double overall = 0.0;
  std::vector<double> slice_f1;      // per ground-truth slice
  std::vector<std::size_t> support;  // members per slice
  std::vector<double> lift;          // slice_f1 minus the reference; empty if none

  double mean_slice() const;
};

/// Overall F1 on every row and per-slice F1 restricted to rows with s_i = 1.
SliceReport slice_f1(std::span<const int> preds, std::span<const int> labels,
                     const BinaryMatrix& slices);

/// Fills report.lift with per-slice differences against `reference`.
void apply_lift(SliceReport& report, const SliceReport& reference);

struct ParamCount {
  std::size_t backbone = 0;  // M, summed over every backbone copy
  std::size_t heads = 0;     // everything else
  std::size_t total = 0;
  std::string asymptotic;    // O(M+r), O(M+kr), O(kM+kr), O(M+krd')
};

/// Exact counts from parameter shapes; values are never read.
ParamCount count_params(const Model& model);

struct Summary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for fewer than two values
};

Summary summarize(std::span<const double> values);

struct AggregateReport {
  std::size_t runs = 0;
  Summary overall;
  std::vector<Summary> slices;
  Summary mean_slice;
};

AggregateReport aggregate(std::span<const SliceReport> reports);

}  // namespace slicekit::metrics
