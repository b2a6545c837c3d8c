// SPDX-License-Identifier: Apache-2.0
#include "slicekit/metrics.hpp"

#include <cmath>
#include <numeric>
#include <string_view>

#include "slicekit/errors.hpp"

namespace slicekit::metrics {

double f1(std::span<const int> preds, std::span<const int> labels) {
  if (preds.size() != labels.size()) throw ShapeError("f1: length mismatch");
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] == 1 && labels[i] == 1) ++tp;
    else if (preds[i] == 1) ++fp;
    else if (labels[i] == 1) ++fn;
  }
  if (tp == 0) return 0.0;
  const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  return 100.0 * 2.0 * precision * recall / (precision + recall);
}

double SliceReport::mean_slice() const {
  if (slice_f1.empty()) return 0.0;
  return std::accumulate(slice_f1.begin(), slice_f1.end(), 0.0) /
         static_cast<double>(slice_f1.size());
}

SliceReport slice_f1(std::span<const int> preds, std::span<const int> labels,
                     const BinaryMatrix& slices) {
  if (slices.rows() != preds.size()) throw ShapeError("slice_f1: slice matrix row mismatch");
  SliceReport report;
  report.overall = f1(preds, labels);
  std::vector<int> p;
  std::vector<int> l;
  for (std::size_t s = 0; s < slices.cols(); ++s) {
    p.clear();
    l.clear();
    for (std::size_t i = 0; i < preds.size(); ++i) {
      if (!slices(i, s)) continue;
      p.push_back(preds[i]);
      l.push_back(labels[i]);
    }
    report.slice_f1.push_back(f1(p, l));
    report.support.push_back(p.size());
  }
  return report;
}

void apply_lift(SliceReport& report, const SliceReport& reference) {
  if (reference.slice_f1.size() != report.slice_f1.size()) {
    throw ShapeError("apply_lift: slice count mismatch");
  }
  report.lift.resize(report.slice_f1.size());
  for (std::size_t s = 0; s < report.slice_f1.size(); ++s)
    report.lift[s] = report.slice_f1[s] - reference.slice_f1[s];
}

ParamCount count_params(const Model& model) {
  ParamCount count;
  for (const auto& p : model.snapshot()) {
    const std::string_view name = p.name;
    const bool backbone =
        name.starts_with("backbone.") || name.find(".backbone.") != std::string_view::npos;
    (backbone ? count.backbone : count.heads) += p.value.size();
  }
  count.total = count.backbone + count.heads;
  const std::string method = model.method();
  if (method == "sbl") count.asymptotic = "O(M+krd')";
  else if (method == "moe") count.asymptotic = "O(kM+kr)";
  else if (method == "hps" || method == "manual") count.asymptotic = "O(M+kr)";
  else count.asymptotic = "O(M+r)";
  return count;
}

Summary summarize(std::span<const double> values) {
  Summary s;
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() < 2) return s;
  double sq = 0.0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(sq / static_cast<double>(values.size() - 1));
  return s;
}

AggregateReport aggregate(std::span<const SliceReport> reports) {
  AggregateReport agg;
  agg.runs = reports.size();
  if (reports.empty()) return agg;
  std::vector<double> values;
  for (const auto& r : reports) values.push_back(r.overall);
  agg.overall = summarize(values);
  const std::size_t k = reports.front().slice_f1.size();
  for (std::size_t s = 0; s < k; ++s) {
    values.clear();
    for (const auto& r : reports) {
      if (r.slice_f1.size() != k) throw ShapeError("aggregate: slice count differs across runs");
      values.push_back(r.slice_f1[s]);
    }
    agg.slices.push_back(summarize(values));
  }
  values.clear();
  for (const auto& r : reports) values.push_back(r.mean_slice());
  agg.mean_slice = summarize(values);
  return agg;
}

}  // namespace slicekit::metrics
