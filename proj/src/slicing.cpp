// SPDX-License-Identifier: Apache-2.0
#include "slicekit/slicing.hpp"

#include <exception>

#include "slicekit/errors.hpp"
#include "slicekit/rng.hpp"

namespace slicekit::slicing {

SliceMatrix SliceMatrix::select(std::span<const std::size_t> idx) const {
  SliceMatrix out;
  out.names = names;
  out.lambda = BinaryMatrix(idx.size(), lambda.cols());
  for (std::size_t r = 0; r < idx.size(); ++r)
    for (std::size_t c = 0; c < lambda.cols(); ++c) out.lambda.set(r, c, lambda(idx[r], c));
  return out;
}

SliceMatrix apply_sfs(std::span<const SlicingFunction> sfs, const num::Tensor2& X) {
  const std::size_t n = X.rows();
  const std::size_t k = sfs.size();
  SliceMatrix out;
  out.lambda = BinaryMatrix(n, k + 1);
  for (std::size_t j = 0; j < k; ++j) {
    out.names.push_back(sfs[j].name);
    for (std::size_t i = 0; i < n; ++i) {
      bool member = false;
      try {
        member = sfs[j].predicate(X.row(i));
      } catch (const std::exception& e) {
        throw EvaluationError("slicing function '" + sfs[j].name + "' failed on row " +
                              std::to_string(i) + ": " + e.what());
      }
      out.lambda.set(i, j, member);
    }
  }
  out.names.emplace_back(kBaseSliceName);
  for (std::size_t i = 0; i < n; ++i) out.lambda.set(i, k, true);
  return out;
}

SliceMatrix from_columns(std::vector<std::vector<std::uint8_t>> columns,
                         std::vector<std::string> names) {
  if (columns.size() != names.size()) throw ShapeError("from_columns: names/columns mismatch");
  const std::size_t n = columns.empty() ? 0 : columns[0].size();
  SliceMatrix out;
  out.lambda = BinaryMatrix(n, columns.size() + 1);
  for (std::size_t j = 0; j < columns.size(); ++j) out.lambda.set_column(j, columns[j]);
  for (std::size_t i = 0; i < n; ++i) out.lambda.set(i, columns.size(), true);
  out.names = std::move(names);
  out.names.emplace_back(kBaseSliceName);
  return out;
}

std::string_view to_string(SfKind kind) {
  switch (kind) {
    case SfKind::kDisc: return "disc";
    case SfKind::kRect: return "rect";
    case SfKind::kHalfplane: return "halfplane";
    case SfKind::kNoisyTruth: return "noisy_truth";
  }
  return "disc";
}

SfKind parse_sf_kind(std::string_view s) {
  if (s == "disc") return SfKind::kDisc;
  if (s == "rect") return SfKind::kRect;
  if (s == "halfplane") return SfKind::kHalfplane;
  if (s == "noisy_truth") return SfKind::kNoisyTruth;
  throw ConfigError("unknown slicing function kind '" + std::string(s) + "'");
}

namespace {

double param(const SfSpec& spec, const char* key) {
  auto it = spec.params.find(key);
  if (it == spec.params.end()) {
    throw ConfigError("slicing function '" + spec.name + "' (" + std::string(to_string(spec.kind)) +
                      ") is missing parameter '" + key + "'");
  }
  return it->second;
}

}  // namespace

SlicingFunction make_function(const SfSpec& spec) {
  switch (spec.kind) {
    case SfKind::kDisc: {
      const auto g = data::SliceGeometry::disc(param(spec, "cx"), param(spec, "cy"),
                                               param(spec, "radius"));
      return {spec.name, [g](std::span<const double> x) { return g.contains(x[0], x[1]); }};
    }
    case SfKind::kRect: {
      const auto g = data::SliceGeometry::rect(param(spec, "cx"), param(spec, "cy"),
                                               param(spec, "half_w"), param(spec, "half_h"));
      return {spec.name, [g](std::span<const double> x) { return g.contains(x[0], x[1]); }};
    }
    case SfKind::kHalfplane: {
      const double w1 = param(spec, "w1");
      const double w2 = param(spec, "w2");
      const double b = param(spec, "b");
      return {spec.name,
              [w1, w2, b](std::span<const double> x) { return w1 * x[0] + w2 * x[1] + b > 0.0; }};
    }
    case SfKind::kNoisyTruth:
      break;
  }
  throw ConfigError("slicing function '" + spec.name +
                    "' of kind noisy_truth has no feature predicate");
}

SliceMatrix build_slice_matrix(std::span<const SfSpec> specs, const data::Dataset& dataset) {
  std::vector<std::vector<std::uint8_t>> columns;
  std::vector<std::string> names;
  for (const SfSpec& spec : specs) {
    if (!(spec.flip_rate >= 0.0 && spec.flip_rate <= 1.0)) {
      throw ConfigError("slicing function '" + spec.name + "': flip_rate outside [0,1]");
    }
    std::vector<std::uint8_t> col;
    if (spec.kind == SfKind::kNoisyTruth) {
      const double idx = param(spec, "slice");
      if (idx < 0.0 || static_cast<std::size_t>(idx) >= dataset.slice_count()) {
        throw ConfigError("slicing function '" + spec.name + "' references missing slice");
      }
      col = data::noisy_sf_from_truth(dataset, static_cast<std::size_t>(idx), spec.flip_rate,
                                      spec.seed);
    } else {
      const SlicingFunction sf = make_function(spec);
      SliceMatrix m = apply_sfs(std::span<const SlicingFunction>(&sf, 1), dataset.X);
      col = m.lambda.column(0);
      if (spec.flip_rate > 0.0) {
        Rng rng(derive_seed(spec.seed, "sf-flip"));
        for (auto& bit : col)
          if (rng.uniform() < spec.flip_rate) bit = bit ? 0 : 1;
      }
    }
    columns.push_back(std::move(col));
    names.push_back(spec.name);
  }
  if (columns.empty()) {
    SliceMatrix out;
    out.lambda = BinaryMatrix(dataset.size(), 1, 1);
    out.names = {std::string(kBaseSliceName)};
    return out;
  }
  return from_columns(std::move(columns), std::move(names));
}

SliceStats slice_stats(const SliceMatrix& lambda, const BinaryMatrix* truth) {
  const auto& m = lambda.lambda;
  const std::size_t n = m.rows();
  const std::size_t c = m.cols();
  SliceStats stats;
  stats.coverage.resize(c);
  stats.jaccard.assign(c, std::vector<double>(c, 0.0));
  for (std::size_t j = 0; j < c; ++j)
    stats.coverage[j] = n == 0 ? 0.0 : static_cast<double>(m.column_count(j)) / n;
  for (std::size_t a = 0; a < c; ++a) {
    for (std::size_t b = 0; b < c; ++b) {
      std::size_t inter = 0;
      std::size_t uni = 0;
      for (std::size_t i = 0; i < n; ++i) {
        inter += m(i, a) & m(i, b);
        uni += m(i, a) | m(i, b);
      }
      stats.jaccard[a][b] = uni == 0 ? 0.0 : static_cast<double>(inter) / uni;
    }
  }
  if (truth != nullptr) {
    if (truth->rows() != n) throw ShapeError("slice_stats: ground truth row count mismatch");
    std::vector<double> noise;
    for (std::size_t j = 0; j < lambda.k() && j < truth->cols(); ++j) {
      std::size_t diff = 0;
      for (std::size_t i = 0; i < n; ++i) diff += m(i, j) != (*truth)(i, j);
      noise.push_back(n == 0 ? 0.0 : static_cast<double>(diff) / n);
    }
    stats.noise = std::move(noise);
  }
  return stats;
}

}  // namespace slicekit::slicing
