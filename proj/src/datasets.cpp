// SPDX-License-Identifier: Apache-2.0
#include "slicekit/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "slicekit/errors.hpp"
#include "slicekit/rng.hpp"

namespace slicekit::data {

std::string_view to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kValid: return "valid";
    case Split::kTest: return "test";
  }
  return "train";
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::kTrain;
  if (s == "valid") return Split::kValid;
  if (s == "test") return Split::kTest;
  throw ConfigError("unknown split tag '" + std::string(s) + "'");
}

SliceGeometry SliceGeometry::disc(double cx, double cy, double radius) {
  SliceGeometry g;
  g.shape = SliceShape::kDisc;
  g.cx = cx;
  g.cy = cy;
  g.radius = radius;
  return g;
}

SliceGeometry SliceGeometry::rect(double cx, double cy, double half_w, double half_h) {
  SliceGeometry g;
  g.shape = SliceShape::kRect;
  g.cx = cx;
  g.cy = cy;
  g.half_w = half_w;
  g.half_h = half_h;
  return g;
}

bool SliceGeometry::contains(double x1, double x2) const noexcept {
  const double dx = x1 - cx;
  const double dy = x2 - cy;
  if (shape == SliceShape::kDisc) return dx * dx + dy * dy <= radius * radius;
  return std::fabs(dx) <= half_w && std::fabs(dy) <= half_h;
}

double SliceGeometry::area() const noexcept {
  if (shape == SliceShape::kDisc) return std::numbers::pi * radius * radius;
  return 4.0 * half_w * half_h;
}

SynthSpec SynthSpec::perturbed_boundary(std::uint64_t seed, std::size_t n) {
  SynthSpec spec;
  spec.n = n;
  spec.seed = seed;
  // 2.5% of the 2x2 square each.
  const double r = std::sqrt(0.025 * 4.0 / std::numbers::pi);
  spec.slices = {SliceGeometry::disc(-0.45, 0.45, r), SliceGeometry::disc(0.45, -0.45, r)};
  return spec;
}

SynthSpec SynthSpec::random_slices(std::uint64_t seed, std::size_t n) {
  SynthSpec spec;
  spec.n = n;
  spec.seed = seed;
  Rng rng(derive_seed(seed, "slice-geometry"));
  const double square = 4.0 * spec.extent * spec.extent;
  for (int i = 0; i < 4; ++i) {
    const double area = rng.uniform(0.02, 0.035) * square;
    // Position along the boundary, then a small normal offset so the slice
    // still straddles it.
    const double t = rng.uniform(-0.6, 0.6);
    const bool disc = rng.bernoulli(0.5);
    SliceGeometry g;
    if (disc) {
      const double r = std::sqrt(area / std::numbers::pi);
      const double off = rng.uniform(-0.4, 0.4) * r;
      g = SliceGeometry::disc(t + off / std::numbers::sqrt2, -t + off / std::numbers::sqrt2, r);
    } else {
      const double aspect = rng.uniform(0.5, 2.0);
      const double hw = 0.5 * std::sqrt(area * aspect);
      const double hh = 0.5 * std::sqrt(area / aspect);
      const double off = rng.uniform(-0.4, 0.4) * std::min(hw, hh);
      g = SliceGeometry::rect(t + off / std::numbers::sqrt2, -t + off / std::numbers::sqrt2, hw, hh);
    }
    spec.slices.push_back(g);
  }
  return spec;
}

int linear_label(double x1, double x2) noexcept { return x1 + x2 > 0.0 ? 1 : 0; }

std::vector<std::size_t> Dataset::indices(Split s) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < split.size(); ++i)
    if (split[i] == s) out.push_back(i);
  return out;
}

namespace {

void validate_geometry(const SynthSpec& spec) {
  if (spec.n == 0) throw SpecError("synthetic spec: n must be positive");
  if (!(spec.extent > 0.0)) throw SpecError("synthetic spec: extent must be positive");
  if (spec.margin < 0.0) throw SpecError("synthetic spec: margin must be non-negative");
  for (std::size_t i = 0; i < spec.slices.size(); ++i) {
    const auto& g = spec.slices[i];
    const bool degenerate = g.shape == SliceShape::kDisc ? !(g.radius > 0.0)
                                                         : !(g.half_w > 0.0 && g.half_h > 0.0);
    if (degenerate) {
      throw SpecError("synthetic spec: slice s_" + std::to_string(i + 1) + " has zero extent");
    }
    if (g.area() >= 0.1 * 4.0 * spec.extent * spec.extent) {
      throw SpecError("synthetic spec: slice s_" + std::to_string(i + 1) +
                      " covers 10% or more of the input square");
    }
  }
}

Dataset generate(const SynthSpec& spec) {
  validate_geometry(spec);
  Rng rng(derive_seed(spec.seed, "points"));
  const std::size_t k = spec.slices.size();
  Dataset ds;
  ds.X = num::Tensor2(spec.n, 2);
  ds.y.resize(spec.n);
  ds.slices = BinaryMatrix(spec.n, k);
  ds.spec = spec;
  std::size_t filled = 0;
  while (filled < spec.n) {
    const double x1 = rng.uniform(-spec.extent, spec.extent);
    const double x2 = rng.uniform(-spec.extent, spec.extent);
    if (std::fabs(x1 + x2) / std::numbers::sqrt2 < spec.margin) continue;
    bool inside = false;
    for (std::size_t s = 0; s < k; ++s) {
      const bool in = spec.slices[s].contains(x1, x2);
      ds.slices.set(filled, s, in);
      inside = inside || in;
    }
    ds.X(filled, 0) = x1;
    ds.X(filled, 1) = x2;
    const int base = linear_label(x1, x2);
    ds.y[filled] = inside ? 1 - base : base;
    ++filled;
  }
  return ds;
}

}  // namespace

Dataset gen_perturbed_boundary(const SynthSpec& spec) {
  if (spec.slices.size() != 2) {
    throw SpecError("gen_perturbed_boundary: expected 2 slices, got " +
                    std::to_string(spec.slices.size()));
  }
  return generate(spec);
}

Dataset gen_random_slices(const SynthSpec& spec) {
  if (spec.slices.size() != 4) {
    throw SpecError("gen_random_slices: expected 4 slices, got " +
                    std::to_string(spec.slices.size()));
  }
  return generate(spec);
}

std::vector<std::uint8_t> noisy_sf_from_truth(const Dataset& dataset, std::size_t slice_index,
                                              double flip_rate, std::uint64_t seed) {
  if (!(flip_rate >= 0.0 && flip_rate <= 1.0)) {
    throw DomainError("noisy_sf_from_truth: flip rate " + std::to_string(flip_rate) +
                      " outside [0,1]");
  }
  if (slice_index >= dataset.slice_count()) {
    throw ShapeError("noisy_sf_from_truth: slice index " + std::to_string(slice_index) +
                     " out of range");
  }
  Rng rng(derive_seed(seed, "sf-noise", slice_index));
  std::vector<std::uint8_t> out = dataset.slices.column(slice_index);
  for (auto& bit : out) {
    // Always draw so the noise pattern does not depend on the truth.
    if (rng.uniform() < flip_rate) bit = bit ? 0 : 1;
  }
  return out;
}

Dataset stratified_split(Dataset dataset, std::array<double, 3> fractions, std::uint64_t seed) {
  const double total = fractions[0] + fractions[1] + fractions[2];
  if (std::fabs(total - 1.0) > 1e-9 ||
      std::any_of(fractions.begin(), fractions.end(), [](double f) { return f < 0.0; })) {
    throw SplitError("stratified_split: fractions must be non-negative and sum to 1");
  }
  const std::size_t n = dataset.size();
  const std::size_t k = dataset.slice_count();

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(derive_seed(seed, "split"));
  rng.shuffle(std::span<std::size_t>(order));

  auto key = [&](std::size_t i) {
    std::uint64_t bits = 0;
    for (std::size_t s = 0; s < k && s < 63; ++s) bits = (bits << 1) | dataset.slices(i, s);
    return (bits << 1) | static_cast<std::uint64_t>(dataset.y[i]);
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return key(a) < key(b); });

  // Deal each position to the split with the largest running deficit, which
  // keeps every contiguous stratum block within one example of its target.
  dataset.split.assign(n, Split::kTrain);
  std::array<double, 3> assigned{0.0, 0.0, 0.0};
  for (std::size_t p = 0; p < n; ++p) {
    std::size_t best = 0;
    double best_deficit = -1e300;
    for (std::size_t s = 0; s < 3; ++s) {
      if (fractions[s] <= 0.0) continue;
      const double deficit = fractions[s] * static_cast<double>(p + 1) - assigned[s];
      if (deficit > best_deficit) {
        best_deficit = deficit;
        best = s;
      }
    }
    assigned[best] += 1.0;
    dataset.split[order[p]] = static_cast<Split>(best);
  }

  std::array<std::size_t, 3> split_size{0, 0, 0};
  for (Split s : dataset.split) ++split_size[static_cast<std::size_t>(s)];
  for (std::size_t s = 0; s < k; ++s) {
    const double global = static_cast<double>(dataset.slices.column_count(s)) / n;
    std::array<std::size_t, 3> members{0, 0, 0};
    for (std::size_t i = 0; i < n; ++i)
      if (dataset.slices(i, s)) ++members[static_cast<std::size_t>(dataset.split[i])];
    for (std::size_t sp = 0; sp < 3; ++sp) {
      if (fractions[sp] <= 0.0) continue;
      const auto name = std::string(to_string(static_cast<Split>(sp)));
      if (members[sp] == 0) {
        throw SplitError("stratified_split: slice s_" + std::to_string(s + 1) +
                         " has no examples in the " + name + " split");
      }
      const double local = static_cast<double>(members[sp]) / split_size[sp];
      if (std::fabs(local / global - 1.0) > 0.2) {
        throw SplitError("stratified_split: slice s_" + std::to_string(s + 1) +
                         " proportion in the " + name + " split deviates more than 20%");
      }
    }
  }
  return dataset;
}

num::Tensor2 gather_rows(const num::Tensor2& X, std::span<const std::size_t> idx) {
  num::Tensor2 out(idx.size(), X.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    auto src = X.row(idx[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

void write_csv(const Dataset& dataset, std::ostream& out) {
  const std::size_t k = dataset.slice_count();
  out << "x1,x2,y";
  for (std::size_t s = 0; s < k; ++s) out << ",s_" << s + 1;
  out << ",split\n";
  char buf[64];
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    for (std::size_t c = 0; c < 2; ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", dataset.X(i, c));
      out << buf << ',';
    }
    out << dataset.y[i];
    for (std::size_t s = 0; s < k; ++s) out << ',' << static_cast<int>(dataset.slices(i, s));
    out << ',' << (dataset.split.empty() ? "train" : to_string(dataset.split[i])) << '\n';
  }
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

int parse_bit(const std::string& s, std::size_t line_no) {
  if (s == "0") return 0;
  if (s == "1") return 1;
  throw ConfigError("csv line " + std::to_string(line_no) + ": expected 0/1, got '" + s + "'");
}

}  // namespace

Dataset read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("csv: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_fields(line);
  if (header.size() < 4 || header[0] != "x1" || header[1] != "x2" || header[2] != "y" ||
      header.back() != "split") {
    throw ConfigError("csv: header must be x1,x2,y,s_1..s_k,split");
  }
  const std::size_t k = header.size() - 4;
  for (std::size_t s = 0; s < k; ++s) {
    if (header[3 + s] != "s_" + std::to_string(s + 1)) {
      throw ConfigError("csv: unexpected column '" + header[3 + s] + "'");
    }
  }
  std::vector<double> xs;
  std::vector<int> ys;
  std::vector<std::uint8_t> bits;
  std::vector<Split> splits;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != header.size()) {
      throw ConfigError("csv line " + std::to_string(line_no) + ": wrong field count");
    }
    for (std::size_t c = 0; c < 2; ++c) {
      char* end = nullptr;
      const double v = std::strtod(f[c].c_str(), &end);
      if (end == f[c].c_str() || *end != '\0') {
        throw ConfigError("csv line " + std::to_string(line_no) + ": bad real '" + f[c] + "'");
      }
      xs.push_back(v);
    }
    ys.push_back(parse_bit(f[2], line_no));
    for (std::size_t s = 0; s < k; ++s)
      bits.push_back(static_cast<std::uint8_t>(parse_bit(f[3 + s], line_no)));
    splits.push_back(parse_split(f.back()));
  }
  Dataset ds;
  const std::size_t n = ys.size();
  ds.X = num::Tensor2(n, 2, std::move(xs));
  ds.y = std::move(ys);
  ds.slices = BinaryMatrix(n, k);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t s = 0; s < k; ++s) ds.slices.set(i, s, bits[i * k + s] != 0);
  ds.split = std::move(splits);
  return ds;
}

}  // namespace slicekit::data
