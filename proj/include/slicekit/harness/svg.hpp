// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "slicekit/datasets.hpp"
#include "slicekit/numcore/tensor.hpp"

namespace slicekit::harness {

/// res*res points covering [-extent, extent]^2 at cell centers, row-major,
/// first row at the top (largest x2).
num::Tensor2 grid_points(std::size_t res, double extent);

/// Predicted class per grid cell, with slice outlines drawn on top.
std::string class_map_svg(std::span<const int> classes, std::size_t res, double extent,
                          const std::string& title,
                          std::span<const data::SliceGeometry> outlines = {});

/// Values in [0, 1] per grid cell on a white-to-blue ramp.
std::string heatmap_svg(std::span<const double> values, std::size_t res, double extent,
                        const std::string& title,
                        std::span<const data::SliceGeometry> outlines = {});

struct Series {
  std::string name;
  std::vector<double> y;
};

/// Polyline chart over shared x positions.
std::string line_chart_svg(const std::string& title, std::span<const double> x,
                           std::span<const Series> series, const std::string& x_label,
                           const std::string& y_label);

}  // namespace slicekit::harness
