// SPDX-License-Identifier: Apache-2.0
#include "slicekit/harness/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>

#include "slicekit/errors.hpp"

namespace slicekit::harness {

namespace {

constexpr double kPlot = 400.0;
constexpr double kTop = 30.0;
constexpr double kLeft = 10.0;

std::string fmt(const char* pattern, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string header(double w, double h, const std::string& title) {
  return fmt("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
             "viewBox=\"0 0 %.0f %.0f\">\n",
             w, h, w, h) +
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" +
         fmt("<text x=\"%.0f\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">", kLeft) +
         escape(title) + "</text>\n";
}

// Horizontal runs of equal color become one rect each.
std::string cells(std::size_t res, std::size_t count, const std::function<std::string(std::size_t)>& color) {
  if (count != res * res) throw ShapeError("svg: grid values do not match resolution");
  const double cell = kPlot / static_cast<double>(res);
  std::string out;
  for (std::size_t r = 0; r < res; ++r) {
    std::size_t c = 0;
    while (c < res) {
      const std::string fill = color(r * res + c);
      std::size_t end = c + 1;
      while (end < res && color(r * res + end) == fill) ++end;
      out += fmt("<rect x=\"%.3f\" y=\"%.3f\" width=\"%.3f\" height=\"%.3f\" fill=\"", kLeft + c * cell,
                 kTop + r * cell, (end - c) * cell, cell) +
             fill + "\"/>\n";
      c = end;
    }
  }
  return out;
}

std::string outlines_svg(std::span<const data::SliceGeometry> outlines, double extent) {
  const double scale = kPlot / (2.0 * extent);
  auto px = [&](double x) { return kLeft + (x + extent) * scale; };
  auto py = [&](double y) { return kTop + (extent - y) * scale; };
  std::string out;
  for (const auto& g : outlines) {
    if (g.shape == data::SliceShape::kDisc) {
      out += fmt("<circle cx=\"%.3f\" cy=\"%.3f\" r=\"%.3f\" fill=\"none\" stroke=\"black\" "
                 "stroke-width=\"1.5\" stroke-dasharray=\"4 2\"/>\n",
                 px(g.cx), py(g.cy), g.radius * scale);
    } else {
      out += fmt("<rect x=\"%.3f\" y=\"%.3f\" width=\"%.3f\" height=\"%.3f\" fill=\"none\" "
                 "stroke=\"black\" stroke-width=\"1.5\" stroke-dasharray=\"4 2\"/>\n",
                 px(g.cx - g.half_w), py(g.cy + g.half_h), 2.0 * g.half_w * scale,
                 2.0 * g.half_h * scale);
    }
  }
  return out;
}

}  // namespace

num::Tensor2 grid_points(std::size_t res, double extent) {
  if (res == 0) throw ShapeError("grid_points: resolution must be positive");
  num::Tensor2 X(res * res, 2);
  const double step = 2.0 * extent / static_cast<double>(res);
  for (std::size_t r = 0; r < res; ++r) {
    for (std::size_t c = 0; c < res; ++c) {
      X(r * res + c, 0) = -extent + (static_cast<double>(c) + 0.5) * step;
      X(r * res + c, 1) = extent - (static_cast<double>(r) + 0.5) * step;
    }
  }
  return X;
}

std::string class_map_svg(std::span<const int> classes, std::size_t res, double extent,
                          const std::string& title, std::span<const data::SliceGeometry> outlines) {
  std::string out = header(kPlot + 2 * kLeft, kPlot + kTop + 10, title);
  out += cells(res, classes.size(),
               [&](std::size_t i) { return std::string(classes[i] == 1 ? "#f4a261" : "#2a9d8f"); });
  out += outlines_svg(outlines, extent);
  return out + "</svg>\n";
}

std::string heatmap_svg(std::span<const double> values, std::size_t res, double extent,
                        const std::string& title, std::span<const data::SliceGeometry> outlines) {
  std::string out = header(kPlot + 2 * kLeft, kPlot + kTop + 10, title);
  out += cells(res, values.size(), [&](std::size_t i) {
    const double v = std::clamp(values[i], 0.0, 1.0);
    const int level = static_cast<int>(std::lround(v * 31.0));
    const int shade = 255 - level * 200 / 31;
    return fmt("rgb(%d,%d,255)", shade, shade);
  });
  out += outlines_svg(outlines, extent);
  return out + "</svg>\n";
}

std::string line_chart_svg(const std::string& title, std::span<const double> x,
                           std::span<const Series> series, const std::string& x_label,
                           const std::string& y_label) {
  static constexpr const char* kColors[] = {"#264653", "#e76f51", "#2a9d8f", "#e9c46a", "#8d5fd3",
                                            "#f4a261"};
  const double w = 560.0, h = 360.0, left = 60.0, right = 130.0, top = 40.0, bottom = 50.0;
  std::string out = header(w, h, title);
  if (x.empty()) return out + "</svg>\n";
  double x0 = *std::min_element(x.begin(), x.end());
  double x1 = *std::max_element(x.begin(), x.end());
  if (x1 == x0) x1 = x0 + 1.0;
  double y0 = std::numeric_limits<double>::infinity(), y1 = -y0;
  for (const auto& s : series) {
    for (double v : s.y) {
      y0 = std::min(y0, v);
      y1 = std::max(y1, v);
    }
  }
  if (!std::isfinite(y0)) y0 = 0.0, y1 = 1.0;
  if (y1 == y0) y1 = y0 + 1.0;
  const double pw = w - left - right, ph = h - top - bottom;
  auto px = [&](double v) { return left + (v - x0) / (x1 - x0) * pw; };
  auto py = [&](double v) { return top + (y1 - v) / (y1 - y0) * ph; };

  out += fmt("<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n", left,
             top + ph, left + pw, top + ph);
  out += fmt("<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n", left, top,
             left, top + ph);
  for (double v : x) {
    out += fmt("<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"11\" "
               "text-anchor=\"middle\">%g</text>\n",
               px(v), top + ph + 15, v);
  }
  for (double v : {y0, (y0 + y1) / 2, y1}) {
    out += fmt("<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"11\" "
               "text-anchor=\"end\">%.1f</text>\n",
               left - 5, py(v) + 4, v);
  }
  out += fmt("<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"12\" "
             "text-anchor=\"middle\">",
             left + pw / 2, h - 10) +
         escape(x_label) + "</text>\n";
  out += fmt("<text x=\"15\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"12\" "
             "transform=\"rotate(-90 15 %.1f)\" text-anchor=\"middle\">",
             top + ph / 2, top + ph / 2) +
         escape(y_label) + "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % std::size(kColors)];
    std::string points;
    for (std::size_t i = 0; i < std::min(x.size(), series[s].y.size()); ++i) {
      points += fmt("%.2f,%.2f ", px(x[i]), py(series[s].y[i]));
    }
    out += "<polyline fill=\"none\" stroke-width=\"2\" stroke=\"" + std::string(color) +
           "\" points=\"" + points + "\"/>\n";
    out += fmt("<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"12\" fill=\"",
               left + pw + 10, top + 15.0 * static_cast<double>(s + 1)) +
           color + "\">" + escape(series[s].name) + "</text>\n";
  }
  return out + "</svg>\n";
}

}  // namespace slicekit::harness
