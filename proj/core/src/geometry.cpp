/*
 * SPDX-License-Identifier: Apache-2.0
 */

#include "boxmend/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "boxmend/error.hpp"

namespace boxmend {

namespace {

double overlap_1d(double a1, double a2, double b1, double b2) {
  return std::max(0.0, std::min(a2, b2) - std::max(a1, b1));
}

// Clamps one axis given as (center, size); returns the input untouched when it
// already spans at least one pixel inside [0, limit].
std::pair<double, double> clamp_axis(double center, double size, double limit) {
  double lo = center - size / 2;
  double hi = center + size / 2;
  if (lo >= 0.0 && hi <= limit && size >= 1.0) return {center, size};
  lo = std::clamp(lo, 0.0, limit);
  hi = std::clamp(hi, 0.0, limit);
  if (hi - lo < 1.0) return {std::clamp((lo + hi) / 2, 0.5, limit - 0.5), 1.0};
  return {(lo + hi) / 2, hi - lo};
}

}  // namespace

bool Box::valid() const {
  return std::isfinite(cx) && std::isfinite(cy) && std::isfinite(w) && std::isfinite(h) &&
         w > 0.0 && h > 0.0;
}

Box Box::from_corners(double x1, double y1, double x2, double y2) {
  return Box{(x1 + x2) / 2, (y1 + y2) / 2, x2 - x1, y2 - y1};
}

Box Box::from_top_left(double x, double y, double w, double h) {
  return Box{x + w / 2, y + h / 2, w, h};
}

double intersection_area(const Box& a, const Box& b) {
  return overlap_1d(a.x1(), a.x2(), b.x1(), b.x2()) * overlap_1d(a.y1(), a.y2(), b.y1(), b.y2());
}

double iou(const Box& a, const Box& b) {
  const double inter = intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

Point box_center(const Box& b) { return Point{b.cx, b.cy}; }

Box interpolate_boxes(const Box& b_hat, const Box& b, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    fail(ErrorCode::kGammaOutOfRange, "gamma " + std::to_string(gamma) + " outside [0, 1]");
  }
  return Box{std::lerp(b.cx, b_hat.cx, gamma), std::lerp(b.cy, b_hat.cy, gamma),
             std::lerp(b.w, b_hat.w, gamma), std::lerp(b.h, b_hat.h, gamma)};
}

Box clip_box(const Box& b, ImageDims dims) {
  const auto [cx, w] = clamp_axis(b.cx, b.w, static_cast<double>(dims.width));
  const auto [cy, h] = clamp_axis(b.cy, b.h, static_cast<double>(dims.height));
  return Box{cx, cy, w, h};
}

bool inside_frame(const Box& b, ImageDims dims) {
  return b.x1() >= 0.0 && b.y1() >= 0.0 && b.x2() <= dims.width && b.y2() <= dims.height;
}

}  // namespace boxmend
