/*
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <array>

namespace boxmend {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

struct ImageDims {
  int width = 1;
  int height = 1;

  friend bool operator==(const ImageDims&, const ImageDims&) = default;
};

/// Axis-aligned box in center convention (cx, cy, w, h), in pixels.
///
/// Pixels are unit squares: pixel (row i, col j) covers [j, j+1) x [i, i+1).
/// Corner and COCO top-left forms only appear at I/O boundaries.
struct Box {
  double cx = 0.0;
  double cy = 0.0;
  double w = 1.0;
  double h = 1.0;

  double x1() const { return cx - w / 2; }
  double y1() const { return cy - h / 2; }
  double x2() const { return cx + w / 2; }
  double y2() const { return cy + h / 2; }
  double area() const { return w * h; }

  /// Finite coordinates, w > 0, h > 0.
  bool valid() const;

  static Box from_corners(double x1, double y1, double x2, double y2);
  /// COCO bbox [x_topleft, y_topleft, w, h].
  static Box from_top_left(double x, double y, double w, double h);

  std::array<double, 4> corners() const { return {x1(), y1(), x2(), y2()}; }
  std::array<double, 4> top_left() const { return {x1(), y1(), w, h}; }

  friend bool operator==(const Box&, const Box&) = default;
};

double intersection_area(const Box& a, const Box& b);

/// Intersection over union; 0 for disjoint boxes.
double iou(const Box& a, const Box& b);

Point box_center(const Box& b);

/// b* = gamma * b_hat + (1 - gamma) * b, coordinate-wise on (cx, cy, w, h).
/// Throws GammaOutOfRange unless 0 <= gamma <= 1.
Box interpolate_boxes(const Box& b_hat, const Box& b, double gamma);

/// Clamp corners to [0, width] x [0, height]; a side that collapses below one
/// pixel is widened to exactly one pixel and shifted back inside the frame.
Box clip_box(const Box& b, ImageDims dims);

/// True when every corner lies within [0, width] x [0, height].
bool inside_frame(const Box& b, ImageDims dims);

}  // namespace boxmend
