/*
 * SPDX-License-Identifier: Apache-2.0
 */

#include <gtest/gtest.h>

#include "boxmend/error.hpp"
#include "boxmend/geometry.hpp"
#include "oracles.hpp"

namespace boxmend {
namespace {

TEST(Iou, IdenticalBoxesGiveOne) {
  const Box b{12.5, 7.25, 3.0, 9.5};
  EXPECT_DOUBLE_EQ(iou(b, b), 1.0);
}

TEST(Iou, DisjointBoxesGiveZero) { EXPECT_EQ(iou(Box{1, 1, 2, 2}, Box{10, 10, 2, 2}), 0.0); }

TEST(Iou, TouchingEdgesGiveZero) { EXPECT_EQ(iou(Box{1, 1, 2, 2}, Box{3, 1, 2, 2}), 0.0); }

TEST(Iou, HalfOverlapMatchesRasterCount) {
  const Box a{1, 1, 2, 2};
  const Box b{2, 1, 2, 2};
  const double expected = testing::raster_iou(a, b, 0.125);
  EXPECT_DOUBLE_EQ(expected, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(iou(a, b), expected);
}

TEST(Iou, SymmetricBoundedAndMatchesRasterOnQuarterGrid) {
  Pcg32 rng(99, 1);
  for (int i = 0; i < 300; ++i) {
    // Centers and sizes on a 0.25 grid keep every edge on a 0.125 grid.
    auto q = [&](double lo, double hi) { return std::round(rng.uniform(lo, hi) * 4.0) / 4.0; };
    const Box a{q(0, 20), q(0, 20), q(1, 10), q(1, 10)};
    const Box b{q(0, 20), q(0, 20), q(1, 10), q(1, 10)};
    const double v = iou(a, b);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    EXPECT_DOUBLE_EQ(v, iou(b, a));
    EXPECT_NEAR(v, testing::raster_iou(a, b, 0.125), 1e-12) << i;
  }
}

TEST(Iou, OneOnlyForEqualBoxes) {
  const Box a{5, 5, 4, 4};
  EXPECT_LT(iou(a, Box{5, 5, 4, 4.001}), 1.0);
  EXPECT_LT(iou(a, Box{5.001, 5, 4, 4}), 1.0);
}

TEST(BoxCenter, CenterConvention) {
  EXPECT_EQ(box_center(Box{3, 4, 2, 2}), (Point{3, 4}));
  EXPECT_EQ(box_center(Box{0, 0, 10, 6}), (Point{0, 0}));
}

TEST(BoxCenter, FromCorners) {
  const Box b = Box::from_corners(2, 2, 6, 10);
  EXPECT_EQ(box_center(b), (Point{4, 6}));
  EXPECT_EQ(b.w, 4);
  EXPECT_EQ(b.h, 8);
}

TEST(BoxForms, TopLeftRoundTrip) {
  const Box b = Box::from_top_left(2, 2, 4, 8);
  EXPECT_EQ(b, (Box{4, 6, 4, 8}));
  const auto tl = b.top_left();
  EXPECT_EQ(tl[0], 2);
  EXPECT_EQ(tl[1], 2);
  EXPECT_EQ(tl[2], 4);
  EXPECT_EQ(tl[3], 8);
}

TEST(Interpolate, Endpoints) {
  const Box b_hat{10.1, 10.7, 4.3, 4.9};
  const Box b{20.3, 30.9, 8.1, 2.2};
  EXPECT_EQ(interpolate_boxes(b_hat, b, 0.0), b);
  EXPECT_EQ(interpolate_boxes(b_hat, b, 1.0), b_hat);
}

TEST(Interpolate, Midpoint) {
  EXPECT_EQ(interpolate_boxes(Box{10, 10, 4, 4}, Box{20, 30, 8, 2}, 0.5), (Box{15, 20, 6, 3}));
}

TEST(Interpolate, RejectsGammaOutsideUnitInterval) {
  for (double g : {-0.01, 1.01, std::nan("")}) {
    try {
      interpolate_boxes(Box{}, Box{}, g);
      FAIL() << g;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kGammaOutOfRange);
    }
  }
}

TEST(Interpolate, CoordinatesStayBetweenInputsAndMoveMonotonically) {
  Pcg32 rng(5, 5);
  for (int i = 0; i < 200; ++i) {
    const Box a = testing::random_box(rng, 100);
    const Box b = testing::random_box(rng, 100);
    Box prev = b;
    for (int s = 0; s <= 20; ++s) {
      const Box m = interpolate_boxes(a, b, s / 20.0);
      const double mc[] = {m.cx, m.cy, m.w, m.h};
      const double ac[] = {a.cx, a.cy, a.w, a.h};
      const double bc[] = {b.cx, b.cy, b.w, b.h};
      const double pc[] = {prev.cx, prev.cy, prev.w, prev.h};
      for (int k = 0; k < 4; ++k) {
        EXPECT_GE(mc[k], std::min(ac[k], bc[k]));
        EXPECT_LE(mc[k], std::max(ac[k], bc[k]));
        // Moving from b towards a never reverses direction.
        if (ac[k] >= bc[k]) EXPECT_GE(mc[k], pc[k]);
        else EXPECT_LE(mc[k], pc[k]);
      }
      EXPECT_TRUE(m.valid());
      prev = m;
    }
  }
}

TEST(ClipBox, InsideFrameUnchanged) {
  const Box b{50.3, 40.7, 10.1, 20.9};
  EXPECT_EQ(clip_box(b, ImageDims{100, 100}), b);
}

TEST(ClipBox, ClampsLeftEdge) {
  const Box c = clip_box(Box{-5, 5, 4, 4}, ImageDims{100, 100});
  // Corners (-7,3)-(-3,7): x collapses to [0,0], floored to one pixel.
  EXPECT_GE(c.x1(), 0.0);
  EXPECT_LE(c.x2(), 100.0);
  EXPECT_DOUBLE_EQ(c.w, 1.0);
  EXPECT_DOUBLE_EQ(c.x1(), 0.0);
  EXPECT_DOUBLE_EQ(c.y1(), 3.0);
  EXPECT_DOUBLE_EQ(c.h, 4.0);
}

TEST(ClipBox, PartiallyOutsideIsTrimmed) {
  const Box c = clip_box(Box{98, 50, 10, 10}, ImageDims{100, 100});
  EXPECT_DOUBLE_EQ(c.x1(), 93.0);
  EXPECT_DOUBLE_EQ(c.x2(), 100.0);
  EXPECT_DOUBLE_EQ(c.h, 10.0);
}

TEST(ClipBox, DegenerateWidthForcedToOnePixel) {
  const Box c = clip_box(Box{50, 50, 1e-9, 10}, ImageDims{100, 100});
  EXPECT_DOUBLE_EQ(c.w, 1.0);
  EXPECT_TRUE(inside_frame(c, ImageDims{100, 100}));
  const Box edge = clip_box(Box{100, 50, 0.2, 10}, ImageDims{100, 100});
  EXPECT_DOUBLE_EQ(edge.w, 1.0);
  EXPECT_DOUBLE_EQ(edge.x2(), 100.0);
}

TEST(ClipBox, ResultAlwaysInsideFrameAndValid) {
  Pcg32 rng(17, 3);
  const ImageDims dims{64, 48};
  for (int i = 0; i < 2000; ++i) {
    const Box b{rng.uniform(-80, 150), rng.uniform(-80, 150), rng.uniform(0.01, 120), rng.uniform(0.01, 120)};
    const Box c = clip_box(b, dims);
    EXPECT_TRUE(c.valid());
    EXPECT_TRUE(inside_frame(c, dims)) << c.x1() << " " << c.x2() << " " << c.y1() << " " << c.y2();
    EXPECT_GE(c.w, 1.0);
    EXPECT_GE(c.h, 1.0);
  }
}

}  // namespace
}  // namespace boxmend
