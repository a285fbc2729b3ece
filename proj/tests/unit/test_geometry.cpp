// Copyright 2026 The PriorForecast Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "priorforecast/geometry.hpp"
#include "priorforecast/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace priorforecast;

namespace
{

// Brute force: two convex polygons overlap iff some corner lies inside the other
// or some pair of edges crosses. Independent of the separating-axis code.
bool inside_convex(const std::array<Vec2, 4> & poly, const Vec2 & p)
{
  for (int i = 0; i < 4; ++i) {
    if (cross(poly[(i + 1) % 4] - poly[i], p - poly[i]) < 0.0) {
      return false;
    }
  }
  return true;
}

bool proper_cross(const Vec2 & a, const Vec2 & b, const Vec2 & c, const Vec2 & d)
{
  const double d1 = cross(b - a, c - a);
  const double d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c);
  const double d4 = cross(d - c, b - c);
  return d1 * d2 < 0.0 && d3 * d4 < 0.0;
}

bool brute_overlap(const OrientedBox & a, const OrientedBox & b)
{
  const auto ca = a.corners();
  const auto cb = b.corners();
  for (const auto & p : ca) {
    if (inside_convex(cb, p)) return true;
  }
  for (const auto & p : cb) {
    if (inside_convex(ca, p)) return true;
  }
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (proper_cross(ca[i], ca[(i + 1) % 4], cb[j], cb[(j + 1) % 4])) return true;
    }
  }
  return false;
}

}  // namespace

TEST(Geometry, BoxOverlapMatchesBruteForceAndIsSymmetric)
{
  Rng rng(11);
  int overlaps = 0;
  for (int n = 0; n < 20000; ++n) {
    const OrientedBox a{{rng.uniform(-5, 5), rng.uniform(-5, 5)}, rng.uniform(1, 6),
                        rng.uniform(0.5, 3), rng.uniform(-4, 4)};
    const OrientedBox b{{rng.uniform(-5, 5), rng.uniform(-5, 5)}, rng.uniform(1, 6),
                        rng.uniform(0.5, 3), rng.uniform(-4, 4)};
    const bool sat = boxes_overlap(a, b);
    EXPECT_EQ(sat, boxes_overlap(b, a));
    EXPECT_EQ(sat, brute_overlap(a, b)) << n;
    overlaps += sat;
  }
  EXPECT_GT(overlaps, 2000);
  EXPECT_LT(overlaps, 18000);
}

TEST(Geometry, CornersAreCounterClockwiseFromFrontLeft)
{
  const OrientedBox b{{1.0, 2.0}, 4.0, 2.0, std::numbers::pi / 2};
  const auto c = b.corners();
  EXPECT_NEAR(c[0].x, 0.0, 1e-12);
  EXPECT_NEAR(c[0].y, 4.0, 1e-12);
  EXPECT_NEAR(c[2].x, 2.0, 1e-12);
  EXPECT_NEAR(c[2].y, 0.0, 1e-12);
}

TEST(Geometry, PoseRoundTrip)
{
  const Pose p{{3.0, -2.0}, 0.7};
  const Vec2 w{10.0, 5.0};
  const Vec2 back = p.to_world(p.to_local(w));
  EXPECT_NEAR(back.x, w.x, 1e-12);
  EXPECT_NEAR(back.y, w.y, 1e-12);
  EXPECT_NEAR(p.to_local(p.position + unit_from_heading(0.7) * 2.0).x, 2.0, 1e-12);
}

TEST(Geometry, PolylineQueries)
{
  const Polyline line{{0, 0}, {10, 0}, {10, 10}};
  EXPECT_DOUBLE_EQ(polyline_length(line), 20.0);
  const Vec2 p = point_at_arc_length(line, 15.0);
  EXPECT_NEAR(p.x, 10.0, 1e-12);
  EXPECT_NEAR(p.y, 5.0, 1e-12);
  const auto proj = project_onto_polyline(line, {5.0, 1.0});
  EXPECT_NEAR(proj.arc_length, 5.0, 1e-12);
  EXPECT_NEAR(proj.lateral, 1.0, 1e-12);
  EXPECT_NEAR(point_polyline_distance({12.0, 5.0}, line), 2.0, 1e-12);
  // Linear extrapolation past the end.
  EXPECT_NEAR(point_at_arc_length(line, 25.0).y, 15.0, 1e-12);
}

TEST(Geometry, PolygonPredicates)
{
  const Polygon square{{0, 0}, {4, 0}, {4, 4}, {0, 4}};
  EXPECT_TRUE(polygon_is_simple(square));
  EXPECT_TRUE(point_in_polygon(square, {2, 2}));
  EXPECT_FALSE(point_in_polygon(square, {5, 2}));
  const Polygon bow{{0, 0}, {4, 4}, {4, 0}, {0, 4}};
  EXPECT_FALSE(polygon_is_simple(bow));
  const Polygon shifted{{3, 3}, {6, 3}, {6, 6}, {3, 6}};
  EXPECT_TRUE(polygons_intersect(square, shifted));
  const Polygon far{{10, 10}, {12, 10}, {12, 12}, {10, 12}};
  EXPECT_FALSE(polygons_intersect(square, far));
}

TEST(Geometry, LanePolygonContainsCenterline)
{
  const Polyline c{{0, 0}, {10, 0}, {20, 5}};
  const auto poly = lane_polygon(c, 2.0);
  EXPECT_TRUE(polygon_is_simple(poly));
  const auto dense = resample_polyline(c, 1.0);
  // Endpoints sit on the end caps; interior points must be strictly inside.
  for (std::size_t i = 1; i + 1 < dense.size(); ++i) {
    EXPECT_TRUE(point_in_polygon(poly, dense[i]));
  }
}
