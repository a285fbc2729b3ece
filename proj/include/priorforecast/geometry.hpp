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

#ifndef PRIORFORECAST__GEOMETRY_HPP_
#define PRIORFORECAST__GEOMETRY_HPP_

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace priorforecast
{

struct Vec2
{
  double x{0.0};
  double y{0.0};

  constexpr Vec2 operator+(const Vec2 & o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(const Vec2 & o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  constexpr Vec2 & operator+=(const Vec2 & o)
  {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2 & operator-=(const Vec2 & o)
  {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr bool operator==(const Vec2 &) const = default;
};

constexpr Vec2 operator*(double s, const Vec2 & v) { return v * s; }
constexpr double dot(const Vec2 & a, const Vec2 & b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(const Vec2 & a, const Vec2 & b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2 & v) { return std::hypot(v.x, v.y); }
inline double distance(const Vec2 & a, const Vec2 & b) { return norm(a - b); }
inline Vec2 unit_from_heading(double heading) { return {std::cos(heading), std::sin(heading)}; }
inline Vec2 rotate(const Vec2 & v, double angle)
{
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

/// Wraps an angle to (-pi, pi].
double normalize_angle(double angle);

using Polyline = std::vector<Vec2>;
using Polygon = std::vector<Vec2>;

/// Position plus heading; the local frame has x along the heading, y to the left.
struct Pose
{
  Vec2 position;
  double heading{0.0};

  Vec2 to_local(const Vec2 & world) const { return rotate(world - position, -heading); }
  Vec2 to_world(const Vec2 & local) const { return position + rotate(local, heading); }
  Pose compose(const Pose & local) const
  {
    return {to_world(local.position), normalize_angle(heading + local.heading)};
  }
};

struct OrientedBox
{
  Vec2 center;
  double length{4.5};
  double width{2.0};
  double heading{0.0};

  /// Counter-clockwise corners starting at front-left.
  std::array<Vec2, 4> corners() const;
  Polygon polygon() const;
};

/// Separating-axis overlap test; touching boxes count as overlapping.
bool boxes_overlap(const OrientedBox & a, const OrientedBox & b);

bool segments_intersect(const Vec2 & p1, const Vec2 & p2, const Vec2 & q1, const Vec2 & q2);

/// Even-odd ray casting; points on the boundary may fall either way.
bool point_in_polygon(std::span<const Vec2> polygon, const Vec2 & p);

/// True when the closed polygons share any area or boundary point.
bool polygons_intersect(std::span<const Vec2> a, std::span<const Vec2> b);

/// No two non-adjacent edges intersect and no adjacent edges overlap.
bool polygon_is_simple(std::span<const Vec2> polygon);

double point_segment_distance(const Vec2 & p, const Vec2 & a, const Vec2 & b);
double point_polyline_distance(const Vec2 & p, std::span<const Vec2> polyline);

double polyline_length(std::span<const Vec2> polyline);

/// Closest point on a polyline expressed as arc length and signed lateral offset (left positive).
struct PolylineProjection
{
  double arc_length{0.0};
  double lateral{0.0};
  double distance{0.0};
};

PolylineProjection project_onto_polyline(std::span<const Vec2> polyline, const Vec2 & p);

/// Point at arc length `s`; extrapolates linearly beyond either end.
Vec2 point_at_arc_length(std::span<const Vec2> polyline, double s);
double heading_at_arc_length(std::span<const Vec2> polyline, double s);

/// Offsets a polyline sideways by `offset` (left positive) using averaged vertex normals.
Polyline offset_polyline(std::span<const Vec2> polyline, double offset);

/// Closed lane polygon: left boundary forward, right boundary backward.
Polygon lane_polygon(std::span<const Vec2> centerline, double half_width);

/// Densified polyline with roughly uniform spacing not exceeding `max_spacing`.
Polyline resample_polyline(std::span<const Vec2> polyline, double max_spacing);

}  // namespace priorforecast

#endif  // PRIORFORECAST__GEOMETRY_HPP_
