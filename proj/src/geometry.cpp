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

#include <algorithm>
#include <limits>

namespace priorforecast
{

double normalize_angle(double angle)
{
  constexpr double two_pi = 2.0 * std::numbers::pi;
  angle = std::fmod(angle, two_pi);
  if (angle <= -std::numbers::pi) {
    angle += two_pi;
  } else if (angle > std::numbers::pi) {
    angle -= two_pi;
  }
  return angle;
}

std::array<Vec2, 4> OrientedBox::corners() const
{
  const Vec2 f = unit_from_heading(heading) * (0.5 * length);
  const Vec2 l = unit_from_heading(heading + 0.5 * std::numbers::pi) * (0.5 * width);
  return {center + f + l, center - f + l, center - f - l, center + f - l};
}

Polygon OrientedBox::polygon() const
{
  const auto c = corners();
  return {c.begin(), c.end()};
}

namespace
{

void project_box(const std::array<Vec2, 4> & corners, const Vec2 & axis, double & lo, double & hi)
{
  lo = std::numeric_limits<double>::infinity();
  hi = -lo;
  for (const auto & c : corners) {
    const double v = dot(c, axis);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
}

int orientation(const Vec2 & a, const Vec2 & b, const Vec2 & c)
{
  const double v = cross(b - a, c - a);
  if (v > 0.0) {
    return 1;
  }
  if (v < 0.0) {
    return -1;
  }
  return 0;
}

bool on_segment(const Vec2 & a, const Vec2 & b, const Vec2 & p)
{
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

}  // namespace

bool boxes_overlap(const OrientedBox & a, const OrientedBox & b)
{
  const auto ca = a.corners();
  const auto cb = b.corners();
  const std::array<Vec2, 4> axes{
    unit_from_heading(a.heading), unit_from_heading(a.heading + 0.5 * std::numbers::pi),
    unit_from_heading(b.heading), unit_from_heading(b.heading + 0.5 * std::numbers::pi)};
  for (const auto & axis : axes) {
    double alo, ahi, blo, bhi;
    project_box(ca, axis, alo, ahi);
    project_box(cb, axis, blo, bhi);
    if (ahi < blo || bhi < alo) {
      return false;
    }
  }
  return true;
}

bool segments_intersect(const Vec2 & p1, const Vec2 & p2, const Vec2 & q1, const Vec2 & q2)
{
  // Bounding boxes first: orientation signs are noisy for nearly collinear pieces.
  if (std::max(p1.x, p2.x) < std::min(q1.x, q2.x) || std::max(q1.x, q2.x) < std::min(p1.x, p2.x) ||
      std::max(p1.y, p2.y) < std::min(q1.y, q2.y) || std::max(q1.y, q2.y) < std::min(p1.y, p2.y)) {
    return false;
  }
  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) {
    return true;
  }
  return (o1 == 0 && on_segment(p1, p2, q1)) || (o2 == 0 && on_segment(p1, p2, q2)) ||
         (o3 == 0 && on_segment(q1, q2, p1)) || (o4 == 0 && on_segment(q1, q2, p2));
}

bool point_in_polygon(std::span<const Vec2> polygon, const Vec2 & p)
{
  bool inside = false;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 & a = polygon[i];
    const Vec2 & b = polygon[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
      if (p.x < x_cross) {
        inside = !inside;
      }
    }
  }
  return inside;
}

bool polygons_intersect(std::span<const Vec2> a, std::span<const Vec2> b)
{
  if (a.empty() || b.empty()) {
    return false;
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Vec2 & a1 = a[i];
    const Vec2 & a2 = a[(i + 1) % a.size()];
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (segments_intersect(a1, a2, b[j], b[(j + 1) % b.size()])) {
        return true;
      }
    }
  }
  return point_in_polygon(a, b.front()) || point_in_polygon(b, a.front());
}

bool polygon_is_simple(std::span<const Vec2> polygon)
{
  const std::size_t n = polygon.size();
  if (n < 3) {
    return false;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 & a1 = polygon[i];
    const Vec2 & a2 = polygon[(i + 1) % n];
    if (a1 == a2) {
      return false;
    }
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      const Vec2 & b1 = polygon[j];
      const Vec2 & b2 = polygon[(j + 1) % n];
      if (adjacent) {
        // Consecutive edges may only share their common vertex; reject folding back.
        const Vec2 shared = (j == i + 1) ? a2 : a1;
        const Vec2 u = ((j == i + 1) ? a1 : a2) - shared;
        const Vec2 v = ((j == i + 1) ? b2 : b1) - shared;
        if (cross(u, v) == 0.0 && dot(u, v) > 0.0) {
          return false;
        }
        continue;
      }
      if (segments_intersect(a1, a2, b1, b2)) {
        return false;
      }
    }
  }
  return true;
}

double point_segment_distance(const Vec2 & p, const Vec2 & a, const Vec2 & b)
{
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) {
    return distance(p, a);
  }
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return distance(p, a + ab * t);
}

double point_polyline_distance(const Vec2 & p, std::span<const Vec2> polyline)
{
  if (polyline.size() == 1) {
    return distance(p, polyline.front());
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
    best = std::min(best, point_segment_distance(p, polyline[i], polyline[i + 1]));
  }
  return best;
}

double polyline_length(std::span<const Vec2> polyline)
{
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
    total += distance(polyline[i], polyline[i + 1]);
  }
  return total;
}

PolylineProjection project_onto_polyline(std::span<const Vec2> polyline, const Vec2 & p)
{
  PolylineProjection best;
  best.distance = std::numeric_limits<double>::infinity();
  double s0 = 0.0;
  for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
    const Vec2 a = polyline[i];
    const Vec2 ab = polyline[i + 1] - a;
    const double len = norm(ab);
    if (len == 0.0) {
      continue;
    }
    const Vec2 dir = ab / len;
    const double t = std::clamp(dot(p - a, dir), 0.0, len);
    const Vec2 closest = a + dir * t;
    const double d = distance(p, closest);
    if (d < best.distance) {
      best.distance = d;
      best.arc_length = s0 + t;
      best.lateral = cross(dir, p - a);
    }
    s0 += len;
  }
  return best;
}

namespace
{

// Returns the index of the segment containing arc length s and the local offset along it.
std::size_t locate(std::span<const Vec2> polyline, double s, double & local)
{
  double s0 = 0.0;
  const std::size_t last = polyline.size() - 2;
  for (std::size_t i = 0; i <= last; ++i) {
    const double len = distance(polyline[i], polyline[i + 1]);
    if (s <= s0 + len || i == last) {
      local = s - s0;
      return i;
    }
    s0 += len;
  }
  local = 0.0;
  return 0;
}

}  // namespace

Vec2 point_at_arc_length(std::span<const Vec2> polyline, double s)
{
  if (polyline.size() == 1) {
    return polyline.front();
  }
  if (s <= 0.0) {
    const Vec2 dir = polyline[1] - polyline[0];
    return polyline[0] + dir * (s / norm(dir));
  }
  double local = 0.0;
  const std::size_t i = locate(polyline, s, local);
  const Vec2 dir = polyline[i + 1] - polyline[i];
  return polyline[i] + dir * (local / norm(dir));
}

double heading_at_arc_length(std::span<const Vec2> polyline, double s)
{
  double local = 0.0;
  const std::size_t i = s <= 0.0 ? 0 : locate(polyline, s, local);
  const Vec2 dir = polyline[i + 1] - polyline[i];
  return std::atan2(dir.y, dir.x);
}

Polyline offset_polyline(std::span<const Vec2> polyline, double offset)
{
  const std::size_t n = polyline.size();
  Polyline out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vec2 tangent;
    if (i == 0) {
      tangent = polyline[1] - polyline[0];
    } else if (i == n - 1) {
      tangent = polyline[n - 1] - polyline[n - 2];
    } else {
      const Vec2 t0 = polyline[i] - polyline[i - 1];
      const Vec2 t1 = polyline[i + 1] - polyline[i];
      tangent = t0 / norm(t0) + t1 / norm(t1);
    }
    tangent = tangent / norm(tangent);
    const Vec2 left{-tangent.y, tangent.x};
    out.push_back(polyline[i] + left * offset);
  }
  return out;
}

Polygon lane_polygon(std::span<const Vec2> centerline, double half_width)
{
  Polygon poly = offset_polyline(centerline, half_width);
  const Polyline right = offset_polyline(centerline, -half_width);
  poly.insert(poly.end(), right.rbegin(), right.rend());
  return poly;
}

Polyline resample_polyline(std::span<const Vec2> polyline, double max_spacing)
{
  Polyline out;
  if (polyline.empty()) {
    return out;
  }
  out.push_back(polyline.front());
  for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
    const Vec2 a = polyline[i];
    const Vec2 b = polyline[i + 1];
    const int pieces = std::max(1, static_cast<int>(std::ceil(distance(a, b) / max_spacing)));
    for (int k = 1; k <= pieces; ++k) {
      out.push_back(a + (b - a) * (static_cast<double>(k) / pieces));
    }
  }
  return out;
}

}  // namespace priorforecast
