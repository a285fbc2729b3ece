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

#ifndef PRIORFORECAST_TESTS__SUPPORT_HPP_
#define PRIORFORECAST_TESTS__SUPPORT_HPP_

#include "priorforecast/geometry.hpp"
#include "priorforecast/lane_graph.hpp"
#include "priorforecast/scene.hpp"

#include <cmath>
#include <vector>

namespace priorforecast::testing
{

inline LaneSegment straight_segment(
  int id, const Vec2 & a, const Vec2 & b, BoundaryType left = BoundaryType::dashed,
  BoundaryType right = BoundaryType::dashed, double half_width = 2.0)
{
  LaneSegment s;
  s.id = id;
  s.centerline = {a, b};
  s.polygon = lane_polygon(s.centerline, half_width);
  s.left_boundary_type = left;
  s.right_boundary_type = right;
  return s;
}

/// Two parallel eastbound lanes (y = 0 and y = 4), each split into `chunks` 20 m segments.
/// Lane 0 ids are 0..chunks-1, lane 1 ids are 100..100+chunks-1.
inline LaneGraph two_lane_road(int chunks = 5, BoundaryType divider = BoundaryType::dashed)
{
  std::vector<LaneSegment> segs;
  std::vector<LaneEdge> edges;
  for (int c = 0; c < chunks; ++c) {
    const double x0 = 20.0 * c;
    segs.push_back(straight_segment(
      c, {x0, 0.0}, {x0 + 20.0, 0.0}, divider, BoundaryType::solid));
    segs.push_back(straight_segment(
      100 + c, {x0, 4.0}, {x0 + 20.0, 4.0}, BoundaryType::solid, divider));
    edges.push_back({c, 100 + c, EdgeKind::left_adjacent});
    edges.push_back({100 + c, c, EdgeKind::right_adjacent});
    if (c + 1 < chunks) {
      edges.push_back({c, c + 1, EdgeKind::successor});
      edges.push_back({100 + c, 101 + c, EdgeKind::successor});
    }
  }
  return LaneGraph::build(std::move(segs), std::move(edges), {});
}

/// Constant-velocity track along `heading` passing `position` at t = 0.
inline ActorTrack straight_track(int id, const Vec2 & position, double heading, double speed)
{
  ActorTrack a;
  a.id = id;
  a.speed = speed;
  const Vec2 u = unit_from_heading(heading);
  for (int i = 0; i < kPastSteps; ++i) {
    const double t = (i - (kPastSteps - 1)) * kStepSeconds;
    a.past[i] = {position + u * (speed * t), heading};
  }
  for (int t = 0; t < kFutureSteps; ++t) {
    a.future_gt[t] = position + u * (speed * t * kStepSeconds);
    a.future_heading[t] = heading;
  }
  a.box = {position, 4.6, 1.9, heading};
  return a;
}

}  // namespace priorforecast::testing

#endif  // PRIORFORECAST_TESTS__SUPPORT_HPP_
