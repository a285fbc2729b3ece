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

#include "priorforecast/features.hpp"

#include <algorithm>

namespace priorforecast
{

ActorContext extract_features(const Scene &, const ActorTrack & actor, const LaneGraph & graph)
{
  ActorContext f{};
  const Pose pose = actor.pose();
  f[feature_index::speed] = actor.speed;
  f[feature_index::heading_rate] =
    normalize_angle(actor.past.back().heading - actor.past.front().heading) /
    ((kPastSteps - 1) * kStepSeconds);
  for (int i = 0; i < kPastSteps; ++i) {
    const Vec2 p = pose.to_local(actor.past[i].position);
    f[feature_index::past + 2 * i] = p.x;
    f[feature_index::past + 2 * i + 1] = p.y;
  }

  const auto lane = primary_lane(graph, actor.box);
  if (!lane) {
    return f;
  }
  // Walk the lane forward, taking the lowest-id successor at each split.
  Polyline path;
  std::vector<std::pair<double, int>> segment_starts;
  int current = *lane;
  const auto & first = graph.segment(current).centerline;
  const double start = project_onto_polyline(first, pose.position).arc_length;
  const double needed = start + std::max(kLookaheadPoints * kLookaheadSpacing, kIntersectionRange);
  std::vector<int> visited;
  while (true) {
    const auto & line = graph.segment(current).centerline;
    segment_starts.emplace_back(polyline_length(path), current);
    for (const auto & p : line) {
      if (path.empty() || distance(path.back(), p) > 1e-9) {
        path.push_back(p);
      }
    }
    visited.push_back(current);
    const auto next = graph.successors(current);
    if (next.empty() || polyline_length(path) >= needed ||
        std::find(visited.begin(), visited.end(), next.front()) != visited.end()) {
      break;
    }
    current = next.front();
  }
  const double total = polyline_length(path);
  for (int i = 0; i < kLookaheadPoints; ++i) {
    const double s = start + (i + 1) * kLookaheadSpacing;
    if (s > total) {
      break;
    }
    const Vec2 p = pose.to_local(point_at_arc_length(path, s));
    f[feature_index::lookahead + 2 * i] = p.x;
    f[feature_index::lookahead + 2 * i + 1] = p.y;
  }
  double to_intersection = kIntersectionRange;
  for (const auto & [s0, id] : segment_starts) {
    const auto & seg = graph.segment(id);
    if (!seg.light_control) {
      continue;
    }
    const double gap = std::max(0.0, s0 - start);
    to_intersection = std::min(to_intersection, gap);
    if (graph.light_state(id) == LightState::red && gap <= kRedLightRange) {
      f[feature_index::red_light] = 1.0;
    }
    break;
  }
  f[feature_index::intersection_distance] = std::clamp(to_intersection, 0.0, kIntersectionRange);
  return f;
}

}  // namespace priorforecast
