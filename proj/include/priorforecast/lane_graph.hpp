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

#ifndef PRIORFORECAST__LANE_GRAPH_HPP_
#define PRIORFORECAST__LANE_GRAPH_HPP_

#include "priorforecast/geometry.hpp"

#include <nlohmann/json.hpp>

#include <compare>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace priorforecast
{

enum class BoundaryType { dashed, solid, double_solid_yellow };
enum class EdgeKind { successor, predecessor, left_adjacent, right_adjacent };
enum class LightState { green, yellow, red };

struct LaneSegment
{
  int id{0};
  Polyline centerline;
  BoundaryType left_boundary_type{BoundaryType::dashed};
  BoundaryType right_boundary_type{BoundaryType::dashed};
  Polygon polygon;
  std::optional<int> light_control;

  double length() const { return polyline_length(centerline); }
};

struct LaneEdge
{
  int src{0};
  int dst{0};
  EdgeKind kind{EdgeKind::successor};

  auto operator<=>(const LaneEdge &) const = default;
};

struct TrafficLight
{
  int id{0};
  LightState state{LightState::green};
  std::vector<int> governed_segments;
};

/**
 * @brief Validated, immutable lane graph.
 *
 * Construction completes the predecessor/successor mirror of every
 * longitudinal edge, fills `light_control` on governed segments, and sorts
 * edges so every query is deterministic.
 */
class LaneGraph
{
public:
  LaneGraph() = default;

  /// Throws Error{dangling_edge, duplicate_id, degenerate_polyline, invalid_polygon,
  /// invalid_light, non_overlapping_adjacency}.
  static LaneGraph build(
    std::vector<LaneSegment> segments, std::vector<LaneEdge> edges,
    std::vector<TrafficLight> lights);

  const std::map<int, LaneSegment> & segments() const { return segments_; }
  const std::vector<LaneEdge> & edges() const { return edges_; }
  const std::vector<TrafficLight> & lights() const { return lights_; }

  bool contains(int id) const { return segments_.count(id) != 0; }
  /// Throws Error{unknown_segment}.
  const LaneSegment & segment(int id) const;
  /// Edges leaving `id`, sorted by (kind, dst).
  std::span<const LaneEdge> outgoing(int id) const;
  std::vector<int> successors(int id) const;
  std::optional<LightState> light_state(int segment_id) const;
  std::vector<int> segment_ids() const;

private:
  std::map<int, LaneSegment> segments_;
  std::vector<LaneEdge> edges_;
  std::vector<TrafficLight> lights_;
  std::map<int, std::pair<std::size_t, std::size_t>> outgoing_ranges_;
};

struct PruneOptions
{
  /// Yellow lights are treated like green unless this is set.
  bool yellow_is_red{false};
};

/// Copy of `graph` without adjacency edges that cross a non-dashed boundary of
/// their source and without longitudinal edges into red-governed segments.
LaneGraph prune_illegal_edges(const LaneGraph & graph, const PruneOptions & options = {});

constexpr double kAssociationFallbackRadius = 3.0;
constexpr double kDefaultReachArcLength = 120.0;
constexpr double kPredictionHorizonSeconds = 5.0;
constexpr double kMinRouteHorizon = 40.0;

/// Segments whose polygon intersects `box`, or the nearest one by centerline
/// distance if within `fallback_radius`. Sorted by id.
std::vector<int> associate_lanes(
  const LaneGraph & graph, const OrientedBox & box,
  double fallback_radius = kAssociationFallbackRadius);

/// The associated segment whose centerline is closest to the box center.
std::optional<int> primary_lane(const LaneGraph & graph, const OrientedBox & box);

/**
 * Depth-first search over successor and adjacency edges from the seeds.
 * A successor hop out of segment u costs u's centerline length; a lane change
 * costs nothing. Segments whose cheapest cost is within `max_arc_length` are
 * returned, seeds included, sorted by id. Throws Error{unknown_seed}.
 */
std::vector<int> reachable_lanes(
  const LaneGraph & pruned_graph, std::span<const int> seed_segments,
  double max_arc_length = kDefaultReachArcLength);

/// Route horizon for an SDV travelling at `speed` m/s.
double route_horizon(double speed);

/**
 * Union of segments lying on a legal path from `sdv_segment` to `goal_segment`,
 * truncated at `horizon_distance` of arc length from the SDV. Paths may not
 * return to the start or pass through the goal before their end.
 * Throws Error{unknown_segment, no_route}.
 */
std::vector<int> compute_route(
  const LaneGraph & graph, int sdv_segment, int goal_segment, double horizon_distance);

nlohmann::json to_json(const LaneGraph & graph);
/// Throws Error{parse_error} or any build() error.
LaneGraph lane_graph_from_json(const nlohmann::json & j);

}  // namespace priorforecast

#endif  // PRIORFORECAST__LANE_GRAPH_HPP_
