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

#include "priorforecast/lane_graph.hpp"

#include "priorforecast/error.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <string>
#include <utility>

namespace priorforecast
{

namespace
{

bool point_in_or_on_polygon(std::span<const Vec2> polygon, const Vec2 & p)
{
  if (point_in_polygon(polygon, p)) {
    return true;
  }
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    if (point_segment_distance(p, polygon[i], polygon[(i + 1) % polygon.size()]) < 1e-9) {
      return true;
    }
  }
  return false;
}

void validate_segment(const LaneSegment & seg)
{
  if (seg.centerline.size() < 2) {
    throw Error(
      ErrorCode::degenerate_polyline, "segment " + std::to_string(seg.id) + " has < 2 points");
  }
  for (std::size_t i = 0; i + 1 < seg.centerline.size(); ++i) {
    if (seg.centerline[i] == seg.centerline[i + 1]) {
      throw Error(
        ErrorCode::degenerate_polyline,
        "segment " + std::to_string(seg.id) + " repeats a centerline point");
    }
  }
  if (!polygon_is_simple(seg.polygon)) {
    throw Error(
      ErrorCode::invalid_polygon, "segment " + std::to_string(seg.id) + " polygon is not simple");
  }
  for (const auto & p : seg.centerline) {
    if (!point_in_or_on_polygon(seg.polygon, p)) {
      throw Error(
        ErrorCode::invalid_polygon,
        "segment " + std::to_string(seg.id) + " polygon does not contain its centerline");
    }
  }
}

bool longitudinal_overlap(const LaneSegment & src, const LaneSegment & dst)
{
  const double len = src.length();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto & p : resample_polyline(dst.centerline, 1.0)) {
    const double s = project_onto_polyline(src.centerline, p).arc_length;
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  return hi - lo > 0.1 && lo < len && hi > 0.0;
}

EdgeKind mirror_kind(EdgeKind kind)
{
  return kind == EdgeKind::successor ? EdgeKind::predecessor : EdgeKind::successor;
}

bool is_longitudinal(EdgeKind kind)
{
  return kind == EdgeKind::successor || kind == EdgeKind::predecessor;
}

bool blocks(LightState state, const PruneOptions & options)
{
  return state == LightState::red || (options.yellow_is_red && state == LightState::yellow);
}

}  // namespace

LaneGraph LaneGraph::build(
  std::vector<LaneSegment> segments, std::vector<LaneEdge> edges, std::vector<TrafficLight> lights)
{
  LaneGraph g;
  for (auto & seg : segments) {
    validate_segment(seg);
    const int id = seg.id;
    if (!g.segments_.emplace(id, std::move(seg)).second) {
      throw Error(ErrorCode::duplicate_id, "segment id " + std::to_string(id));
    }
  }

  std::set<int> light_ids;
  std::map<int, int> governing;
  for (auto & light : lights) {
    if (!light_ids.insert(light.id).second) {
      throw Error(ErrorCode::duplicate_id, "light id " + std::to_string(light.id));
    }
    std::sort(light.governed_segments.begin(), light.governed_segments.end());
    light.governed_segments.erase(
      std::unique(light.governed_segments.begin(), light.governed_segments.end()),
      light.governed_segments.end());
    for (int sid : light.governed_segments) {
      if (!g.contains(sid)) {
        throw Error(ErrorCode::invalid_light, "light governs unknown segment " + std::to_string(sid));
      }
      if (!governing.emplace(sid, light.id).second) {
        throw Error(
          ErrorCode::invalid_light, "segment " + std::to_string(sid) + " governed by two lights");
      }
    }
  }
  for (auto & [id, seg] : g.segments_) {
    const auto it = governing.find(id);
    if (seg.light_control && (it == governing.end() || it->second != *seg.light_control)) {
      throw Error(
        ErrorCode::invalid_light,
        "segment " + std::to_string(id) + " references a light that does not govern it");
    }
    if (it != governing.end()) {
      seg.light_control = it->second;
    }
  }
  std::sort(lights.begin(), lights.end(), [](const auto & a, const auto & b) { return a.id < b.id; });
  g.lights_ = std::move(lights);

  std::set<LaneEdge> edge_set;
  for (const auto & e : edges) {
    if (!g.contains(e.src) || !g.contains(e.dst)) {
      throw Error(
        ErrorCode::dangling_edge,
        "edge " + std::to_string(e.src) + "->" + std::to_string(e.dst) + " has unknown endpoint");
    }
    if (!is_longitudinal(e.kind) &&
        !longitudinal_overlap(g.segments_.at(e.src), g.segments_.at(e.dst))) {
      throw Error(
        ErrorCode::non_overlapping_adjacency,
        "adjacency " + std::to_string(e.src) + "->" + std::to_string(e.dst));
    }
    edge_set.insert(e);
    if (is_longitudinal(e.kind)) {
      edge_set.insert(LaneEdge{e.dst, e.src, mirror_kind(e.kind)});
    }
  }
  g.edges_.assign(edge_set.begin(), edge_set.end());
  std::sort(g.edges_.begin(), g.edges_.end(), [](const LaneEdge & a, const LaneEdge & b) {
    return std::tie(a.src, a.kind, a.dst) < std::tie(b.src, b.kind, b.dst);
  });
  for (std::size_t i = 0; i < g.edges_.size();) {
    std::size_t j = i;
    while (j < g.edges_.size() && g.edges_[j].src == g.edges_[i].src) {
      ++j;
    }
    g.outgoing_ranges_[g.edges_[i].src] = {i, j};
    i = j;
  }
  return g;
}

const LaneSegment & LaneGraph::segment(int id) const
{
  const auto it = segments_.find(id);
  if (it == segments_.end()) {
    throw Error(ErrorCode::unknown_segment, "segment " + std::to_string(id));
  }
  return it->second;
}

std::span<const LaneEdge> LaneGraph::outgoing(int id) const
{
  const auto it = outgoing_ranges_.find(id);
  if (it == outgoing_ranges_.end()) {
    return {};
  }
  return std::span<const LaneEdge>(edges_).subspan(
    it->second.first, it->second.second - it->second.first);
}

std::vector<int> LaneGraph::successors(int id) const
{
  std::vector<int> out;
  for (const auto & e : outgoing(id)) {
    if (e.kind == EdgeKind::successor) {
      out.push_back(e.dst);
    }
  }
  return out;
}

std::optional<LightState> LaneGraph::light_state(int segment_id) const
{
  const auto & seg = segment(segment_id);
  if (!seg.light_control) {
    return std::nullopt;
  }
  for (const auto & light : lights_) {
    if (light.id == *seg.light_control) {
      return light.state;
    }
  }
  return std::nullopt;
}

std::vector<int> LaneGraph::segment_ids() const
{
  std::vector<int> ids;
  ids.reserve(segments_.size());
  for (const auto & [id, seg] : segments_) {
    ids.push_back(id);
  }
  return ids;
}

LaneGraph prune_illegal_edges(const LaneGraph & graph, const PruneOptions & options)
{
  auto red = [&](int sid) {
    const auto state = graph.light_state(sid);
    return state && blocks(*state, options);
  };
  std::vector<LaneEdge> kept;
  for (const auto & e : graph.edges()) {
    const auto & src = graph.segment(e.src);
    switch (e.kind) {
      case EdgeKind::left_adjacent:
        if (src.left_boundary_type != BoundaryType::dashed) {
          continue;
        }
        break;
      case EdgeKind::right_adjacent:
        if (src.right_boundary_type != BoundaryType::dashed) {
          continue;
        }
        break;
      case EdgeKind::successor:
        if (red(e.dst)) {
          continue;
        }
        break;
      case EdgeKind::predecessor:
        if (red(e.src)) {
          continue;
        }
        break;
    }
    kept.push_back(e);
  }
  std::vector<LaneSegment> segments;
  for (const auto & [id, seg] : graph.segments()) {
    segments.push_back(seg);
  }
  return LaneGraph::build(std::move(segments), std::move(kept), graph.lights());
}

std::vector<int> associate_lanes(
  const LaneGraph & graph, const OrientedBox & box, double fallback_radius)
{
  const Polygon box_poly = box.polygon();
  std::vector<int> hits;
  int nearest = -1;
  double nearest_dist = std::numeric_limits<double>::infinity();
  for (const auto & [id, seg] : graph.segments()) {
    if (polygons_intersect(seg.polygon, box_poly)) {
      hits.push_back(id);
      continue;
    }
    const double d = point_polyline_distance(box.center, seg.centerline);
    if (d < nearest_dist) {
      nearest_dist = d;
      nearest = id;
    }
  }
  if (hits.empty() && nearest >= 0 && nearest_dist <= fallback_radius) {
    hits.push_back(nearest);
  }
  return hits;
}

std::optional<int> primary_lane(const LaneGraph & graph, const OrientedBox & box)
{
  std::optional<int> best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (int id : associate_lanes(graph, box)) {
    const auto & line = graph.segment(id).centerline;
    const auto proj = project_onto_polyline(line, box.center);
    const double misalignment =
      std::abs(normalize_angle(heading_at_arc_length(line, proj.arc_length) - box.heading));
    // Opposite-direction lanes only win when nothing aligned overlaps.
    const double d = proj.distance + (misalignment > 0.5 * std::numbers::pi ? 1e3 : 0.0);
    if (d < best_dist) {
      best_dist = d;
      best = id;
    }
  }
  return best;
}

std::vector<int> reachable_lanes(
  const LaneGraph & pruned_graph, std::span<const int> seed_segments, double max_arc_length)
{
  std::map<int, double> best;
  std::vector<std::pair<int, double>> stack;
  for (int seed : seed_segments) {
    if (!pruned_graph.contains(seed)) {
      throw Error(ErrorCode::unknown_seed, "seed " + std::to_string(seed));
    }
    best[seed] = 0.0;
    stack.emplace_back(seed, 0.0);
  }
  while (!stack.empty()) {
    const auto [id, cost] = stack.back();
    stack.pop_back();
    if (cost > best[id]) {
      continue;
    }
    const double length = pruned_graph.segment(id).length();
    for (const auto & e : pruned_graph.outgoing(id)) {
      double next = cost;
      if (e.kind == EdgeKind::predecessor) {
        continue;
      }
      if (e.kind == EdgeKind::successor) {
        next += length;
      }
      if (next > max_arc_length) {
        continue;
      }
      const auto it = best.find(e.dst);
      if (it == best.end() || next < it->second) {
        best[e.dst] = next;
        stack.emplace_back(e.dst, next);
      }
    }
  }
  std::vector<int> out;
  for (const auto & [id, cost] : best) {
    out.push_back(id);
  }
  return out;
}

double route_horizon(double speed)
{
  return std::max(kMinRouteHorizon, speed * kPredictionHorizonSeconds);
}

std::vector<int> compute_route(
  const LaneGraph & graph, int sdv_segment, int goal_segment, double horizon_distance)
{
  graph.segment(sdv_segment);
  graph.segment(goal_segment);
  if (sdv_segment == goal_segment) {
    return {sdv_segment};
  }

  // Forward costs from the SDV; the goal terminates paths.
  std::map<int, double> forward;
  std::set<int> reached{sdv_segment};
  {
    std::vector<std::pair<int, double>> stack{{sdv_segment, 0.0}};
    forward[sdv_segment] = 0.0;
    while (!stack.empty()) {
      const auto [id, cost] = stack.back();
      stack.pop_back();
      if (cost > forward[id] || id == goal_segment) {
        continue;
      }
      const double length = graph.segment(id).length();
      for (const auto & e : graph.outgoing(id)) {
        if (e.kind == EdgeKind::predecessor || e.dst == sdv_segment) {
          continue;
        }
        reached.insert(e.dst);
        const double next = cost + (e.kind == EdgeKind::successor ? length : 0.0);
        const auto it = forward.find(e.dst);
        if (it == forward.end() || next < it->second) {
          forward[e.dst] = next;
          stack.emplace_back(e.dst, next);
        }
      }
    }
  }
  if (!reached.count(goal_segment)) {
    throw Error(
      ErrorCode::no_route,
      "segment " + std::to_string(goal_segment) + " unreachable from " +
        std::to_string(sdv_segment));
  }

  // Segments that reach the goal without passing back through the SDV segment.
  std::map<int, std::vector<int>> incoming;
  for (const auto & e : graph.edges()) {
    if (e.kind != EdgeKind::predecessor) {
      incoming[e.dst].push_back(e.src);
    }
  }
  std::set<int> backward{goal_segment};
  std::vector<int> frontier{goal_segment};
  while (!frontier.empty()) {
    const int id = frontier.back();
    frontier.pop_back();
    for (int src : incoming[id]) {
      if (src == sdv_segment || !backward.insert(src).second) {
        continue;
      }
      frontier.push_back(src);
    }
  }

  std::vector<int> route{sdv_segment};
  for (const auto & [id, cost] : forward) {
    if (id != sdv_segment && cost <= horizon_distance && backward.count(id)) {
      route.push_back(id);
    }
  }
  std::sort(route.begin(), route.end());
  return route;
}

namespace
{

const char * boundary_name(BoundaryType t)
{
  switch (t) {
    case BoundaryType::dashed: return "dashed";
    case BoundaryType::solid: return "solid";
    case BoundaryType::double_solid_yellow: return "double_solid_yellow";
  }
  return "dashed";
}

const char * edge_name(EdgeKind k)
{
  switch (k) {
    case EdgeKind::successor: return "successor";
    case EdgeKind::predecessor: return "predecessor";
    case EdgeKind::left_adjacent: return "left_adjacent";
    case EdgeKind::right_adjacent: return "right_adjacent";
  }
  return "successor";
}

const char * light_name(LightState s)
{
  switch (s) {
    case LightState::green: return "green";
    case LightState::yellow: return "yellow";
    case LightState::red: return "red";
  }
  return "green";
}

BoundaryType parse_boundary(const std::string & s)
{
  if (s == "dashed") return BoundaryType::dashed;
  if (s == "solid") return BoundaryType::solid;
  if (s == "double_solid_yellow") return BoundaryType::double_solid_yellow;
  throw Error(ErrorCode::parse_error, "boundary type '" + s + "'");
}

EdgeKind parse_edge(const std::string & s)
{
  if (s == "successor") return EdgeKind::successor;
  if (s == "predecessor") return EdgeKind::predecessor;
  if (s == "left_adjacent") return EdgeKind::left_adjacent;
  if (s == "right_adjacent") return EdgeKind::right_adjacent;
  throw Error(ErrorCode::parse_error, "edge kind '" + s + "'");
}

LightState parse_light(const std::string & s)
{
  if (s == "green") return LightState::green;
  if (s == "yellow") return LightState::yellow;
  if (s == "red") return LightState::red;
  throw Error(ErrorCode::parse_error, "light state '" + s + "'");
}

nlohmann::json points_to_json(const std::vector<Vec2> & pts)
{
  auto arr = nlohmann::json::array();
  for (const auto & p : pts) {
    arr.push_back({p.x, p.y});
  }
  return arr;
}

std::vector<Vec2> points_from_json(const nlohmann::json & j)
{
  std::vector<Vec2> pts;
  for (const auto & p : j) {
    pts.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  }
  return pts;
}

}  // namespace

nlohmann::json to_json(const LaneGraph & graph)
{
  nlohmann::json j;
  j["segments"] = nlohmann::json::array();
  for (const auto & [id, seg] : graph.segments()) {
    nlohmann::json s;
    s["id"] = seg.id;
    s["centerline"] = points_to_json(seg.centerline);
    s["left_boundary_type"] = boundary_name(seg.left_boundary_type);
    s["right_boundary_type"] = boundary_name(seg.right_boundary_type);
    s["polygon"] = points_to_json(seg.polygon);
    s["light_control"] = seg.light_control ? nlohmann::json(*seg.light_control) : nlohmann::json();
    j["segments"].push_back(std::move(s));
  }
  j["edges"] = nlohmann::json::array();
  for (const auto & e : graph.edges()) {
    j["edges"].push_back({{"src", e.src}, {"dst", e.dst}, {"kind", edge_name(e.kind)}});
  }
  j["lights"] = nlohmann::json::array();
  for (const auto & l : graph.lights()) {
    j["lights"].push_back(
      {{"id", l.id}, {"state", light_name(l.state)}, {"governed_segments", l.governed_segments}});
  }
  return j;
}

LaneGraph lane_graph_from_json(const nlohmann::json & j)
{
  std::vector<LaneSegment> segments;
  std::vector<LaneEdge> edges;
  std::vector<TrafficLight> lights;
  try {
    for (const auto & s : j.at("segments")) {
      LaneSegment seg;
      seg.id = s.at("id").get<int>();
      seg.centerline = points_from_json(s.at("centerline"));
      seg.left_boundary_type = parse_boundary(s.at("left_boundary_type").get<std::string>());
      seg.right_boundary_type = parse_boundary(s.at("right_boundary_type").get<std::string>());
      seg.polygon = points_from_json(s.at("polygon"));
      if (s.contains("light_control") && !s.at("light_control").is_null()) {
        seg.light_control = s.at("light_control").get<int>();
      }
      segments.push_back(std::move(seg));
    }
    for (const auto & e : j.at("edges")) {
      edges.push_back(
        {e.at("src").get<int>(), e.at("dst").get<int>(),
         parse_edge(e.at("kind").get<std::string>())});
    }
    for (const auto & l : j.at("lights")) {
      lights.push_back(
        {l.at("id").get<int>(), parse_light(l.at("state").get<std::string>()),
         l.at("governed_segments").get<std::vector<int>>()});
    }
  } catch (const nlohmann::json::exception & ex) {
    throw Error(ErrorCode::parse_error, ex.what());
  }
  return LaneGraph::build(std::move(segments), std::move(edges), std::move(lights));
}

}  // namespace priorforecast
