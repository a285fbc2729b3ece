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

#include "priorforecast/scene_gen.hpp"

#include "priorforecast/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace priorforecast
{

namespace
{

constexpr double kPi = std::numbers::pi;
constexpr double kDenseSpacing = 2.0;
constexpr double kSubstep = 0.1;
constexpr int kSubstepsPerStep = 5;
constexpr int kTotalSteps = kPastSteps + kFutureSteps - 1;
constexpr double kAccelMin = -4.0;
constexpr double kAccelMax = 2.0;
constexpr double kComfortDecel = 3.0;
constexpr double kLateralAccelMax = 3.0;
constexpr double kHeadingNoise = 2.0 * kPi / 180.0;
constexpr double kSpeedNoise = 0.3;
constexpr double kMaxPathDeviation = 1.5;
constexpr double kLaneChangeProbability = 0.15;
constexpr double kIntersectionHalfSize = 8.0;
constexpr int kSpawnAttempts = 100;
// A red runner counts once its center is this far past the stop line: more than a raster
// cell diagonal, so the endpoint cannot fall in a cell of the approach lane.
constexpr double kRedCommitDistance = 3.0;

Vec2 right_of(const Vec2 & u) { return {u.y, -u.x}; }

double deg(double d) { return d * kPi / 180.0; }

struct WorldBuilder
{
  std::vector<LaneSegment> segments;
  std::vector<LaneEdge> edges;
  std::vector<TrafficLight> lights;

  int add(Polyline centerline, BoundaryType left, BoundaryType right)
  {
    LaneSegment s;
    s.id = static_cast<int>(segments.size());
    s.polygon = lane_polygon(centerline, 0.5 * kLaneWidth);
    s.centerline = std::move(centerline);
    s.left_boundary_type = left;
    s.right_boundary_type = right;
    segments.push_back(std::move(s));
    return segments.back().id;
  }

  void link(int a, int b) { edges.push_back({a, b, EdgeKind::successor}); }

  /// `left` lies to the left of `right` when both are driven in the same direction.
  void side_by_side(int right, int left)
  {
    edges.push_back({right, left, EdgeKind::left_adjacent});
    edges.push_back({left, right, EdgeKind::right_adjacent});
  }

  LaneGraph finish() { return LaneGraph::build(segments, edges, lights); }
};

/// Index ranges [first, last] cutting a dense polyline into chunks of about `length` metres.
std::vector<std::pair<std::size_t, std::size_t>> chunk_ranges(std::size_t n_points, double length)
{
  const auto step = std::max<std::size_t>(1, std::lround(length / kDenseSpacing));
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  for (std::size_t i = 0; i + 1 < n_points; i += step) {
    ranges.emplace_back(i, std::min(i + step, n_points - 1));
  }
  // Fold a stub shorter than half a chunk into its predecessor.
  if (ranges.size() > 1 && ranges.back().second - ranges.back().first < step / 2) {
    ranges[ranges.size() - 2].second = ranges.back().second;
    ranges.pop_back();
  }
  return ranges;
}

Polyline slice(const Polyline & line, std::size_t first, std::size_t last)
{
  return Polyline(line.begin() + static_cast<std::ptrdiff_t>(first),
                  line.begin() + static_cast<std::ptrdiff_t>(last) + 1);
}

/// Straight line then arc then straight line, sampled at the dense spacing.
Polyline dense_path(
  Vec2 start, double heading, double lead, double arc_length, double turn, double tail)
{
  Polyline pts{start};
  Vec2 p = start;
  double h = heading;
  auto advance = [&](double len, double curvature) {
    const int n = std::max(1, static_cast<int>(std::ceil(len / kDenseSpacing)));
    const double ds = len / n;
    for (int i = 0; i < n; ++i) {
      if (curvature == 0.0) {
        p += unit_from_heading(h) * ds;
      } else {
        const double dh = curvature * ds;
        // Exact chord of the arc.
        p += unit_from_heading(h + 0.5 * dh) * (2.0 * std::sin(0.5 * dh) / curvature);
        h += dh;
      }
      pts.push_back(p);
    }
  };
  if (lead > 0.0) {
    advance(lead, 0.0);
  }
  if (arc_length > 0.0) {
    advance(arc_length, turn / arc_length);
  }
  if (tail > 0.0) {
    advance(tail, 0.0);
  }
  return pts;
}

/// Parallel same-direction lanes offset to the left of `reference`, plus optional
/// opposite-direction lanes beyond a double yellow divider.
LaneGraph build_road(const WorldSpec & spec, const Polyline & reference)
{
  WorldBuilder b;
  const auto ranges = chunk_ranges(reference.size(), spec.segment_length);
  const int n = spec.lanes;
  const int m = spec.opposing_lanes;
  std::vector<std::vector<int>> ids(n + m);
  for (int lane = 0; lane < n + m; ++lane) {
    const Polyline line = offset_polyline(reference, lane * kLaneWidth);
    const bool opposing = lane >= n;
    BoundaryType left{};
    BoundaryType right{};
    if (!opposing) {
      right = lane == 0 ? BoundaryType::solid : spec.divider;
      left = lane == n - 1 ? (m > 0 ? BoundaryType::double_solid_yellow : BoundaryType::solid)
                           : spec.divider;
    } else {
      const int j = lane - n;
      left = j == 0 ? BoundaryType::double_solid_yellow : BoundaryType::dashed;
      right = j == m - 1 ? BoundaryType::solid : BoundaryType::dashed;
    }
    for (const auto & [first, last] : ranges) {
      Polyline chunk = slice(line, first, last);
      if (opposing) {
        std::reverse(chunk.begin(), chunk.end());
      }
      ids[lane].push_back(b.add(std::move(chunk), left, right));
    }
  }
  const std::size_t chunks = ranges.size();
  for (int lane = 0; lane < n + m; ++lane) {
    for (std::size_t k = 0; k + 1 < chunks; ++k) {
      if (lane < n) {
        b.link(ids[lane][k], ids[lane][k + 1]);
      } else {
        b.link(ids[lane][k + 1], ids[lane][k]);
      }
    }
  }
  for (std::size_t k = 0; k < chunks; ++k) {
    for (int lane = 0; lane + 1 < n; ++lane) {
      b.side_by_side(ids[lane][k], ids[lane + 1][k]);
    }
    for (int j = 0; j + 1 < m; ++j) {
      // Opposing lane j + 1 is further from the median, i.e. on the right of lane j.
      b.side_by_side(ids[n + j + 1][k], ids[n + j][k]);
    }
    if (m > 0) {
      b.edges.push_back({ids[n - 1][k], ids[n][k], EdgeKind::left_adjacent});
      b.edges.push_back({ids[n][k], ids[n - 1][k], EdgeKind::left_adjacent});
    }
  }
  return b.finish();
}

LaneGraph build_fork(const WorldSpec & spec)
{
  WorldBuilder b;
  const auto solid = BoundaryType::solid;
  const Polyline in_line = dense_path({0.0, 0.0}, 0.0, 60.0, 0.0, 0.0, 0.0);
  std::vector<int> in_ids;
  for (const auto & [first, last] : chunk_ranges(in_line.size(), spec.segment_length)) {
    in_ids.push_back(b.add(slice(in_line, first, last), solid, solid));
  }
  for (std::size_t k = 0; k + 1 < in_ids.size(); ++k) {
    b.link(in_ids[k], in_ids[k + 1]);
  }
  const double half = 0.5 * deg(spec.fork_angle_deg);
  for (double turn : {half, -half}) {
    const Polyline line = dense_path(in_line.back(), 0.0, 0.0, 30.0, turn, 80.0);
    int prev = in_ids.back();
    for (const auto & [first, last] : chunk_ranges(line.size(), spec.segment_length)) {
      const int id = b.add(slice(line, first, last), solid, solid);
      b.link(prev, id);
      prev = id;
    }
  }
  return b.finish();
}

Polyline quadratic_bezier(const Vec2 & p0, const Vec2 & c, const Vec2 & p2, int n)
{
  Polyline pts;
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / (n - 1);
    pts.push_back(p0 * ((1 - t) * (1 - t)) + c * (2 * (1 - t) * t) + p2 * (t * t));
  }
  return pts;
}

LaneGraph build_intersection(const WorldSpec & spec, Rng & rng)
{
  WorldBuilder b;
  const double h = kIntersectionHalfSize;
  const double half_lane = 0.5 * kLaneWidth;
  const std::array<Vec2, 4> arms{{{1, 0}, {0, 1}, {-1, 0}, {0, -1}}};
  std::array<std::vector<int>, 4> incoming;
  std::array<std::vector<int>, 4> outgoing;
  const auto yellow = BoundaryType::double_solid_yellow;
  const auto solid = BoundaryType::solid;
  for (int a = 0; a < 4; ++a) {
    const Vec2 u = arms[a];
    const Vec2 r = right_of(u);
    const Polyline out_line = dense_path(u * h + r * half_lane, std::atan2(u.y, u.x),
                                         spec.arm_length, 0.0, 0.0, 0.0);
    const Polyline in_line = dense_path(u * (h + spec.arm_length) - r * half_lane,
                                        std::atan2(-u.y, -u.x), spec.arm_length, 0.0, 0.0, 0.0);
    const auto ranges = chunk_ranges(in_line.size(), spec.segment_length);
    for (const auto & [first, last] : ranges) {
      incoming[a].push_back(b.add(slice(in_line, first, last), yellow, solid));
    }
    for (const auto & [first, last] : ranges) {
      outgoing[a].push_back(b.add(slice(out_line, first, last), yellow, solid));
    }
    const std::size_t chunks = ranges.size();
    for (std::size_t k = 0; k + 1 < chunks; ++k) {
      b.link(incoming[a][k], incoming[a][k + 1]);
      b.link(outgoing[a][k], outgoing[a][k + 1]);
    }
    // The in and out lanes of an arm face each other across the median.
    for (std::size_t k = 0; k < chunks; ++k) {
      b.edges.push_back({incoming[a][k], outgoing[a][chunks - 1 - k], EdgeKind::left_adjacent});
      b.edges.push_back({outgoing[a][chunks - 1 - k], incoming[a][k], EdgeKind::left_adjacent});
    }
  }
  // One axis faces red; the other is green, sometimes yellow.
  const int red_axis = rng.bernoulli(0.5) ? 1 : 0;
  const LightState open = rng.bernoulli(spec.yellow_probability) ? LightState::yellow
                                                                  : LightState::green;
  for (int a = 0; a < 4; ++a) {
    TrafficLight light;
    light.id = a;
    light.state = (a % 2 == red_axis) ? LightState::red : open;
    const Vec2 u = arms[a];
    const Vec2 entry = u * h - right_of(u) * half_lane;
    const Vec2 entry_dir = u * -1.0;
    for (int turn : {0, 1, 3}) {
      // turn 0 = straight, 1 = left, 3 = right (arm index offsets).
      const int exit_arm = (a + 2 + turn) % 4;
      const Vec2 v = arms[exit_arm];
      const Vec2 exit = v * h + right_of(v) * half_lane;
      Polyline line;
      if (turn == 0) {
        line = quadratic_bezier(entry, (entry + exit) * 0.5, exit, 12);
      } else {
        // Intersection of the entry and exit tangent lines.
        const double t = cross(exit - entry, v) / cross(entry_dir, v);
        line = quadratic_bezier(entry, entry + entry_dir * t, exit, 12);
      }
      const int id = b.add(std::move(line), BoundaryType::dashed, BoundaryType::dashed);
      b.link(incoming[a].back(), id);
      b.link(id, outgoing[exit_arm].front());
      light.governed_segments.push_back(id);
    }
    b.lights.push_back(light);
  }
  return b.finish();
}

void check_spec(const WorldSpec & spec)
{
  auto fail = [](const std::string & what) { throw Error(ErrorCode::invalid_spec, what); };
  if (spec.lanes < 1 || spec.opposing_lanes < 0) {
    fail("lane counts");
  }
  if (!(spec.segment_length >= 2.0 * kDenseSpacing)) {
    fail("segment_length too small");
  }
  if (!(spec.length >= spec.segment_length)) {
    fail("road shorter than one segment");
  }
  if (spec.kind == WorldKind::curved_road &&
      !(spec.radius > spec.lanes * kLaneWidth && std::abs(spec.sweep_deg) < 180.0)) {
    fail("curve radius or sweep");
  }
  if (spec.kind == WorldKind::fork && !(spec.fork_angle_deg > 0.0 && spec.fork_angle_deg < 170.0)) {
    fail("fork angle");
  }
  if (spec.kind == WorldKind::four_way_intersection && !(spec.arm_length >= spec.segment_length)) {
    fail("arm length");
  }
  if (!(spec.yellow_probability >= 0.0 && spec.yellow_probability <= 1.0)) {
    fail("yellow_probability");
  }
}

// ---------------------------------------------------------------------------
// Actor simulation

struct Path
{
  Polyline points;
  /// Segment sequence, for choosing lane changes.
  std::vector<int> segments;
  std::vector<double> segment_start;
  /// Arc length at which a compliant actor must be stopped (centre of the box).
  std::optional<double> stop_arc;
  /// Arc length of the stop line the actor intends to run.
  std::optional<double> red_line_arc;
  /// (arc, curvature) at interior vertices.
  std::vector<std::pair<double, double>> curvature;

  double length() const { return polyline_length(points); }

  int segment_at(double s) const
  {
    int seg = segments.front();
    for (std::size_t i = 0; i < segments.size(); ++i) {
      if (segment_start[i] <= s) {
        seg = segments[i];
      }
    }
    return seg;
  }

  void finalize()
  {
    curvature.clear();
    double s = 0.0;
    for (std::size_t i = 1; i + 1 < points.size(); ++i) {
      const Vec2 a = points[i] - points[i - 1];
      const Vec2 c = points[i + 1] - points[i];
      s += norm(a);
      const double turn = std::abs(std::atan2(cross(a, c), dot(a, c)));
      const double span = 0.5 * (norm(a) + norm(c));
      if (span > 1e-9) {
        curvature.emplace_back(s, turn / span);
      }
    }
  }
};

void append_points(Polyline & dst, const Polyline & src, std::size_t from = 0)
{
  for (std::size_t i = from; i < src.size(); ++i) {
    if (dst.empty() || distance(dst.back(), src[i]) > 1e-6) {
      dst.push_back(src[i]);
    }
  }
}

/// Centerline of `seg` from arc `start` to its end.
Polyline tail_of(const LaneSegment & seg, double start)
{
  Polyline out{point_at_arc_length(seg.centerline, start)};
  double s = 0.0;
  for (std::size_t i = 1; i < seg.centerline.size(); ++i) {
    s += distance(seg.centerline[i - 1], seg.centerline[i]);
    if (s > start + 1e-6) {
      out.push_back(seg.centerline[i]);
    }
  }
  return out;
}

/**
 * Follows successors from (`segment`, `start`) until `min_length` metres are covered.
 * Compliant actors choose among legal successors and stop before a red light;
 * red runners choose a red-governed successor whenever one is offered.
 */
Path build_forward_path(
  const LaneGraph & world, const LaneGraph & pruned, int segment, double start,
  double min_length, bool run_red, double actor_length, Rng & rng)
{
  Path path;
  path.points = tail_of(world.segment(segment), start);
  path.segments.push_back(segment);
  path.segment_start.push_back(0.0);
  int current = segment;
  while (path.length() < min_length) {
    const double end_arc = path.length();
    std::vector<int> legal = pruned.successors(current);
    std::vector<int> red;
    for (int id : world.successors(current)) {
      if (world.light_state(id) == LightState::red) {
        red.push_back(id);
      }
    }
    int next = -1;
    if (run_red && !red.empty() && !path.red_line_arc) {
      next = red[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(red.size()) - 1))];
      path.red_line_arc = end_arc;
    } else if (!legal.empty()) {
      next = legal[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(legal.size()) - 1))];
    } else if (!red.empty()) {
      path.stop_arc = end_arc - 1.0 - 0.5 * actor_length;
      break;
    } else {
      break;
    }
    path.segments.push_back(next);
    path.segment_start.push_back(end_arc);
    append_points(path.points, world.segment(next).centerline);
    current = next;
  }
  path.finalize();
  return path;
}

double smoothstep(double u)
{
  u = std::clamp(u, 0.0, 1.0);
  return u * u * (3.0 - 2.0 * u);
}

/// Path blending from the current path at `s_now` into `target` over `merge` metres.
Path merge_paths(const Path & from, double s_now, const Path & target, double merge)
{
  Path out;
  for (double u = 0.0; u < merge; u += 1.0) {
    const double w = smoothstep(u / merge);
    out.points.push_back(point_at_arc_length(from.points, s_now + u) * (1.0 - w) +
                         point_at_arc_length(target.points, u) * w);
  }
  Polyline rest{point_at_arc_length(target.points, merge)};
  double s = 0.0;
  for (std::size_t i = 1; i < target.points.size(); ++i) {
    s += distance(target.points[i - 1], target.points[i]);
    if (s > merge + 1e-6) {
      rest.push_back(target.points[i]);
    }
  }
  append_points(out.points, rest);
  out.segments = target.segments;
  out.segment_start = target.segment_start;
  out.segments.insert(out.segments.begin(), from.segment_at(s_now));
  out.segment_start.insert(out.segment_start.begin(), -1.0);
  out.stop_arc = target.stop_arc;
  out.red_line_arc = target.red_line_arc;
  out.finalize();
  return out;
}

/// Highest speed allowing a comfortable stop at `limit` speed `gap` metres ahead.
double envelope(double limit, double gap)
{
  return std::sqrt(limit * limit + 2.0 * kComfortDecel * std::max(0.0, gap));
}

struct LaneSwitch
{
  int target{0};
  bool crosses_solid{false};
};

/// Same-direction neighbours of `seg`; solid crossings only when `solid` is set.
std::vector<int> neighbours(
  const LaneGraph & world, const LaneGraph & pruned, int seg, bool solid)
{
  const auto & src = world.segment(seg);
  const double heading = heading_at_arc_length(src.centerline, 0.5 * src.length());
  std::vector<int> out;
  for (const auto & e : world.outgoing(seg)) {
    if (e.kind != EdgeKind::left_adjacent && e.kind != EdgeKind::right_adjacent) {
      continue;
    }
    const auto & dst = world.segment(e.dst).centerline;
    const auto proj = project_onto_polyline(dst, point_at_arc_length(src.centerline, 0.5 * src.length()));
    if (std::abs(normalize_angle(heading_at_arc_length(dst, proj.arc_length) - heading)) > 0.5 * kPi) {
      continue;
    }
    bool legal = false;
    for (const auto & pe : pruned.outgoing(seg)) {
      legal = legal || (pe.dst == e.dst && pe.kind == e.kind);
    }
    if (legal != solid) {
      out.push_back(e.dst);
    }
  }
  return out;
}

Behavior turn_label(double heading_change)
{
  if (heading_change > deg(20.0)) {
    return Behavior::turn_left;
  }
  if (heading_change < -deg(20.0)) {
    return Behavior::turn_right;
  }
  return Behavior::lane_follow;
}

bool tracks_overlap(const ActorTrack & a, const ActorTrack & b)
{
  // Compare the 15 distinct poses of each track with inflated boxes.
  auto pose_at = [](const ActorTrack & t, int k) {
    if (k < kPastSteps) {
      return t.past[k];
    }
    const int f = k - kPastSteps + 1;
    return Pose{t.future_gt[f], t.future_heading[f]};
  };
  for (int k = 0; k < kTotalSteps; ++k) {
    const Pose pa = pose_at(a, k);
    const Pose pb = pose_at(b, k);
    if (distance(pa.position, pb.position) > 0.5 * (a.box.length + b.box.length) + 4.0) {
      continue;
    }
    const OrientedBox ba{pa.position, a.box.length + 1.0, a.box.width + 0.5, pa.heading};
    const OrientedBox bb{pb.position, b.box.length + 1.0, b.box.width + 0.5, pb.heading};
    if (boxes_overlap(ba, bb)) {
      return true;
    }
  }
  return false;
}

}  // namespace

LaneGraph generate_world(const WorldSpec & spec, Rng & rng)
{
  check_spec(spec);
  switch (spec.kind) {
    case WorldKind::straight_multilane:
      return build_road(spec, dense_path({0.0, 0.0}, 0.0, spec.length, 0.0, 0.0, 0.0));
    case WorldKind::curved_road: {
      const double sweep = deg(spec.sweep_deg);
      return build_road(
        spec, dense_path({0.0, 0.0}, 0.0, 40.0, spec.radius * std::abs(sweep), sweep, 60.0));
    }
    case WorldKind::fork:
      return build_fork(spec);
    case WorldKind::four_way_intersection:
      return build_intersection(spec, rng);
  }
  throw Error(ErrorCode::invalid_spec, "world kind");
}

std::optional<ActorTrack> simulate_actor(
  const LaneGraph & world, const ActorSpawn & spawn, Rng & rng, int id)
{
  const LaneGraph pruned = prune_illegal_edges(world);
  const double cruise = spawn.speed;
  const double needed = (cruise + 2.0) * 7.0 + 20.0;

  // Pick the rule to break, if any, before simulating.
  enum class Violation { none, solid_crossing, red_light };
  Violation violation = Violation::none;
  if (spawn.noncompliant) {
    const bool can_cross = !neighbours(world, pruned, spawn.segment, true).empty();
    Rng probe = rng;
    const Path red_probe = build_forward_path(
      world, pruned, spawn.segment, spawn.arc_length, needed, true, spawn.length, probe);
    const bool can_run = red_probe.red_line_arc.has_value();
    if (can_cross && can_run) {
      violation = rng.bernoulli(0.5) ? Violation::solid_crossing : Violation::red_light;
    } else if (can_cross) {
      violation = Violation::solid_crossing;
    } else if (can_run) {
      violation = Violation::red_light;
    } else {
      return std::nullopt;
    }
  }

  Path path = build_forward_path(
    world, pruned, spawn.segment, spawn.arc_length, needed, violation == Violation::red_light,
    spawn.length, rng);
  if (!path.stop_arc && path.length() < needed) {
    return std::nullopt;
  }

  // Lane change start time, measured from t = -2 s.
  std::optional<double> switch_time;
  bool switch_solid = false;
  if (violation == Violation::solid_crossing) {
    switch_time = 2.0 + rng.uniform(-1.0, 0.8);
    switch_solid = true;
  } else if (violation == Violation::none && rng.bernoulli(kLaneChangeProbability)) {
    switch_time = 2.0 + rng.uniform(-1.0, 0.8);
  }

  Pose pose{point_at_arc_length(path.points, 0.0), heading_at_arc_length(path.points, 0.0)};
  double v = cruise;
  double s = 0.0;
  std::optional<double> merge_length;
  std::optional<double> crossing_time;  // lane switch midpoint or stop line passage
  std::optional<double> line_contact_time;  // front bumper reaches the stop line
  std::array<Pose, kTotalSteps> poses{};
  std::array<double, kTotalSteps> speeds{};
  const int substeps = (kTotalSteps - 1) * kSubstepsPerStep;
  for (int k = 0; k <= substeps; ++k) {
    const double t = k * kSubstep;
    if (k % kSubstepsPerStep == 0) {
      const int step = k / kSubstepsPerStep;
      if (step > 0 && cruise > 0.0) {
        pose.heading = normalize_angle(pose.heading + rng.normal(0.0, kHeadingNoise));
        if (v > 0.5) {
          v = std::max(0.0, v + std::clamp(rng.normal(0.0, kSpeedNoise), -2.0 * kSpeedNoise,
                                           2.0 * kSpeedNoise));
        }
      }
      poses[step] = pose;
      speeds[step] = v;
    }
    if (k == substeps) {
      break;
    }
    if (switch_time && !merge_length && t >= *switch_time - 1e-9) {
      const auto targets = neighbours(world, pruned, path.segment_at(s), switch_solid);
      if (!targets.empty()) {
        const int target =
          targets[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(targets.size()) - 1))];
        const auto & tseg = world.segment(target);
        const double merge = std::max(15.0, 3.0 * v);
        const double remaining = needed - (cruise > 0 ? t * cruise : 0.0) + merge;
        const Path dest = build_forward_path(
          world, pruned, target, project_onto_polyline(tseg.centerline, pose.position).arc_length,
          remaining, false, spawn.length, rng);
        path = merge_paths(path, s, dest, merge);
        s = 0.0;
        merge_length = merge;
      } else if (switch_solid) {
        return std::nullopt;
      }
    }

    // Longitudinal control: cruise, curvature limit, stop line.
    double v_des = cruise;
    const double horizon = v * v / (2.0 * kComfortDecel) + 10.0;
    for (const auto & [arc, kappa] : path.curvature) {
      if (arc < s || arc > s + horizon || kappa < 1e-6) {
        continue;
      }
      v_des = std::min(v_des, envelope(std::sqrt(kLateralAccelMax / kappa), arc - s));
    }
    if (path.stop_arc) {
      // Aim short of the stop point to absorb the speed controller lag.
      v_des = std::min(v_des, envelope(0.0, *path.stop_arc - 2.0 - s));
    }
    const double accel = std::clamp((v_des - v) / 0.5, kAccelMin, kAccelMax);
    v = std::max(0.0, v + accel * kSubstep);

    // Lateral control: pure pursuit on the path.
    const double lookahead = std::max(5.0, v);
    const Vec2 target = point_at_arc_length(path.points, s + lookahead);
    const Vec2 local = pose.to_local(target);
    const double alpha = std::atan2(local.y, local.x);
    const double kappa = std::clamp(2.0 * std::sin(alpha) / lookahead, -0.3, 0.3);
    pose.heading = normalize_angle(pose.heading + v * kappa * kSubstep);
    pose.position += unit_from_heading(pose.heading) * (v * kSubstep);

    const auto proj = project_onto_polyline(path.points, pose.position);
    s = proj.arc_length;
    if (proj.distance > kMaxPathDeviation || s > path.length() - 1.0) {
      return std::nullopt;
    }
    if (path.stop_arc && s > *path.stop_arc + 0.5) {
      return std::nullopt;
    }
    if (!line_contact_time && path.red_line_arc && s + 0.5 * spawn.length >= *path.red_line_arc) {
      line_contact_time = t + kSubstep - 2.0;
    }
    if (!crossing_time) {
      if (merge_length && s >= 0.5 * *merge_length) {
        crossing_time = t + kSubstep - 2.0;
      } else if (path.red_line_arc && s >= *path.red_line_arc + kRedCommitDistance) {
        crossing_time = t + kSubstep - 2.0;
      }
    }
  }

  ActorTrack track;
  track.id = id;
  for (int i = 0; i < kPastSteps; ++i) {
    track.past[i] = poses[i];
  }
  for (int i = 0; i < kFutureSteps; ++i) {
    track.future_gt[i] = poses[kPastSteps - 1 + i].position;
    track.future_heading[i] = poses[kPastSteps - 1 + i].heading;
  }
  track.speed = speeds[kPastSteps - 1];
  track.box = {track.pose().position, spawn.length, spawn.width, track.pose().heading};

  const bool crossed_in_future = crossing_time && *crossing_time > 0.0 && *crossing_time <= 5.0;
  switch (violation) {
    case Violation::solid_crossing:
      if (!crossing_time || *crossing_time < 0.4 || *crossing_time > 2.5) {
        return std::nullopt;
      }
      track.behavior = Behavior::non_compliant;
      break;
    case Violation::red_light:
      // The box must still be short of the line when the observation ends.
      if (!crossed_in_future || !line_contact_time || *line_contact_time <= 0.0) {
        return std::nullopt;
      }
      for (int lane : associate_lanes(world, track.box)) {
        if (world.light_state(lane) == LightState::red) {
          return std::nullopt;
        }
      }
      track.behavior = Behavior::non_compliant;
      break;
    case Violation::none:
      if (path.stop_arc && speeds.back() < 1.0) {
        track.behavior = Behavior::stop_at_red;
      } else if (merge_length && crossed_in_future) {
        track.behavior = Behavior::lane_change;
      } else {
        track.behavior = turn_label(
          normalize_angle(track.future_heading.back() - track.future_heading.front()));
      }
      break;
  }
  return track;
}

std::vector<ActorTrack> simulate_actors(
  const LaneGraph & world, int n_actors, Rng & rng, double noncompliance_rate)
{
  if (!(noncompliance_rate >= 0.0 && noncompliance_rate <= 1.0)) {
    throw Error(ErrorCode::invalid_spec, "noncompliance_rate outside [0, 1]");
  }
  std::vector<int> spawnable;
  for (const auto & [id, seg] : world.segments()) {
    if (!seg.light_control) {
      spawnable.push_back(id);
    }
  }
  if (spawnable.empty() && n_actors > 0) {
    throw Error(ErrorCode::overcrowded, "no spawnable lane");
  }
  std::vector<ActorTrack> actors;
  for (int i = 0; i < n_actors; ++i) {
    bool noncompliant = rng.bernoulli(noncompliance_rate);
    bool placed = false;
    for (int attempt = 0; attempt < kSpawnAttempts && !placed; ++attempt) {
      // A rule to break may not exist anywhere on this map.
      if (attempt == kSpawnAttempts / 2) {
        noncompliant = false;
      }
      ActorSpawn spawn;
      spawn.segment = spawnable[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<int>(spawnable.size()) - 1))];
      spawn.arc_length = rng.uniform(0.0, world.segment(spawn.segment).length());
      spawn.speed = rng.uniform(3.0, 15.0);
      spawn.noncompliant = noncompliant;
      spawn.length = rng.uniform(4.2, 5.0);
      spawn.width = rng.uniform(1.8, 2.0);
      auto track = simulate_actor(world, spawn, rng, i);
      if (!track) {
        continue;
      }
      const bool clear = std::none_of(actors.begin(), actors.end(), [&](const ActorTrack & o) {
        return tracks_overlap(o, *track);
      });
      if (clear) {
        actors.push_back(*track);
        placed = true;
      }
    }
    if (!placed) {
      throw Error(
        ErrorCode::overcrowded, "could not place actor " + std::to_string(i) + " of " +
                                  std::to_string(n_actors));
    }
  }
  return actors;
}

WorldSpec sample_world_spec(WorldKind kind, Rng & rng)
{
  WorldSpec spec;
  spec.kind = kind;
  switch (kind) {
    case WorldKind::straight_multilane:
      spec.lanes = static_cast<int>(rng.uniform_int(2, 3));
      spec.opposing_lanes = rng.bernoulli(0.35) ? 1 : 0;
      spec.divider = rng.bernoulli(0.35) ? BoundaryType::solid : BoundaryType::dashed;
      spec.length = 200.0;
      break;
    case WorldKind::curved_road:
      spec.lanes = static_cast<int>(rng.uniform_int(1, 2));
      spec.divider = rng.bernoulli(0.35) ? BoundaryType::solid : BoundaryType::dashed;
      spec.radius = rng.uniform(60.0, 140.0);
      spec.sweep_deg = rng.uniform(45.0, 90.0) * (rng.bernoulli(0.5) ? 1.0 : -1.0);
      break;
    case WorldKind::fork:
      spec.lanes = 1;
      spec.fork_angle_deg = rng.uniform(35.0, 70.0);
      break;
    case WorldKind::four_way_intersection:
      spec.lanes = 1;
      spec.arm_length = 80.0;
      break;
  }
  return spec;
}

Scene generate_scene(WorldKind kind, const DatasetConfig & config, std::uint64_t scene_seed)
{
  constexpr int kSceneAttempts = 20;
  for (int attempt = 0; attempt < kSceneAttempts; ++attempt) {
    Rng world_rng = Rng::stream(scene_seed, 2 * attempt);
    Rng actor_rng = Rng::stream(scene_seed, 2 * attempt + 1);
    const WorldSpec spec = sample_world_spec(kind, world_rng);
    LaneGraph world = generate_world(spec, world_rng);
    const LaneGraph pruned = prune_illegal_edges(world);

    std::vector<ActorTrack> actors;
    for (int n = config.actors_per_scene + 1; n >= config.min_actors + 1 && actors.empty(); --n) {
      try {
        actors = simulate_actors(world, n, actor_rng, config.noncompliance_rate);
      } catch (const Error & e) {
        if (e.code() != ErrorCode::overcrowded) {
          throw;
        }
      }
    }
    if (actors.empty()) {
      continue;
    }

    struct Candidate
    {
      std::size_t index;
      int goal;
    };
    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < actors.size(); ++i) {
      const auto & a = actors[i];
      if (a.behavior == Behavior::non_compliant || a.behavior == Behavior::stop_at_red ||
          a.speed < 3.0) {
        continue;
      }
      const auto start = primary_lane(pruned, a.box);
      OrientedBox end_box = a.box;
      end_box.center = a.future_gt.back();
      end_box.heading = a.future_heading.back();
      const auto goal = primary_lane(pruned, end_box);
      if (!start || !goal) {
        continue;
      }
      try {
        compute_route(pruned, *start, *goal, route_horizon(a.speed));
        candidates.push_back({i, *goal});
      } catch (const Error &) {
      }
    }
    if (candidates.empty()) {
      continue;
    }
    const auto pick = candidates[static_cast<std::size_t>(
      actor_rng.uniform_int(0, static_cast<int>(candidates.size()) - 1))];

    Scene scene;
    scene.world = std::move(world);
    scene.sdv = actors[pick.index];
    scene.goal_segment = pick.goal;
    scene.seed = scene_seed;
    scene.kind = kind;
    int next_id = 0;
    for (std::size_t i = 0; i < actors.size(); ++i) {
      if (i != pick.index) {
        scene.actors.push_back(actors[i]);
        scene.actors.back().id = next_id++;
      }
    }
    scene.sdv.id = -1;
    validate_scene(scene);
    return scene;
  }
  throw Error(
    ErrorCode::overcrowded, "no valid scene for seed " + std::to_string(scene_seed));
}

std::vector<Scene> generate_dataset(
  const DatasetConfig & config, std::uint64_t seed, std::uint64_t first_index)
{
  std::vector<Scene> scenes;
  std::uint64_t index = first_index;
  for (const auto & [kind, count] : config.counts) {
    for (int i = 0; i < count; ++i) {
      scenes.push_back(generate_scene(kind, config, seed + index));
      ++index;
    }
  }
  return scenes;
}

}  // namespace priorforecast
