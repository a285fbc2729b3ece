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

#include "priorforecast/planner.hpp"

#include "priorforecast/error.hpp"
#include "priorforecast/features.hpp"
#include "priorforecast/metrics.hpp"
#include "priorforecast/parallel.hpp"
#include "priorforecast/priors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace priorforecast
{
namespace
{

constexpr double kPathLength = 120.0;
constexpr double kPathSpacing = 0.5;
constexpr double kOffsetDecay = 10.0;

double smoothstep(double u)
{
  u = std::clamp(u, 0.0, 1.0);
  return u * u * (3.0 - 2.0 * u);
}

/// Centerline of `lane` from the projection of `from`, continued through successors
/// (route members first, then lowest id).
Polyline lane_path(
  const LaneGraph & graph, int lane, const Vec2 & from, std::span<const int> route)
{
  const auto & first = graph.segment(lane).centerline;
  const double s0 = project_onto_polyline(first, from).arc_length;
  Polyline path{point_at_arc_length(first, s0)};
  double acc = 0.0;
  double along = 0.0;
  for (std::size_t i = 1; i < first.size(); ++i) {
    along += distance(first[i - 1], first[i]);
    if (along > s0) {
      acc += distance(path.back(), first[i]);
      path.push_back(first[i]);
    }
  }
  int current = lane;
  for (int hops = 0; acc < kPathLength && hops < 64; ++hops) {
    const auto next = graph.successors(current);
    if (next.empty()) {
      break;
    }
    int pick = next.front();
    for (int n : next) {
      if (std::find(route.begin(), route.end(), n) != route.end()) {
        pick = n;
        break;
      }
    }
    current = pick;
    const auto & c = graph.segment(current).centerline;
    for (std::size_t i = 1; i < c.size(); ++i) {
      acc += distance(path.back(), c[i]);
      path.push_back(c[i]);
    }
  }
  if (path.size() < 2) {
    const double h = heading_at_arc_length(first, s0);
    path.push_back(path.back() + unit_from_heading(h));
  }
  return path;
}

std::array<double, kFutureSteps> arc_profile(double v0, double accel)
{
  std::array<double, kFutureSteps> s{};
  constexpr int sub = 50;
  const double dt = kStepSeconds / sub;
  double v = std::clamp(v0, 0.0, kSpeedMax);
  double travelled = 0.0;
  for (int t = 1; t < kFutureSteps; ++t) {
    for (int k = 0; k < sub; ++k) {
      const double next = std::clamp(v + accel * dt, 0.0, kSpeedMax);
      travelled += 0.5 * (v + next) * dt;
      v = next;
    }
    s[t] = travelled;
  }
  return s;
}

OrientedBox sdv_box(const Pose & pose)
{
  return {pose.position, kSdvLength, kSdvWidth, pose.heading};
}

}  // namespace

std::vector<PlanCandidate> generate_candidates(
  const ActorTrack & sdv, std::span<const int> route, const LaneGraph & pruned)
{
  if (route.empty()) {
    throw Error(ErrorCode::no_route, "planner needs a nonempty route");
  }
  const auto current = primary_lane(pruned, sdv.box);
  if (!current) {
    throw Error(ErrorCode::no_route, "SDV is not on any lane");
  }
  std::vector<int> lanes{*current};
  for (const auto & e : pruned.outgoing(*current)) {
    if (
      (e.kind == EdgeKind::left_adjacent || e.kind == EdgeKind::right_adjacent) &&
      std::find(route.begin(), route.end(), e.dst) != route.end() &&
      std::find(lanes.begin(), lanes.end(), e.dst) == lanes.end()) {
      lanes.push_back(e.dst);
    }
  }

  const Pose start = sdv.pose();
  const Polyline base = lane_path(pruned, *current, start.position, route);
  const double merge = std::max(15.0, 3.0 * sdv.speed);
  std::vector<PlanCandidate> out;
  for (int lane : lanes) {
    const Polyline target =
      lane == *current ? base : lane_path(pruned, lane, start.position, route);
    // Dense path blending from the SDV position onto the target centerline.
    Polyline path;
    const Vec2 offset = start.position - base.front();
    for (double s = 0.0; s <= kPathLength + 1e-9; s += kPathSpacing) {
      const double w = lane == *current ? 0.0 : smoothstep(s / merge);
      Vec2 p = point_at_arc_length(base, s) * (1.0 - w) + point_at_arc_length(target, s) * w;
      p = p + offset * (1.0 - smoothstep(s / kOffsetDecay));
      path.push_back(p);
    }
    path.front() = start.position;
    for (double a : kPlanAccelerations) {
      PlanCandidate c;
      c.lane = lane;
      c.acceleration = a;
      const auto s = arc_profile(sdv.speed, a);
      for (int t = 0; t < kFutureSteps; ++t) {
        c.poses[t] = {point_at_arc_length(path, s[t]), heading_at_arc_length(path, s[t])};
      }
      out.push_back(c);
    }
  }
  return out;
}

PlanKinematics plan_kinematics(const PlanCandidate & plan)
{
  const auto & p = plan.poses;
  constexpr int n = kFutureSteps;
  std::array<Vec2, n - 1> vel{};
  for (int i = 0; i + 1 < n; ++i) {
    vel[i] = (p[i + 1].position - p[i].position) / kStepSeconds;
  }
  std::array<Vec2, n - 2> acc{};
  for (int i = 0; i + 2 < n; ++i) {
    acc[i] = (vel[i + 1] - vel[i]) / kStepSeconds;
  }
  PlanKinematics k;
  for (int i = 0; i + 3 < n; ++i) {
    k.jerk += norm((acc[i + 1] - acc[i]) / kStepSeconds);
  }
  k.jerk /= n - 3;
  // acc[i] is centred on pose i + 1.
  for (int i = 0; i + 2 < n; ++i) {
    const Vec2 normal = unit_from_heading(p[i + 1].heading + 0.5 * std::numbers::pi);
    k.lateral_accel += std::abs(dot(acc[i], normal));
  }
  k.lateral_accel /= n - 2;
  for (int i = 0; i + 1 < n; ++i) {
    k.progress += distance(p[i].position, p[i + 1].position);
  }
  return k;
}

std::vector<double> sample_headings(std::span<const Vec2> waypoints, double fallback)
{
  constexpr double min_step = 0.05;
  std::vector<double> h(waypoints.size(), fallback);
  double last = fallback;
  for (std::size_t t = 0; t < waypoints.size(); ++t) {
    Vec2 d{};
    if (t + 1 < waypoints.size()) {
      d = waypoints[t + 1] - waypoints[t];
    } else if (t > 0) {
      d = waypoints[t] - waypoints[t - 1];
    }
    if (norm(d) >= min_step) {
      last = std::atan2(d.y, d.x);
    }
    h[t] = last;
  }
  return h;
}

double collision_fraction(const PlanCandidate & plan, std::span<const ForecastSet> forecasts)
{
  if (forecasts.empty()) {
    return 0.0;
  }
  const std::size_t count = forecasts.front().samples.size();
  for (const auto & f : forecasts) {
    if (f.samples.size() != count || count == 0) {
      throw Error(
        ErrorCode::sample_count_mismatch, "every actor must contribute the same nonzero sample count");
    }
  }
  std::array<OrientedBox, kFutureSteps> own{};
  for (int t = 0; t < kFutureSteps; ++t) {
    own[t] = sdv_box(plan.poses[t]);
  }
  const double own_radius = 0.5 * std::hypot(kSdvLength, kSdvWidth);
  std::size_t hits = 0;
  for (const auto & f : forecasts) {
    const double reach = own_radius + 0.5 * std::hypot(f.length, f.width);
    for (const auto & s : f.samples) {
      if (s.size() != static_cast<std::size_t>(kFutureSteps)) {
        throw Error(ErrorCode::shape_mismatch, "forecast samples need 11 waypoints");
      }
      const auto headings = sample_headings(s, f.heading);
      for (int t = 0; t < kFutureSteps; ++t) {
        if (distance(s[t], own[t].center) > reach) {
          continue;
        }
        if (boxes_overlap(own[t], {s[t], f.length, f.width, headings[t]})) {
          ++hits;
          break;
        }
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(forecasts.size() * count);
}

double plan_cost(
  const PlanCandidate & plan, std::span<const ForecastSet> forecasts, const PlannerWeights & weights)
{
  const auto k = plan_kinematics(plan);
  return weights.collision * collision_fraction(plan, forecasts) + weights.jerk * k.jerk +
         weights.lateral * k.lateral_accel - weights.progress * k.progress;
}

std::size_t select_plan(std::span<const double> costs)
{
  if (costs.empty()) {
    throw Error(ErrorCode::shape_mismatch, "no candidates to select from");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < costs.size(); ++i) {
    if (costs[i] < costs[best]) {
      best = i;
    }
  }
  return best;
}

PlanMetrics planning_metrics(const PlanCandidate & plan, const Scene & scene)
{
  PlanMetrics m;
  for (const auto & a : scene.actors) {
    for (int t = 0; t < kFutureSteps && !m.collision; ++t) {
      const OrientedBox box{a.future_gt[t], a.box.length, a.box.width, a.future_heading[t]};
      m.collision = boxes_overlap(sdv_box(plan.poses[t]), box);
    }
  }
  m.l2_human = distance(plan.poses.back().position, scene.sdv.future_gt.back());
  const auto k = plan_kinematics(plan);
  m.lateral_accel = k.lateral_accel;
  m.jerk = k.jerk;
  m.progress = k.progress;
  return m;
}

ScenePlan plan_scene(
  const Scene & scene, std::span<const ForecastSet> forecasts, const PlannerWeights & weights)
{
  const LaneGraph pruned = prune_illegal_edges(scene.world);
  const auto route = scene_route(scene, pruned);
  const auto candidates = generate_candidates(scene.sdv, route, pruned);
  std::vector<double> costs;
  for (const auto & c : candidates) {
    costs.push_back(plan_cost(c, forecasts, weights));
  }
  ScenePlan out;
  out.candidates = candidates.size();
  out.selected = select_plan(costs);
  out.plan = candidates[out.selected];
  out.metrics = planning_metrics(out.plan, scene);
  return out;
}

std::vector<ForecastSet> ground_truth_forecasts(const Scene & scene, int copies)
{
  std::vector<ForecastSet> out;
  for (const auto & a : scene.actors) {
    ForecastSet f{a.box.length, a.box.width, a.pose().heading, {}};
    const std::vector<Vec2> gt(a.future_gt.begin(), a.future_gt.end());
    f.samples.assign(static_cast<std::size_t>(copies), gt);
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<ForecastSet> model_forecasts(
  const ModelParams & params, const Scene & scene, int samples, SamplerMode sampler, Rng & rng)
{
  std::vector<ForecastSet> out;
  for (std::size_t i = 0; i < scene.actors.size(); ++i) {
    const auto & a = scene.actors[i];
    Rng actor_rng = Rng::stream(rng.next_u64(), i);
    const auto dist = forward(params, extract_features(scene, a, scene.world));
    ForecastSet f{a.box.length, a.box.width, a.pose().heading, {}};
    const Pose frame = a.pose();
    for (auto & s : sample_trajectories(dist, samples, actor_rng, sampler)) {
      for (auto & p : s.waypoints) {
        p = frame.to_world(p);
      }
      f.samples.push_back(std::move(s.waypoints));
    }
    out.push_back(std::move(f));
  }
  return out;
}

PlanningReport aggregate_plans(std::vector<PlanMetrics> per_scene, int samples)
{
  PlanningReport r;
  r.samples = samples;
  r.scenes = static_cast<int>(per_scene.size());
  r.per_scene = std::move(per_scene);
  if (r.scenes == 0) {
    return r;
  }
  int collisions = 0;
  for (const auto & m : r.per_scene) {
    collisions += m.collision ? 1 : 0;
    r.l2_human_at_5s += m.l2_human;
    r.lateral_accel += m.lateral_accel;
    r.jerk += m.jerk;
    r.progress_at_5s += m.progress;
  }
  const double n = r.scenes;
  r.collision_rate = 100.0 * collisions / n;
  r.l2_human_at_5s /= n;
  r.lateral_accel /= n;
  r.jerk /= n;
  r.progress_at_5s /= n;
  return r;
}

PlanningReport plan_eval(
  const ModelParams & params, std::span<const Scene> scenes, int samples, SamplerMode sampler,
  std::uint64_t seed, const PlannerWeights & weights)
{
  if (scenes.empty()) {
    throw Error(ErrorCode::invalid_config, "planning evaluation needs at least one scene");
  }
  check_params(params);
  std::vector<PlanMetrics> per_scene(scenes.size());
  parallel_for(scenes.size(), [&](std::size_t i) {
    Rng rng = Rng::stream(seed, i);
    const auto forecasts = model_forecasts(params, scenes[i], samples, sampler, rng);
    per_scene[i] = plan_scene(scenes[i], forecasts, weights).metrics;
  });
  return aggregate_plans(std::move(per_scene), samples);
}

std::string planning_csv(std::span<const std::pair<std::string, PlanningReport>> rows)
{
  std::ostringstream os;
  os << "model,collision_rate,l2_human_at_5s,lateral_accel,jerk,progress_at_5s,scenes,samples\n";
  for (const auto & [name, r] : rows) {
    os << name << ',' << format_number(r.collision_rate) << ',' << format_number(r.l2_human_at_5s)
       << ',' << format_number(r.lateral_accel) << ',' << format_number(r.jerk) << ','
       << format_number(r.progress_at_5s) << ',' << r.scenes << ',' << r.samples << '\n';
  }
  return os.str();
}

}  // namespace priorforecast
