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

#include "priorforecast/metrics.hpp"

#include "priorforecast/error.hpp"
#include "priorforecast/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace priorforecast
{

std::string to_string(ActionClass c)
{
  switch (c) {
    case ActionClass::straight: return "straight";
    case ActionClass::left: return "left";
    case ActionClass::right: return "right";
    case ActionClass::stationary: return "stationary";
  }
  return "straight";
}

ActionClass classify_action(std::span<const Vec2> gt)
{
  if (gt.size() < 2 || distance(gt.front(), gt.back()) < kStationaryDisplacement) {
    return ActionClass::stationary;
  }
  // First and last segments long enough to carry a direction.
  constexpr double min_step = 1e-3;
  std::size_t first = 0;
  while (first + 1 < gt.size() && distance(gt[first], gt[first + 1]) < min_step) {
    ++first;
  }
  std::size_t last = gt.size() - 1;
  while (last > first + 1 && distance(gt[last - 1], gt[last]) < min_step) {
    --last;
  }
  const Vec2 a = gt[first + 1] - gt[first];
  const Vec2 b = gt[last] - gt[last - 1];
  const double change = std::atan2(cross(a, b), dot(a, b)) * 180.0 / std::numbers::pi;
  if (change > kStraightHeadingDeg) {
    return ActionClass::left;
  }
  if (change < -kStraightHeadingDeg) {
    return ActionClass::right;
  }
  return ActionClass::straight;
}

double average_displacement(std::span<const Vec2> sample, std::span<const Vec2> gt)
{
  double s = 0.0;
  for (std::size_t t = 0; t < gt.size(); ++t) {
    s += distance(sample[t], gt[t]);
  }
  return s / static_cast<double>(gt.size());
}

DisplacementMetrics displacement_metrics(
  std::span<const std::vector<Vec2>> samples, std::span<const Vec2> gt)
{
  if (samples.empty()) {
    throw Error(ErrorCode::shape_mismatch, "displacement metrics need at least one sample");
  }
  DisplacementMetrics m;
  m.min_ade = std::numeric_limits<double>::infinity();
  for (const auto & s : samples) {
    const double ade = average_displacement(s, gt);
    m.min_ade = std::min(m.min_ade, ade);
    m.mean_ade += ade;
  }
  m.mean_ade /= static_cast<double>(samples.size());
  return m;
}

std::optional<double> final_lane_error(
  std::span<const std::vector<Vec2>> samples, const raster::RasterMask & reach,
  std::span<const Vec2> gt)
{
  if (!reach.query(gt.back()) || samples.empty()) {
    return std::nullopt;
  }
  int outside = 0;
  for (const auto & s : samples) {
    outside += reach.query(s.back()) ? 0 : 1;
  }
  return 100.0 * outside / static_cast<double>(samples.size());
}

MetricsReport aggregate(std::vector<ActorMetrics> actors, int samples)
{
  MetricsReport report;
  report.samples = samples;
  report.actors = std::move(actors);
  std::map<ActionClass, double> lane_error_sum;
  ClassMetrics all;
  double all_lane_error = 0.0;
  for (const auto & a : report.actors) {
    auto & c = report.classes[a.action];
    c.count += 1;
    c.mean_ade += a.mean_ade;
    c.min_ade += a.min_ade;
    all.count += 1;
    all.mean_ade += a.mean_ade;
    all.min_ade += a.min_ade;
    if (a.final_lane_error) {
      c.lane_error_count += 1;
      lane_error_sum[a.action] += *a.final_lane_error;
      all.lane_error_count += 1;
      all_lane_error += *a.final_lane_error;
    }
  }
  for (auto & [cls, c] : report.classes) {
    c.mean_ade /= c.count;
    c.min_ade /= c.count;
    if (c.lane_error_count > 0) {
      c.final_lane_error = lane_error_sum[cls] / c.lane_error_count;
    }
  }
  if (all.count > 0) {
    all.mean_ade /= all.count;
    all.min_ade /= all.count;
    if (all.lane_error_count > 0) {
      all.final_lane_error = all_lane_error / all.lane_error_count;
    }
    report.overall = all;
  }
  return report;
}

ActorMetrics actor_metrics(const ActorExample & example, std::span<const std::vector<Vec2>> samples)
{
  ActorMetrics m;
  m.action = classify_action(example.gt);
  m.behavior = example.behavior;
  const auto d = displacement_metrics(samples, example.gt);
  m.min_ade = d.min_ade;
  m.mean_ade = d.mean_ade;
  m.final_lane_error = final_lane_error(samples, example.reach, example.gt);
  return m;
}

MetricsReport evaluate_examples(
  const ModelParams & params, std::span<const std::vector<ActorExample>> scenes, int samples,
  SamplerMode sampler, std::uint64_t seed)
{
  if (samples < 1) {
    throw Error(ErrorCode::invalid_config, "evaluation needs at least one sample");
  }
  check_params(params);
  struct Item
  {
    std::size_t scene;
    std::size_t actor;
  };
  std::vector<Item> items;
  for (std::size_t s = 0; s < scenes.size(); ++s) {
    for (std::size_t a = 0; a < scenes[s].size(); ++a) {
      if (classify_action(scenes[s][a].gt) != ActionClass::stationary) {
        items.push_back({s, a});
      }
    }
  }
  std::vector<ActorMetrics> results(items.size());
  parallel_for(items.size(), [&](std::size_t i) {
    const auto & ex = scenes[items[i].scene][items[i].actor];
    Rng rng = Rng::stream(seed, (static_cast<std::uint64_t>(items[i].scene) << 16) + items[i].actor);
    const auto dist = distribution_from_trace(forward_trace(params, ex.context));
    std::vector<std::vector<Vec2>> ys;
    for (auto & s : sample_trajectories(dist, samples, rng, sampler)) {
      ys.push_back(std::move(s.waypoints));
    }
    results[i] = actor_metrics(ex, ys);
    results[i].scene = items[i].scene;
    results[i].actor = static_cast<int>(items[i].actor);
  });
  return aggregate(std::move(results), samples);
}

MetricsReport evaluate(
  const ModelParams & params, std::span<const Scene> scenes, int samples, SamplerMode sampler,
  std::uint64_t seed)
{
  if (scenes.empty()) {
    throw Error(ErrorCode::invalid_config, "evaluation needs at least one scene");
  }
  std::vector<std::vector<ActorExample>> examples(scenes.size());
  parallel_for(scenes.size(), [&](std::size_t i) { examples[i] = prepare_examples(scenes[i]); });
  return evaluate_examples(params, examples, samples, sampler, seed);
}

std::string format_number(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string metrics_csv(const MetricsReport & report)
{
  std::ostringstream os;
  os << "class,count,final_lane_error,mean_ade,min_ade,samples\n";
  auto row = [&](const std::string & name, const std::optional<ClassMetrics> & c) {
    os << name << ',' << (c ? c->count : 0) << ',';
    if (c && c->final_lane_error) {
      os << format_number(*c->final_lane_error);
    }
    os << ',';
    if (c) {
      os << format_number(c->mean_ade);
    }
    os << ',';
    if (c) {
      os << format_number(c->min_ade);
    }
    os << ',' << report.samples << '\n';
  };
  for (auto cls : {ActionClass::straight, ActionClass::left, ActionClass::right}) {
    const auto it = report.classes.find(cls);
    row(to_string(cls),
        it == report.classes.end() ? std::nullopt : std::optional<ClassMetrics>(it->second));
  }
  row("all", report.overall);
  return os.str();
}

nlohmann::json metrics_json(const MetricsReport & report)
{
  auto class_json = [](const ClassMetrics & c) {
    nlohmann::json j{{"count", c.count}, {"mean_ade", c.mean_ade}, {"min_ade", c.min_ade},
                     {"lane_error_count", c.lane_error_count}};
    j["final_lane_error"] = c.final_lane_error ? nlohmann::json(*c.final_lane_error) : nlohmann::json(nullptr);
    return j;
  };
  nlohmann::json j;
  j["samples"] = report.samples;
  j["classes"] = nlohmann::json::object();
  for (const auto & [cls, c] : report.classes) {
    j["classes"][to_string(cls)] = class_json(c);
  }
  j["overall"] = report.overall ? class_json(*report.overall) : nlohmann::json(nullptr);
  j["actors"] = nlohmann::json::array();
  for (const auto & a : report.actors) {
    nlohmann::json aj{{"scene", a.scene}, {"actor", a.actor}, {"action", to_string(a.action)},
                      {"behavior", to_string(a.behavior)}, {"min_ade", a.min_ade},
                      {"mean_ade", a.mean_ade}};
    aj["final_lane_error"] =
      a.final_lane_error ? nlohmann::json(*a.final_lane_error) : nlohmann::json(nullptr);
    j["actors"].push_back(aj);
  }
  return j;
}

}  // namespace priorforecast
