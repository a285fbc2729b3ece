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

#ifndef PRIORFORECAST__METRICS_HPP_
#define PRIORFORECAST__METRICS_HPP_

#include "priorforecast/forecaster.hpp"
#include "priorforecast/priors.hpp"
#include "priorforecast/raster.hpp"
#include "priorforecast/scene.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace priorforecast
{

constexpr double kStationaryDisplacement = 2.0;
constexpr double kStraightHeadingDeg = 15.0;
constexpr int kEvalSamples = 50;

enum class ActionClass { straight, left, right, stationary };

std::string to_string(ActionClass c);

/// Stationary below 2 m net displacement; otherwise by first-to-last segment heading change.
ActionClass classify_action(std::span<const Vec2> gt);

double average_displacement(std::span<const Vec2> sample, std::span<const Vec2> gt);

struct DisplacementMetrics
{
  double min_ade{0.0};
  double mean_ade{0.0};
};

DisplacementMetrics displacement_metrics(
  std::span<const std::vector<Vec2>> samples, std::span<const Vec2> gt);

/// Percentage of samples ending outside `reach`; absent when the ground truth ends outside.
std::optional<double> final_lane_error(
  std::span<const std::vector<Vec2>> samples, const raster::RasterMask & reach,
  std::span<const Vec2> gt);

struct ActorMetrics
{
  std::size_t scene{0};
  int actor{0};
  ActionClass action{ActionClass::straight};
  Behavior behavior{Behavior::lane_follow};
  double min_ade{0.0};
  double mean_ade{0.0};
  std::optional<double> final_lane_error;
};

struct ClassMetrics
{
  int count{0};
  int lane_error_count{0};
  std::optional<double> final_lane_error;
  double mean_ade{0.0};
  double min_ade{0.0};
};

/// Unweighted per-actor means by action class; classes without actors are absent.
struct MetricsReport
{
  int samples{kEvalSamples};
  std::map<ActionClass, ClassMetrics> classes;
  /// All non-stationary actors pooled.
  std::optional<ClassMetrics> overall;
  std::vector<ActorMetrics> actors;
};

MetricsReport aggregate(std::vector<ActorMetrics> actors, int samples);

/// Metrics of one actor from its trajectory samples (actor frame).
ActorMetrics actor_metrics(
  const ActorExample & example, std::span<const std::vector<Vec2>> samples);

/// Samples each actor from its own sub-stream of `seed`; stationary actors are excluded.
MetricsReport evaluate_examples(
  const ModelParams & params, std::span<const std::vector<ActorExample>> scenes, int samples,
  SamplerMode sampler, std::uint64_t seed);

MetricsReport evaluate(
  const ModelParams & params, std::span<const Scene> scenes, int samples = kEvalSamples,
  SamplerMode sampler = SamplerMode::smooth, std::uint64_t seed = 0);

/// Rows: straight, left, right, all. Columns: class, count, final_lane_error, mean_ade, min_ade, samples.
std::string metrics_csv(const MetricsReport & report);
nlohmann::json metrics_json(const MetricsReport & report);

/// Shortest round-trip decimal form used by every CSV writer.
std::string format_number(double v);

}  // namespace priorforecast

#endif  // PRIORFORECAST__METRICS_HPP_
