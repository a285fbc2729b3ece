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

#ifndef PRIORFORECAST__PLANNER_HPP_
#define PRIORFORECAST__PLANNER_HPP_

#include "priorforecast/forecaster.hpp"
#include "priorforecast/geometry.hpp"
#include "priorforecast/lane_graph.hpp"
#include "priorforecast/scene.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace priorforecast
{

constexpr double kSdvLength = 5.0;
constexpr double kSdvWidth = 2.0;
constexpr std::array<double, 6> kPlanAccelerations{-4.0, -2.0, -1.0, 0.0, 1.0, 2.0};

struct PlanCandidate
{
  std::array<Pose, kFutureSteps> poses{};
  /// Target lane; differs from the current lane for lane changes.
  int lane{0};
  double acceleration{0.0};
};

/// Lattice over the current lane and legal adjacent route lanes times constant accelerations.
/// Speeds are clamped to [0, 20] m/s. Throws Error{no_route} on an empty route.
std::vector<PlanCandidate> generate_candidates(
  const ActorTrack & sdv, std::span<const int> route, const LaneGraph & pruned);

/// Forecast samples of one actor in the world frame.
struct ForecastSet
{
  double length{4.5};
  double width{2.0};
  /// Fallback heading when a sample does not move.
  double heading{0.0};
  std::vector<std::vector<Vec2>> samples;
};

struct PlannerWeights
{
  double collision{1000.0};
  double jerk{1.0};
  double lateral{1.0};
  double progress{0.1};
};

struct PlanKinematics
{
  double jerk{0.0};
  double lateral_accel{0.0};
  double progress{0.0};
};

/// Means of |jerk| and |lateral acceleration| by finite differences, and travelled arc length.
PlanKinematics plan_kinematics(const PlanCandidate & plan);

/// Headings along a sample by forward differences; stalls keep the previous heading.
std::vector<double> sample_headings(std::span<const Vec2> waypoints, double fallback);

/// Fraction of (actor, sample) pairs whose box overlaps the SDV box at some step.
/// Throws Error{sample_count_mismatch} unless every actor has the same, nonzero sample count.
double collision_fraction(const PlanCandidate & plan, std::span<const ForecastSet> forecasts);

double plan_cost(
  const PlanCandidate & plan, std::span<const ForecastSet> forecasts,
  const PlannerWeights & weights = {});

/// Index of the cheapest candidate; the lowest index wins ties.
std::size_t select_plan(std::span<const double> costs);

struct PlanMetrics
{
  bool collision{false};
  double l2_human{0.0};
  double lateral_accel{0.0};
  double jerk{0.0};
  double progress{0.0};
};

PlanMetrics planning_metrics(const PlanCandidate & plan, const Scene & scene);

struct ScenePlan
{
  std::size_t candidates{0};
  std::size_t selected{0};
  PlanCandidate plan;
  PlanMetrics metrics;
};

ScenePlan plan_scene(
  const Scene & scene, std::span<const ForecastSet> forecasts, const PlannerWeights & weights = {});

/// Ground-truth futures repeated `copies` times, as if they were forecasts.
std::vector<ForecastSet> ground_truth_forecasts(const Scene & scene, int copies);

std::vector<ForecastSet> model_forecasts(
  const ModelParams & params, const Scene & scene, int samples, SamplerMode sampler, Rng & rng);

struct PlanningReport
{
  double collision_rate{0.0};
  double l2_human_at_5s{0.0};
  double lateral_accel{0.0};
  double jerk{0.0};
  double progress_at_5s{0.0};
  int scenes{0};
  int samples{0};
  std::vector<PlanMetrics> per_scene;
};

PlanningReport aggregate_plans(std::vector<PlanMetrics> per_scene, int samples);

/// Scene i samples from the sub-stream (seed, i).
PlanningReport plan_eval(
  const ModelParams & params, std::span<const Scene> scenes, int samples = 50,
  SamplerMode sampler = SamplerMode::smooth, std::uint64_t seed = 0,
  const PlannerWeights & weights = {});

/// One row per named model.
std::string planning_csv(std::span<const std::pair<std::string, PlanningReport>> rows);

}  // namespace priorforecast

#endif  // PRIORFORECAST__PLANNER_HPP_
