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

#ifndef PRIORFORECAST__REPORT_HPP_
#define PRIORFORECAST__REPORT_HPP_

#include "priorforecast/metrics.hpp"
#include "priorforecast/planner.hpp"
#include "priorforecast/scene.hpp"
#include "priorforecast/training.hpp"

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace priorforecast
{

struct NamedMetrics
{
  std::string name;
  MetricsReport forecast;
  PlanningReport planning;
};

/// One row per model; per class final_lane_error, mean_ade and min_ade for straight, left, right, all.
std::string forecast_comparison_csv(std::span<const NamedMetrics> models);
std::string planning_comparison_csv(std::span<const NamedMetrics> models);
/// Fixed-width text version of both tables.
std::string summary_table(std::span<const NamedMetrics> models);

struct Series
{
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

std::string svg_line_chart(
  std::span<const Series> series, const std::string & title, const std::string & x_label,
  const std::string & y_label);

/// Grouped bars: `values[m][g]` is model m in group g; NaN draws no bar.
std::string svg_bar_chart(
  std::span<const std::string> groups, std::span<const std::string> models,
  const std::vector<std::vector<double>> & values, const std::string & title,
  const std::string & y_label);

/// Loss curves from a training history (symmetric and prior terms).
std::string svg_history(std::span<const std::pair<std::string, TrainingHistory>> runs);

/// Parses history_csv output. Throws Error{parse_error}.
TrainingHistory parse_history_csv(const std::string & text);

/// Lanes, ground truth, and forecast samples of a scene in world coordinates.
std::string svg_scene(
  const Scene & scene, std::span<const ForecastSet> forecasts, const std::string & title);

}  // namespace priorforecast

#endif  // PRIORFORECAST__REPORT_HPP_
