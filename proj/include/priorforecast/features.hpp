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

#ifndef PRIORFORECAST__FEATURES_HPP_
#define PRIORFORECAST__FEATURES_HPP_

#include "priorforecast/lane_graph.hpp"
#include "priorforecast/scene.hpp"

#include <array>

namespace priorforecast
{

constexpr int kFeatureSize = 34;
constexpr int kLookaheadPoints = 10;
constexpr double kLookaheadSpacing = 5.0;
constexpr double kRedLightRange = 30.0;
constexpr double kIntersectionRange = 60.0;

/**
 * Hand-crafted context of one actor, all positions in the actor frame:
 *  [0] speed, [1] heading rate, [2..11] past positions (oldest first),
 *  [12..31] centerline lookahead, [32] red light ahead, [33] distance to intersection.
 */
using ActorContext = std::array<double, kFeatureSize>;

namespace feature_index
{
constexpr int speed = 0;
constexpr int heading_rate = 1;
constexpr int past = 2;
constexpr int lookahead = 12;
constexpr int red_light = 32;
constexpr int intersection_distance = 33;
}  // namespace feature_index

/// Deterministic features; off-map actors get zero map features.
ActorContext extract_features(const Scene & scene, const ActorTrack & actor, const LaneGraph & graph);

}  // namespace priorforecast

#endif  // PRIORFORECAST__FEATURES_HPP_
