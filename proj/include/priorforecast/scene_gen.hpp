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

#ifndef PRIORFORECAST__SCENE_GEN_HPP_
#define PRIORFORECAST__SCENE_GEN_HPP_

#include "priorforecast/lane_graph.hpp"
#include "priorforecast/rng.hpp"
#include "priorforecast/scene.hpp"

#include <map>
#include <optional>
#include <vector>

namespace priorforecast
{

constexpr double kLaneWidth = 4.0;

struct WorldSpec
{
  WorldKind kind{WorldKind::straight_multilane};
  /// Same-direction lanes (straight and curved roads).
  int lanes{2};
  /// Opposite-direction lanes beyond a double yellow divider (straight roads).
  int opposing_lanes{0};
  double length{200.0};
  BoundaryType divider{BoundaryType::dashed};
  /// Curved road: centerline radius of the rightmost lane and signed sweep (left positive).
  double radius{100.0};
  double sweep_deg{60.0};
  double fork_angle_deg{30.0};
  double arm_length{60.0};
  double segment_length{20.0};
  double yellow_probability{0.2};
};

/// Throws Error{invalid_spec}.
LaneGraph generate_world(const WorldSpec & spec, Rng & rng);

/// Explicit spawn for a single actor; normally sampled by simulate_actors.
struct ActorSpawn
{
  int segment{0};
  double arc_length{0.0};
  double speed{10.0};
  bool noncompliant{false};
  double length{4.6};
  double width{1.9};
};

/// Simulates one actor from t = -2 s to 5 s by pure pursuit along a sampled path.
/// Returns nullopt when the sampled path cannot host the motion (map end, missed stop).
std::optional<ActorTrack> simulate_actor(
  const LaneGraph & world, const ActorSpawn & spawn, Rng & rng, int id = 0);

/// Spawns `n_actors` with mutually non-overlapping tracks. Throws Error{overcrowded}.
std::vector<ActorTrack> simulate_actors(
  const LaneGraph & world, int n_actors, Rng & rng, double noncompliance_rate);

struct DatasetConfig
{
  std::map<WorldKind, int> counts;
  int actors_per_scene{6};
  int min_actors{3};
  double noncompliance_rate{0.05};
};

/// Samples a world spec of the given kind with randomized geometry.
WorldSpec sample_world_spec(WorldKind kind, Rng & rng);

/// One scene from its own seed; the SDV is taken out of the actor list.
Scene generate_scene(WorldKind kind, const DatasetConfig & config, std::uint64_t scene_seed);

/// First scene index of evaluation datasets, so they never share seeds with training data.
constexpr std::uint64_t kEvalIndexOffset = 1000000;

/// Scenes in WorldKind order; scene i uses seed + first_index + i.
std::vector<Scene> generate_dataset(
  const DatasetConfig & config, std::uint64_t seed, std::uint64_t first_index = 0);

}  // namespace priorforecast

#endif  // PRIORFORECAST__SCENE_GEN_HPP_
