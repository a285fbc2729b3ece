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

#ifndef PRIORFORECAST__SCENE_HPP_
#define PRIORFORECAST__SCENE_HPP_

#include "priorforecast/geometry.hpp"
#include "priorforecast/lane_graph.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace priorforecast
{

constexpr int kPastSteps = 5;
constexpr int kFutureSteps = 11;
constexpr double kStepSeconds = 0.5;
constexpr double kSpeedMax = 20.0;

enum class Behavior { lane_follow, turn_left, turn_right, lane_change, stop_at_red, non_compliant };
enum class WorldKind { straight_multilane, curved_road, fork, four_way_intersection };

std::string to_string(Behavior b);
std::string to_string(WorldKind k);
WorldKind world_kind_from_string(const std::string & s);

using Trajectory = std::array<Vec2, kFutureSteps>;

struct ActorTrack
{
  int id{0};
  /// Box at t = 0.
  OrientedBox box;
  /// Poses at t = -2.0 ... 0.0 s; the last entry is the current pose.
  std::array<Pose, kPastSteps> past{};
  /// Positions at t = 0.0 ... 5.0 s; entry 0 equals the current position.
  Trajectory future_gt{};
  std::array<double, kFutureSteps> future_heading{};
  Behavior behavior{Behavior::lane_follow};
  double speed{0.0};

  Pose pose() const { return past.back(); }
};

struct Scene
{
  LaneGraph world;
  std::vector<ActorTrack> actors;
  ActorTrack sdv;
  int goal_segment{0};
  std::uint64_t seed{0};
  WorldKind kind{WorldKind::straight_multilane};
};

/// Throws Error{invalid_spec} naming the first violated track invariant.
void validate_track(const ActorTrack & track);
void validate_scene(const Scene & scene);

nlohmann::json to_json(const ActorTrack & track);
ActorTrack actor_track_from_json(const nlohmann::json & j);
nlohmann::json to_json(const Scene & scene);
Scene scene_from_json(const nlohmann::json & j);

/// Scene files referenced by a manifest, in order.
struct DatasetManifest
{
  struct Entry
  {
    std::string path;
    std::uint64_t seed{0};
  };
  std::vector<Entry> scenes;
};

/// Writes `scene_#####.json` files plus `manifest.json` into `dir`.
void write_dataset(const std::filesystem::path & dir, const std::vector<Scene> & scenes);
DatasetManifest read_manifest(const std::filesystem::path & manifest_path);
/// Accepts a manifest file or a directory containing `manifest.json`.
std::vector<Scene> load_dataset(const std::filesystem::path & path);

std::string read_text_file(const std::filesystem::path & path);
void write_text_file(const std::filesystem::path & path, const std::string & text);

}  // namespace priorforecast

#endif  // PRIORFORECAST__SCENE_HPP_
