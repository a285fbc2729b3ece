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

#include "priorforecast/scene.hpp"

#include "priorforecast/error.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace priorforecast
{

std::string to_string(Behavior b)
{
  switch (b) {
    case Behavior::lane_follow: return "lane_follow";
    case Behavior::turn_left: return "turn_left";
    case Behavior::turn_right: return "turn_right";
    case Behavior::lane_change: return "lane_change";
    case Behavior::stop_at_red: return "stop_at_red";
    case Behavior::non_compliant: return "non_compliant";
  }
  return "lane_follow";
}

namespace
{

Behavior behavior_from_string(const std::string & s)
{
  for (auto b : {Behavior::lane_follow, Behavior::turn_left, Behavior::turn_right,
                 Behavior::lane_change, Behavior::stop_at_red, Behavior::non_compliant}) {
    if (to_string(b) == s) {
      return b;
    }
  }
  throw Error(ErrorCode::parse_error, "behavior '" + s + "'");
}

nlohmann::json pose_json(const Pose & p) { return {p.position.x, p.position.y, p.heading}; }

Pose pose_from(const nlohmann::json & j)
{
  return {{j.at(0).get<double>(), j.at(1).get<double>()}, j.at(2).get<double>()};
}

}  // namespace

std::string to_string(WorldKind k)
{
  switch (k) {
    case WorldKind::straight_multilane: return "straight_multilane";
    case WorldKind::curved_road: return "curved_road";
    case WorldKind::fork: return "fork";
    case WorldKind::four_way_intersection: return "four_way_intersection";
  }
  return "straight_multilane";
}

WorldKind world_kind_from_string(const std::string & s)
{
  for (auto k : {WorldKind::straight_multilane, WorldKind::curved_road, WorldKind::fork,
                 WorldKind::four_way_intersection}) {
    if (to_string(k) == s) {
      return k;
    }
  }
  throw Error(ErrorCode::invalid_spec, "unknown world kind '" + s + "'");
}

void validate_track(const ActorTrack & track)
{
  auto fail = [&](const std::string & what) {
    throw Error(ErrorCode::invalid_spec, "actor " + std::to_string(track.id) + ": " + what);
  };
  if (track.future_gt[0] != track.pose().position) {
    fail("future_gt[0] differs from the current position");
  }
  constexpr double tolerance = 0.5;
  for (int t = 0; t + 1 < kFutureSteps; ++t) {
    if (distance(track.future_gt[t], track.future_gt[t + 1]) >
        kSpeedMax * kStepSeconds + tolerance) {
      fail("waypoint spacing exceeds the speed limit");
    }
  }
  for (const auto & p : track.future_gt) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      fail("non-finite waypoint");
    }
  }
}

void validate_scene(const Scene & scene)
{
  for (const auto & a : scene.actors) {
    validate_track(a);
  }
  validate_track(scene.sdv);
  scene.world.segment(scene.goal_segment);
}

nlohmann::json to_json(const ActorTrack & track)
{
  nlohmann::json j;
  j["id"] = track.id;
  j["box"] = {
    {"center", {track.box.center.x, track.box.center.y}},
    {"length", track.box.length},
    {"width", track.box.width},
    {"heading", track.box.heading}};
  j["past"] = nlohmann::json::array();
  for (const auto & p : track.past) {
    j["past"].push_back(pose_json(p));
  }
  j["future_gt"] = nlohmann::json::array();
  for (int t = 0; t < kFutureSteps; ++t) {
    j["future_gt"].push_back({track.future_gt[t].x, track.future_gt[t].y, track.future_heading[t]});
  }
  j["behavior"] = to_string(track.behavior);
  j["speed"] = track.speed;
  return j;
}

ActorTrack actor_track_from_json(const nlohmann::json & j)
{
  ActorTrack t;
  try {
    t.id = j.at("id").get<int>();
    const auto & b = j.at("box");
    t.box.center = {b.at("center").at(0).get<double>(), b.at("center").at(1).get<double>()};
    t.box.length = b.at("length").get<double>();
    t.box.width = b.at("width").get<double>();
    t.box.heading = b.at("heading").get<double>();
    const auto & past = j.at("past");
    if (past.size() != kPastSteps || j.at("future_gt").size() != kFutureSteps) {
      throw Error(ErrorCode::parse_error, "track history length");
    }
    for (int i = 0; i < kPastSteps; ++i) {
      t.past[i] = pose_from(past.at(i));
    }
    for (int i = 0; i < kFutureSteps; ++i) {
      const Pose p = pose_from(j.at("future_gt").at(i));
      t.future_gt[i] = p.position;
      t.future_heading[i] = p.heading;
    }
    t.behavior = behavior_from_string(j.at("behavior").get<std::string>());
    t.speed = j.at("speed").get<double>();
  } catch (const nlohmann::json::exception & ex) {
    throw Error(ErrorCode::parse_error, ex.what());
  }
  return t;
}

nlohmann::json to_json(const Scene & scene)
{
  nlohmann::json j;
  j["seed"] = scene.seed;
  j["kind"] = to_string(scene.kind);
  j["world"] = to_json(scene.world);
  j["actors"] = nlohmann::json::array();
  for (const auto & a : scene.actors) {
    j["actors"].push_back(to_json(a));
  }
  j["sdv"] = to_json(scene.sdv);
  j["goal_segment"] = scene.goal_segment;
  return j;
}

Scene scene_from_json(const nlohmann::json & j)
{
  Scene s;
  try {
    s.seed = j.at("seed").get<std::uint64_t>();
    s.kind = world_kind_from_string(j.at("kind").get<std::string>());
    s.world = lane_graph_from_json(j.at("world"));
    for (const auto & a : j.at("actors")) {
      s.actors.push_back(actor_track_from_json(a));
    }
    s.sdv = actor_track_from_json(j.at("sdv"));
    s.goal_segment = j.at("goal_segment").get<int>();
  } catch (const nlohmann::json::exception & ex) {
    throw Error(ErrorCode::parse_error, ex.what());
  }
  return s;
}

std::string read_text_file(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::io_error, "cannot read " + path.string());
  }
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::filesystem::path & path, const std::string & text)
{
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::io_error, "cannot write " + path.string());
  }
  out << text;
}

void write_dataset(const std::filesystem::path & dir, const std::vector<Scene> & scenes)
{
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["scenes"] = nlohmann::json::array();
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "scene_%05zu.json", i);
    write_text_file(dir / name, to_json(scenes[i]).dump());
    manifest["scenes"].push_back({{"path", name}, {"seed", scenes[i].seed}});
  }
  write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

DatasetManifest read_manifest(const std::filesystem::path & manifest_path)
{
  DatasetManifest m;
  try {
    const auto j = nlohmann::json::parse(read_text_file(manifest_path));
    for (const auto & e : j.at("scenes")) {
      m.scenes.push_back({e.at("path").get<std::string>(), e.at("seed").get<std::uint64_t>()});
    }
  } catch (const nlohmann::json::exception & ex) {
    throw Error(ErrorCode::parse_error, manifest_path.string() + ": " + ex.what());
  }
  return m;
}

std::vector<Scene> load_dataset(const std::filesystem::path & path)
{
  const auto manifest_path =
    std::filesystem::is_directory(path) ? path / "manifest.json" : path;
  const auto base = manifest_path.parent_path();
  std::vector<Scene> scenes;
  for (const auto & e : read_manifest(manifest_path).scenes) {
    try {
      scenes.push_back(scene_from_json(nlohmann::json::parse(read_text_file(base / e.path))));
    } catch (const nlohmann::json::exception & ex) {
      throw Error(ErrorCode::parse_error, e.path + ": " + ex.what());
    }
  }
  return scenes;
}

}  // namespace priorforecast
