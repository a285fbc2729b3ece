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

#include "priorforecast/error.hpp"
#include "priorforecast/planner.hpp"
#include "priorforecast/priors.hpp"
#include "priorforecast/scene_gen.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace priorforecast;
using priorforecast::testing::straight_track;
using priorforecast::testing::two_lane_road;

namespace
{

Scene road_scene(double sdv_speed, BoundaryType divider = BoundaryType::dashed)
{
  Scene s;
  s.world = two_lane_road(8, divider);
  s.sdv = straight_track(0, {10.0, 0.0}, 0.0, sdv_speed);
  s.sdv.box = {{10.0, 0.0}, kSdvLength, kSdvWidth, 0.0};
  s.goal_segment = divider == BoundaryType::dashed ? 107 : 7;
  return s;
}

std::vector<int> route_of(const Scene & s)
{
  return scene_route(s, prune_illegal_edges(s.world));
}

/// Brute force: fraction of (actor, sample) pairs whose box overlaps the plan box at some step,
/// without the radius prefilter.
double brute_collision(const PlanCandidate & plan, std::span<const ForecastSet> f)
{
  int hits = 0, total = 0;
  for (const auto & a : f) {
    for (const auto & s : a.samples) {
      const auto h = sample_headings(s, a.heading);
      bool hit = false;
      for (int t = 0; t < kFutureSteps && !hit; ++t) {
        hit = boxes_overlap({plan.poses[t].position, kSdvLength, kSdvWidth, plan.poses[t].heading},
                            {s[t], a.length, a.width, h[t]});
      }
      hits += hit;
      ++total;
    }
  }
  return double(hits) / total;
}

}  // namespace

TEST(Planner, CandidateCounts)
{
  const auto s = road_scene(10.0);
  const auto pruned = prune_illegal_edges(s.world);
  EXPECT_EQ(generate_candidates(s.sdv, route_of(s), pruned).size(), 12u);
  const auto solid = road_scene(10.0, BoundaryType::solid);
  EXPECT_EQ(generate_candidates(solid.sdv, route_of(solid), prune_illegal_edges(solid.world)).size(), 6u);
  EXPECT_THROW(generate_candidates(s.sdv, {}, pruned), Error);
}

TEST(Planner, ProfilesStartAtSdvAndRespectSpeedLimits)
{
  const auto s = road_scene(0.0);
  const auto c = generate_candidates(s.sdv, route_of(s), prune_illegal_edges(s.world));
  for (const auto & p : c) {
    EXPECT_EQ(p.poses[0].position.x, 10.0);
    EXPECT_EQ(p.poses[0].position.y, 0.0);
    if (p.acceleration <= 0.0) {
      // Stationary SDV that brakes or holds stays put.
      EXPECT_NEAR(p.poses.back().position.x, 10.0, 1e-9);
    } else {
      // x(t) = a t^2 / 2 along the lane.
      EXPECT_NEAR(p.poses.back().position.x - 10.0, 0.5 * p.acceleration * 25.0, 0.05 + 1.0 * (p.lane != 0));
    }
  }
  const auto fast = road_scene(19.0);
  for (const auto & p : generate_candidates(fast.sdv, route_of(fast), prune_illegal_edges(fast.world))) {
    EXPECT_LE(plan_kinematics(p).progress, 20.0 * 5.0 + 1e-6);
  }
}

TEST(Planner, ConstantVelocityLaneKeepIsSmooth)
{
  const auto s = road_scene(10.0);
  const auto c = generate_candidates(s.sdv, route_of(s), prune_illegal_edges(s.world));
  const auto it = std::find_if(c.begin(), c.end(), [](const auto & p) { return p.lane == 0 && p.acceleration == 0.0; });
  ASSERT_NE(it, c.end());
  const auto k = plan_kinematics(*it);
  EXPECT_NEAR(k.jerk, 0.0, 1e-6);
  EXPECT_NEAR(k.lateral_accel, 0.0, 1e-6);
  EXPECT_NEAR(k.progress, 50.0, 1e-6);
  // Lane changes move sideways onto the other centerline.
  for (const auto & p : c) {
    if (p.lane == 100 && p.acceleration == 0.0) {
      EXPECT_NEAR(p.poses.back().position.y, 4.0, 1e-6);
      EXPECT_GT(plan_kinematics(p).lateral_accel, 0.1);
    }
  }
}

TEST(Planner, SampleHeadings)
{
  const std::vector<Vec2> w{{0, 0}, {1, 1}, {1, 1.01}, {1, 1.01}, {0, 1.01}};
  const auto h = sample_headings(w, 0.3);
  EXPECT_NEAR(h[0], std::atan2(1, 1), 1e-12);
  EXPECT_NEAR(h[1], std::atan2(1, 1), 1e-12);  // stall keeps the previous heading
  EXPECT_NEAR(h[3], std::numbers::pi, 1e-12);
  EXPECT_NEAR(h[4], std::numbers::pi, 1e-12);
  EXPECT_EQ(sample_headings(std::vector<Vec2>(3), 0.3)[2], 0.3);
}

TEST(Planner, CollisionFractionMatchesBruteForceAndIsInvariant)
{
  const auto s = road_scene(10.0);
  const auto c = generate_candidates(s.sdv, route_of(s), prune_illegal_edges(s.world));
  Rng rng(2);
  for (int n = 0; n < 50; ++n) {
    std::vector<ForecastSet> f;
    for (int a = 0; a < 3; ++a) {
      ForecastSet set{4.5, 1.9, 0.0, {}};
      for (int k = 0; k < 10; ++k) {
        std::vector<Vec2> traj;
        Vec2 p{rng.uniform(10, 70), rng.uniform(-3, 7)};
        const double vx = rng.uniform(-8, 8);
        for (int t = 0; t < kFutureSteps; ++t) traj.push_back(p + Vec2{vx * t * 0.5, 0.0});
        set.samples.push_back(traj);
      }
      f.push_back(set);
    }
    for (const auto & plan : c) {
      const double got = collision_fraction(plan, f);
      EXPECT_DOUBLE_EQ(got, brute_collision(plan, f));
      // Duplicating every sample and reversing actor order changes nothing.
      auto dup = f;
      for (auto & set : dup) {
        const auto copy = set.samples;
        set.samples.insert(set.samples.end(), copy.begin(), copy.end());
        std::reverse(set.samples.begin(), set.samples.end());
      }
      std::reverse(dup.begin(), dup.end());
      EXPECT_DOUBLE_EQ(collision_fraction(plan, dup), got);
    }
  }
  auto bad = std::vector<ForecastSet>{{4.5, 1.9, 0.0, {std::vector<Vec2>(11)}}, {4.5, 1.9, 0.0, {}}};
  EXPECT_THROW(collision_fraction(c[0], bad), Error);
  EXPECT_EQ(collision_fraction(c[0], {}), 0.0);
}

TEST(Planner, BlockerAtSpawnCollidesWithEveryCandidate)
{
  const auto s = road_scene(10.0);
  const auto c = generate_candidates(s.sdv, route_of(s), prune_illegal_edges(s.world));
  ForecastSet blocker{4.5, 1.9, 0.0, {std::vector<Vec2>(kFutureSteps, Vec2{13.0, 0.0})}};
  const std::vector<ForecastSet> f{blocker};
  for (const auto & p : c) {
    EXPECT_EQ(collision_fraction(p, f), 1.0);
  }
}

TEST(Planner, AvoidsParkedCarUsingGroundTruth)
{
  auto s = road_scene(10.0);
  s.actors.push_back(straight_track(1, {45.0, 0.0}, 0.0, 0.0));
  const auto gt = ground_truth_forecasts(s, 4);
  ASSERT_EQ(gt.size(), 1u);
  EXPECT_EQ(gt[0].samples.size(), 4u);
  const auto plan = plan_scene(s, gt);
  EXPECT_EQ(plan.candidates, 12u);
  EXPECT_FALSE(plan.metrics.collision);
  // Without forecasts the planner keeps the fastest plan and hits the parked car.
  const auto blind = plan_scene(s, {});
  EXPECT_TRUE(blind.metrics.collision);
  EXPECT_EQ(blind.plan.acceleration, 2.0);
}

TEST(Planner, SelectPlanPrefersLowestIndexOnTies)
{
  EXPECT_EQ(select_plan(std::vector<double>{3.0, 1.0, 1.0, 2.0}), 1u);
  EXPECT_THROW(select_plan(std::vector<double>{}), Error);
}

TEST(Planner, AggregateAndCsv)
{
  std::vector<PlanMetrics> m{{true, 2.0, 0.5, 1.0, 40.0}, {false, 4.0, 1.5, 3.0, 60.0}};
  const auto r = aggregate_plans(m, 50);
  EXPECT_DOUBLE_EQ(r.collision_rate, 50.0);
  EXPECT_DOUBLE_EQ(r.l2_human_at_5s, 3.0);
  EXPECT_DOUBLE_EQ(r.progress_at_5s, 50.0);
  const std::vector<std::pair<std::string, PlanningReport>> rows{{"m", r}};
  EXPECT_EQ(planning_csv(rows),
            "model,collision_rate,l2_human_at_5s,lateral_accel,jerk,progress_at_5s,scenes,samples\n"
            "m,50,3,1,2,50,2,50\n");
}

TEST(Planner, PlanEvalIsDeterministic)
{
  DatasetConfig cfg;
  cfg.counts[WorldKind::straight_multilane] = 2;
  cfg.counts[WorldKind::fork] = 2;
  const auto scenes = generate_dataset(cfg, 3);
  const auto p = init_params(1);
  const auto a = plan_eval(p, scenes, 8);
  const auto b = plan_eval(p, scenes, 8);
  const std::vector<std::pair<std::string, PlanningReport>> ra{{"x", a}}, rb{{"x", b}};
  EXPECT_EQ(planning_csv(ra), planning_csv(rb));
  EXPECT_EQ(a.scenes, 4);
}
