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
#include "priorforecast/lane_graph.hpp"

#include "../common/oracles.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace priorforecast;
using priorforecast::testing::straight_segment;
using priorforecast::testing::two_lane_road;

namespace
{

LaneGraph chain(int n, double length = 20.0)
{
  std::vector<LaneSegment> segs;
  std::vector<LaneEdge> edges;
  for (int i = 0; i < n; ++i) {
    segs.push_back(straight_segment(i, {length * i, 0.0}, {length * (i + 1), 0.0}));
    if (i + 1 < n) edges.push_back({i, i + 1, EdgeKind::successor});
  }
  return LaneGraph::build(segs, edges, {});
}

/// Segment 0 forks into 1 (left) and 2 (right); the right branch may be red.
LaneGraph fork(LightState right_light)
{
  std::vector<LaneSegment> segs{
    straight_segment(0, {0, 0}, {20, 0}),
    straight_segment(1, {20, 0}, {40, 10}),
    straight_segment(2, {20, 0}, {40, -10}),
  };
  std::vector<LaneEdge> edges{{0, 1, EdgeKind::successor}, {0, 2, EdgeKind::successor}};
  return LaneGraph::build(segs, edges, {{7, right_light, {2}}});
}

ErrorCode code_of(const std::function<void()> & f)
{
  try {
    f();
  } catch (const Error & e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::parse_error;
}

}  // namespace

TEST(LaneGraph, MinimalGraph)
{
  const auto g = LaneGraph::build({straight_segment(0, {0, 0}, {10, 0})}, {}, {});
  EXPECT_EQ(g.segments().size(), 1u);
  EXPECT_TRUE(g.edges().empty());
}

TEST(LaneGraph, BuildErrors)
{
  const auto s0 = straight_segment(0, {0, 0}, {10, 0});
  EXPECT_EQ(code_of([&] { LaneGraph::build({s0}, {{0, 99, EdgeKind::successor}}, {}); }),
            ErrorCode::dangling_edge);
  EXPECT_EQ(code_of([&] { LaneGraph::build({s0, s0}, {}, {}); }), ErrorCode::duplicate_id);
  auto degenerate = s0;
  degenerate.centerline = {{0, 0}};
  EXPECT_EQ(code_of([&] { LaneGraph::build({degenerate}, {}, {}); }),
            ErrorCode::degenerate_polyline);
  const auto far = straight_segment(1, {100, 4}, {110, 4});
  EXPECT_EQ(code_of([&] { LaneGraph::build({s0, far}, {{0, 1, EdgeKind::left_adjacent}}, {}); }),
            ErrorCode::non_overlapping_adjacency);
  EXPECT_EQ(code_of([&] { LaneGraph::build({s0}, {}, {{0, LightState::red, {5}}}); }),
            ErrorCode::invalid_light);
}

TEST(LaneGraph, PredecessorMirrorsSuccessor)
{
  const auto g = chain(3);
  std::set<LaneEdge> edges(g.edges().begin(), g.edges().end());
  EXPECT_TRUE(edges.count({1, 0, EdgeKind::predecessor}));
  EXPECT_TRUE(edges.count({2, 1, EdgeKind::predecessor}));
  EXPECT_EQ(g.successors(0), std::vector<int>{1});
}

TEST(LaneGraph, ChainClosure)
{
  const auto g = chain(3);
  EXPECT_EQ(reachable_lanes(g, std::vector<int>{0}, 120.0), (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(reachable_lanes(g, std::vector<int>{0}, 19.0), (std::vector<int>{0}));
  EXPECT_EQ(reachable_lanes(g, std::vector<int>{0}, 20.0), (std::vector<int>{0, 1}));
}

TEST(LaneGraph, IsolatedSeedAndUnknownSeed)
{
  const auto g = LaneGraph::build({straight_segment(0, {0, 0}, {10, 0})}, {}, {});
  EXPECT_EQ(reachable_lanes(g, std::vector<int>{0}), std::vector<int>{0});
  EXPECT_EQ(code_of([&] { reachable_lanes(g, std::vector<int>{4}); }), ErrorCode::unknown_seed);
}

TEST(LaneGraph, PruneIdentityOnLegalGraph)
{
  const auto g = two_lane_road(4);
  const auto p = prune_illegal_edges(g);
  EXPECT_EQ(p.edges(), g.edges());
}

TEST(LaneGraph, PruneRemovesSolidLineChanges)
{
  const auto g = two_lane_road(4, BoundaryType::solid);
  const auto p = prune_illegal_edges(g);
  for (const auto & e : p.edges()) {
    EXPECT_TRUE(e.kind == EdgeKind::successor || e.kind == EdgeKind::predecessor);
  }
  EXPECT_EQ(p.edges().size(), g.edges().size() - 8);
}

TEST(LaneGraph, PruneRedBranch)
{
  const auto g = fork(LightState::red);
  const auto p = prune_illegal_edges(g);
  EXPECT_EQ(p.successors(0), std::vector<int>{1});
  EXPECT_EQ(reachable_lanes(p, std::vector<int>{0}), (std::vector<int>{0, 1}));
  EXPECT_EQ(
    reachable_lanes(p, std::vector<int>{0}),
    oracle::reachable_by_enumeration(g, {0}, kDefaultReachArcLength));
  // Yellow is treated like green unless asked otherwise.
  const auto y = fork(LightState::yellow);
  EXPECT_EQ(prune_illegal_edges(y).successors(0), (std::vector<int>{1, 2}));
  EXPECT_EQ(prune_illegal_edges(y, {true}).successors(0), std::vector<int>{1});
}

TEST(LaneGraph, PruneIsMonotoneAndIdempotent)
{
  Rng rng(5);
  for (int n = 0; n < 200; ++n) {
    const auto g = oracle::random_graph(rng);
    const auto p = prune_illegal_edges(g);
    const std::set<LaneEdge> all(g.edges().begin(), g.edges().end());
    for (const auto & e : p.edges()) {
      EXPECT_TRUE(all.count(e));
    }
    EXPECT_EQ(prune_illegal_edges(p).edges(), p.edges());
  }
}

TEST(LaneGraph, ReachMatchesEnumerationAndIsMonotone)
{
  Rng rng(17);
  for (int n = 0; n < 300; ++n) {
    const auto g = oracle::random_graph(rng);
    const auto p = prune_illegal_edges(g);
    const int seed = static_cast<int>(rng.uniform_int(0, static_cast<int>(g.segments().size()) - 1));
    const double budget = rng.uniform(0.0, 150.0);
    const auto got = reachable_lanes(p, std::vector<int>{seed}, budget);
    EXPECT_EQ(got, oracle::reachable_by_enumeration(g, {seed}, budget));
    const auto more = reachable_lanes(p, std::vector<int>{seed}, budget + 30.0);
    EXPECT_TRUE(std::includes(more.begin(), more.end(), got.begin(), got.end()));
  }
}

TEST(LaneGraph, Association)
{
  const auto g = two_lane_road(3);
  EXPECT_EQ(associate_lanes(g, {{10, 0}, 4.5, 1.8, 0.0}), std::vector<int>{0});
  EXPECT_EQ(associate_lanes(g, {{10, 2}, 4.5, 1.8, 0.3}), (std::vector<int>{0, 100}));
  EXPECT_TRUE(associate_lanes(g, {{10, -14}, 4.5, 1.8, 0.0}).empty());
  // Nothing overlaps but the centerline is within 3 m.
  EXPECT_EQ(associate_lanes(g, {{10, -2.8}, 1.0, 1.0, 0.0}), std::vector<int>{0});
  EXPECT_EQ(primary_lane(g, {{10, 2.5}, 4.5, 1.8, 0.0}), 100);
}

TEST(LaneGraph, Routes)
{
  const auto g = chain(4);
  EXPECT_EQ(compute_route(g, 2, 2, 100.0), std::vector<int>{2});
  EXPECT_EQ(compute_route(g, 0, 3, 1000.0), (std::vector<int>{0, 1, 2, 3}));
  EXPECT_EQ(compute_route(g, 0, 3, 25.0), (std::vector<int>{0, 1}));
  EXPECT_EQ(code_of([&] { compute_route(g, 3, 0, 100.0); }), ErrorCode::no_route);
  const auto p = prune_illegal_edges(fork(LightState::red));
  EXPECT_EQ(code_of([&] { compute_route(p, 0, 2, 100.0); }), ErrorCode::no_route);
  EXPECT_EQ(compute_route(p, 0, 1, 100.0), (std::vector<int>{0, 1}));
  EXPECT_DOUBLE_EQ(route_horizon(2.0), 40.0);
  EXPECT_DOUBLE_EQ(route_horizon(12.0), 60.0);
}

TEST(LaneGraph, RouteContainsSdvAndIsConnected)
{
  const auto g = two_lane_road(6);
  const auto r = compute_route(g, 0, 105, 200.0);
  EXPECT_TRUE(std::binary_search(r.begin(), r.end(), 0));
  EXPECT_TRUE(std::binary_search(r.begin(), r.end(), 105));
  // Every member is reachable from the SDV segment through route members.
  std::set<int> seen{0};
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    for (const auto & e : g.outgoing(id)) {
      if (e.kind != EdgeKind::predecessor && std::binary_search(r.begin(), r.end(), e.dst) &&
          seen.insert(e.dst).second) {
        stack.push_back(e.dst);
      }
    }
  }
  EXPECT_EQ(seen.size(), r.size());
}

TEST(LaneGraph, JsonRoundTrip)
{
  const auto g = fork(LightState::red);
  const auto back = lane_graph_from_json(to_json(g));
  EXPECT_EQ(to_json(back).dump(), to_json(g).dump());
  EXPECT_EQ(back.light_state(2), LightState::red);
}
