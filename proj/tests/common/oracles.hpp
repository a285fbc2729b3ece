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

#ifndef PRIORFORECAST_TESTS__ORACLES_HPP_
#define PRIORFORECAST_TESTS__ORACLES_HPP_

// Independent reference implementations shared by unit and acceptance tests.

#include "priorforecast/lane_graph.hpp"
#include "priorforecast/raster.hpp"
#include "priorforecast/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <vector>

namespace priorforecast::oracle
{

/// Random valid graph of 1..max_segments straight segments placed on a 4 x 3 grid of slots.
/// Boundaries, lights and edges are random; adjacency only joins segments in one column.
inline LaneGraph random_graph(Rng & rng, int max_segments = 12)
{
  const int n = static_cast<int>(rng.uniform_int(1, max_segments));
  std::vector<int> slots(12);
  for (int i = 0; i < 12; ++i) slots[i] = i;
  for (int i = 11; i > 0; --i) {
    std::swap(slots[i], slots[static_cast<std::size_t>(rng.uniform_int(0, i))]);
  }
  auto boundary = [&] {
    const double u = rng.uniform();
    return u < 0.6 ? BoundaryType::dashed : u < 0.85 ? BoundaryType::solid
                                                      : BoundaryType::double_solid_yellow;
  };
  std::vector<LaneSegment> segs;
  std::vector<int> column(n);
  for (int id = 0; id < n; ++id) {
    column[id] = slots[id] % 4;
    const int row = slots[id] / 4;
    const double x0 = 40.0 * column[id] + rng.uniform(0.0, 5.0);
    const double len = rng.uniform(5.0, 40.0);
    LaneSegment s;
    s.id = id;
    s.centerline = {{x0, 4.0 * row}, {x0 + len, 4.0 * row}};
    s.polygon = lane_polygon(s.centerline, 1.9);
    s.left_boundary_type = boundary();
    s.right_boundary_type = boundary();
    segs.push_back(s);
  }
  std::vector<LaneEdge> edges;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      if (rng.bernoulli(0.2)) {
        edges.push_back({a, b, EdgeKind::successor});
      }
      if (column[a] == column[b] && rng.bernoulli(0.4)) {
        edges.push_back({a, b, rng.bernoulli(0.5) ? EdgeKind::left_adjacent : EdgeKind::right_adjacent});
      }
    }
  }
  std::vector<TrafficLight> lights;
  for (int id = 0; id < n; ++id) {
    if (rng.bernoulli(0.25)) {
      const double u = rng.uniform();
      const LightState st = u < 0.4 ? LightState::red : u < 0.7 ? LightState::yellow : LightState::green;
      lights.push_back({static_cast<int>(lights.size()), st, {id}});
    }
  }
  return LaneGraph::build(std::move(segs), std::move(edges), std::move(lights));
}

/// Traffic-rule check written from the rules, applied to the unpruned graph.
inline bool edge_is_legal(const LaneGraph & g, const LaneEdge & e)
{
  switch (e.kind) {
    case EdgeKind::successor: return g.light_state(e.dst) != LightState::red;
    case EdgeKind::left_adjacent: return g.segment(e.src).left_boundary_type == BoundaryType::dashed;
    case EdgeKind::right_adjacent: return g.segment(e.src).right_boundary_type == BoundaryType::dashed;
    case EdgeKind::predecessor: return false;
  }
  return false;
}

/// Enumerates every simple legal path from the seeds; a segment is reachable when
/// some path reaches it within the arc-length budget.
inline std::vector<int> reachable_by_enumeration(
  const LaneGraph & g, const std::vector<int> & seeds, double max_arc_length)
{
  std::set<int> out(seeds.begin(), seeds.end());
  std::vector<bool> on_path(static_cast<std::size_t>(g.segments().rbegin()->first + 1), false);
  std::function<void(int, double)> walk = [&](int id, double cost) {
    out.insert(id);
    on_path[id] = true;
    for (const auto & e : g.edges()) {
      if (e.src != id || on_path[e.dst] || !edge_is_legal(g, e)) continue;
      const double next = cost + (e.kind == EdgeKind::successor ? g.segment(id).length() : 0.0);
      if (next <= max_arc_length) {
        walk(e.dst, next);
      }
    }
    on_path[id] = false;
  };
  for (int s : seeds) {
    walk(s, 0.0);
  }
  return {out.begin(), out.end()};
}

/// O(N^2) nearest true cell center, Euclidean.
inline std::array<double, raster::kCellCount> brute_force_boundary_distance(const raster::RasterMask & m)
{
  using namespace raster;
  std::array<double, kCellCount> out{};
  for (int i = 0; i < kLongitudinalCells; ++i) {
    for (int j = 0; j < kLateralCells; ++j) {
      double best = std::numeric_limits<double>::infinity();
      for (int a = 0; a < kLongitudinalCells; ++a) {
        for (int b = 0; b < kLateralCells; ++b) {
          if (m.at(a, b)) {
            best = std::min(best, kCellSize * std::sqrt(double((a - i) * (a - i) + (b - j) * (b - j))));
          }
        }
      }
      out[flat_index(i, j)] = best;
    }
  }
  return out;
}

}  // namespace priorforecast::oracle

#endif  // PRIORFORECAST_TESTS__ORACLES_HPP_
