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

#ifndef PRIORFORECAST__RASTER_HPP_
#define PRIORFORECAST__RASTER_HPP_

#include "priorforecast/geometry.hpp"
#include "priorforecast/lane_graph.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace priorforecast::raster
{

// Actor-frame window: 10 m behind to 62 m ahead, 14 m to each side, 4 m cells.
constexpr double kCellSize = 4.0;
constexpr int kLongitudinalCells = 18;
constexpr int kLateralCells = 7;
constexpr int kCellCount = kLongitudinalCells * kLateralCells;
constexpr double kLongitudinalMin = -10.0;
constexpr double kLateralMin = -14.0;
constexpr double kLongitudinalMax = kLongitudinalMin + kCellSize * kLongitudinalCells;
constexpr double kLateralMax = kLateralMin + kCellSize * kLateralCells;

/// Index of a cell; `i` runs along the heading, `j` to the left.
struct Cell
{
  int i{0};
  int j{0};
};

constexpr int flat_index(int i, int j) { return i * kLateralCells + j; }

inline Vec2 cell_center(int i, int j)
{
  return {kLongitudinalMin + kCellSize * (i + 0.5), kLateralMin + kCellSize * (j + 0.5)};
}

/// Containing cell under half-open [lo, hi) intervals; false outside the window.
bool locate_cell(const Vec2 & local, Cell & cell);

class RasterMask
{
public:
  RasterMask() { cells_.fill(0); }
  explicit RasterMask(const Pose & frame) : frame_(frame) { cells_.fill(0); }

  const Pose & frame() const { return frame_; }
  bool at(int i, int j) const { return cells_[flat_index(i, j)] != 0; }
  void set(int i, int j, bool value) { cells_[flat_index(i, j)] = value ? 1 : 0; }
  bool any() const;
  int count() const;

  /// Value of the cell containing `local` (actor frame); false outside the window.
  bool query(const Vec2 & local) const;

  /// Plain-text PGM (P2), longitudinal cells as columns, leftmost row first.
  std::string to_pgm() const;

  bool operator==(const RasterMask &) const = default;

private:
  Pose frame_;
  std::array<std::uint8_t, kCellCount> cells_{};
};

/// Cell is true iff its center lies inside any of the segments' polygons.
/// Throws Error{unknown_segment}.
RasterMask rasterize(std::span<const int> segment_ids, const LaneGraph & graph, const Pose & actor_pose);

inline bool query(const RasterMask & mask, const Vec2 & local) { return mask.query(local); }

enum class FieldKind { to_boundary, to_centerline };

class DistanceField
{
public:
  DistanceField() { values_.fill(0.0); }
  DistanceField(FieldKind kind, const std::array<double, kCellCount> & values)
  : kind_(kind), values_(values)
  {
  }

  FieldKind kind() const { return kind_; }
  double at(int i, int j) const { return values_[flat_index(i, j)]; }
  const std::array<double, kCellCount> & values() const { return values_; }

private:
  FieldKind kind_{FieldKind::to_boundary};
  std::array<double, kCellCount> values_{};
};

/// Exact Euclidean distance on cell centers to the nearest true cell (zero inside),
/// by separable squared-distance transform. Throws Error{empty_mask}.
DistanceField distance_to_boundary(const RasterMask & mask);

/// Distance from each cell center to the nearest of the given actor-frame polylines.
/// Throws Error{empty_mask} when no polyline is supplied.
DistanceField distance_to_centerlines(std::span<const Polyline> local_centerlines);

/// Dispatch on `kind`; `local_centerlines` is used only for to_centerline.
DistanceField distance_transform(
  const RasterMask & mask, FieldKind kind, std::span<const Polyline> local_centerlines = {});

/// Centerlines of `segment_ids` transformed into the frame of `actor_pose`.
std::vector<Polyline> local_centerlines(
  std::span<const int> segment_ids, const LaneGraph & graph, const Pose & actor_pose);

struct FieldSample
{
  double value{0.0};
  Vec2 gradient;
};

/// Bilinear interpolation between cell centers with its analytic derivative.
/// Outside the span of cell centers the point is clamped and the gradient along
/// the clamped axis is zero.
FieldSample sample_field(const DistanceField & field, const Vec2 & local);

}  // namespace priorforecast::raster

#endif  // PRIORFORECAST__RASTER_HPP_
