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

#include "priorforecast/raster.hpp"

#include "priorforecast/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace priorforecast::raster
{

bool locate_cell(const Vec2 & local, Cell & cell)
{
  if (!(local.x >= kLongitudinalMin && local.x < kLongitudinalMax && local.y >= kLateralMin &&
        local.y < kLateralMax)) {
    return false;
  }
  cell.i = std::min(
    kLongitudinalCells - 1, static_cast<int>(std::floor((local.x - kLongitudinalMin) / kCellSize)));
  cell.j =
    std::min(kLateralCells - 1, static_cast<int>(std::floor((local.y - kLateralMin) / kCellSize)));
  return true;
}

bool RasterMask::any() const
{
  return std::any_of(cells_.begin(), cells_.end(), [](auto c) { return c != 0; });
}

int RasterMask::count() const
{
  return static_cast<int>(std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
}

bool RasterMask::query(const Vec2 & local) const
{
  Cell c;
  return locate_cell(local, c) && at(c.i, c.j);
}

std::string RasterMask::to_pgm() const
{
  std::ostringstream os;
  os << "P2\n" << kLongitudinalCells << ' ' << kLateralCells << "\n255\n";
  for (int j = kLateralCells - 1; j >= 0; --j) {
    for (int i = 0; i < kLongitudinalCells; ++i) {
      os << (at(i, j) ? 255 : 0) << (i + 1 < kLongitudinalCells ? " " : "\n");
    }
  }
  return os.str();
}

RasterMask rasterize(std::span<const int> segment_ids, const LaneGraph & graph, const Pose & actor_pose)
{
  std::vector<const LaneSegment *> segs;
  for (int id : segment_ids) {
    segs.push_back(&graph.segment(id));
  }
  RasterMask mask(actor_pose);
  for (int i = 0; i < kLongitudinalCells; ++i) {
    for (int j = 0; j < kLateralCells; ++j) {
      const Vec2 world = actor_pose.to_world(cell_center(i, j));
      for (const auto * seg : segs) {
        if (point_in_polygon(seg->polygon, world)) {
          mask.set(i, j, true);
          break;
        }
      }
    }
  }
  return mask;
}

namespace
{

constexpr long long kInf = std::numeric_limits<long long>::max() / 4;

// Felzenszwalb-Huttenlocher lower envelope of parabolas, in integer cell units.
void squared_transform_1d(std::span<const long long> f, std::span<long long> out)
{
  const int n = static_cast<int>(f.size());
  std::vector<int> v(n);
  std::vector<double> z(n + 1);
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] >= kInf) {
      continue;
    }
    while (k >= 0) {
      const int p = v[k];
      const double s = ((f[q] + static_cast<double>(q) * q) - (f[p] + static_cast<double>(p) * p)) /
                       (2.0 * (q - p));
      if (s <= z[k]) {
        --k;
      } else {
        break;
      }
    }
    ++k;
    v[k] = q;
    z[k] = k == 0 ? -std::numeric_limits<double>::infinity()
                  : ((f[q] + static_cast<double>(q) * q) - (f[v[k - 1]] +
                     static_cast<double>(v[k - 1]) * v[k - 1])) / (2.0 * (q - v[k - 1]));
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  if (k < 0) {
    std::fill(out.begin(), out.end(), kInf);
    return;
  }
  int m = 0;
  for (int q = 0; q < n; ++q) {
    while (z[m + 1] < q) {
      ++m;
    }
    const long long d = q - v[m];
    out[q] = d * d + f[v[m]];
  }
}

}  // namespace

DistanceField distance_to_boundary(const RasterMask & mask)
{
  if (!mask.any()) {
    throw Error(ErrorCode::empty_mask, "distance to boundary of an all-false mask");
  }
  std::array<long long, kCellCount> pass{};
  // Along i for each lateral row j.
  for (int j = 0; j < kLateralCells; ++j) {
    std::array<long long, kLongitudinalCells> f{}, out{};
    for (int i = 0; i < kLongitudinalCells; ++i) {
      f[i] = mask.at(i, j) ? 0 : kInf;
    }
    squared_transform_1d(f, out);
    for (int i = 0; i < kLongitudinalCells; ++i) {
      pass[flat_index(i, j)] = out[i];
    }
  }
  std::array<double, kCellCount> values{};
  for (int i = 0; i < kLongitudinalCells; ++i) {
    std::array<long long, kLateralCells> f{}, out{};
    for (int j = 0; j < kLateralCells; ++j) {
      f[j] = pass[flat_index(i, j)];
    }
    squared_transform_1d(f, out);
    for (int j = 0; j < kLateralCells; ++j) {
      values[flat_index(i, j)] = kCellSize * std::sqrt(static_cast<double>(out[j]));
    }
  }
  return DistanceField(FieldKind::to_boundary, values);
}

DistanceField distance_to_centerlines(std::span<const Polyline> local_centerlines)
{
  if (local_centerlines.empty()) {
    throw Error(ErrorCode::empty_mask, "distance to centerline without any centerline");
  }
  std::array<double, kCellCount> values{};
  for (int i = 0; i < kLongitudinalCells; ++i) {
    for (int j = 0; j < kLateralCells; ++j) {
      const Vec2 c = cell_center(i, j);
      double best = std::numeric_limits<double>::infinity();
      for (const auto & line : local_centerlines) {
        best = std::min(best, point_polyline_distance(c, line));
      }
      values[flat_index(i, j)] = best;
    }
  }
  return DistanceField(FieldKind::to_centerline, values);
}

DistanceField distance_transform(
  const RasterMask & mask, FieldKind kind, std::span<const Polyline> local_centerlines)
{
  if (kind == FieldKind::to_boundary) {
    return distance_to_boundary(mask);
  }
  return distance_to_centerlines(local_centerlines);
}

std::vector<Polyline> local_centerlines(
  std::span<const int> segment_ids, const LaneGraph & graph, const Pose & actor_pose)
{
  std::vector<Polyline> out;
  for (int id : segment_ids) {
    Polyline local;
    for (const auto & p : graph.segment(id).centerline) {
      local.push_back(actor_pose.to_local(p));
    }
    out.push_back(std::move(local));
  }
  return out;
}

FieldSample sample_field(const DistanceField & field, const Vec2 & local)
{
  const Vec2 origin = cell_center(0, 0);
  double fx = (local.x - origin.x) / kCellSize;
  double fy = (local.y - origin.y) / kCellSize;
  bool clamp_x = false;
  bool clamp_y = false;
  if (fx < 0.0 || fx > kLongitudinalCells - 1) {
    fx = std::clamp(fx, 0.0, static_cast<double>(kLongitudinalCells - 1));
    clamp_x = true;
  }
  if (fy < 0.0 || fy > kLateralCells - 1) {
    fy = std::clamp(fy, 0.0, static_cast<double>(kLateralCells - 1));
    clamp_y = true;
  }
  const int i0 = std::min(static_cast<int>(std::floor(fx)), kLongitudinalCells - 2);
  const int j0 = std::min(static_cast<int>(std::floor(fy)), kLateralCells - 2);
  const double tx = fx - i0;
  const double ty = fy - j0;
  const double v00 = field.at(i0, j0);
  const double v10 = field.at(i0 + 1, j0);
  const double v01 = field.at(i0, j0 + 1);
  const double v11 = field.at(i0 + 1, j0 + 1);

  FieldSample out;
  out.value = v00 * (1 - tx) * (1 - ty) + v10 * tx * (1 - ty) + v01 * (1 - tx) * ty + v11 * tx * ty;
  out.gradient.x = clamp_x ? 0.0 : ((v10 - v00) * (1 - ty) + (v11 - v01) * ty) / kCellSize;
  out.gradient.y = clamp_y ? 0.0 : ((v01 - v00) * (1 - tx) + (v11 - v10) * tx) / kCellSize;
  return out;
}

}  // namespace priorforecast::raster
