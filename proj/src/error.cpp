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

namespace priorforecast
{

std::string_view to_string(ErrorCode code)
{
  switch (code) {
    case ErrorCode::dangling_edge: return "DanglingEdge";
    case ErrorCode::duplicate_id: return "DuplicateId";
    case ErrorCode::degenerate_polyline: return "DegeneratePolyline";
    case ErrorCode::invalid_polygon: return "InvalidPolygon";
    case ErrorCode::invalid_light: return "InvalidLight";
    case ErrorCode::non_overlapping_adjacency: return "NonOverlappingAdjacency";
    case ErrorCode::unknown_seed: return "UnknownSeed";
    case ErrorCode::unknown_segment: return "UnknownSegment";
    case ErrorCode::no_route: return "NoRoute";
    case ErrorCode::empty_mask: return "EmptyMask";
    case ErrorCode::invalid_spec: return "InvalidSpec";
    case ErrorCode::overcrowded: return "Overcrowded";
    case ErrorCode::non_finite_params: return "NonFiniteParams";
    case ErrorCode::non_finite_gradient: return "NonFiniteGradient";
    case ErrorCode::non_finite_loss: return "NonFiniteLoss";
    case ErrorCode::invalid_covariance: return "InvalidCovariance";
    case ErrorCode::shape_mismatch: return "ShapeMismatch";
    case ErrorCode::sample_count_mismatch: return "SampleCountMismatch";
    case ErrorCode::invalid_config: return "InvalidConfig";
    case ErrorCode::io_error: return "IoError";
    case ErrorCode::parse_error: return "ParseError";
  }
  return "Unknown";
}

}  // namespace priorforecast
