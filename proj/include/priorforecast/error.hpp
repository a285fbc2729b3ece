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

#ifndef PRIORFORECAST__ERROR_HPP_
#define PRIORFORECAST__ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace priorforecast
{

enum class ErrorCode {
  dangling_edge,
  duplicate_id,
  degenerate_polyline,
  invalid_polygon,
  invalid_light,
  non_overlapping_adjacency,
  unknown_seed,
  unknown_segment,
  no_route,
  empty_mask,
  invalid_spec,
  overcrowded,
  non_finite_params,
  non_finite_gradient,
  non_finite_loss,
  invalid_covariance,
  shape_mismatch,
  sample_count_mismatch,
  invalid_config,
  io_error,
  parse_error,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; `code()` identifies the failure class.
class Error : public std::runtime_error
{
public:
  Error(ErrorCode code, const std::string & message)
  : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code)
  {
  }

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

}  // namespace priorforecast

#endif  // PRIORFORECAST__ERROR_HPP_
