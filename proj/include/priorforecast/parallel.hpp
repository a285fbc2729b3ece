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

#ifndef PRIORFORECAST__PARALLEL_HPP_
#define PRIORFORECAST__PARALLEL_HPP_

#include <cstddef>
#include <functional>

namespace priorforecast
{

/// Worker count from PRIORFORECAST_THREADS (0 or unset = hardware concurrency).
std::size_t worker_count();

/**
 * Runs body(i) for i in [0, n) on up to worker_count() threads.
 * Callers write results to slot i only, so the outcome does not depend on scheduling.
 * The first exception thrown by any body is rethrown after all workers join.
 */
void parallel_for(std::size_t n, const std::function<void(std::size_t)> & body);

}  // namespace priorforecast

#endif  // PRIORFORECAST__PARALLEL_HPP_
