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

#ifndef PRIORFORECAST__PRIORS_HPP_
#define PRIORFORECAST__PRIORS_HPP_

#include "priorforecast/forecaster.hpp"
#include "priorforecast/raster.hpp"
#include "priorforecast/rng.hpp"
#include "priorforecast/scene.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace priorforecast
{

struct RewardConfig
{
  double r_d{1.0};
  double r_tp{1.0};
  double r_tn{0.1};
  double r_fp{-1.0};
  double r_fn{-1.0};

  /// Throws Error{invalid_config} unless r_d > 0 and r_tp > r_tn >= 0 > r_fp, r_fn.
  void validate() const;
};

struct LossWeights
{
  double beta{0.1};
  double gamma{0.1};
};

enum class Attribution { trajectory, waypoint };
enum class Baseline { none, mean_reward };

struct EstimatorConfig
{
  int samples{16};
  Attribution attribution{Attribution::waypoint};
  Baseline baseline{Baseline::none};
};

enum class LossMode {
  mle_only,
  reinforce,
  relaxed_centerline_mean,
  relaxed_boundary_mean,
  relaxed_centerline_reparam,
  relaxed_boundary_reparam,
};

std::string to_string(LossMode mode);
/// Throws Error{invalid_config}.
LossMode loss_mode_from_string(const std::string & s);

/// Eq. 1 style per-waypoint reward: zero whenever the ground truth is outside the mask.
double reach_reward(
  const Vec2 & point, const Vec2 & gt_point, const raster::RasterMask & reach,
  const RewardConfig & cfg);
/// Precision/recall reward of a waypoint against the SDV route.
double route_reward(
  const Vec2 & point, const Vec2 & gt_point, const raster::RasterMask & route,
  const RewardConfig & cfg);

/**
 * Masks of one actor. The reach term is active only when the ground-truth
 * endpoint lies inside the reach mask, so non-compliant futures are never penalized.
 * A null pointer disables the corresponding term.
 */
struct PriorMasks
{
  const raster::RasterMask * reach{nullptr};
  const raster::RasterMask * route{nullptr};
  bool reach_active{false};
};

PriorMasks make_prior_masks(
  const raster::RasterMask * reach, const raster::RasterMask * route, std::span<const Vec2> gt);

struct TrajectoryReward
{
  std::vector<double> per_waypoint;
  double total{0.0};
};

TrajectoryReward trajectory_reward(
  std::span<const Vec2> sample, std::span<const Vec2> gt, const PriorMasks & masks,
  const RewardConfig & cfg);

/// Per-waypoint reward r(t, y_t) used by the score-function estimator.
using WaypointReward = std::function<double(int t, const Vec2 & y)>;

/**
 * Score-function estimate of d/d(distribution) of L = -E[sum_t r(t, y_t)],
 * accumulated into `grad`. Returns the Monte Carlo loss.
 * Waypoint attribution weights the per-step marginal score by r_t;
 * trajectory attribution weights the full trajectory score by the summed reward.
 */
double reinforce_distribution_grad(
  const TrajectoryDistribution & dist, const WaypointReward & reward, const EstimatorConfig & est,
  Rng & rng, DistributionGrad & grad);

WaypointReward prior_reward(
  std::span<const Vec2> gt, const PriorMasks & masks, const RewardConfig & cfg);

struct LossAndGrad
{
  double loss{0.0};
  GradientVector grad;
};

LossAndGrad reinforce_grad(
  const ModelParams & params, const ActorContext & context, std::span<const Vec2> gt,
  const PriorMasks & masks, const EstimatorConfig & est, const RewardConfig & reward, Rng & rng);

/// Mode whose mean trajectory is closest to `gt` (sum of waypoint distances); lowest index on ties.
int closest_mode(const TrajectoryDistribution & dist, std::span<const Vec2> gt);

/// -[log p(k) + sum_t log N(gt_t | k, t)] for k = `mode`; gradient accumulated with `weight`.
double symmetric_loss(
  const TrajectoryDistribution & dist, std::span<const Vec2> gt, int mode, double weight,
  DistributionGrad & grad);

LossAndGrad symmetric_loss_grad(
  const ModelParams & params, const ActorContext & context, std::span<const Vec2> gt);

enum class RelaxedTarget { mean, samples };

/// Frozen draw for the reparameterized relaxed loss.
struct NoiseDraw
{
  int mode{0};
  std::vector<Vec2> noise;
};

std::vector<NoiseDraw> draw_noise(const TrajectoryDistribution & dist, int count, Rng & rng);

/// sum_k p(k) sum_t F(mu_t^k), with gradient through means and mode probabilities.
double relaxed_mean_loss(
  const TrajectoryDistribution & dist, const raster::DistanceField & field, double weight,
  DistributionGrad & grad);

/// (1/S) sum_s sum_t F(y_t^s) with y = mu + A eps for fixed draws; the mode choice is constant.
double relaxed_samples_loss(
  const TrajectoryDistribution & dist, const raster::DistanceField & field,
  std::span<const NoiseDraw> draws, double weight, DistributionGrad & grad);

LossAndGrad relaxed_loss_grad(
  const ModelParams & params, const ActorContext & context, const raster::DistanceField & field,
  RelaxedTarget target, const EstimatorConfig & est, Rng & rng);

/// Everything the losses need about one actor, in that actor's frame.
struct ActorExample
{
  ActorContext context{};
  Trajectory gt{};
  Behavior behavior{Behavior::lane_follow};
  raster::RasterMask reach;
  raster::RasterMask route;
  bool reach_active{false};
  std::vector<int> reach_segments;
  /// Present when reach_active (the fields need a non-empty mask).
  std::optional<raster::DistanceField> boundary_field;
  std::optional<raster::DistanceField> centerline_field;

  PriorMasks masks(bool with_route = true) const
  {
    return {&reach, with_route ? &route : nullptr, reach_active};
  }
};

/// Route of the scene's SDV on the pruned graph; empty if none exists.
std::vector<int> scene_route(const Scene & scene, const LaneGraph & pruned);

/// Examples for every non-SDV actor of the scene.
std::vector<ActorExample> prepare_examples(const Scene & scene);

struct LossBreakdown
{
  double total{0.0};
  double symmetric{0.0};
  double prior{0.0};
};

struct TotalLoss
{
  LossBreakdown loss;
  GradientVector grad;
};

/**
 * Per actor: beta * L_symmetric + gamma * (prior or relaxed loss), averaged over actors.
 * Actor i draws from the sub-stream (rng seed, i); gradients are summed in actor order.
 */
TotalLoss total_loss_grad(
  const ModelParams & params, std::span<const ActorExample * const> batch, LossMode mode,
  const LossWeights & weights, const EstimatorConfig & est, const RewardConfig & reward,
  Rng & rng);

}  // namespace priorforecast

#endif  // PRIORFORECAST__PRIORS_HPP_
