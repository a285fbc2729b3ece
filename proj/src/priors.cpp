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

#include "priorforecast/priors.hpp"

#include "priorforecast/error.hpp"
#include "priorforecast/features.hpp"
#include "priorforecast/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace priorforecast
{

void RewardConfig::validate() const
{
  if (!(r_d > 0.0 && r_tp > r_tn && r_tn >= 0.0 && r_fp < 0.0 && r_fn < 0.0)) {
    throw Error(
      ErrorCode::invalid_config, "rewards need r_d > 0 and r_tp > r_tn >= 0 > r_fp, r_fn");
  }
}

std::string to_string(LossMode mode)
{
  switch (mode) {
    case LossMode::mle_only: return "mle_only";
    case LossMode::reinforce: return "reinforce";
    case LossMode::relaxed_centerline_mean: return "relaxed_centerline_mean";
    case LossMode::relaxed_boundary_mean: return "relaxed_boundary_mean";
    case LossMode::relaxed_centerline_reparam: return "relaxed_centerline_reparam";
    case LossMode::relaxed_boundary_reparam: return "relaxed_boundary_reparam";
  }
  return "mle_only";
}

LossMode loss_mode_from_string(const std::string & s)
{
  for (auto m : {LossMode::mle_only, LossMode::reinforce, LossMode::relaxed_centerline_mean,
                 LossMode::relaxed_boundary_mean, LossMode::relaxed_centerline_reparam,
                 LossMode::relaxed_boundary_reparam}) {
    if (to_string(m) == s) {
      return m;
    }
  }
  throw Error(ErrorCode::invalid_config, "unknown loss mode '" + s + "'");
}

double reach_reward(
  const Vec2 & point, const Vec2 & gt_point, const raster::RasterMask & reach,
  const RewardConfig & cfg)
{
  if (!reach.query(gt_point)) {
    return 0.0;
  }
  return reach.query(point) ? cfg.r_d : -cfg.r_d;
}

double route_reward(
  const Vec2 & point, const Vec2 & gt_point, const raster::RasterMask & route,
  const RewardConfig & cfg)
{
  const bool in = route.query(point);
  if (route.query(gt_point)) {
    return in ? cfg.r_tp : cfg.r_fn;
  }
  return in ? cfg.r_fp : cfg.r_tn;
}

PriorMasks make_prior_masks(
  const raster::RasterMask * reach, const raster::RasterMask * route, std::span<const Vec2> gt)
{
  return {reach, route, reach != nullptr && !gt.empty() && reach->query(gt.back())};
}

WaypointReward prior_reward(
  std::span<const Vec2> gt, const PriorMasks & masks, const RewardConfig & cfg)
{
  return [gt, masks, cfg](int t, const Vec2 & y) {
    double r = 0.0;
    if (masks.reach != nullptr && masks.reach_active) {
      r += reach_reward(y, gt[t], *masks.reach, cfg);
    }
    if (masks.route != nullptr) {
      r += route_reward(y, gt[t], *masks.route, cfg);
    }
    return r;
  };
}

TrajectoryReward trajectory_reward(
  std::span<const Vec2> sample, std::span<const Vec2> gt, const PriorMasks & masks,
  const RewardConfig & cfg)
{
  if (sample.size() != gt.size()) {
    throw Error(ErrorCode::shape_mismatch, "sample and ground truth lengths differ");
  }
  const auto reward = prior_reward(gt, masks, cfg);
  TrajectoryReward out;
  out.per_waypoint.resize(sample.size());
  for (std::size_t t = 0; t < sample.size(); ++t) {
    out.per_waypoint[t] = reward(static_cast<int>(t), sample[t]);
    out.total += out.per_waypoint[t];
  }
  return out;
}

double reinforce_distribution_grad(
  const TrajectoryDistribution & dist, const WaypointReward & reward, const EstimatorConfig & est,
  Rng & rng, DistributionGrad & grad)
{
  if (est.samples < 1) {
    throw Error(ErrorCode::invalid_config, "estimator needs at least one sample");
  }
  const int S = est.samples;
  const int T = dist.steps();
  const auto samples = sample_trajectories(dist, S, rng, SamplerMode::independent);
  std::vector<double> r(static_cast<std::size_t>(S * T));
  double total = 0.0;
  for (int s = 0; s < S; ++s) {
    for (int t = 0; t < T; ++t) {
      r[s * T + t] = reward(t, samples[s].waypoints[t]);
      total += r[s * T + t];
    }
  }
  const bool baseline = est.baseline == Baseline::mean_reward;
  if (est.attribution == Attribution::waypoint) {
    std::vector<double> b(T, 0.0);
    if (baseline) {
      for (int t = 0; t < T; ++t) {
        for (int s = 0; s < S; ++s) {
          b[t] += r[s * T + t];
        }
        b[t] /= S;
      }
    }
    for (int s = 0; s < S; ++s) {
      for (int t = 0; t < T; ++t) {
        const double w = r[s * T + t] - b[t];
        if (w != 0.0) {
          accumulate_waypoint_log_likelihood_grad(dist, t, samples[s].waypoints[t], -w / S, grad);
        }
      }
    }
  } else {
    const double b = baseline ? total / S : 0.0;
    for (int s = 0; s < S; ++s) {
      double sum = 0.0;
      for (int t = 0; t < T; ++t) {
        sum += r[s * T + t];
      }
      const double w = sum - b;
      if (w != 0.0) {
        accumulate_log_likelihood_grad(dist, samples[s].waypoints, -w / S, grad);
      }
    }
  }
  return -total / S;
}

LossAndGrad reinforce_grad(
  const ModelParams & params, const ActorContext & context, std::span<const Vec2> gt,
  const PriorMasks & masks, const EstimatorConfig & est, const RewardConfig & reward, Rng & rng)
{
  const auto trace = forward_trace(params, context);
  const auto dist = distribution_from_trace(trace);
  DistributionGrad dg(dist.modes(), dist.steps());
  LossAndGrad out;
  out.loss = reinforce_distribution_grad(dist, prior_reward(gt, masks, reward), est, rng, dg);
  out.grad.assign(ModelParams::count, 0.0);
  backprop(params, trace, raw_output_grad(dist, dg), out.grad);
  check_gradient(out.grad);
  return out;
}

int closest_mode(const TrajectoryDistribution & dist, std::span<const Vec2> gt)
{
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int k = 0; k < dist.modes(); ++k) {
    double d = 0.0;
    for (int t = 0; t < dist.steps(); ++t) {
      d += distance(dist.mean(k, t), gt[t]);
    }
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

double symmetric_loss(
  const TrajectoryDistribution & dist, std::span<const Vec2> gt, int mode, double weight,
  DistributionGrad & grad)
{
  double loss = -dist.log_prob(mode);
  for (int j = 0; j < dist.modes(); ++j) {
    grad.logit[j] += weight * (dist.prob(j) - (j == mode ? 1.0 : 0.0));
  }
  for (int t = 0; t < dist.steps(); ++t) {
    loss -= gaussian_log_density(
      gt[t], dist.mean(mode, t), dist.sigma_x(mode, t), dist.sigma_y(mode, t), dist.rho(mode, t));
    accumulate_component_grad(dist, mode, t, gt[t], -weight, grad);
  }
  return loss;
}

LossAndGrad symmetric_loss_grad(
  const ModelParams & params, const ActorContext & context, std::span<const Vec2> gt)
{
  const auto trace = forward_trace(params, context);
  const auto dist = distribution_from_trace(trace);
  DistributionGrad dg(dist.modes(), dist.steps());
  LossAndGrad out;
  out.loss = symmetric_loss(dist, gt, closest_mode(dist, gt), 1.0, dg);
  out.grad.assign(ModelParams::count, 0.0);
  backprop(params, trace, raw_output_grad(dist, dg), out.grad);
  check_gradient(out.grad);
  return out;
}

std::vector<NoiseDraw> draw_noise(const TrajectoryDistribution & dist, int count, Rng & rng)
{
  std::vector<NoiseDraw> draws;
  for (const auto & s : sample_trajectories(dist, count, rng, SamplerMode::independent)) {
    draws.push_back({s.mode, s.noise});
  }
  return draws;
}

double relaxed_mean_loss(
  const TrajectoryDistribution & dist, const raster::DistanceField & field, double weight,
  DistributionGrad & grad)
{
  const int K = dist.modes();
  std::vector<double> per_mode(K, 0.0);
  double loss = 0.0;
  for (int k = 0; k < K; ++k) {
    for (int t = 0; t < dist.steps(); ++t) {
      const auto f = raster::sample_field(field, dist.mean(k, t));
      per_mode[k] += f.value;
      grad.mean[dist.index(k, t)] += f.gradient * (weight * dist.prob(k));
    }
    loss += dist.prob(k) * per_mode[k];
  }
  for (int k = 0; k < K; ++k) {
    grad.logit[k] += weight * dist.prob(k) * (per_mode[k] - loss);
  }
  return loss;
}

double relaxed_samples_loss(
  const TrajectoryDistribution & dist, const raster::DistanceField & field,
  std::span<const NoiseDraw> draws, double weight, DistributionGrad & grad)
{
  const double inv_s = 1.0 / static_cast<double>(draws.size());
  double loss = 0.0;
  for (const auto & d : draws) {
    for (int t = 0; t < dist.steps(); ++t) {
      const int k = d.mode;
      const int i = dist.index(k, t);
      const double sy = dist.sigma_y(k, t);
      const double r = dist.rho(k, t);
      const double root = std::sqrt(1.0 - r * r);
      const Vec2 e = d.noise[t];
      const auto a = cholesky_2x2(dist.sigma_x(k, t), sy, r);
      const auto f = raster::sample_field(field, dist.mean(k, t) + a.apply(e));
      loss += inv_s * f.value;
      const Vec2 g = f.gradient * (weight * inv_s);
      grad.mean[i] += g;
      grad.sigma_x[i] += g.x * e.x;
      grad.sigma_y[i] += g.y * (r * e.x + root * e.y);
      grad.rho[i] += g.y * sy * (e.x - r / root * e.y);
    }
  }
  return loss;
}

LossAndGrad relaxed_loss_grad(
  const ModelParams & params, const ActorContext & context, const raster::DistanceField & field,
  RelaxedTarget target, const EstimatorConfig & est, Rng & rng)
{
  const auto trace = forward_trace(params, context);
  const auto dist = distribution_from_trace(trace);
  DistributionGrad dg(dist.modes(), dist.steps());
  LossAndGrad out;
  if (target == RelaxedTarget::mean) {
    out.loss = relaxed_mean_loss(dist, field, 1.0, dg);
  } else {
    const auto draws = draw_noise(dist, est.samples, rng);
    out.loss = relaxed_samples_loss(dist, field, draws, 1.0, dg);
  }
  out.grad.assign(ModelParams::count, 0.0);
  backprop(params, trace, raw_output_grad(dist, dg), out.grad);
  check_gradient(out.grad);
  return out;
}

std::vector<int> scene_route(const Scene & scene, const LaneGraph & pruned)
{
  const auto start = primary_lane(pruned, scene.sdv.box);
  if (!start || !pruned.contains(scene.goal_segment)) {
    return {};
  }
  try {
    return compute_route(pruned, *start, scene.goal_segment, route_horizon(scene.sdv.speed));
  } catch (const Error & e) {
    if (e.code() != ErrorCode::no_route) {
      throw;
    }
    return {};
  }
}

std::vector<ActorExample> prepare_examples(const Scene & scene)
{
  const LaneGraph pruned = prune_illegal_edges(scene.world);
  const auto route = scene_route(scene, pruned);
  std::vector<ActorExample> out;
  out.reserve(scene.actors.size());
  for (const auto & actor : scene.actors) {
    ActorExample ex;
    const Pose pose = actor.pose();
    ex.context = extract_features(scene, actor, scene.world);
    for (int t = 0; t < kFutureSteps; ++t) {
      ex.gt[t] = pose.to_local(actor.future_gt[t]);
    }
    ex.behavior = actor.behavior;
    const auto seeds = associate_lanes(scene.world, actor.box);
    if (!seeds.empty()) {
      ex.reach_segments = reachable_lanes(pruned, seeds);
    }
    ex.reach = raster::rasterize(ex.reach_segments, scene.world, pose);
    ex.route = raster::rasterize(route, scene.world, pose);
    // The raster samples cell centers, so a lane change a few metres off a curved reach can
    // land in a reach cell; the gate also asks for the endpoint to lie on a reachable lane.
    ex.reach_active = ex.reach.query(ex.gt.back()) &&
                      std::any_of(ex.reach_segments.begin(), ex.reach_segments.end(), [&](int id) {
                        return point_in_polygon(scene.world.segment(id).polygon, actor.future_gt.back());
                      });
    if (ex.reach_active) {
      ex.boundary_field = raster::distance_to_boundary(ex.reach);
      const auto lines = raster::local_centerlines(ex.reach_segments, scene.world, pose);
      ex.centerline_field = raster::distance_to_centerlines(lines);
    }
    out.push_back(std::move(ex));
  }
  return out;
}

TotalLoss total_loss_grad(
  const ModelParams & params, std::span<const ActorExample * const> batch, LossMode mode,
  const LossWeights & weights, const EstimatorConfig & est, const RewardConfig & reward,
  Rng & rng)
{
  if (batch.empty()) {
    throw Error(ErrorCode::invalid_config, "empty batch");
  }
  const std::uint64_t base = rng.next_u64();
  const std::size_t n = batch.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  struct ActorResult
  {
    ForwardTrace trace;
    std::vector<double> d_raw;
    double symmetric{0.0};
    double prior{0.0};
  };
  std::vector<ActorResult> results(n);
  parallel_for(n, [&](std::size_t i) {
    const ActorExample & ex = *batch[i];
    Rng actor_rng = Rng::stream(base, i);
    ActorResult & res = results[i];
    res.trace = forward_trace(params, ex.context);
    const auto dist = distribution_from_trace(res.trace);
    DistributionGrad g(dist.modes(), dist.steps());
    res.symmetric = symmetric_loss(dist, ex.gt, closest_mode(dist, ex.gt), weights.beta, g);
    if (weights.gamma != 0.0 && mode != LossMode::mle_only) {
      if (mode == LossMode::reinforce) {
        DistributionGrad pg(dist.modes(), dist.steps());
        res.prior = reinforce_distribution_grad(
          dist, prior_reward(ex.gt, ex.masks(), reward), est, actor_rng, pg);
        g.add(pg, weights.gamma);
      } else if (ex.reach_active) {
        const bool centerline = mode == LossMode::relaxed_centerline_mean ||
                                mode == LossMode::relaxed_centerline_reparam;
        const auto & field = centerline ? *ex.centerline_field : *ex.boundary_field;
        if (mode == LossMode::relaxed_centerline_mean || mode == LossMode::relaxed_boundary_mean) {
          res.prior = relaxed_mean_loss(dist, field, weights.gamma, g);
        } else {
          const auto draws = draw_noise(dist, est.samples, actor_rng);
          res.prior = relaxed_samples_loss(dist, field, draws, weights.gamma, g);
        }
      }
    }
    res.d_raw = raw_output_grad(dist, g);
    for (auto & v : res.d_raw) {
      v *= inv_n;
    }
  });
  TotalLoss out;
  out.grad.assign(ModelParams::count, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto & res = results[i];
    backprop(params, res.trace, res.d_raw, out.grad);
    out.loss.symmetric += res.symmetric * inv_n;
    out.loss.prior += res.prior * inv_n;
  }
  out.loss.total = weights.beta * out.loss.symmetric + weights.gamma * out.loss.prior;
  return out;
}

}  // namespace priorforecast
