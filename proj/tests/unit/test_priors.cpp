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
#include "priorforecast/priors.hpp"
#include "priorforecast/scene_gen.hpp"

#include "../common/finite_difference.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace priorforecast;
using namespace priorforecast::raster;

namespace
{

/// Mask of lateral rows [j0, j1].
RasterMask rows(int j0, int j1)
{
  RasterMask m;
  for (int i = 0; i < kLongitudinalCells; ++i) {
    for (int j = j0; j <= j1; ++j) m.set(i, j, true);
  }
  return m;
}

std::vector<Vec2> straight(double y, double dx = 2.0)
{
  std::vector<Vec2> out;
  for (int t = 0; t < kHorizon; ++t) out.push_back({dx * (t + 1), y});
  return out;
}

}  // namespace

TEST(Priors, RewardTables)
{
  const RewardConfig cfg;
  const auto reach = rows(2, 4);
  const auto route = rows(3, 3);
  // Reach term: zero when the ground truth leaves the reach.
  EXPECT_EQ(reach_reward({0, 0}, {0, 0}, reach, cfg), 1.0);
  EXPECT_EQ(reach_reward({0, 9}, {0, 0}, reach, cfg), -1.0);
  EXPECT_EQ(reach_reward({0, 9}, {0, 13}, reach, cfg), 0.0);
  // Route term: confusion matrix between sample and ground truth.
  EXPECT_EQ(route_reward({0, 0}, {0, 0}, route, cfg), cfg.r_tp);
  EXPECT_EQ(route_reward({0, 5}, {0, 0}, route, cfg), cfg.r_fn);
  EXPECT_EQ(route_reward({0, 0}, {0, 5}, route, cfg), cfg.r_fp);
  EXPECT_EQ(route_reward({0, 5}, {0, 5}, route, cfg), cfg.r_tn);

  const auto gt = straight(0.0);
  const auto masks = make_prior_masks(&reach, &route, gt);
  EXPECT_TRUE(masks.reach_active);
  EXPECT_NEAR(trajectory_reward(gt, gt, masks, cfg).total, 22.0, 1e-12);
  const auto off = straight(5.0);
  const auto off_masks = make_prior_masks(&reach, &route, off);
  // Ground truth in reach (row 4) but off route; matching sample earns r_d + r_tn per step.
  EXPECT_NEAR(trajectory_reward(off, off, off_masks, cfg).total, 11 * 1.1, 1e-12);
  EXPECT_THROW(trajectory_reward(std::vector<Vec2>(3), gt, masks, cfg), Error);
}

TEST(Priors, RewardValidation)
{
  RewardConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.r_fp = 0.5;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.r_tn = 2.0;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(Priors, ReachGateFollowsGroundTruthEndpoint)
{
  const auto reach = rows(3, 3);
  auto gt = straight(0.0);
  EXPECT_TRUE(make_prior_masks(&reach, nullptr, gt).reach_active);
  gt.back().y = 9.0;  // ends outside the reachable lanes
  EXPECT_FALSE(make_prior_masks(&reach, nullptr, gt).reach_active);
  EXPECT_FALSE(make_prior_masks(nullptr, nullptr, gt).reach_active);
  // Inactive gate makes the reach term vanish for every sample.
  const auto masks = make_prior_masks(&reach, nullptr, gt);
  EXPECT_EQ(trajectory_reward(straight(-9.0), gt, masks, RewardConfig{}).total, 0.0);
}

TEST(Priors, NonCompliantActorsGetNoReachGradient)
{
  // Ground truth drifts out of the reachable lane: the reach prior must not contribute at all.
  const auto in = fd::random_instance(41);
  const auto reach = rows(3, 3);
  const auto route = rows(2, 3);
  auto gt = straight(0.0);
  gt.back() = {20.0, 11.0};
  const EstimatorConfig est{16, Attribution::waypoint, Baseline::none};
  const RewardConfig cfg;
  for (Attribution a : {Attribution::waypoint, Attribution::trajectory}) {
    EstimatorConfig e = est;
    e.attribution = a;
    Rng r1(9), r2(9), r3(9);
    const auto both = reinforce_grad(in.params, in.context, gt, make_prior_masks(&reach, &route, gt), e, cfg, r1);
    const auto route_only = reinforce_grad(in.params, in.context, gt, make_prior_masks(nullptr, &route, gt), e, cfg, r2);
    EXPECT_EQ(both.grad, route_only.grad);
    EXPECT_EQ(both.loss, route_only.loss);
    const auto reach_only = reinforce_grad(in.params, in.context, gt, make_prior_masks(&reach, nullptr, gt), e, cfg, r3);
    EXPECT_EQ(reach_only.loss, 0.0);
    for (double g : reach_only.grad) {
      ASSERT_EQ(g, 0.0);
    }
  }
}

TEST(Priors, ReinforceMatchesAnalyticGradientOnOneDimensionalSurrogate)
{
  // K = 1, T = 1, sigma = 1, reward = 1[y_x > 0]; d/dmu_x E[r] = phi(0).
  const auto d = TrajectoryDistribution::from_parameters(
    1, 1, std::vector<double>{0.0}, std::vector<Vec2>{{0.0, 0.0}}, std::vector<double>{1.0},
    std::vector<double>{1.0}, std::vector<double>{0.0});
  DistributionGrad g(1, 1);
  Rng rng(1);
  const int S = 400000;
  reinforce_distribution_grad(
    d, [](int, const Vec2 & y) { return y.x > 0 ? 1.0 : 0.0; }, {S, Attribution::waypoint, Baseline::none},
    rng, g);
  // The estimator returns the gradient of the negative expected reward.
  const double se = std::sqrt(0.5 - 0.398942 * 0.398942 / 1.0) / std::sqrt(S);
  EXPECT_NEAR(-g.mean[0].x, 1.0 / std::sqrt(2.0 * std::numbers::pi), 4 * std::max(se, 1e-3));
}

TEST(Priors, ConstantRewardWithBaselineGivesZeroGradient)
{
  const auto in = fd::random_instance(5);
  const auto d = forward(in.params, in.context);
  for (Attribution a : {Attribution::waypoint, Attribution::trajectory}) {
    DistributionGrad g(kModes, kHorizon);
    Rng rng(2);
    reinforce_distribution_grad(d, [](int, const Vec2 &) { return 3.0; }, {32, a, Baseline::mean_reward}, rng, g);
    for (double v : raw_output_grad(d, g)) {
      EXPECT_NEAR(v, 0.0, 1e-12);
    }
  }
}

TEST(Priors, ClosestModeMatchesBruteForce)
{
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto in = fd::random_instance(seed);
    const auto d = forward(in.params, in.context);
    int best = -1;
    double best_d = 1e300;
    for (int k = 0; k < kModes; ++k) {
      double s = 0;
      for (int t = 0; t < kHorizon; ++t) {
        s += std::hypot(d.mean(k, t).x - in.target[t].x, d.mean(k, t).y - in.target[t].y);
      }
      if (s < best_d) { best_d = s; best = k; }
    }
    EXPECT_EQ(closest_mode(d, in.target), best);
  }
}

TEST(Priors, SymmetricLossValueAndGradient)
{
  // Zero parameters, target at the origin: -log(1/16) - 11 * log N(0; 0, s^2 I).
  const auto zero = ModelParams::zeros();
  const std::vector<Vec2> origin(kHorizon);
  const double s = std::log(2.0) + 1e-3;
  const double expected = std::log(16.0) + 11 * (std::log(2 * std::numbers::pi) + 2 * std::log(s));
  EXPECT_NEAR(symmetric_loss_grad(zero, ActorContext{}, origin).loss, expected, 1e-10);

  Rng rng(13);
  for (std::uint64_t seed = 30; seed < 33; ++seed) {
    const auto in = fd::random_instance(seed);
    const auto analytic = symmetric_loss_grad(in.params, in.context, in.target).grad;
    for (std::size_t i : fd::sample_coordinates(rng, 8)) {
      EXPECT_LT(fd::relative_error(analytic[i], fd::oracle_central(in, fd::oracle_symmetric_loss, i)), 1e-4) << i;
    }
  }
}

TEST(Priors, RelaxedLossesMatchFiniteDifferencesWithFrozenNoise)
{
  Rng rng(4);
  std::array<double, kCellCount> v{};
  for (auto & x : v) x = rng.uniform(0.0, 12.0);
  const DistanceField field(FieldKind::to_boundary, v);
  const auto in = fd::random_instance(8);
  const auto d = forward(in.params, in.context);
  std::vector<double> raw(d.raw().begin(), d.raw().end());
  const auto draws = draw_noise(d, 6, rng);

  DistributionGrad gm(kModes, kHorizon), gs(kModes, kHorizon);
  relaxed_mean_loss(d, field, 1.0, gm);
  relaxed_samples_loss(d, field, draws, 1.0, gs);
  const auto am = raw_output_grad(d, gm);
  const auto as = raw_output_grad(d, gs);
  auto fm = [&](const std::vector<double> & r) {
    DistributionGrad unused(kModes, kHorizon);
    return relaxed_mean_loss(TrajectoryDistribution(kModes, kHorizon, r), field, 1.0, unused);
  };
  auto fs = [&](const std::vector<double> & r) {
    DistributionGrad unused(kModes, kHorizon);
    return relaxed_samples_loss(TrajectoryDistribution(kModes, kHorizon, r), field, draws, 1.0, unused);
  };
  // The field is piecewise bilinear; a step that crosses a cell line changes the slope,
  // so compare with an absolute tolerance scaled to the gradient size.
  int checked = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double nm = fd::central(fm, raw, i, 1e-7);
    const double ns = fd::central(fs, raw, i, 1e-7);
    EXPECT_NEAR(am[i], nm, 1e-5 * std::max(1.0, std::abs(nm))) << i;
    EXPECT_NEAR(as[i], ns, 1e-5 * std::max(1.0, std::abs(ns))) << i;
    ++checked;
  }
  EXPECT_EQ(checked, kOutputSize);
}

TEST(Priors, TotalLossCombinesWeightedTerms)
{
  DatasetConfig cfg;
  cfg.counts[WorldKind::straight_multilane] = 1;
  const auto scenes = generate_dataset(cfg, 4);
  const auto examples = prepare_examples(scenes.front());
  ASSERT_FALSE(examples.empty());
  std::vector<const ActorExample *> batch;
  for (const auto & e : examples) batch.push_back(&e);
  const auto params = init_params(1);
  const LossWeights w{0.1, 0.1};
  const EstimatorConfig est;
  const RewardConfig reward;

  Rng r1(3);
  const auto mle = total_loss_grad(params, batch, LossMode::mle_only, w, est, reward, r1);
  double sym = 0.0;
  GradientVector grad(ModelParams::count, 0.0);
  for (const auto * e : batch) {
    const auto s = symmetric_loss_grad(params, e->context, e->gt);
    sym += s.loss / batch.size();
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += w.beta * s.grad[i] / batch.size();
  }
  EXPECT_NEAR(mle.loss.symmetric, sym, 1e-9);
  EXPECT_EQ(mle.loss.prior, 0.0);
  EXPECT_NEAR(mle.loss.total, w.beta * sym, 1e-10);
  for (std::size_t i = 0; i < grad.size(); i += 97) {
    EXPECT_NEAR(mle.grad[i], grad[i], 1e-9 * std::max(1.0, std::abs(grad[i])));
  }

  Rng r2(3), r3(3);
  const auto a = total_loss_grad(params, batch, LossMode::reinforce, w, est, reward, r2);
  const auto b = total_loss_grad(params, batch, LossMode::reinforce, w, est, reward, r3);
  EXPECT_EQ(a.grad, b.grad);
  EXPECT_NEAR(a.loss.total, w.beta * a.loss.symmetric + w.gamma * a.loss.prior, 1e-12);
  EXPECT_NEAR(a.loss.symmetric, sym, 1e-9);
  EXPECT_THROW(total_loss_grad(params, {}, LossMode::mle_only, w, est, reward, r1), Error);
}

TEST(Priors, LossModeNames)
{
  for (auto m : {LossMode::mle_only, LossMode::reinforce, LossMode::relaxed_boundary_reparam}) {
    EXPECT_EQ(loss_mode_from_string(to_string(m)), m);
  }
  EXPECT_THROW(loss_mode_from_string("reinforcement"), Error);
}
