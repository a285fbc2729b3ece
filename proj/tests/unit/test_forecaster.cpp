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
#include "priorforecast/forecaster.hpp"

#include "../common/finite_difference.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

using namespace priorforecast;

namespace
{

TrajectoryDistribution single(double mx, double my, double sx, double sy, double rho, int steps = 1)
{
  std::vector<Vec2> means(steps, Vec2{mx, my});
  std::vector<double> vx(steps, sx), vy(steps, sy), vr(steps, rho);
  const std::vector<double> logits{0.0};
  return TrajectoryDistribution::from_parameters(1, steps, logits, means, vx, vy, vr);
}

// Bivariate normal density written out from the textbook formula.
double textbook_density(const Vec2 & p, const Vec2 & m, double sx, double sy, double r)
{
  const double zx = (p.x - m.x) / sx;
  const double zy = (p.y - m.y) / sy;
  const double z = zx * zx - 2 * r * zx * zy + zy * zy;
  return std::exp(-z / (2 * (1 - r * r))) / (2 * std::numbers::pi * sx * sy * std::sqrt(1 - r * r));
}

}  // namespace

TEST(Forecaster, ParameterLayout)
{
  EXPECT_EQ(kOutputSize, 16 * (1 + 5 * 11));
  EXPECT_EQ(ModelParams::count,
            std::size_t(34 * 128 + 128 + 128 * 128 + 128 + 896 * 128 + 896));
}

TEST(Forecaster, ZeroParametersGiveUniformIsotropicMixture)
{
  const auto d = forward(ModelParams::zeros(), ActorContext{});
  double sum = 0.0;
  for (int k = 0; k < kModes; ++k) {
    EXPECT_NEAR(d.prob(k), 1.0 / 16.0, 1e-15);
    sum += d.prob(k);
    for (int t = 0; t < kHorizon; ++t) {
      EXPECT_EQ(d.mean(k, t).x, 0.0);
      EXPECT_NEAR(d.sigma_x(k, t), std::log(2.0) + 1e-3, 1e-15);
      EXPECT_EQ(d.rho(k, t), 0.0);
    }
  }
  EXPECT_NEAR(sum, 1.0, 1e-14);
}

TEST(Forecaster, SoftmaxIsStableForLargeLogits)
{
  std::vector<double> raw(2 * (1 + 5), 0.0);
  raw[raw_logit_offset(0, 1)] = 800.0;
  raw[raw_logit_offset(1, 1)] = 750.0;
  const TrajectoryDistribution d(2, 1, raw);
  EXPECT_NEAR(d.prob(0), 1.0, 1e-15);
  EXPECT_NEAR(d.log_prob(1), -50.0, 1e-9);
  EXPECT_TRUE(std::isfinite(d.log_prob(1)));
}

TEST(Forecaster, ConstraintMaps)
{
  EXPECT_NEAR(softplus(0.0), std::log(2.0), 1e-15);
  EXPECT_NEAR(softplus(40.0), 40.0, 1e-12);
  EXPECT_GT(softplus(-40.0), 0.0);
  EXPECT_NEAR(sigmoid(-800.0), 0.0, 1e-300);
  std::vector<double> raw(1 + 5, 0.0);
  raw[raw_offset(0, 0, 2, 1)] = -1000.0;
  raw[raw_offset(0, 0, 4, 1)] = 1000.0;
  const TrajectoryDistribution d(1, 1, raw);
  EXPECT_GE(d.sigma_x(0, 0), kSigmaFloor);
  EXPECT_LE(d.rho(0, 0), kRhoCap);
  EXPECT_THROW(TrajectoryDistribution(1, 1, std::vector<double>(5)), Error);
}

TEST(Forecaster, FromParametersRoundTrip)
{
  const auto d = single(3.0, -1.0, 1.7, 0.4, -0.6);
  EXPECT_NEAR(d.mean(0, 0).x, 3.0, 1e-12);
  EXPECT_NEAR(d.sigma_x(0, 0), 1.7, 1e-12);
  EXPECT_NEAR(d.sigma_y(0, 0), 0.4, 1e-12);
  EXPECT_NEAR(d.rho(0, 0), -0.6, 1e-12);
  EXPECT_THROW(single(0, 0, 1, 1, 0.995), Error);
}

TEST(Forecaster, GaussianDensityMatchesTextbookFormula)
{
  EXPECT_NEAR(gaussian_log_density({0, 0}, {0, 0}, 1, 1, 0), -std::log(2 * std::numbers::pi), 1e-15);
  Rng rng(4);
  for (int n = 0; n < 1000; ++n) {
    const Vec2 p{rng.uniform(-5, 5), rng.uniform(-5, 5)};
    const Vec2 m{rng.uniform(-5, 5), rng.uniform(-5, 5)};
    const double sx = rng.uniform(0.3, 3), sy = rng.uniform(0.3, 3), r = rng.uniform(-0.95, 0.95);
    const double ref = textbook_density(p, m, sx, sy, r);
    if (ref < 1e-250) continue;  // underflows in linear space
    EXPECT_NEAR(gaussian_log_density(p, m, sx, sy, r), std::log(ref), 1e-10);
  }
}

TEST(Forecaster, MixtureLikelihoodMatchesDirectSum)
{
  const auto in = fd::random_instance(9);
  const auto d = forward(in.params, in.context);
  // Direct product and sum in linear space with a common shift.
  std::vector<double> terms;
  for (int k = 0; k < kModes; ++k) {
    double lp = std::log(d.prob(k));
    for (int t = 0; t < kHorizon; ++t) {
      lp += std::log(textbook_density(in.target[t], d.mean(k, t), d.sigma_x(k, t), d.sigma_y(k, t), d.rho(k, t)));
    }
    terms.push_back(lp);
  }
  const double top = *std::max_element(terms.begin(), terms.end());
  double s = 0.0;
  for (double v : terms) s += std::exp(v - top);
  EXPECT_NEAR(log_likelihood(d, in.target), top + std::log(s), 1e-9);
  EXPECT_THROW(log_likelihood(d, std::vector<Vec2>(3)), Error);
}

TEST(Forecaster, CholeskyFactor)
{
  const auto a = cholesky_2x2(2.0, 3.0, 0.5);
  EXPECT_NEAR(a.a11, 2.0, 1e-15);
  EXPECT_NEAR(a.a21, 1.5, 1e-15);
  EXPECT_NEAR(a.a22, 3.0 * std::sqrt(0.75), 1e-15);
  // L L^T reproduces the covariance.
  EXPECT_NEAR(a.a11 * a.a11, 4.0, 1e-12);
  EXPECT_NEAR(a.a11 * a.a21, 0.5 * 2.0 * 3.0, 1e-12);
  EXPECT_NEAR(a.a21 * a.a21 + a.a22 * a.a22, 9.0, 1e-12);
  EXPECT_THROW(cholesky_2x2(1.0, 1.0, 1.0), Error);
  EXPECT_THROW(cholesky_2x2(0.0, 1.0, 0.0), Error);
}

TEST(Forecaster, DistributionGradientsMatchFiniteDifferences)
{
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto in = fd::random_instance(seed);
    const auto d = forward(in.params, in.context);
    DistributionGrad g(kModes, kHorizon);
    accumulate_log_likelihood_grad(d, in.target, 1.0, g);
    const auto analytic = raw_output_grad(d, g);
    std::vector<double> raw(d.raw().begin(), d.raw().end());
    auto f = [&](const std::vector<double> & r) {
      return log_likelihood(TrajectoryDistribution(kModes, kHorizon, r), in.target);
    };
    for (std::size_t i = 0; i < raw.size(); ++i) {
      EXPECT_LT(fd::relative_error(analytic[i], fd::central(f, raw, i)), 1e-4) << seed << " " << i;
    }
  }
}

TEST(Forecaster, WaypointGradientMatchesFiniteDifferences)
{
  const auto in = fd::random_instance(12);
  const auto d = forward(in.params, in.context);
  DistributionGrad g(kModes, kHorizon);
  accumulate_waypoint_log_likelihood_grad(d, 4, in.target[4], 1.0, g);
  const auto analytic = raw_output_grad(d, g);
  std::vector<double> raw(d.raw().begin(), d.raw().end());
  auto f = [&](const std::vector<double> & r) {
    return waypoint_log_likelihood(TrajectoryDistribution(kModes, kHorizon, r), 4, in.target[4]);
  };
  for (std::size_t i = 0; i < raw.size(); ++i) {
    EXPECT_LT(fd::relative_error(analytic[i], fd::central(f, raw, i)), 1e-4) << i;
  }
}

TEST(Forecaster, NetworkGradientMatchesFiniteDifferences)
{
  Rng rng(77);
  for (std::uint64_t seed = 20; seed < 23; ++seed) {
    const auto in = fd::random_instance(seed);
    const auto analytic = grad_log_likelihood(in.params, in.context, in.target);
    for (std::size_t i : fd::sample_coordinates(rng, 8)) {
      EXPECT_LT(fd::relative_error(analytic[i], fd::oracle_central(in, fd::oracle_log_likelihood, i)), 1e-4) << i;
    }
  }
}

TEST(Forecaster, SamplerFollowsMixture)
{
  // Two well separated modes with weights 0.25 / 0.75.
  const std::vector<double> logits{0.0, std::log(3.0)};
  const std::vector<Vec2> means{{-10, 0}, {-10, 0}, {10, 5}, {10, 5}};
  const std::vector<double> sx{1.0, 1.0, 2.0, 2.0}, sy{0.5, 0.5, 1.0, 1.0}, rho{0.3, 0.3, -0.7, -0.7};
  const auto d = TrajectoryDistribution::from_parameters(2, 2, logits, means, sx, sy, rho);
  Rng rng(6);
  const int n = 200000;
  const auto samples = sample_trajectories(d, n, rng, SamplerMode::independent);
  int mode1 = 0;
  double mx = 0, my = 0, cxx = 0, cyy = 0, cxy = 0;
  int n1 = 0;
  for (const auto & s : samples) {
    mode1 += s.mode;
    if (s.mode == 1) {
      const Vec2 p = s.waypoints[1];
      mx += p.x; my += p.y; cxx += p.x * p.x; cyy += p.y * p.y; cxy += p.x * p.y;
      ++n1;
      EXPECT_GT(p.x, -0.5);  // never mixes modes
    }
  }
  const double frac = double(mode1) / n;
  EXPECT_NEAR(frac, 0.75, 4 * std::sqrt(0.75 * 0.25 / n));
  mx /= n1; my /= n1;
  const double vx = cxx / n1 - mx * mx, vy = cyy / n1 - my * my, c = cxy / n1 - mx * my;
  EXPECT_NEAR(mx, 10.0, 0.03);
  EXPECT_NEAR(my, 5.0, 0.02);
  EXPECT_NEAR(vx, 4.0, 0.06);
  EXPECT_NEAR(vy, 1.0, 0.015);
  EXPECT_NEAR(c, -0.7 * 2.0 * 1.0, 0.03);
}

TEST(Forecaster, SmoothSamplerSharesNoiseAcrossSteps)
{
  const auto in = fd::random_instance(3);
  const auto d = forward(in.params, in.context);
  Rng a(5), b(5);
  const auto s = sample_trajectories(d, 20, a, SamplerMode::smooth);
  for (const auto & x : s) {
    for (int t = 1; t < kHorizon; ++t) {
      EXPECT_EQ(x.noise[t].x, x.noise[0].x);
    }
    const auto back = reparameterize(d, x.mode, x.noise);
    EXPECT_EQ(back[7].y, x.waypoints[7].y);
  }
  // Same seed, same draws.
  const auto again = sample_trajectories(d, 20, b, SamplerMode::smooth);
  EXPECT_EQ(again[19].waypoints[10].x, s[19].waypoints[10].x);
}

TEST(Forecaster, SaveLoadIsBitExact)
{
  const auto p = init_params(31);
  const auto path = std::filesystem::temp_directory_path() / "pf_test_params.pfmp";
  save_params(path, p);
  const auto q = load_params(path);
  EXPECT_EQ(p.values, q.values);
  write_text_file(path, "PFMP garbage");
  EXPECT_THROW(load_params(path), Error);
  std::filesystem::remove(path);
  EXPECT_THROW(load_params(path), Error);
}

TEST(Forecaster, InitIsDeterministicAndFinite)
{
  EXPECT_EQ(init_params(2).values, init_params(2).values);
  EXPECT_NE(init_params(2).values, init_params(3).values);
  auto bad = init_params(2);
  bad.values[100] = std::nan("");
  EXPECT_THROW(check_params(bad), Error);
}
