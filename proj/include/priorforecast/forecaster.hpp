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

#ifndef PRIORFORECAST__FORECASTER_HPP_
#define PRIORFORECAST__FORECASTER_HPP_

#include "priorforecast/features.hpp"
#include "priorforecast/geometry.hpp"
#include "priorforecast/rng.hpp"
#include "priorforecast/scene.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace priorforecast
{

constexpr int kModes = 16;
constexpr int kHorizon = kFutureSteps;
constexpr int kHidden = 128;
constexpr int kOutputsPerStep = 5;
constexpr int kOutputsPerMode = 1 + kOutputsPerStep * kHorizon;
constexpr int kOutputSize = kModes * kOutputsPerMode;

constexpr double kSigmaFloor = 1e-3;
constexpr double kRhoCap = 0.99;
/// Metres per unit of raw mean output.
constexpr double kMeanScale = 10.0;

/// Raw outputs per mode: [logit, (mx, my, sx, sy, c) for each step].
constexpr int raw_offset(int k, int t, int field, int steps = kHorizon)
{
  return k * (1 + kOutputsPerStep * steps) + 1 + kOutputsPerStep * t + field;
}
constexpr int raw_logit_offset(int k, int steps = kHorizon)
{
  return k * (1 + kOutputsPerStep * steps);
}

double softplus(double x);
double sigmoid(double x);

/**
 * @brief Mixture of K Gaussian trajectories over T waypoints.
 *
 * Built from raw network outputs; constrained parameters are derived once:
 * sigma = softplus(s) + floor, rho = cap * tanh(c), mean = kMeanScale * raw.
 */
class TrajectoryDistribution
{
public:
  TrajectoryDistribution(int modes, int steps, std::vector<double> raw);

  /// Inverse of the output maps; used to build distributions directly in tests and tools.
  static TrajectoryDistribution from_parameters(
    int modes, int steps, std::span<const double> logits, std::span<const Vec2> means,
    std::span<const double> sigma_x, std::span<const double> sigma_y, std::span<const double> rho);

  int modes() const { return modes_; }
  int steps() const { return steps_; }
  std::span<const double> raw() const { return raw_; }

  int index(int k, int t) const { return k * steps_ + t; }
  double logit(int k) const { return raw_[raw_logit_offset(k, steps_)]; }
  double log_prob(int k) const { return log_probs_[k]; }
  double prob(int k) const { return probs_[k]; }
  std::span<const double> probs() const { return probs_; }
  const Vec2 & mean(int k, int t) const { return means_[index(k, t)]; }
  double sigma_x(int k, int t) const { return sigma_x_[index(k, t)]; }
  double sigma_y(int k, int t) const { return sigma_y_[index(k, t)]; }
  double rho(int k, int t) const { return rho_[index(k, t)]; }

private:
  int modes_;
  int steps_;
  std::vector<double> raw_;
  std::vector<double> log_probs_;
  std::vector<double> probs_;
  std::vector<Vec2> means_;
  std::vector<double> sigma_x_;
  std::vector<double> sigma_y_;
  std::vector<double> rho_;
};

/// Gradient with respect to the constrained distribution parameters.
struct DistributionGrad
{
  DistributionGrad(int modes, int steps);

  int modes;
  int steps;
  std::vector<double> logit;
  std::vector<Vec2> mean;
  std::vector<double> sigma_x;
  std::vector<double> sigma_y;
  std::vector<double> rho;

  void add(const DistributionGrad & o, double weight = 1.0);
};

/// Chain rule through the output maps: d/d(raw outputs).
std::vector<double> raw_output_grad(const TrajectoryDistribution & dist, const DistributionGrad & g);

struct Cholesky2
{
  double a11{1.0};
  double a21{0.0};
  double a22{1.0};

  Vec2 apply(const Vec2 & eps) const { return {a11 * eps.x, a21 * eps.x + a22 * eps.y}; }
};

/// Lower-triangular A with A * A^T = Sigma. Throws Error{invalid_covariance}.
Cholesky2 cholesky_2x2(double sigma_x, double sigma_y, double rho);

/// Log density of one bivariate normal component.
double gaussian_log_density(const Vec2 & point, const Vec2 & mean, double sx, double sy, double rho);

/// log sum_k p(k) N(point | mode k at step t).
double waypoint_log_likelihood(const TrajectoryDistribution & dist, int t, const Vec2 & point);
/// log sum_k p(k) prod_t N(y_t | mode k at step t).
double log_likelihood(const TrajectoryDistribution & dist, std::span<const Vec2> trajectory);

/// Adds weight * d(value)/d(params) into `grad`; returns the value.
double accumulate_waypoint_log_likelihood_grad(
  const TrajectoryDistribution & dist, int t, const Vec2 & point, double weight,
  DistributionGrad & grad);
double accumulate_log_likelihood_grad(
  const TrajectoryDistribution & dist, std::span<const Vec2> trajectory, double weight,
  DistributionGrad & grad);

/// Adds weight * d log N(point | k, t) / d(params of k at t) into `grad`.
void accumulate_component_grad(
  const TrajectoryDistribution & dist, int k, int t, const Vec2 & point, double weight,
  DistributionGrad & grad);

enum class SamplerMode { independent, smooth };

struct TrajectorySample
{
  std::vector<Vec2> waypoints;
  int mode{0};
  /// Standard normal noise per step (identical entries for the smooth sampler).
  std::vector<Vec2> noise;
};

std::vector<TrajectorySample> sample_trajectories(
  const TrajectoryDistribution & dist, int count, Rng & rng, SamplerMode mode);

/// Waypoints of a sample with the given mode and noise (reparameterized form).
std::vector<Vec2> reparameterize(
  const TrajectoryDistribution & dist, int mode, std::span<const Vec2> noise);

// ---------------------------------------------------------------------------
// Network

struct ModelParams
{
  std::vector<double> values;

  static constexpr std::size_t w1 = 0;
  static constexpr std::size_t b1 = w1 + kHidden * kFeatureSize;
  static constexpr std::size_t w2 = b1 + kHidden;
  static constexpr std::size_t b2 = w2 + kHidden * kHidden;
  static constexpr std::size_t w3 = b2 + kHidden;
  static constexpr std::size_t b3 = w3 + kOutputSize * kHidden;
  static constexpr std::size_t count = b3 + kOutputSize;

  static ModelParams zeros() { return {std::vector<double>(count, 0.0)}; }
};

using GradientVector = std::vector<double>;

/// He-style uniform hidden layers; the output layer uses a smaller Glorot range.
ModelParams init_params(std::uint64_t seed);

/// Fixed per-feature scaling applied before the first layer.
const ActorContext & feature_scale();

/// Activations kept for one backward pass.
struct ForwardTrace
{
  ActorContext input{};
  std::array<double, kHidden> h1{};
  std::array<double, kHidden> h2{};
  std::vector<double> output;
};

/// No parameter validation; see forward().
ForwardTrace forward_trace(const ModelParams & params, const ActorContext & context);
/// Throws Error{non_finite_params, shape_mismatch}.
TrajectoryDistribution forward(const ModelParams & params, const ActorContext & context);
TrajectoryDistribution distribution_from_trace(const ForwardTrace & trace);

/// grad += J^T d_output for the network at `trace`.
void backprop(
  const ModelParams & params, const ForwardTrace & trace, std::span<const double> d_output,
  GradientVector & grad);

void check_params(const ModelParams & params);
/// Throws Error{non_finite_gradient}.
void check_gradient(std::span<const double> grad);

GradientVector grad_log_likelihood(
  const ModelParams & params, const ActorContext & context, std::span<const Vec2> trajectory);
GradientVector grad_waypoint_log_likelihood(
  const ModelParams & params, const ActorContext & context, int t, const Vec2 & point);

/// Binary checkpoint: "PFMP", version, K, T as little-endian u32, then f64 values.
void save_params(const std::filesystem::path & path, const ModelParams & params);
/// Throws Error{io_error, parse_error, shape_mismatch}.
ModelParams load_params(const std::filesystem::path & path);
std::string params_to_bytes(const ModelParams & params);
nlohmann::json params_to_json(const ModelParams & params);

}  // namespace priorforecast

#endif  // PRIORFORECAST__FORECASTER_HPP_
