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

#include "priorforecast/forecaster.hpp"

#include "priorforecast/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

namespace priorforecast
{

namespace
{

constexpr double kLog2Pi = 1.8378770664093453;  // log(2 pi)
constexpr std::uint32_t kParamsVersion = 1;

double log_sum_exp(std::span<const double> a)
{
  const double m = *std::max_element(a.begin(), a.end());
  if (!std::isfinite(m)) {
    return m;
  }
  double s = 0.0;
  for (double v : a) {
    s += std::exp(v - m);
  }
  return m + std::log(s);
}

double inverse_softplus(double y)
{
  // log(exp(y) - 1), stable for large y.
  return y > 30.0 ? y + std::log1p(-std::exp(-y)) : std::log(std::expm1(y));
}

void put_u32(std::string & out, std::uint32_t v)
{
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  }
}

std::uint32_t get_u32(const std::string & in, std::size_t pos)
{
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  }
  return v;
}

}  // namespace

double softplus(double x)
{
  if (x > 30.0) {
    return x;
  }
  if (x < -30.0) {
    return std::exp(x);
  }
  return std::log1p(std::exp(x));
}

double sigmoid(double x)
{
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

TrajectoryDistribution::TrajectoryDistribution(int modes, int steps, std::vector<double> raw)
: modes_(modes), steps_(steps), raw_(std::move(raw))
{
  if (modes < 1 || steps < 1 ||
      raw_.size() != static_cast<std::size_t>(modes * (1 + kOutputsPerStep * steps))) {
    throw Error(ErrorCode::shape_mismatch, "raw output size does not match modes and steps");
  }
  std::vector<double> logits(modes);
  for (int k = 0; k < modes; ++k) {
    logits[k] = logit(k);
  }
  const double lse = log_sum_exp(logits);
  log_probs_.resize(modes);
  probs_.resize(modes);
  for (int k = 0; k < modes; ++k) {
    log_probs_[k] = logits[k] - lse;
    probs_[k] = std::exp(log_probs_[k]);
  }
  const std::size_t n = static_cast<std::size_t>(modes * steps);
  means_.resize(n);
  sigma_x_.resize(n);
  sigma_y_.resize(n);
  rho_.resize(n);
  for (int k = 0; k < modes; ++k) {
    for (int t = 0; t < steps; ++t) {
      const int i = index(k, t);
      means_[i] = {kMeanScale * raw_[raw_offset(k, t, 0, steps)],
                   kMeanScale * raw_[raw_offset(k, t, 1, steps)]};
      sigma_x_[i] = softplus(raw_[raw_offset(k, t, 2, steps)]) + kSigmaFloor;
      sigma_y_[i] = softplus(raw_[raw_offset(k, t, 3, steps)]) + kSigmaFloor;
      rho_[i] = kRhoCap * std::tanh(raw_[raw_offset(k, t, 4, steps)]);
    }
  }
}

TrajectoryDistribution TrajectoryDistribution::from_parameters(
  int modes, int steps, std::span<const double> logits, std::span<const Vec2> means,
  std::span<const double> sigma_x, std::span<const double> sigma_y, std::span<const double> rho)
{
  const std::size_t n = static_cast<std::size_t>(modes * steps);
  if (logits.size() != static_cast<std::size_t>(modes) || means.size() != n ||
      sigma_x.size() != n || sigma_y.size() != n || rho.size() != n) {
    throw Error(ErrorCode::shape_mismatch, "distribution parameter sizes");
  }
  std::vector<double> raw(static_cast<std::size_t>(modes * (1 + kOutputsPerStep * steps)));
  for (int k = 0; k < modes; ++k) {
    raw[raw_logit_offset(k, steps)] = logits[k];
    for (int t = 0; t < steps; ++t) {
      const std::size_t i = static_cast<std::size_t>(k * steps + t);
      if (!(sigma_x[i] > kSigmaFloor && sigma_y[i] > kSigmaFloor && std::abs(rho[i]) < kRhoCap)) {
        throw Error(ErrorCode::invalid_covariance, "parameters outside the representable range");
      }
      raw[raw_offset(k, t, 0, steps)] = means[i].x / kMeanScale;
      raw[raw_offset(k, t, 1, steps)] = means[i].y / kMeanScale;
      raw[raw_offset(k, t, 2, steps)] = inverse_softplus(sigma_x[i] - kSigmaFloor);
      raw[raw_offset(k, t, 3, steps)] = inverse_softplus(sigma_y[i] - kSigmaFloor);
      raw[raw_offset(k, t, 4, steps)] = std::atanh(rho[i] / kRhoCap);
    }
  }
  return TrajectoryDistribution(modes, steps, std::move(raw));
}

DistributionGrad::DistributionGrad(int k, int t)
: modes(k),
  steps(t),
  logit(k, 0.0),
  mean(static_cast<std::size_t>(k * t)),
  sigma_x(static_cast<std::size_t>(k * t), 0.0),
  sigma_y(static_cast<std::size_t>(k * t), 0.0),
  rho(static_cast<std::size_t>(k * t), 0.0)
{
}

void DistributionGrad::add(const DistributionGrad & o, double weight)
{
  for (std::size_t i = 0; i < logit.size(); ++i) {
    logit[i] += weight * o.logit[i];
  }
  for (std::size_t i = 0; i < mean.size(); ++i) {
    mean[i] += o.mean[i] * weight;
    sigma_x[i] += weight * o.sigma_x[i];
    sigma_y[i] += weight * o.sigma_y[i];
    rho[i] += weight * o.rho[i];
  }
}

std::vector<double> raw_output_grad(const TrajectoryDistribution & dist, const DistributionGrad & g)
{
  const int steps = dist.steps();
  const auto raw = dist.raw();
  std::vector<double> out(raw.size(), 0.0);
  for (int k = 0; k < dist.modes(); ++k) {
    out[raw_logit_offset(k, steps)] = g.logit[k];
    for (int t = 0; t < steps; ++t) {
      const int i = dist.index(k, t);
      out[raw_offset(k, t, 0, steps)] = kMeanScale * g.mean[i].x;
      out[raw_offset(k, t, 1, steps)] = kMeanScale * g.mean[i].y;
      out[raw_offset(k, t, 2, steps)] = g.sigma_x[i] * sigmoid(raw[raw_offset(k, t, 2, steps)]);
      out[raw_offset(k, t, 3, steps)] = g.sigma_y[i] * sigmoid(raw[raw_offset(k, t, 3, steps)]);
      const double th = std::tanh(raw[raw_offset(k, t, 4, steps)]);
      out[raw_offset(k, t, 4, steps)] = g.rho[i] * kRhoCap * (1.0 - th * th);
    }
  }
  return out;
}

Cholesky2 cholesky_2x2(double sigma_x, double sigma_y, double rho)
{
  if (!(sigma_x > 0.0 && sigma_y > 0.0 && std::abs(rho) < 1.0)) {
    throw Error(ErrorCode::invalid_covariance, "need sigma > 0 and |rho| < 1");
  }
  return {sigma_x, rho * sigma_y, sigma_y * std::sqrt(1.0 - rho * rho)};
}

double gaussian_log_density(const Vec2 & point, const Vec2 & mean, double sx, double sy, double rho)
{
  const double dx = (point.x - mean.x) / sx;
  const double dy = (point.y - mean.y) / sy;
  const double one_m = 1.0 - rho * rho;
  const double q = (dx * dx - 2.0 * rho * dx * dy + dy * dy) / one_m;
  return -kLog2Pi - std::log(sx) - std::log(sy) - 0.5 * std::log(one_m) - 0.5 * q;
}

namespace
{

double component_log_density(const TrajectoryDistribution & d, int k, int t, const Vec2 & p)
{
  return gaussian_log_density(p, d.mean(k, t), d.sigma_x(k, t), d.sigma_y(k, t), d.rho(k, t));
}

}  // namespace

void accumulate_component_grad(
  const TrajectoryDistribution & dist, int k, int t, const Vec2 & point, double weight,
  DistributionGrad & grad)
{
  const int i = dist.index(k, t);
  const double sx = dist.sigma_x(k, t);
  const double sy = dist.sigma_y(k, t);
  const double r = dist.rho(k, t);
  const Vec2 mu = dist.mean(k, t);
  const double dx = (point.x - mu.x) / sx;
  const double dy = (point.y - mu.y) / sy;
  const double one_m = 1.0 - r * r;
  const double a = dx * dx - 2.0 * r * dx * dy + dy * dy;
  grad.mean[i].x += weight * (dx - r * dy) / (sx * one_m);
  grad.mean[i].y += weight * (dy - r * dx) / (sy * one_m);
  grad.sigma_x[i] += weight * (-1.0 + dx * (dx - r * dy) / one_m) / sx;
  grad.sigma_y[i] += weight * (-1.0 + dy * (dy - r * dx) / one_m) / sy;
  grad.rho[i] += weight * (r / one_m + dx * dy / one_m - r * a / (one_m * one_m));
}

double waypoint_log_likelihood(const TrajectoryDistribution & dist, int t, const Vec2 & point)
{
  std::vector<double> a(dist.modes());
  for (int k = 0; k < dist.modes(); ++k) {
    a[k] = dist.log_prob(k) + component_log_density(dist, k, t, point);
  }
  return log_sum_exp(a);
}

double log_likelihood(const TrajectoryDistribution & dist, std::span<const Vec2> trajectory)
{
  if (trajectory.size() != static_cast<std::size_t>(dist.steps())) {
    throw Error(ErrorCode::shape_mismatch, "trajectory length");
  }
  std::vector<double> a(dist.modes());
  for (int k = 0; k < dist.modes(); ++k) {
    a[k] = dist.log_prob(k);
    for (int t = 0; t < dist.steps(); ++t) {
      a[k] += component_log_density(dist, k, t, trajectory[t]);
    }
  }
  return log_sum_exp(a);
}

double accumulate_waypoint_log_likelihood_grad(
  const TrajectoryDistribution & dist, int t, const Vec2 & point, double weight,
  DistributionGrad & grad)
{
  const int K = dist.modes();
  std::vector<double> a(K);
  for (int k = 0; k < K; ++k) {
    a[k] = dist.log_prob(k) + component_log_density(dist, k, t, point);
  }
  const double value = log_sum_exp(a);
  for (int k = 0; k < K; ++k) {
    const double resp = std::exp(a[k] - value);
    grad.logit[k] += weight * (resp - dist.prob(k));
    if (resp > 0.0) {
      accumulate_component_grad(dist, k, t, point, weight * resp, grad);
    }
  }
  return value;
}

double accumulate_log_likelihood_grad(
  const TrajectoryDistribution & dist, std::span<const Vec2> trajectory, double weight,
  DistributionGrad & grad)
{
  const int K = dist.modes();
  const int T = dist.steps();
  if (trajectory.size() != static_cast<std::size_t>(T)) {
    throw Error(ErrorCode::shape_mismatch, "trajectory length");
  }
  std::vector<double> a(K);
  for (int k = 0; k < K; ++k) {
    a[k] = dist.log_prob(k);
    for (int t = 0; t < T; ++t) {
      a[k] += component_log_density(dist, k, t, trajectory[t]);
    }
  }
  const double value = log_sum_exp(a);
  for (int k = 0; k < K; ++k) {
    const double resp = std::exp(a[k] - value);
    grad.logit[k] += weight * (resp - dist.prob(k));
    if (resp > 0.0) {
      for (int t = 0; t < T; ++t) {
        accumulate_component_grad(dist, k, t, trajectory[t], weight * resp, grad);
      }
    }
  }
  return value;
}

std::vector<Vec2> reparameterize(
  const TrajectoryDistribution & dist, int mode, std::span<const Vec2> noise)
{
  std::vector<Vec2> out(dist.steps());
  for (int t = 0; t < dist.steps(); ++t) {
    const auto a = cholesky_2x2(dist.sigma_x(mode, t), dist.sigma_y(mode, t), dist.rho(mode, t));
    out[t] = dist.mean(mode, t) + a.apply(noise[t]);
  }
  return out;
}

std::vector<TrajectorySample> sample_trajectories(
  const TrajectoryDistribution & dist, int count, Rng & rng, SamplerMode mode)
{
  std::vector<TrajectorySample> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  const auto probs = dist.probs();
  for (int s = 0; s < count; ++s) {
    TrajectorySample sample;
    sample.mode = static_cast<int>(rng.categorical(probs));
    sample.noise.resize(dist.steps());
    for (int t = 0; t < dist.steps(); ++t) {
      if (mode == SamplerMode::smooth && t > 0) {
        sample.noise[t] = sample.noise[0];
      } else {
        const double ex = rng.normal();
        const double ey = rng.normal();
        sample.noise[t] = {ex, ey};
      }
    }
    sample.waypoints = reparameterize(dist, sample.mode, sample.noise);
    out.push_back(std::move(sample));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Network

ModelParams init_params(std::uint64_t seed)
{
  Rng rng = Rng::stream(seed, 0x7061726d73ULL);
  ModelParams p = ModelParams::zeros();
  auto fill = [&](std::size_t offset, std::size_t n, double limit) {
    for (std::size_t i = 0; i < n; ++i) {
      p.values[offset + i] = rng.uniform(-limit, limit);
    }
  };
  fill(ModelParams::w1, kHidden * kFeatureSize, std::sqrt(6.0 / kFeatureSize));
  fill(ModelParams::w2, kHidden * kHidden, std::sqrt(6.0 / kHidden));
  fill(ModelParams::w3, kOutputSize * kHidden, std::sqrt(6.0 / (kHidden + kOutputSize)));
  return p;
}

const ActorContext & feature_scale()
{
  static const ActorContext scale = [] {
    ActorContext s{};
    s[feature_index::speed] = 0.1;
    s[feature_index::heading_rate] = 2.0;
    for (int i = feature_index::past; i < feature_index::red_light; ++i) {
      s[i] = 0.05;
    }
    s[feature_index::red_light] = 1.0;
    s[feature_index::intersection_distance] = 1.0 / kIntersectionRange;
    return s;
  }();
  return scale;
}

ForwardTrace forward_trace(const ModelParams & params, const ActorContext & context)
{
  if (params.values.size() != ModelParams::count) {
    throw Error(ErrorCode::shape_mismatch, "parameter vector length");
  }
  const double * w = params.values.data();
  ForwardTrace tr;
  const auto & scale = feature_scale();
  for (int i = 0; i < kFeatureSize; ++i) {
    tr.input[i] = context[i] * scale[i];
  }
  for (int o = 0; o < kHidden; ++o) {
    const double * row = w + ModelParams::w1 + o * kFeatureSize;
    double a = w[ModelParams::b1 + o];
    for (int i = 0; i < kFeatureSize; ++i) {
      a += row[i] * tr.input[i];
    }
    tr.h1[o] = std::tanh(a);
  }
  for (int o = 0; o < kHidden; ++o) {
    const double * row = w + ModelParams::w2 + o * kHidden;
    double a = w[ModelParams::b2 + o];
    for (int i = 0; i < kHidden; ++i) {
      a += row[i] * tr.h1[i];
    }
    tr.h2[o] = std::tanh(a);
  }
  tr.output.resize(kOutputSize);
  for (int o = 0; o < kOutputSize; ++o) {
    const double * row = w + ModelParams::w3 + static_cast<std::size_t>(o) * kHidden;
    double a = w[ModelParams::b3 + o];
    for (int i = 0; i < kHidden; ++i) {
      a += row[i] * tr.h2[i];
    }
    tr.output[o] = a;
  }
  return tr;
}

TrajectoryDistribution distribution_from_trace(const ForwardTrace & trace)
{
  return TrajectoryDistribution(kModes, kHorizon, trace.output);
}

void check_params(const ModelParams & params)
{
  if (params.values.size() != ModelParams::count) {
    throw Error(ErrorCode::shape_mismatch, "parameter vector length");
  }
  for (std::size_t i = 0; i < params.values.size(); ++i) {
    if (!std::isfinite(params.values[i])) {
      throw Error(ErrorCode::non_finite_params, "parameter " + std::to_string(i));
    }
  }
}

void check_gradient(std::span<const double> grad)
{
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!std::isfinite(grad[i])) {
      throw Error(ErrorCode::non_finite_gradient, "coordinate " + std::to_string(i));
    }
  }
}

TrajectoryDistribution forward(const ModelParams & params, const ActorContext & context)
{
  check_params(params);
  return distribution_from_trace(forward_trace(params, context));
}

void backprop(
  const ModelParams & params, const ForwardTrace & trace, std::span<const double> d_output,
  GradientVector & grad)
{
  if (grad.size() != ModelParams::count) {
    grad.assign(ModelParams::count, 0.0);
  }
  const double * w = params.values.data();
  double * g = grad.data();
  std::array<double, kHidden> d_h2{};
  for (int o = 0; o < kOutputSize; ++o) {
    const double d = d_output[o];
    if (d == 0.0) {
      continue;
    }
    g[ModelParams::b3 + o] += d;
    double * grow = g + ModelParams::w3 + static_cast<std::size_t>(o) * kHidden;
    const double * wrow = w + ModelParams::w3 + static_cast<std::size_t>(o) * kHidden;
    for (int i = 0; i < kHidden; ++i) {
      grow[i] += d * trace.h2[i];
      d_h2[i] += d * wrow[i];
    }
  }
  std::array<double, kHidden> d_h1{};
  for (int o = 0; o < kHidden; ++o) {
    const double d = d_h2[o] * (1.0 - trace.h2[o] * trace.h2[o]);
    g[ModelParams::b2 + o] += d;
    double * grow = g + ModelParams::w2 + o * kHidden;
    const double * wrow = w + ModelParams::w2 + o * kHidden;
    for (int i = 0; i < kHidden; ++i) {
      grow[i] += d * trace.h1[i];
      d_h1[i] += d * wrow[i];
    }
  }
  for (int o = 0; o < kHidden; ++o) {
    const double d = d_h1[o] * (1.0 - trace.h1[o] * trace.h1[o]);
    g[ModelParams::b1 + o] += d;
    double * grow = g + ModelParams::w1 + o * kFeatureSize;
    for (int i = 0; i < kFeatureSize; ++i) {
      grow[i] += d * trace.input[i];
    }
  }
}

GradientVector grad_log_likelihood(
  const ModelParams & params, const ActorContext & context, std::span<const Vec2> trajectory)
{
  const auto trace = forward_trace(params, context);
  const auto dist = distribution_from_trace(trace);
  DistributionGrad dg(kModes, kHorizon);
  accumulate_log_likelihood_grad(dist, trajectory, 1.0, dg);
  GradientVector grad(ModelParams::count, 0.0);
  backprop(params, trace, raw_output_grad(dist, dg), grad);
  check_gradient(grad);
  return grad;
}

GradientVector grad_waypoint_log_likelihood(
  const ModelParams & params, const ActorContext & context, int t, const Vec2 & point)
{
  const auto trace = forward_trace(params, context);
  const auto dist = distribution_from_trace(trace);
  DistributionGrad dg(kModes, kHorizon);
  accumulate_waypoint_log_likelihood_grad(dist, t, point, 1.0, dg);
  GradientVector grad(ModelParams::count, 0.0);
  backprop(params, trace, raw_output_grad(dist, dg), grad);
  check_gradient(grad);
  return grad;
}

std::string params_to_bytes(const ModelParams & params)
{
  std::string out = "PFMP";
  put_u32(out, kParamsVersion);
  put_u32(out, kModes);
  put_u32(out, kHorizon);
  out.reserve(out.size() + 8 * params.values.size());
  for (double v : params.values) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v, sizeof(bits));
    for (int i = 0; i < 8; ++i) {
      out.push_back(static_cast<char>((bits >> (8 * i)) & 0xffu));
    }
  }
  return out;
}

void save_params(const std::filesystem::path & path, const ModelParams & params)
{
  write_text_file(path, params_to_bytes(params));
}

ModelParams load_params(const std::filesystem::path & path)
{
  const std::string bytes = read_text_file(path);
  if (bytes.size() < 16 || bytes.compare(0, 4, "PFMP") != 0) {
    throw Error(ErrorCode::parse_error, path.string() + ": not a parameter file");
  }
  if (get_u32(bytes, 4) != kParamsVersion) {
    throw Error(ErrorCode::parse_error, path.string() + ": unsupported version");
  }
  if (get_u32(bytes, 8) != kModes || get_u32(bytes, 12) != kHorizon ||
      bytes.size() != 16 + 8 * ModelParams::count) {
    throw Error(ErrorCode::shape_mismatch, path.string() + ": architecture differs");
  }
  ModelParams p = ModelParams::zeros();
  for (std::size_t j = 0; j < ModelParams::count; ++j) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) {
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[16 + 8 * j + i]))
              << (8 * i);
    }
    std::memcpy(&p.values[j], &bits, sizeof(bits));
  }
  return p;
}

nlohmann::json params_to_json(const ModelParams & params)
{
  auto slice = [&](std::size_t a, std::size_t b) {
    return std::vector<double>(params.values.begin() + a, params.values.begin() + b);
  };
  return {
    {"modes", kModes},
    {"steps", kHorizon},
    {"features", kFeatureSize},
    {"hidden", kHidden},
    {"w1", slice(ModelParams::w1, ModelParams::b1)},
    {"b1", slice(ModelParams::b1, ModelParams::w2)},
    {"w2", slice(ModelParams::w2, ModelParams::b2)},
    {"b2", slice(ModelParams::b2, ModelParams::w3)},
    {"w3", slice(ModelParams::w3, ModelParams::b3)},
    {"b3", slice(ModelParams::b3, ModelParams::count)}};
}

}  // namespace priorforecast
