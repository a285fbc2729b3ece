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

#ifndef PRIORFORECAST__TRAINING_HPP_
#define PRIORFORECAST__TRAINING_HPP_

#include "priorforecast/forecaster.hpp"
#include "priorforecast/metrics.hpp"
#include "priorforecast/planner.hpp"
#include "priorforecast/priors.hpp"
#include "priorforecast/scene.hpp"
#include "priorforecast/scene_gen.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace priorforecast
{

struct AdamConfig
{
  double lr{1e-3};
  double beta1{0.9};
  double beta2{0.999};
  double epsilon{1e-8};
};

struct AdamState
{
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step{0};
  AdamConfig config{};

  static AdamState zeros(std::size_t n, const AdamConfig & config = {});
};

/// Bias-corrected Adam update in place. Throws Error{shape_mismatch}.
void adam_update(AdamState & state, ModelParams & params, std::span<const double> grad);

/// Copying form of adam_update.
std::pair<AdamState, ModelParams> adam_step(
  const AdamState & state, const ModelParams & params, std::span<const double> grad);

/// Rescales `grad` to at most `max_norm`; returns the norm before clipping.
double clip_global_norm(GradientVector & grad, double max_norm);

struct OptimConfig
{
  AdamConfig adam{};
  int epochs{30};
  int batch_size{8};
  double clip_norm{10.0};
};

struct EvalConfig
{
  int samples{kEvalSamples};
  SamplerMode sampler{SamplerMode::smooth};
  /// Evaluate every this many epochs during training; 0 disables.
  int every{1};
  std::optional<std::uint64_t> seed;
};

struct ExperimentConfig
{
  std::uint64_t seed{0};
  std::string train_path;
  std::string eval_path;
  DatasetConfig train_data;
  DatasetConfig eval_data;
  LossMode mode{LossMode::reinforce};
  LossWeights weights{};
  RewardConfig rewards{};
  EstimatorConfig estimator{};
  OptimConfig optim{};
  EvalConfig eval{};
  PlannerWeights planner{};
  /// Text the config was parsed from; hashed into run manifests.
  std::string source;

  std::uint64_t eval_seed() const { return eval.seed.value_or(seed); }
};

/// Sectioned key/value text. `seed` is mandatory; unknown keys are rejected.
/// Throws Error{parse_error, invalid_config}.
ExperimentConfig parse_config(const std::string & text);
ExperimentConfig load_config(const std::filesystem::path & path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view text);

struct EpochRecord
{
  int epoch{0};
  LossBreakdown loss;
  std::optional<ClassMetrics> eval;
};

struct TrainingHistory
{
  std::vector<EpochRecord> epochs;
};

/// Columns: epoch, loss_total, loss_sym, loss_prior, eval_final_lane_error, eval_mean_ade, eval_min_ade.
std::string history_csv(const TrainingHistory & history);

struct TrainResult
{
  ModelParams params;
  TrainingHistory history;
};

using EpochCallback = std::function<void(const EpochRecord &)>;

/**
 * Adam on the composite loss over shuffled batches of scenes.
 * Epoch 0 of the history holds the losses of the initial parameters.
 * Throws Error{non_finite_loss} naming the batch.
 */
TrainResult train(
  const ExperimentConfig & config, std::span<const Scene> train_scenes,
  std::span<const Scene> eval_scenes = {}, const EpochCallback & on_epoch = {});

/// Mean loss over the scenes without updating parameters.
LossBreakdown dataset_loss(
  const ModelParams & params, std::span<const std::vector<ActorExample>> scenes,
  const ExperimentConfig & config);

}  // namespace priorforecast

#endif  // PRIORFORECAST__TRAINING_HPP_
