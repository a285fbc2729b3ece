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

#include "priorforecast/training.hpp"

#include "priorforecast/error.hpp"
#include "priorforecast/parallel.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace priorforecast
{

AdamState AdamState::zeros(std::size_t n, const AdamConfig & config)
{
  return {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), 0, config};
}

void adam_update(AdamState & state, ModelParams & params, std::span<const double> grad)
{
  const std::size_t n = params.values.size();
  if (grad.size() != n || state.m.size() != n || state.v.size() != n) {
    throw Error(ErrorCode::shape_mismatch, "adam state, params and gradient sizes differ");
  }
  const auto & c = state.config;
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(c.beta1, t);
  const double bias2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < n; ++i) {
    state.m[i] = c.beta1 * state.m[i] + (1.0 - c.beta1) * grad[i];
    state.v[i] = c.beta2 * state.v[i] + (1.0 - c.beta2) * grad[i] * grad[i];
    const double m_hat = state.m[i] / bias1;
    const double v_hat = state.v[i] / bias2;
    params.values[i] -= c.lr * m_hat / (std::sqrt(v_hat) + c.epsilon);
  }
}

std::pair<AdamState, ModelParams> adam_step(
  const AdamState & state, const ModelParams & params, std::span<const double> grad)
{
  std::pair<AdamState, ModelParams> out{state, params};
  adam_update(out.first, out.second, grad);
  return out;
}

double clip_global_norm(GradientVector & grad, double max_norm)
{
  double sq = 0.0;
  for (double g : grad) {
    sq += g * g;
  }
  const double n = std::sqrt(sq);
  if (n > max_norm && n > 0.0) {
    const double scale = max_norm / n;
    for (double & g : grad) {
      g *= scale;
    }
  }
  return n;
}

// ---------------------------------------------------------------------------
// Config

namespace
{

using boost::property_tree::ptree;

std::string unquote(std::string s)
{
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

/// The ini parser only knows ';' comments.
std::string normalize_comments(const std::string & text)
{
  std::istringstream in(text);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t");
    if (first != std::string::npos && line[first] == '#') {
      line[first] = ';';
    }
    out << line << '\n';
  }
  return out.str();
}

class Section
{
public:
  Section(const ptree & tree, std::string name) : tree_(tree), name_(std::move(name)) {}

  template <typename T>
  void read(const std::string & key, T & out)
  {
    seen_.insert(key);
    const auto v = tree_.get_optional<std::string>(key);
    if (!v) {
      return;
    }
    const std::string s = unquote(*v);
    std::istringstream is(s);
    T value{};
    is >> value;
    if (is.fail() || !(is >> std::ws).eof()) {
      throw Error(ErrorCode::invalid_config, name_ + "." + key + ": cannot parse '" + s + "'");
    }
    out = value;
  }

  void read_string(const std::string & key, std::string & out)
  {
    seen_.insert(key);
    if (const auto v = tree_.get_optional<std::string>(key)) {
      out = unquote(*v);
    }
  }

  void reject_unknown() const
  {
    for (const auto & [key, child] : tree_) {
      if (!child.empty()) {
        continue;
      }
      if (!seen_.count(key)) {
        throw Error(ErrorCode::invalid_config, "unknown key " + name_ + "." + key);
      }
    }
  }

private:
  const ptree & tree_;
  std::string name_;
  std::set<std::string> seen_;
};

void read_mix(const ptree & tree, const std::string & name, DatasetConfig & data)
{
  for (const auto & [key, child] : tree) {
    WorldKind kind{};
    try {
      kind = world_kind_from_string(key);
    } catch (const Error &) {
      throw Error(ErrorCode::invalid_config, name + ": unknown world kind '" + key + "'");
    }
    Section s(tree, name);
    int count = 0;
    s.read(key, count);
    if (count < 0) {
      throw Error(ErrorCode::invalid_config, name + "." + key + " must be >= 0");
    }
    data.counts[kind] = count;
  }
}

const ptree & section_or_empty(const ptree & root, const std::string & name)
{
  static const ptree empty;
  const auto it = root.find(name);
  return it == root.not_found() ? empty : it->second;
}

}  // namespace

ExperimentConfig parse_config(const std::string & text)
{
  ptree root;
  try {
    std::istringstream is(normalize_comments(text));
    boost::property_tree::ini_parser::read_ini(is, root);
  } catch (const boost::property_tree::ini_parser_error & e) {
    throw Error(ErrorCode::parse_error, std::string("config: ") + e.what());
  }
  ExperimentConfig c;
  c.source = text;

  static const std::set<std::string> sections{"dataset", "train_mix", "eval_mix", "loss", "rewards",
                                              "estimator", "optim", "eval", "planner"};
  bool has_seed = false;
  for (const auto & [key, child] : root) {
    if (child.empty()) {
      if (key != "seed") {
        throw Error(ErrorCode::invalid_config, "unknown top-level key " + key);
      }
      has_seed = true;
    } else if (!sections.count(key)) {
      throw Error(ErrorCode::invalid_config, "unknown section [" + key + "]");
    }
  }
  if (!has_seed) {
    throw Error(ErrorCode::invalid_config, "seed is mandatory");
  }
  {
    Section top(root, "");
    top.read("seed", c.seed);
  }

  {
    Section s(section_or_empty(root, "dataset"), "dataset");
    s.read_string("train", c.train_path);
    s.read_string("eval", c.eval_path);
    double rate = c.train_data.noncompliance_rate;
    int actors = c.train_data.actors_per_scene;
    int min_actors = c.train_data.min_actors;
    s.read("noncompliance_rate", rate);
    s.read("actors_per_scene", actors);
    s.read("min_actors", min_actors);
    s.reject_unknown();
    for (auto * d : {&c.train_data, &c.eval_data}) {
      d->noncompliance_rate = rate;
      d->actors_per_scene = actors;
      d->min_actors = min_actors;
    }
    if (rate < 0.0 || rate > 1.0 || min_actors < 0 || actors < min_actors) {
      throw Error(ErrorCode::invalid_config, "dataset: inconsistent actor counts or rate");
    }
  }
  read_mix(section_or_empty(root, "train_mix"), "train_mix", c.train_data);
  read_mix(section_or_empty(root, "eval_mix"), "eval_mix", c.eval_data);

  {
    Section s(section_or_empty(root, "loss"), "loss");
    std::string mode = to_string(c.mode);
    s.read_string("mode", mode);
    c.mode = loss_mode_from_string(mode);
    s.read("beta", c.weights.beta);
    s.read("gamma", c.weights.gamma);
    s.reject_unknown();
    if (c.weights.beta < 0.0 || c.weights.gamma < 0.0) {
      throw Error(ErrorCode::invalid_config, "loss weights must be >= 0");
    }
  }
  {
    Section s(section_or_empty(root, "rewards"), "rewards");
    s.read("r_d", c.rewards.r_d);
    s.read("r_tp", c.rewards.r_tp);
    s.read("r_tn", c.rewards.r_tn);
    s.read("r_fp", c.rewards.r_fp);
    s.read("r_fn", c.rewards.r_fn);
    s.reject_unknown();
    c.rewards.validate();
  }
  {
    Section s(section_or_empty(root, "estimator"), "estimator");
    s.read("samples", c.estimator.samples);
    std::string attribution = "waypoint";
    std::string baseline = "none";
    s.read_string("attribution", attribution);
    s.read_string("baseline", baseline);
    s.reject_unknown();
    if (attribution == "waypoint") {
      c.estimator.attribution = Attribution::waypoint;
    } else if (attribution == "trajectory") {
      c.estimator.attribution = Attribution::trajectory;
    } else {
      throw Error(ErrorCode::invalid_config, "estimator.attribution: " + attribution);
    }
    if (baseline == "none") {
      c.estimator.baseline = Baseline::none;
    } else if (baseline == "mean_reward") {
      c.estimator.baseline = Baseline::mean_reward;
    } else {
      throw Error(ErrorCode::invalid_config, "estimator.baseline: " + baseline);
    }
    if (c.estimator.samples < 1) {
      throw Error(ErrorCode::invalid_config, "estimator.samples must be >= 1");
    }
  }
  {
    Section s(section_or_empty(root, "optim"), "optim");
    s.read("lr", c.optim.adam.lr);
    s.read("beta1", c.optim.adam.beta1);
    s.read("beta2", c.optim.adam.beta2);
    s.read("epsilon", c.optim.adam.epsilon);
    s.read("epochs", c.optim.epochs);
    s.read("batch_size", c.optim.batch_size);
    s.read("clip_norm", c.optim.clip_norm);
    s.reject_unknown();
    if (c.optim.epochs < 0 || c.optim.batch_size < 1 || c.optim.clip_norm <= 0.0 ||
        c.optim.adam.lr <= 0.0) {
      throw Error(ErrorCode::invalid_config, "optim: epochs >= 0, batch_size >= 1, lr and clip_norm > 0");
    }
  }
  {
    Section s(section_or_empty(root, "eval"), "eval");
    s.read("samples", c.eval.samples);
    std::string sampler = "smooth";
    s.read_string("sampler", sampler);
    s.read("every", c.eval.every);
    std::uint64_t seed = 0;
    const bool has_eval_seed = section_or_empty(root, "eval").count("seed") != 0;
    s.read("seed", seed);
    s.reject_unknown();
    if (has_eval_seed) {
      c.eval.seed = seed;
    }
    if (sampler == "smooth") {
      c.eval.sampler = SamplerMode::smooth;
    } else if (sampler == "independent") {
      c.eval.sampler = SamplerMode::independent;
    } else {
      throw Error(ErrorCode::invalid_config, "eval.sampler: " + sampler);
    }
    if (c.eval.samples < 1 || c.eval.every < 0) {
      throw Error(ErrorCode::invalid_config, "eval: samples >= 1, every >= 0");
    }
  }
  {
    Section s(section_or_empty(root, "planner"), "planner");
    s.read("collision", c.planner.collision);
    s.read("jerk", c.planner.jerk);
    s.read("lateral", c.planner.lateral);
    s.read("progress", c.planner.progress);
    s.reject_unknown();
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path & path)
{
  return parse_config(read_text_file(path));
}

std::uint64_t fnv1a(std::string_view text)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Training loop

std::string history_csv(const TrainingHistory & history)
{
  std::ostringstream os;
  os << "epoch,loss_total,loss_sym,loss_prior,eval_final_lane_error,eval_mean_ade,eval_min_ade\n";
  for (const auto & e : history.epochs) {
    os << e.epoch << ',' << format_number(e.loss.total) << ',' << format_number(e.loss.symmetric)
       << ',' << format_number(e.loss.prior) << ',';
    if (e.eval && e.eval->final_lane_error) {
      os << format_number(*e.eval->final_lane_error);
    }
    os << ',';
    if (e.eval) {
      os << format_number(e.eval->mean_ade);
    }
    os << ',';
    if (e.eval) {
      os << format_number(e.eval->min_ade);
    }
    os << '\n';
  }
  return os.str();
}

namespace
{

constexpr std::uint64_t kBatchStream = 0x6261746368ULL;
constexpr std::uint64_t kShuffleStream = 0x73687566ULL;

std::vector<const ActorExample *> gather(
  std::span<const std::vector<ActorExample>> scenes, std::span<const std::size_t> order,
  std::size_t begin, std::size_t end)
{
  std::vector<const ActorExample *> batch;
  for (std::size_t k = begin; k < end; ++k) {
    for (const auto & ex : scenes[order[k]]) {
      batch.push_back(&ex);
    }
  }
  return batch;
}

std::vector<std::vector<ActorExample>> prepare_all(std::span<const Scene> scenes)
{
  std::vector<std::vector<ActorExample>> out(scenes.size());
  parallel_for(scenes.size(), [&](std::size_t i) { out[i] = prepare_examples(scenes[i]); });
  return out;
}

void accumulate(LossBreakdown & into, const LossBreakdown & l, double w)
{
  into.total += w * l.total;
  into.symmetric += w * l.symmetric;
  into.prior += w * l.prior;
}

}  // namespace

LossBreakdown dataset_loss(
  const ModelParams & params, std::span<const std::vector<ActorExample>> scenes,
  const ExperimentConfig & config)
{
  std::vector<std::size_t> order(scenes.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t bs = static_cast<std::size_t>(config.optim.batch_size);
  LossBreakdown sum;
  int batches = 0;
  for (std::size_t b = 0; b * bs < order.size(); ++b) {
    const auto batch = gather(scenes, order, b * bs, std::min(order.size(), (b + 1) * bs));
    if (batch.empty()) {
      continue;
    }
    Rng rng = Rng::stream(config.seed ^ kBatchStream, b);
    const auto r = total_loss_grad(
      params, batch, config.mode, config.weights, config.estimator, config.rewards, rng);
    accumulate(sum, r.loss, 1.0);
    ++batches;
  }
  if (batches > 0) {
    LossBreakdown mean;
    accumulate(mean, sum, 1.0 / batches);
    return mean;
  }
  return sum;
}

TrainResult train(
  const ExperimentConfig & config, std::span<const Scene> train_scenes,
  std::span<const Scene> eval_scenes, const EpochCallback & on_epoch)
{
  if (train_scenes.empty()) {
    throw Error(ErrorCode::invalid_config, "training needs at least one scene");
  }
  const auto train_examples = prepare_all(train_scenes);
  const auto eval_examples = prepare_all(eval_scenes);

  TrainResult result{init_params(config.seed), {}};
  AdamState adam = AdamState::zeros(ModelParams::count, config.optim.adam);

  auto evaluate_now = [&](int epoch) -> std::optional<ClassMetrics> {
    if (eval_examples.empty() || config.eval.every == 0 || epoch % config.eval.every != 0) {
      return std::nullopt;
    }
    return evaluate_examples(
             result.params, eval_examples, config.eval.samples, config.eval.sampler,
             config.eval_seed())
      .overall;
  };
  auto record = [&](EpochRecord rec) {
    if (on_epoch) {
      on_epoch(rec);
    }
    result.history.epochs.push_back(std::move(rec));
  };

  record({0, dataset_loss(result.params, train_examples, config), evaluate_now(0)});

  std::vector<std::size_t> order(train_examples.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t bs = static_cast<std::size_t>(config.optim.batch_size);
  for (int epoch = 1; epoch <= config.optim.epochs; ++epoch) {
    Rng shuffle = Rng::stream(config.seed ^ kShuffleStream, static_cast<std::uint64_t>(epoch));
    for (std::size_t i = order.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(shuffle.uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(order[i - 1], order[j]);
    }
    LossBreakdown sum;
    int batches = 0;
    for (std::size_t b = 0; b * bs < order.size(); ++b) {
      const auto batch = gather(train_examples, order, b * bs, std::min(order.size(), (b + 1) * bs));
      if (batch.empty()) {
        continue;
      }
      Rng rng = Rng::stream(
        config.seed ^ kBatchStream, (static_cast<std::uint64_t>(epoch) << 32) + b);
      auto r = total_loss_grad(
        result.params, batch, config.mode, config.weights, config.estimator, config.rewards, rng);
      if (!std::isfinite(r.loss.total)) {
        throw Error(
          ErrorCode::non_finite_loss,
          "epoch " + std::to_string(epoch) + " batch " + std::to_string(b));
      }
      check_gradient(r.grad);
      clip_global_norm(r.grad, config.optim.clip_norm);
      adam_update(adam, result.params, r.grad);
      accumulate(sum, r.loss, 1.0);
      ++batches;
    }
    LossBreakdown mean;
    if (batches > 0) {
      accumulate(mean, sum, 1.0 / batches);
    }
    record({epoch, mean, evaluate_now(epoch)});
  }
  return result;
}

}  // namespace priorforecast
