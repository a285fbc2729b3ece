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
#include "priorforecast/metrics.hpp"
#include "priorforecast/planner.hpp"
#include "priorforecast/report.hpp"
#include "priorforecast/scene.hpp"
#include "priorforecast/scene_gen.hpp"
#include "priorforecast/training.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace priorforecast;

namespace
{



struct Options
{
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string checkpoint;
  std::string data;
  std::vector<std::string> compare;
  std::vector<std::string> names;
  std::optional<int> epochs;
  int scene_plots{3};
};

std::string utc_now()
{
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string hex(std::uint64_t v)
{
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Appends one run to `<out>/run_manifest.json`; every referenced artifact must exist.
class Manifest
{
public:
  Manifest(std::string command, const Options & opt, const ExperimentConfig & config)
  : out_(opt.out)
  {
    run_["command"] = std::move(command);
    run_["config"] = opt.config;
    run_["config_hash"] = hex(fnv1a(config.source));
    run_["seed"] = config.seed;
    run_["started"] = utc_now();
    run_["reports"] = nlohmann::json::array();
  }

  void set(const std::string & key, const std::string & path) { run_[key] = path; }
  void report(const fs::path & path) { run_["reports"].push_back(path.string()); }

  void write()
  {
    run_["finished"] = utc_now();
    auto check = [](const std::string & p) {
      if (!p.empty() && !fs::exists(p)) {
        throw Error(ErrorCode::io_error, "manifest artifact missing: " + p);
      }
    };
    for (const char * key : {"dataset_manifest", "checkpoint"}) {
      if (run_.contains(key)) {
        for (const auto & p : run_[key].is_array() ? run_[key] : nlohmann::json::array({run_[key]})) {
          check(p.get<std::string>());
        }
      }
    }
    for (const auto & p : run_["reports"]) {
      check(p.get<std::string>());
    }
    const fs::path path = fs::path(out_) / "run_manifest.json";
    nlohmann::json doc{{"runs", nlohmann::json::array()}};
    if (fs::exists(path)) {
      try {
        doc = nlohmann::json::parse(read_text_file(path));
      } catch (const nlohmann::json::exception &) {
        doc = {{"runs", nlohmann::json::array()}};
      }
    }
    doc["runs"].push_back(run_);
    write_text_file(path, doc.dump(2) + "\n");
  }

private:
  std::string out_;
  nlohmann::json run_;
};

ExperimentConfig load(const Options & opt)
{
  ExperimentConfig c = load_config(opt.config);
  if (opt.seed) {
    c.seed = *opt.seed;
  }
  if (opt.epochs) {
    if (*opt.epochs < 0) {
      throw Error(ErrorCode::invalid_config, "--epochs must be >= 0");
    }
    c.optim.epochs = *opt.epochs;
  }
  return c;
}

fs::path train_dir(const Options & opt, const ExperimentConfig & c)
{
  return opt.data.empty() ? fs::path(c.train_path) : fs::path(opt.data) / "train";
}

fs::path eval_dir(const Options & opt, const ExperimentConfig & c)
{
  return opt.data.empty() ? fs::path(c.eval_path) : fs::path(opt.data) / "eval";
}

fs::path manifest_of(const fs::path & dataset)
{
  return fs::is_directory(dataset) ? dataset / "manifest.json" : dataset;
}

std::vector<Scene> load_scenes(const fs::path & path, const char * what)
{
  if (path.empty()) {
    throw Error(ErrorCode::invalid_config, std::string("no ") + what + " dataset given");
  }
  auto scenes = load_dataset(path);
  if (scenes.empty()) {
    throw Error(ErrorCode::invalid_config, std::string(what) + " dataset is empty");
  }
  return scenes;
}

int cmd_gen(const Options & opt)
{
  const auto c = load(opt);
  Manifest manifest("gen", opt, c);
  const fs::path out(opt.out);
  std::vector<std::string> manifests;
  for (const auto & [name, data, offset] :
       {std::tuple{"train", c.train_data, std::uint64_t{0}},
        std::tuple{"eval", c.eval_data, kEvalIndexOffset}}) {
    const auto scenes = generate_dataset(data, c.seed, offset);
    write_dataset(out / name, scenes);
    manifests.push_back((out / name / "manifest.json").string());
    std::cout << name << ": " << scenes.size() << " scenes\n";
  }
  manifest.set("dataset_manifest", manifests.front());
  manifest.set("eval_dataset_manifest", manifests.back());
  manifest.write();
  return 0;
}

int cmd_train(const Options & opt)
{
  const auto c = load(opt);
  Manifest manifest("train", opt, c);
  const auto train_scenes = load_scenes(train_dir(opt, c), "train");
  std::vector<Scene> eval_scenes;
  if (!eval_dir(opt, c).empty() && fs::exists(eval_dir(opt, c))) {
    eval_scenes = load_scenes(eval_dir(opt, c), "eval");
  }
  const auto result = train(c, train_scenes, eval_scenes, [](const EpochRecord & e) {
    std::cout << "epoch " << e.epoch << " total " << format_number(e.loss.total) << " sym "
              << format_number(e.loss.symmetric) << " prior " << format_number(e.loss.prior);
    if (e.eval) {
      std::cout << " eval_mean_ade " << format_number(e.eval->mean_ade);
    }
    std::cout << std::endl;
  });
  const fs::path out(opt.out);
  fs::create_directories(out);
  save_params(out / "model.pfmp", result.params);
  write_text_file(out / "history.csv", history_csv(result.history));
  manifest.set("dataset_manifest", manifest_of(train_dir(opt, c)).string());
  manifest.set("checkpoint", (out / "model.pfmp").string());
  manifest.report(out / "history.csv");
  manifest.write();
  return 0;
}

int cmd_eval(const Options & opt)
{
  const auto c = load(opt);
  Manifest manifest("eval", opt, c);
  const auto params = load_params(opt.checkpoint);
  const auto scenes = load_scenes(eval_dir(opt, c), "eval");
  const auto report = evaluate(params, scenes, c.eval.samples, c.eval.sampler, c.eval_seed());
  const fs::path out(opt.out);
  fs::create_directories(out);
  write_text_file(out / "metrics.csv", metrics_csv(report));
  write_text_file(out / "metrics.json", metrics_json(report).dump(2) + "\n");
  std::cout << metrics_csv(report);
  manifest.set("dataset_manifest", manifest_of(eval_dir(opt, c)).string());
  manifest.set("checkpoint", opt.checkpoint);
  manifest.report(out / "metrics.csv");
  manifest.report(out / "metrics.json");
  manifest.write();
  return 0;
}

int cmd_plan_eval(const Options & opt)
{
  const auto c = load(opt);
  Manifest manifest("plan-eval", opt, c);
  const auto params = load_params(opt.checkpoint);
  const auto scenes = load_scenes(eval_dir(opt, c), "eval");
  const auto report =
    plan_eval(params, scenes, c.eval.samples, c.eval.sampler, c.eval_seed(), c.planner);
  const std::vector<std::pair<std::string, PlanningReport>> rows{
    {fs::path(opt.checkpoint).parent_path().filename().string(), report}};
  const fs::path out(opt.out);
  fs::create_directories(out);
  write_text_file(out / "planning.csv", planning_csv(rows));
  std::cout << planning_csv(rows);
  manifest.set("dataset_manifest", manifest_of(eval_dir(opt, c)).string());
  manifest.set("checkpoint", opt.checkpoint);
  manifest.report(out / "planning.csv");
  manifest.write();
  return 0;
}

int cmd_report(const Options & opt)
{
  const auto c = load(opt);
  Manifest manifest("report", opt, c);
  if (!opt.names.empty() && opt.names.size() != opt.compare.size()) {
    throw Error(ErrorCode::invalid_config, "--names needs one name per checkpoint");
  }
  const auto scenes = load_scenes(eval_dir(opt, c), "eval");
  const fs::path out(opt.out);
  fs::create_directories(out);

  std::vector<NamedMetrics> models;
  std::vector<std::pair<std::string, TrainingHistory>> histories;
  for (std::size_t i = 0; i < opt.compare.size(); ++i) {
    const fs::path ckpt(opt.compare[i]);
    const std::string name =
      opt.names.empty() ? ckpt.parent_path().filename().string() : opt.names[i];
    const auto params = load_params(ckpt);
    NamedMetrics m{name, evaluate(params, scenes, c.eval.samples, c.eval.sampler, c.eval_seed()),
                   plan_eval(params, scenes, c.eval.samples, c.eval.sampler, c.eval_seed(), c.planner)};
    models.push_back(std::move(m));
    const fs::path history = ckpt.parent_path() / "history.csv";
    if (fs::exists(history)) {
      histories.emplace_back(name, parse_history_csv(read_text_file(history)));
    }
    for (int s = 0; s < opt.scene_plots && s < static_cast<int>(scenes.size()); ++s) {
      const std::size_t idx = static_cast<std::size_t>(s) * scenes.size() / opt.scene_plots;
      Rng rng = Rng::stream(c.eval_seed(), idx);
      const auto forecasts = model_forecasts(params, scenes[idx], 10, c.eval.sampler, rng);
      const fs::path svg = out / ("scene_" + std::to_string(idx) + "_" + name + ".svg");
      write_text_file(svg, svg_scene(scenes[idx], forecasts, name + ", scene " + std::to_string(idx)));
      manifest.report(svg);
    }
  }

  auto emit = [&](const std::string & file, const std::string & text) {
    write_text_file(out / file, text);
    manifest.report(out / file);
  };
  emit("forecast_comparison.csv", forecast_comparison_csv(models));
  emit("planning_comparison.csv", planning_comparison_csv(models));
  const std::string table = summary_table(models);
  emit("summary.txt", table);
  std::cout << table;

  std::vector<std::string> names;
  for (const auto & m : models) {
    names.push_back(m.name);
  }
  const std::vector<std::string> groups{"straight", "left", "right", "all"};
  const auto metric_bars = [&](const char * file, const char * title, const char * unit,
                               auto pick) {
    std::vector<std::vector<double>> values;
    for (const auto & m : models) {
      std::vector<double> row;
      for (const auto & g : groups) {
        std::optional<ClassMetrics> cm = m.forecast.overall;
        if (g != "all") {
          const auto cls = g == "straight" ? ActionClass::straight
                           : g == "left"   ? ActionClass::left
                                           : ActionClass::right;
          const auto it = m.forecast.classes.find(cls);
          cm = it == m.forecast.classes.end() ? std::nullopt : std::optional(it->second);
        }
        row.push_back(cm ? pick(*cm) : std::nan(""));
      }
      values.push_back(row);
    }
    emit(file, svg_bar_chart(groups, names, values, title, unit));
  };
  metric_bars("final_lane_error.svg", "Final lane error", "%", [](const ClassMetrics & m) {
    return m.final_lane_error.value_or(std::nan(""));
  });
  metric_bars("mean_ade.svg", "meanADE", "m", [](const ClassMetrics & m) { return m.mean_ade; });
  metric_bars("min_ade.svg", "minADE", "m", [](const ClassMetrics & m) { return m.min_ade; });
  if (!histories.empty()) {
    emit("loss_curves.svg", svg_history(histories));
  }
  manifest.set("dataset_manifest", manifest_of(eval_dir(opt, c)).string());
  manifest.write();
  return 0;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Trajectory forecasting with prior-knowledge rewards"};
  app.require_subcommand(1);
  Options opt;

  auto common = [&](CLI::App * cmd) {
    cmd->add_option("--config", opt.config, "Experiment config")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", opt.seed, "Override the config seed");
    cmd->add_option("--out", opt.out, "Output directory")->required();
  };
  auto * gen = app.add_subcommand("gen", "Generate train and eval datasets");
  common(gen);
  auto * tr = app.add_subcommand("train", "Train a forecaster");
  common(tr);
  tr->add_option("--data", opt.data, "Directory holding train/ and eval/ datasets");
  tr->add_option("--epochs", opt.epochs, "Override the configured epoch count");
  auto * ev = app.add_subcommand("eval", "Forecasting metrics");
  common(ev);
  ev->add_option("--checkpoint", opt.checkpoint, "Model checkpoint")->required()->check(CLI::ExistingFile);
  ev->add_option("--data", opt.data, "Directory holding the eval/ dataset");
  auto * pe = app.add_subcommand("plan-eval", "Planning metrics");
  common(pe);
  pe->add_option("--checkpoint", opt.checkpoint, "Model checkpoint")->required()->check(CLI::ExistingFile);
  pe->add_option("--data", opt.data, "Directory holding the eval/ dataset");
  auto * rp = app.add_subcommand("report", "Comparison tables and plots");
  common(rp);
  rp->add_option("--compare", opt.compare, "Checkpoints to compare")
    ->required()
    ->delimiter(',')
    ->check(CLI::ExistingFile);
  rp->add_option("--names", opt.names, "Row names, one per checkpoint")->delimiter(',');
  rp->add_option("--data", opt.data, "Directory holding the eval/ dataset");
  rp->add_option("--scene-plots", opt.scene_plots, "Scene overlays per model")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen) return cmd_gen(opt);
    if (*tr) return cmd_train(opt);
    if (*ev) return cmd_eval(opt);
    if (*pe) return cmd_plan_eval(opt);
    if (*rp) return cmd_report(opt);
  } catch (const Error & e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception & e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
