// Copyright 2026 The motionadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include "motionadapt/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "motionadapt/config.hpp"
#include "motionadapt/dataset.hpp"
#include "motionadapt/error.hpp"
#include "motionadapt/metrics.hpp"
#include "motionadapt/pipeline.hpp"
#include "motionadapt/synth.hpp"
#include "motionadapt/viewpoint.hpp"

namespace motionadapt {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  std::string checkpoint;
  std::string data;
  std::string predictions;
  std::string bone_method;
  std::string camera_repr;
  std::string camera_mode;
  std::string mode;
  int count = 0;
  bool verbose = false;
};

std::string join(const fs::path& dir, const char* name) { return (dir / name).string(); }

fs::path ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw FileError("cannot create output directory '" + dir + "'", dir);
  return fs::path(dir);
}

void write_json(const std::string& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw FileError("cannot open '" + path + "' for writing", path);
  f << j.dump(2) << '\n';
  if (!f) throw FileError("failed writing '" + path + "'", path);
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open '" + path + "'", path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what(), "/");
  }
}

template <typename E>
E parse_choice(const std::string& value, const std::map<std::string, E>& names, const char* field) {
  const auto it = names.find(value);
  if (it == names.end()) throw ConfigError("unknown value '" + value + "'", field);
  return it->second;
}

TrainConfig load_train_config(const Options& o) {
  if (o.config.empty()) throw ConfigError("--config is required", "--config");
  TrainConfig cfg = load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (!o.bone_method.empty()) {
    cfg.bone_method = parse_choice<BoneMethod>(
        o.bone_method, {{"bg1", BoneMethod::BG1}, {"bg2", BoneMethod::BG2}, {"bg3", BoneMethod::BG3}},
        "/model/bone_method");
  }
  if (!o.camera_repr.empty()) {
    cfg.camera_repr = parse_choice<RotationRepr>(o.camera_repr,
                                                 {{"axis_angle", RotationRepr::AxisAngle},
                                                  {"euler", RotationRepr::Euler},
                                                  {"quaternion", RotationRepr::Quaternion}},
                                                 "/model/camera_repr");
  }
  if (!o.camera_mode.empty()) {
    cfg.camera_mode = parse_choice<CameraMode>(
        o.camera_mode, {{"deterministic", CameraMode::Deterministic}, {"probabilistic", CameraMode::Probabilistic}},
        "/model/camera_mode");
  }
  if (!o.mode.empty()) {
    cfg.mode = parse_choice<TrainMode>(o.mode, {{"adapt", TrainMode::Adapt}, {"source_only", TrainMode::SourceOnly}},
                                       "/train/mode");
  }
  cfg.validate();
  if (cfg.source_path.empty()) throw ConfigError("a source dataset is required", "/data/source");
  return cfg;
}

std::unique_ptr<Trainer> make_trainer(const TrainConfig& cfg, DatasetFile* source_file = nullptr) {
  const DatasetFile src = load_dataset(cfg.source_path);
  if (source_file) *source_file = src;
  std::optional<Target2DData> target;
  if (cfg.mode == TrainMode::Adapt) {
    if (cfg.target_path.empty()) throw ConfigError("adapt mode needs a target dataset", "/data/target");
    target = Target2DData::from_dataset(load_dataset(cfg.target_path), cfg.preprocessing);
  }
  return std::make_unique<Trainer>(cfg, SourceData::from_dataset(src, cfg.preprocessing), std::move(target));
}

void restore(Trainer& t, const std::string& path) { t.restore_checkpoint(read_document(path)); }

int cmd_synth(const Options& o, std::ostream& out) {
  SynthSpec spec;
  if (!o.config.empty()) spec = SynthSpec::from_json(read_json(o.config));
  if (o.seed) spec.seed = *o.seed;
  spec.validate();
  const fs::path dir = ensure_dir(o.out);
  const SynthDatasets d = synth_motion_dataset(spec);
  save_dataset(join(dir, "source.json"), d.source);
  save_dataset(join(dir, "target.json"), d.target);
  save_dataset(join(dir, "target_eval.json"), d.target_eval);
  write_json(join(dir, "synth_spec.json"), spec.to_json());
  out << json{{"command", "synth-data"},
              {"source", join(dir, "source.json")},
              {"target", join(dir, "target.json")},
              {"eval", join(dir, "target_eval.json")},
              {"seed", spec.seed}}
             .dump()
      << '\n';
  return kExitOk;
}

int cmd_train(const Options& o, std::ostream& out, std::ostream& err) {
  const TrainConfig cfg = load_train_config(o);
  const fs::path dir = ensure_dir(o.out);
  write_json(join(dir, "config.json"), cfg.to_json());
  const auto t0 = std::chrono::steady_clock::now();
  auto trainer = make_trainer(cfg);
  if (!o.checkpoint.empty()) restore(*trainer, o.checkpoint);
  trainer->set_failure_checkpoint(join(dir, "failed.ckpt"));
  trainer->pretrain();
  while (trainer->state().epoch < cfg.epochs) {
    trainer->train_epoch();
    trainer->save_checkpoint(join(dir, "checkpoint.ckpt"));
    if (o.verbose) {
      const auto& l = trainer->state().log.back().loss;
      err << "epoch " << trainer->state().epoch << " L_DD " << l.L_DD << " L_G " << l.L_G << " L_N " << l.L_N
          << '\n';
    }
  }
  trainer->save_checkpoint(join(dir, "checkpoint.ckpt"));
  trainer->write_loss_csv(join(dir, "loss.csv"));
  json summary{{"command", "train"},
               {"checkpoint", join(dir, "checkpoint.ckpt")},
               {"loss_csv", join(dir, "loss.csv")},
               {"steps", trainer->state().step}};
  if (!cfg.eval_path.empty()) {
    const EvalData eval = EvalData::from_dataset(load_dataset(cfg.eval_path), cfg.preprocessing);
    const EvalComparison cmp = trainer->fine_tune_evaluate(eval);
    write_json(join(dir, "metrics.json"), cmp.to_json());
    summary["metrics"] = join(dir, "metrics.json");
    summary["mpjpe_before_mm"] = cmp.before.mpjpe;
    summary["mpjpe_after_mm"] = cmp.after.mpjpe;
  }
  summary["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out << summary.dump() << '\n';
  return kExitOk;
}

int cmd_generate(const Options& o, std::ostream& out) {
  const TrainConfig cfg = load_train_config(o);
  if (o.checkpoint.empty()) throw ConfigError("--checkpoint is required", "--checkpoint");
  const fs::path dir = ensure_dir(o.out);
  DatasetFile src;
  auto trainer = make_trainer(cfg, &src);
  restore(*trainer, o.checkpoint);
  Rng rng(o.seed.value_or(cfg.seed));
  const int count = o.count > 0 ? o.count : cfg.viewpoint_samples;
  const std::vector<FakeSample> fakes = trainer->generate(count, rng);
  DatasetFile gen;
  gen.name = "generated";
  gen.role = DatasetRole::Generated;
  gen.fps = src.fps;
  gen.topology = src.topology;
  gen.intrinsics = src.intrinsics;
  gen.synthetic = true;
  gen.provenance = {{"checkpoint", o.checkpoint}, {"seed", o.seed.value_or(cfg.seed)}};
  for (std::size_t i = 0; i < fakes.size(); ++i) {
    const FakeSample& f = fakes[i];
    DatasetClip c;
    c.id = "fake_" + std::to_string(i);
    c.subject = f.provenance.source_clip;
    c.frames2d = f.x2d;
    c.frames3d = f.x3d;
    c.camera = f.camera;
    c.provenance = {{"source_clip", f.provenance.source_clip},
                    {"window_center", f.provenance.window_center},
                    {"stride", f.provenance.stride},
                    {"seed", f.provenance.seed}};
    gen.clips.push_back(std::move(c));
  }
  save_dataset(join(dir, "generated.json"), gen);
  out << json{{"command", "generate"}, {"generated", join(dir, "generated.json")}, {"samples", fakes.size()}}.dump()
      << '\n';
  return kExitOk;
}

int cmd_evaluate(const Options& o, std::ostream& out) {
  const fs::path dir = ensure_dir(o.out);
  json report;
  if (!o.predictions.empty()) {
    if (o.data.empty()) throw ConfigError("--predictions needs --data with ground truth", "--data");
    const DatasetFile pred = load_dataset(o.predictions);
    const DatasetFile gt = load_dataset(o.data);
    std::map<std::string, const DatasetClip*> by_id;
    for (const auto& c : pred.clips) by_id[c.id] = &c;
    std::vector<EvalClip> clips;
    for (const auto& c : gt.clips) {
      const auto it = by_id.find(c.id);
      if (it == by_id.end()) throw DatasetError("no prediction for clip '" + c.id + "'");
      if (!c.frames3d || !it->second->frames3d) throw DatasetError("clip '" + c.id + "' lacks 3D frames");
      clips.push_back({c.id, *it->second->frames3d, *c.frames3d});
    }
    const double threshold = o.config.empty() ? 150.0 : load_config(o.config).pck_threshold_mm;
    report = evaluate_clips(clips, gt.topology.root(), threshold).to_json();
  } else {
    TrainConfig cfg = load_train_config(o);
    if (o.checkpoint.empty()) throw ConfigError("--checkpoint is required", "--checkpoint");
    if (!o.data.empty()) cfg.eval_path = o.data;
    if (cfg.eval_path.empty()) throw ConfigError("an evaluation dataset is required", "/data/eval");
    auto trainer = make_trainer(cfg);
    restore(*trainer, o.checkpoint);
    const EvalData eval = EvalData::from_dataset(load_dataset(cfg.eval_path), cfg.preprocessing);
    report = trainer->fine_tune_evaluate(eval).to_json();
  }
  write_json(join(dir, "metrics.json"), report);
  out << json{{"command", "evaluate"}, {"metrics", join(dir, "metrics.json")}, {"report", report}}.dump() << '\n';
  return kExitOk;
}

int cmd_camera_stats(const Options& o, std::ostream& out) {
  const fs::path dir = ensure_dir(o.out);
  std::vector<Mat3> rotations;
  if (!o.data.empty()) {
    rotations = dataset_rotations(load_dataset(o.data));
  } else {
    const TrainConfig cfg = load_train_config(o);
    if (o.checkpoint.empty()) throw ConfigError("--checkpoint or --data is required", "--checkpoint");
    auto trainer = make_trainer(cfg);
    restore(*trainer, o.checkpoint);
    Rng rng(o.seed.value_or(cfg.seed));
    rotations = trainer->generated_rotations(o.count > 0 ? o.count : cfg.viewpoint_samples, rng);
  }
  const auto rows = camera_viewpoint_stats(rotations);
  write_viewpoint_csv(join(dir, "viewpoints.csv"), rows);
  const ElevationSummary s = summarize_elevation(rows);
  out << json{{"command", "camera-stats"},
              {"viewpoints", join(dir, "viewpoints.csv")},
              {"samples", s.count},
              {"elevation_mean_deg", s.mean_deg},
              {"elevation_std_deg", s.stddev_deg},
              {"elevation_min_deg", s.min_deg},
              {"elevation_max_deg", s.max_deg}}
             .dump()
      << '\n';
  return kExitOk;
}

void report_error(std::ostream& err, const std::string& kind, const std::string& field, const std::string& message) {
  err << json{{"error", kind}, {"field", field}, {"message", message}}.dump() << '\n';
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adversarial motion generation for cross-domain 3D pose lifting", "motionadapt"};
  app.require_subcommand(1);
  Options o;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* c) {
    c->add_option("--config", o.config, "JSON config file");
    c->add_option("--seed", seed, "Seed override");
    c->add_option("--out", o.out, "Output directory");
  };
  auto add_overrides = [&](CLI::App* c) {
    c->add_option("--bone-method", o.bone_method, "bg1 | bg2 | bg3");
    c->add_option("--camera-repr", o.camera_repr, "axis_angle | euler | quaternion");
    c->add_option("--camera-mode", o.camera_mode, "deterministic | probabilistic");
    c->add_option("--mode", o.mode, "adapt | source_only");
  };

  CLI::App* synth = app.add_subcommand("synth-data", "Write procedural source, target and evaluation datasets");
  add_common(synth);
  CLI::App* train = app.add_subcommand("train", "Pretrain, adapt and checkpoint");
  add_common(train);
  add_overrides(train);
  train->add_option("--checkpoint", o.checkpoint, "Resume from this checkpoint");
  train->add_flag("--verbose", o.verbose, "Print one progress line per epoch");
  CLI::App* generate = app.add_subcommand("generate", "Export generated 2D-3D samples");
  add_common(generate);
  add_overrides(generate);
  generate->add_option("--checkpoint", o.checkpoint, "Trained checkpoint");
  generate->add_option("--count", o.count, "Number of samples");
  CLI::App* evaluate = app.add_subcommand("evaluate", "Score the lifting network or a predictions file");
  add_common(evaluate);
  add_overrides(evaluate);
  evaluate->add_option("--checkpoint", o.checkpoint, "Trained checkpoint");
  evaluate->add_option("--data", o.data, "Evaluation dataset (ground truth)");
  evaluate->add_option("--predictions", o.predictions, "Dataset file whose 3D frames are predictions");
  CLI::App* stats = app.add_subcommand("camera-stats", "Euler decomposition of dataset or generated cameras");
  add_common(stats);
  add_overrides(stats);
  stats->add_option("--checkpoint", o.checkpoint, "Trained checkpoint");
  stats->add_option("--data", o.data, "Dataset with cameras");
  stats->add_option("--count", o.count, "Number of generated samples");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    report_error(err, "usage", "", e.what());
    return kExitConfig;
  }
  for (const CLI::App* c : {synth, train, generate, evaluate, stats}) {
    if (c->parsed() && c->count("--seed") > 0) o.seed = seed;
  }

  try {
    if (synth->parsed()) return cmd_synth(o, out);
    if (train->parsed()) return cmd_train(o, out, err);
    if (generate->parsed()) return cmd_generate(o, out);
    if (evaluate->parsed()) return cmd_evaluate(o, out);
    return cmd_camera_stats(o, out);
  } catch (const ConfigError& e) {
    report_error(err, e.kind(), e.field(), e.what());
    return kExitConfig;
  } catch (const FileError& e) {
    report_error(err, e.kind(), e.path(), e.what());
    return kExitFile;
  } catch (const Error& e) {
    report_error(err, e.kind(), "", e.what());
    return kExitFailure;
  } catch (const std::exception& e) {
    report_error(err, "internal", "", e.what());
    return kExitFailure;
  }
}

}  // namespace motionadapt
