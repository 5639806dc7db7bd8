// Copyright 2026 The motionadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include "motionadapt/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <utility>
#include <vector>

#include "motionadapt/error.hpp"
#include "json_reader.hpp"

namespace motionadapt {

using nlohmann::json;

namespace {

using detail::EnumNames;
using detail::name_of;
using detail::Section;

const EnumNames<BoneMethod> kBoneMethods = {
    {"bg1", BoneMethod::BG1}, {"bg2", BoneMethod::BG2}, {"bg3", BoneMethod::BG3}};
const EnumNames<CameraMode> kCameraModes = {{"deterministic", CameraMode::Deterministic},
                                            {"probabilistic", CameraMode::Probabilistic}};
const EnumNames<RotationRepr> kReprs = {{"axis_angle", RotationRepr::AxisAngle},
                                        {"euler", RotationRepr::Euler},
                                        {"quaternion", RotationRepr::Quaternion}};
const EnumNames<ProjectionComparand> kComparands = {{"fake_2d", ProjectionComparand::Fake2D},
                                                    {"target_2d", ProjectionComparand::Target2D}};
const EnumNames<Preprocessing> kPreprocessing = {{"image_normalize", Preprocessing::ImageNormalize},
                                                 {"root_frobenius", Preprocessing::RootFrobenius}};
const EnumNames<TrainMode> kModes = {{"adapt", TrainMode::Adapt}, {"source_only", TrainMode::SourceOnly}};

void require(bool ok, const char* field, const std::string& message) {
  if (!ok) throw ConfigError(message, field);
}

}  // namespace

std::string to_string(BoneMethod m) { return name_of(kBoneMethods, m); }
std::string to_string(CameraMode m) { return name_of(kCameraModes, m); }
std::string to_string(RotationRepr r) { return name_of(kReprs, r); }

void TrainConfig::validate() const {
  require(n_frames >= 1 && n_frames % 2 == 1, "/model/n_frames", "n_frames must be a positive odd number");
  require(z_dim >= 0, "/model/z_dim", "z_dim must be >= 0");
  require(lambda_bound > 0.0 && lambda_bound < 1.0, "/model/lambda_bound", "lambda_bound must lie in (0, 1)");
  require(min_depth_mm > 0.0, "/model/min_depth_mm", "min_depth_mm must be positive");
  require(init_depth_mm > min_depth_mm, "/model/init_depth_mm", "init_depth_mm must exceed min_depth_mm");
  require(sigma_init > 0.0, "/model/sigma_init", "sigma_init must be positive");
  require(generator_width >= 1, "/model/generator_width", "must be >= 1");
  require(generator_layers >= 1, "/model/generator_layers", "must be >= 1");
  require(disc_width >= 1, "/model/disc_width", "must be >= 1");
  require(disc_layers >= 1, "/model/disc_layers", "must be >= 1");
  require(lifting_width >= 1, "/model/lifting_width", "must be >= 1");
  require(lifting_blocks >= 0, "/model/lifting_blocks", "must be >= 0");
  require(leaky_slope >= 0.0 && leaky_slope < 1.0, "/model/leaky_slope", "must lie in [0, 1)");
  require(kcs_scale > 0.0, "/model/kcs_scale", "must be positive");
  require(camera_mode == CameraMode::Probabilistic || camera_repr == RotationRepr::AxisAngle,
          "/model/camera_mode", "deterministic camera mode is defined for axis_angle only");
  require(alpha >= 0.0, "/loss/alpha", "must be >= 0");
  require(beta >= 0.0, "/loss/beta", "must be >= 0");
  require(perturb_max_deg >= 0.0 && perturb_max_deg <= 10.0, "/loss/perturb_max_deg",
          "must lie in [0, 10] (0 disables)");
  selection.validate();
  require(lr_generator >= 0.0, "/optim/lr_generator", "must be >= 0");
  require(lr_discriminator >= 0.0, "/optim/lr_discriminator", "must be >= 0");
  require(lr_lifting >= 0.0, "/optim/lr_lifting", "must be >= 0");
  require(adam_beta1 >= 0.0 && adam_beta1 < 1.0, "/optim/beta1", "must lie in [0, 1)");
  require(adam_beta2 >= 0.0 && adam_beta2 < 1.0, "/optim/beta2", "must lie in [0, 1)");
  require(adam_eps > 0.0, "/optim/eps", "must be positive");
  require(batch_size >= 1, "/train/batch_size", "must be >= 1");
  require(epochs >= 0, "/train/epochs", "must be >= 0");
  require(steps_per_epoch >= 1, "/train/steps_per_epoch", "must be >= 1");
  require(pretrain_steps >= 0, "/train/pretrain_steps", "must be >= 0");
  require(downsample_min >= 1 && downsample_max >= downsample_min, "/train/downsample",
          "expected 1 <= min <= max");
  require(target_downsample_min >= 1 && target_downsample_max >= target_downsample_min,
          "/train/target_downsample", "expected 1 <= min <= max");
  require(eval_stride >= 1, "/eval/stride", "must be >= 1");
  require(pck_threshold_mm > 0.0, "/eval/pck_threshold_mm", "must be positive");
  require(viewpoint_samples >= 1, "/eval/viewpoint_samples", "must be >= 1");
}

GeneratorConfig TrainConfig::generator_config() const {
  GeneratorConfig g;
  g.n_frames = n_frames;
  g.z_dim = z_dim;
  g.bone_method = bone_method;
  g.camera_mode = camera_mode;
  g.camera_repr = camera_repr;
  g.width = generator_width;
  g.layers = generator_layers;
  g.leaky_slope = leaky_slope;
  g.lambda_bound = lambda_bound;
  g.min_depth_m = min_depth_mm / 1000.0;
  g.init_depth_m = init_depth_mm / 1000.0;
  g.sigma_init = sigma_init;
  return g;
}

DiscriminatorConfig TrainConfig::discriminator_config() const {
  DiscriminatorConfig d;
  d.n_frames = n_frames;
  d.width = disc_width;
  d.layers = disc_layers;
  d.leaky_slope = leaky_slope;
  d.kcs_scale = kcs_scale;
  return d;
}

LiftingConfig TrainConfig::lifting_config() const {
  LiftingConfig l;
  l.n_frames = n_frames;
  l.width = lifting_width;
  l.blocks = lifting_blocks;
  l.leaky_slope = leaky_slope;
  return l;
}

AdamConfig TrainConfig::adam(double lr) const {
  AdamConfig a;
  a.lr = lr;
  a.beta1 = adam_beta1;
  a.beta2 = adam_beta2;
  a.eps = adam_eps;
  return a;
}

json TrainConfig::to_json() const {
  json j;
  j["data"] = {{"source", source_path}, {"target", target_path}, {"eval", eval_path}};
  j["model"] = {{"n_frames", n_frames},
                {"z_dim", z_dim},
                {"bone_method", to_string(bone_method)},
                {"camera_mode", to_string(camera_mode)},
                {"camera_repr", to_string(camera_repr)},
                {"lambda_bound", lambda_bound},
                {"min_depth_mm", min_depth_mm},
                {"init_depth_mm", init_depth_mm},
                {"sigma_init", sigma_init},
                {"generator_width", generator_width},
                {"generator_layers", generator_layers},
                {"disc_width", disc_width},
                {"disc_layers", disc_layers},
                {"lifting_width", lifting_width},
                {"lifting_blocks", lifting_blocks},
                {"leaky_slope", leaky_slope},
                {"kcs_scale", kcs_scale}};
  j["loss"] = {{"alpha", alpha},
               {"beta", beta},
               {"projection_comparand", name_of(kComparands, projection_comparand)},
               {"perturb_max_deg", perturb_max_deg},
               {"perturb_fake", perturb_fake}};
  j["selection"] = {{"a", selection.a}, {"b", selection.b}, {"c", selection.c}, {"d", selection.d}};
  j["optim"] = {{"lr_generator", lr_generator},
                {"lr_discriminator", lr_discriminator},
                {"lr_lifting", lr_lifting},
                {"beta1", adam_beta1},
                {"beta2", adam_beta2},
                {"eps", adam_eps}};
  j["train"] = {{"mode", name_of(kModes, mode)},
                {"batch_size", batch_size},
                {"epochs", epochs},
                {"steps_per_epoch", steps_per_epoch},
                {"pretrain_steps", pretrain_steps},
                {"seed", seed},
                {"downsample", {downsample_min, downsample_max}},
                {"target_downsample", {target_downsample_min, target_downsample_max}},
                {"preprocessing", name_of(kPreprocessing, preprocessing)}};
  j["eval"] = {{"stride", eval_stride},
               {"pck_threshold_mm", pck_threshold_mm},
               {"viewpoint_samples", viewpoint_samples}};
  return j;
}

TrainConfig TrainConfig::from_json(const json& j) {
  TrainConfig c;
  Section root(&j, "");
  {
    Section s = root.sub("data");
    s.read("source", c.source_path);
    s.read("target", c.target_path);
    s.read("eval", c.eval_path);
    s.finish();
  }
  {
    Section s = root.sub("model");
    s.read("n_frames", c.n_frames);
    s.read("z_dim", c.z_dim);
    s.read_enum("bone_method", c.bone_method, kBoneMethods);
    s.read_enum("camera_mode", c.camera_mode, kCameraModes);
    s.read_enum("camera_repr", c.camera_repr, kReprs);
    s.read("lambda_bound", c.lambda_bound);
    s.read("min_depth_mm", c.min_depth_mm);
    s.read("init_depth_mm", c.init_depth_mm);
    s.read("sigma_init", c.sigma_init);
    s.read("generator_width", c.generator_width);
    s.read("generator_layers", c.generator_layers);
    s.read("disc_width", c.disc_width);
    s.read("disc_layers", c.disc_layers);
    s.read("lifting_width", c.lifting_width);
    s.read("lifting_blocks", c.lifting_blocks);
    s.read("leaky_slope", c.leaky_slope);
    s.read("kcs_scale", c.kcs_scale);
    s.finish();
  }
  {
    Section s = root.sub("loss");
    s.read("alpha", c.alpha);
    s.read("beta", c.beta);
    s.read_enum("projection_comparand", c.projection_comparand, kComparands);
    s.read("perturb_max_deg", c.perturb_max_deg);
    s.read("perturb_fake", c.perturb_fake);
    s.finish();
  }
  {
    Section s = root.sub("selection");
    s.read("a", c.selection.a);
    s.read("b", c.selection.b);
    s.read("c", c.selection.c);
    s.read("d", c.selection.d);
    s.finish();
  }
  {
    Section s = root.sub("optim");
    s.read("lr_generator", c.lr_generator);
    s.read("lr_discriminator", c.lr_discriminator);
    s.read("lr_lifting", c.lr_lifting);
    s.read("beta1", c.adam_beta1);
    s.read("beta2", c.adam_beta2);
    s.read("eps", c.adam_eps);
    s.finish();
  }
  {
    Section s = root.sub("train");
    s.read_enum("mode", c.mode, kModes);
    s.read("batch_size", c.batch_size);
    s.read("epochs", c.epochs);
    s.read("steps_per_epoch", c.steps_per_epoch);
    s.read("pretrain_steps", c.pretrain_steps);
    s.read("seed", c.seed);
    s.read_range("downsample", c.downsample_min, c.downsample_max);
    s.read_range("target_downsample", c.target_downsample_min, c.target_downsample_max);
    s.read_enum("preprocessing", c.preprocessing, kPreprocessing);
    s.finish();
  }
  {
    Section s = root.sub("eval");
    s.read("stride", c.eval_stride);
    s.read("pck_threshold_mm", c.pck_threshold_mm);
    s.read("viewpoint_samples", c.viewpoint_samples);
    s.finish();
  }
  root.finish();
  c.validate();
  return c;
}

TrainConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open config '" + path + "'", path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what(), "/");
  }
  TrainConfig c = TrainConfig::from_json(j);
  const auto base = std::filesystem::path(path).parent_path();
  for (std::string* p : {&c.source_path, &c.target_path, &c.eval_path}) {
    if (!p->empty() && std::filesystem::path(*p).is_relative()) *p = (base / *p).lexically_normal().string();
  }
  return c;
}

}  // namespace motionadapt
