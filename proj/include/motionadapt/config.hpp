// Copyright 2026 The motionadapt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "motionadapt/adversary.hpp"
#include "motionadapt/generator.hpp"

namespace motionadapt {

enum class ProjectionComparand { Fake2D, Target2D };
enum class Preprocessing { ImageNormalize, RootFrobenius };
enum class TrainMode { Adapt, SourceOnly };

// Every training hyperparameter. The JSON form is nested by section (see
// docs/config.md); unknown keys are rejected and errors carry the field path.
struct TrainConfig {
  // data
  std::string source_path;
  std::string target_path;
  std::string eval_path;

  // model
  int n_frames = 27;
  int z_dim = 64;
  BoneMethod bone_method = BoneMethod::BG3;
  CameraMode camera_mode = CameraMode::Probabilistic;
  RotationRepr camera_repr = RotationRepr::AxisAngle;
  double lambda_bound = 0.3;
  double min_depth_mm = 1500.0;
  double init_depth_mm = 5000.0;
  double sigma_init = 0.1;
  int generator_width = 256;
  int generator_layers = 2;
  int disc_width = 128;
  int disc_layers = 2;
  int lifting_width = 1024;
  int lifting_blocks = 2;
  double leaky_slope = 0.2;
  double kcs_scale = 10.0;

  // loss
  double alpha = 1.0;
  double beta = 1.0;
  ProjectionComparand projection_comparand = ProjectionComparand::Fake2D;
  double perturb_max_deg = 10.0;  // 0 disables the real-branch perturbation
  bool perturb_fake = false;
  SelectionConstants selection;

  // optim
  double lr_generator = 1e-4;
  double lr_discriminator = 1e-4;
  double lr_lifting = 1e-4;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  // train
  TrainMode mode = TrainMode::Adapt;
  int batch_size = 64;
  int epochs = 10;
  int steps_per_epoch = 100;
  int pretrain_steps = 500;
  std::uint64_t seed = 0;
  int downsample_min = 2;
  int downsample_max = 5;
  int target_downsample_min = 1;
  int target_downsample_max = 1;
  Preprocessing preprocessing = Preprocessing::ImageNormalize;

  // eval
  int eval_stride = 1;
  double pck_threshold_mm = 150.0;
  int viewpoint_samples = 512;

  // Throws ConfigError with the offending field path.
  void validate() const;

  GeneratorConfig generator_config() const;
  DiscriminatorConfig discriminator_config() const;
  LiftingConfig lifting_config() const;
  AdamConfig adam(double lr) const;

  nlohmann::json to_json() const;
  // Missing keys keep their defaults; unknown keys or wrong types throw.
  static TrainConfig from_json(const nlohmann::json& j);
};

// Reads and validates a config file. Data paths that are relative are
// resolved against the config file's directory. Parse errors throw
// ConfigError; a missing file throws FileError.
TrainConfig load_config(const std::string& path);

std::string to_string(BoneMethod m);
std::string to_string(CameraMode m);
std::string to_string(RotationRepr r);

}  // namespace motionadapt
