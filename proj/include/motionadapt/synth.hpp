// Copyright 2026 The motionadapt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>

#include <nlohmann/json.hpp>

#include "motionadapt/dataset.hpp"

namespace motionadapt {

// Procedural two-domain motion dataset. Angles in degrees, distances in
// meters. Source and target elevation bands must not overlap.
struct SynthSpec {
  int source_subjects = 4;
  int target_subjects = 4;
  int eval_subjects = 2;
  int clips_per_subject = 4;  // alternating walker / reacher programs
  int source_clip_len = 400;
  int target_clip_len = 200;
  double source_fps = 50.0;
  double target_fps = 25.0;
  std::array<double, 2> source_elevation_deg = {-5.0, 10.0};
  std::array<double, 2> target_elevation_deg = {30.0, 50.0};
  std::array<double, 2> source_limb_scale = {0.95, 1.05};
  std::array<double, 2> target_limb_scale = {0.9, 1.0};
  std::array<double, 2> distance_m = {4.0, 6.0};
  std::array<double, 2> source_speed_hz = {0.6, 1.0};
  std::array<double, 2> target_speed_hz = {0.9, 1.4};
  CameraIntrinsics intrinsics;
  std::uint64_t seed = 0;

  // Throws ConfigError with a field path.
  void validate() const;
  nlohmann::json to_json() const;
  static SynthSpec from_json(const nlohmann::json& j);
};

struct SynthDatasets {
  DatasetFile source;       // 2D + 3D + cameras
  DatasetFile target;       // 2D only
  DatasetFile target_eval;  // held-out target subjects with 3D + cameras
};

SynthDatasets synth_motion_dataset(const SynthSpec& spec);

// World (z-up) to camera rotation for a camera at `center` looking at `target`
// with image x to the right and y down.
CameraExtrinsics look_at_camera(const Eigen::Vector3d& center_mm, const Eigen::Vector3d& target_mm);

}  // namespace motionadapt
