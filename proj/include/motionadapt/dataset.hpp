// Copyright 2026 The motionadapt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "motionadapt/geometry.hpp"
#include "motionadapt/skeleton.hpp"

namespace motionadapt {

// What a dataset file is used for. Target files must not carry 3D; evaluation
// files must.
enum class DatasetRole { Source, Target, Evaluation, Generated };

struct DatasetClip {
  std::string id;
  std::string subject;
  PoseSequence frames2d;                 // pixels
  std::optional<PoseSequence> frames3d;  // camera space, mm
  std::optional<CameraExtrinsics> camera;
  nlohmann::json provenance;             // null unless generated
};

struct DatasetFile {
  std::string name;
  DatasetRole role = DatasetRole::Source;
  double fps = 50.0;
  SkeletonTopology topology = SkeletonTopology::h36m16();
  CameraIntrinsics intrinsics;
  bool synthetic = false;
  double reprojection_tolerance_px = 1e-6;
  nlohmann::json provenance;
  std::vector<DatasetClip> clips;

  // Throws DatasetError on shape problems, role violations, or a
  // reprojection residual above the stored tolerance.
  void validate() const;

  nlohmann::json to_json() const;
  static DatasetFile from_json(const nlohmann::json& j);
};

// FileError when the file is missing or unparsable, DatasetError when the
// content is invalid.
DatasetFile load_dataset(const std::string& path);
void save_dataset(const std::string& path, const DatasetFile& data);

std::string to_string(DatasetRole role);

}  // namespace motionadapt
