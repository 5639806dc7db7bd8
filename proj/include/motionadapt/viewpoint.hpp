// Copyright 2026 The motionadapt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "motionadapt/dataset.hpp"
#include "motionadapt/geometry.hpp"

namespace motionadapt {

// One subject-to-camera rotation decomposed as Rz(alpha) Ry(beta) Rx(gamma).
// Angles in radians; elevation follows camera_elevation().
struct ViewpointRow {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double elevation = 0.0;
  bool degenerate = false;  // gimbal lock, gamma fixed to 0
};

std::vector<ViewpointRow> camera_viewpoint_stats(const std::vector<Mat3>& rotations);

// World-to-camera rotations of every clip that carries a camera.
std::vector<Mat3> dataset_rotations(const DatasetFile& data);

struct ElevationSummary {
  double mean_deg = 0.0;
  double stddev_deg = 0.0;
  double min_deg = 0.0;
  double max_deg = 0.0;
  int count = 0;
};

ElevationSummary summarize_elevation(const std::vector<ViewpointRow>& rows);

// Header: sample,alpha,beta,gamma,elevation,degenerate. Throws FileError.
void write_viewpoint_csv(const std::string& path, const std::vector<ViewpointRow>& rows);

}  // namespace motionadapt
