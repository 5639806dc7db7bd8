// Copyright 2026 The motionadapt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "motionadapt/skeleton.hpp"

namespace motionadapt {

// Each pose frame is J x 3 (millimeters). Both sequences must match in shape;
// otherwise ShapeError.

// Subtracts the root joint from every joint of every frame.
PoseSequence root_relative(const PoseSequence& pose, int root);

// Mean over frames and joints of the per-joint Euclidean error. No alignment
// is applied here; callers root-align both inputs.
double mpjpe(const PoseSequence& pred, const PoseSequence& gt);
// mpjpe after per-frame Procrustes alignment of pred onto gt.
double p_mpjpe(const PoseSequence& pred, const PoseSequence& gt);

struct PckAuc {
  double pck = 0.0;  // percent
  double auc = 0.0;  // percent
};

// A joint counts as correct when its error is at most the threshold. AUC is
// the mean PCK over thresholds 0, 5, ..., 150 mm.
PckAuc pck_auc(const PoseSequence& pred, const PoseSequence& gt, double threshold_mm = 150.0);

struct ClipMetrics {
  std::string id;
  int frames = 0;
  double mpjpe = 0.0;
  double p_mpjpe = 0.0;
  double pck = 0.0;
  double auc = 0.0;
};

struct MetricReport {
  double mpjpe = 0.0;
  double p_mpjpe = 0.0;
  double pck = 0.0;
  double auc = 0.0;
  double pck_threshold_mm = 150.0;
  int frames = 0;
  std::vector<ClipMetrics> per_clip;

  nlohmann::json to_json() const;
};

struct EvalClip {
  std::string id;
  PoseSequence pred;
  PoseSequence gt;
};

// Root-relative evaluation of every clip; totals are frame-weighted.
MetricReport evaluate_clips(const std::vector<EvalClip>& clips, int root, double threshold_mm = 150.0);

}  // namespace motionadapt
