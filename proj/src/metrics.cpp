// Copyright 2026 The motionadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include "motionadapt/metrics.hpp"

#include "motionadapt/error.hpp"
#include "motionadapt/geometry.hpp"

namespace motionadapt {

namespace {

void check_pair(const PoseSequence& pred, const PoseSequence& gt) {
  if (pred.num_frames() != gt.num_frames() || pred.num_frames() == 0) {
    throw ShapeError("prediction and ground truth differ in frame count");
  }
  for (int t = 0; t < pred.num_frames(); ++t) {
    if (pred.frames[t].rows() != gt.frames[t].rows() || pred.frames[t].cols() != 3 ||
        gt.frames[t].cols() != 3) {
      throw ShapeError("frame " + std::to_string(t) + ": expected matching J x 3 poses");
    }
  }
}

// Per-joint errors of all frames, flattened.
Eigen::VectorXd joint_errors(const PoseSequence& pred, const PoseSequence& gt) {
  check_pair(pred, gt);
  std::vector<double> e;
  for (int t = 0; t < pred.num_frames(); ++t) {
    const Eigen::VectorXd d = (pred.frames[t] - gt.frames[t]).rowwise().norm();
    e.insert(e.end(), d.data(), d.data() + d.size());
  }
  return Eigen::Map<Eigen::VectorXd>(e.data(), static_cast<Eigen::Index>(e.size()));
}

}  // namespace

PoseSequence root_relative(const PoseSequence& pose, int root) {
  PoseSequence out = pose;
  for (auto& f : out.frames) {
    if (root < 0 || root >= f.rows()) throw ShapeError("root index out of range");
    const Eigen::RowVectorXd r = f.row(root);
    f.rowwise() -= r;
  }
  return out;
}

double mpjpe(const PoseSequence& pred, const PoseSequence& gt) { return joint_errors(pred, gt).mean(); }

double p_mpjpe(const PoseSequence& pred, const PoseSequence& gt) {
  check_pair(pred, gt);
  return mpjpe(procrustes_align(pred, gt), gt);
}

PckAuc pck_auc(const PoseSequence& pred, const PoseSequence& gt, double threshold_mm) {
  const Eigen::VectorXd e = joint_errors(pred, gt);
  auto pck_at = [&e](double th) { return 100.0 * (e.array() <= th).cast<double>().mean(); };
  PckAuc out;
  out.pck = pck_at(threshold_mm);
  double s = 0.0;
  for (int k = 0; k <= 30; ++k) s += pck_at(5.0 * k);
  out.auc = s / 31.0;
  return out;
}

nlohmann::json MetricReport::to_json() const {
  nlohmann::json j;
  j["mpjpe_mm"] = mpjpe;
  j["p_mpjpe_mm"] = p_mpjpe;
  j["pck"] = pck;
  j["auc"] = auc;
  j["pck_threshold_mm"] = pck_threshold_mm;
  j["frames"] = frames;
  j["per_clip"] = nlohmann::json::array();
  for (const auto& c : per_clip) {
    j["per_clip"].push_back({{"id", c.id}, {"frames", c.frames}, {"mpjpe_mm", c.mpjpe},
                             {"p_mpjpe_mm", c.p_mpjpe}, {"pck", c.pck}, {"auc", c.auc}});
  }
  return j;
}

MetricReport evaluate_clips(const std::vector<EvalClip>& clips, int root, double threshold_mm) {
  MetricReport r;
  r.pck_threshold_mm = threshold_mm;
  for (const auto& clip : clips) {
    const PoseSequence pred = root_relative(clip.pred, root);
    const PoseSequence gt = root_relative(clip.gt, root);
    ClipMetrics c;
    c.id = clip.id;
    c.frames = gt.num_frames();
    c.mpjpe = mpjpe(pred, gt);
    c.p_mpjpe = p_mpjpe(pred, gt);
    const PckAuc pa = pck_auc(pred, gt, threshold_mm);
    c.pck = pa.pck;
    c.auc = pa.auc;
    r.frames += c.frames;
    r.mpjpe += c.mpjpe * c.frames;
    r.p_mpjpe += c.p_mpjpe * c.frames;
    r.pck += c.pck * c.frames;
    r.auc += c.auc * c.frames;
    r.per_clip.push_back(std::move(c));
  }
  if (r.frames > 0) {
    r.mpjpe /= r.frames;
    r.p_mpjpe /= r.frames;
    r.pck /= r.frames;
    r.auc /= r.frames;
  }
  return r;
}

}  // namespace motionadapt
