// Copyright 2026 The motionadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include "motionadapt/skeleton.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <string>

#include "motionadapt/error.hpp"
#include "motionadapt/geometry.hpp"

namespace motionadapt {

SkeletonTopology::SkeletonTopology(std::vector<int> parents,
                                   std::array<std::vector<int>, kNumBodyParts> part_sets)
    : parents_(std::move(parents)), parts_(std::move(part_sets)) {
  const int J = num_joints();
  if (J < 2) throw TopologyError("skeleton needs at least two joints");

  int roots = 0;
  for (int j = 0; j < J; ++j) {
    const int p = parents_[j];
    if (p == kNoParent) {
      ++roots;
      root_ = j;
    } else if (p < 0 || p >= J || p == j) {
      throw TopologyError("joint " + std::to_string(j) + " has invalid parent " +
                          std::to_string(p));
    }
  }
  if (roots != 1) {
    throw TopologyError("expected exactly one root joint, found " + std::to_string(roots));
  }

  // Breadth-first order from the root; joints never reached sit on a cycle.
  std::vector<std::vector<int>> children(J);
  for (int j = 0; j < J; ++j) {
    if (parents_[j] != kNoParent) children[parents_[j]].push_back(j);
  }
  order_.push_back(root_);
  for (std::size_t i = 0; i < order_.size(); ++i) {
    for (int c : children[order_[i]]) order_.push_back(c);
  }
  if (static_cast<int>(order_.size()) != J) throw TopologyError("parent graph contains a cycle");

  joint_bone_.assign(J, -1);
  for (int j = 0; j < J; ++j) {
    if (j == root_) continue;
    joint_bone_[j] = static_cast<int>(bone_child_.size());
    bone_child_.push_back(j);
  }

  std::set<int> seen;
  for (int p = 0; p < kNumBodyParts; ++p) {
    for (int b : parts_[p]) {
      if (b < 0 || b >= num_bones()) {
        throw TopologyError("part set " + std::to_string(p) + " references bone " +
                            std::to_string(b) + " outside 0.." + std::to_string(num_bones() - 1));
      }
      if (!seen.insert(b).second) {
        throw TopologyError("bone " + std::to_string(b) + " appears in more than one part set");
      }
    }
  }
}

SkeletonTopology SkeletonTopology::h36m16() {
  // Bone b ends at joint b + 1 because the root is joint 0.
  return SkeletonTopology({kNoParent, 0, 1, 2, 0, 4, 5, 0, 7, 8, 8, 10, 11, 8, 13, 14},
                          {{{12, 13, 14}, {9, 10, 11}, {0, 1, 2}, {3, 4, 5}}});
}

const std::vector<int>& SkeletonTopology::part(BodyPart p) const {
  const int id = static_cast<int>(p);
  if (id < 0 || id >= kNumBodyParts) {
    throw ConfigError("unknown body part id " + std::to_string(id));
  }
  return parts_[id];
}

void PoseSequence::validate() const {
  if (frames.empty()) throw ShapeError("pose sequence has no frames");
  const auto J = frames[0].rows();
  const auto D = frames[0].cols();
  if (D != 2 && D != 3) throw ShapeError("pose dimensionality must be 2 or 3");
  for (std::size_t t = 0; t < frames.size(); ++t) {
    if (frames[t].rows() != J || frames[t].cols() != D) {
      throw ShapeError("frame " + std::to_string(t) + " has inconsistent shape");
    }
    if (!frames[t].allFinite()) {
      throw ShapeError("frame " + std::to_string(t) + " has non-finite coordinates");
    }
  }
}

Eigen::MatrixXd BoneSequence::lengths() const {
  Eigen::MatrixXd out(num_frames(), num_bones());
  for (int t = 0; t < num_frames(); ++t) out.row(t) = bones[t].rowwise().norm().transpose();
  return out;
}

BoneSequence joints_to_bones(const PoseSequence& pose, const SkeletonTopology& topo) {
  BoneSequence out;
  out.bones.reserve(pose.frames.size());
  for (const auto& frame : pose.frames) {
    if (frame.rows() != topo.num_joints()) {
      throw TopologyError("pose has " + std::to_string(frame.rows()) + " joints, topology has " +
                          std::to_string(topo.num_joints()));
    }
    Eigen::MatrixXd b(topo.num_bones(), frame.cols());
    for (int i = 0; i < topo.num_bones(); ++i) {
      b.row(i) = frame.row(topo.bone_child(i)) - frame.row(topo.bone_parent(i));
    }
    out.bones.push_back(std::move(b));
  }
  return out;
}

PoseSequence bones_to_joints(const BoneSequence& bones, const Eigen::VectorXd& root_position,
                             const SkeletonTopology& topo) {
  PoseSequence out;
  out.frames.reserve(bones.bones.size());
  const auto D = root_position.size();
  for (const auto& b : bones.bones) {
    if (b.rows() != topo.num_bones() || b.cols() != D) {
      throw ShapeError("bone frame shape does not match topology/root dimensionality");
    }
    Eigen::MatrixXd joints(topo.num_joints(), D);
    joints.row(topo.root()) = root_position.transpose();
    for (int j : topo.traversal_order()) {
      if (j == topo.root()) continue;
      joints.row(j) = joints.row(topo.parents()[j]) + b.row(topo.bone_of_joint(j));
    }
    out.frames.push_back(std::move(joints));
  }
  return out;
}

std::vector<Eigen::MatrixXd> kcs(const BoneSequence& bones) {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(bones.bones.size());
  for (const auto& b : bones.bones) out.push_back(b * b.transpose());
  return out;
}

std::vector<Eigen::MatrixXd> kcs(const PoseSequence& pose, const SkeletonTopology& topo) {
  return kcs(joints_to_bones(pose, topo));
}

std::vector<Eigen::MatrixXd> partwise_kcs(const BoneSequence& bones, BodyPart part,
                                          const SkeletonTopology& topo) {
  const auto& idx = topo.part(part);
  std::vector<Eigen::MatrixXd> out;
  out.reserve(bones.bones.size());
  for (const auto& b : bones.bones) {
    Eigen::MatrixXd sub(static_cast<Eigen::Index>(idx.size()), b.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) sub.row(static_cast<Eigen::Index>(i)) = b.row(idx[i]);
    out.push_back(sub * sub.transpose());
  }
  return out;
}

std::vector<Eigen::Matrix3d> sample_bone_perturbations(int num_bones, double max_angle_deg,
                                                       Rng& rng) {
  if (!(max_angle_deg > 0.0 && max_angle_deg <= 10.0)) {
    throw ConfigError("perturbation angle must lie in (0, 10] degrees, got " +
                      std::to_string(max_angle_deg));
  }
  const double max_rad = max_angle_deg * std::numbers::pi / 180.0;
  std::vector<Eigen::Matrix3d> out;
  out.reserve(num_bones);
  for (int b = 0; b < num_bones; ++b) {
    Eigen::Vector3d axis;
    do {
      axis = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
    } while (axis.norm() < 1e-9);
    const double angle = rng.uniform() * max_rad;
    out.push_back(rotmat_from_quat(quat_from_axis_angle(axis, angle)));
  }
  return out;
}

BoneSequence perturb_bones(const BoneSequence& bones, double max_angle_deg, Rng& rng) {
  if (bones.dim() != 3 && bones.num_frames() > 0) throw ShapeError("perturb_bones needs 3D bones");
  const auto rots = sample_bone_perturbations(bones.num_bones(), max_angle_deg, rng);
  BoneSequence out = bones;
  for (auto& frame : out.bones) {
    for (int b = 0; b < frame.rows(); ++b) {
      frame.row(b) = (rots[b] * frame.row(b).transpose()).transpose();
    }
  }
  return out;
}

}  // namespace motionadapt
