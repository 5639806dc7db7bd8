// Copyright 2026 The motionadapt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

#include "motionadapt/rng.hpp"

namespace motionadapt {

enum class BodyPart { RightArm = 0, LeftArm = 1, RightLeg = 2, LeftLeg = 3 };
inline constexpr int kNumBodyParts = 4;

// Joint tree plus the four limb bone sets used by the part-wise KCS.
//
// Bones are indexed by child joint in ascending order with the root skipped,
// so bone b always ends at joint `bone_child(b)` and starts at its parent.
class SkeletonTopology {
 public:
  static constexpr int kNoParent = -1;

  // Throws TopologyError when the parents do not form a single rooted tree
  // or the part sets are not disjoint bone subsets.
  SkeletonTopology(std::vector<int> parents,
                   std::array<std::vector<int>, kNumBodyParts> part_sets);

  // 16-joint Human3.6M-style skeleton rooted at the pelvis:
  //  0 pelvis, 1 r-hip, 2 r-knee, 3 r-ankle, 4 l-hip, 5 l-knee, 6 l-ankle,
  //  7 spine, 8 thorax, 9 head, 10 l-shoulder, 11 l-elbow, 12 l-wrist,
  //  13 r-shoulder, 14 r-elbow, 15 r-wrist.
  static SkeletonTopology h36m16();

  int num_joints() const { return static_cast<int>(parents_.size()); }
  int num_bones() const { return num_joints() - 1; }
  int root() const { return root_; }
  const std::vector<int>& parents() const { return parents_; }
  int bone_child(int bone) const { return bone_child_[bone]; }
  int bone_parent(int bone) const { return parents_[bone_child_[bone]]; }
  // Bone ending at `joint`, or -1 for the root.
  int bone_of_joint(int joint) const { return joint_bone_[joint]; }
  // Joints ordered so that every parent precedes its children.
  const std::vector<int>& traversal_order() const { return order_; }
  const std::array<std::vector<int>, kNumBodyParts>& part_sets() const { return parts_; }
  // Throws ConfigError for an out-of-range part id.
  const std::vector<int>& part(BodyPart p) const;

  friend bool operator==(const SkeletonTopology& a, const SkeletonTopology& b) {
    return a.parents_ == b.parents_ && a.parts_ == b.parts_;
  }

 private:
  std::vector<int> parents_;
  std::array<std::vector<int>, kNumBodyParts> parts_;
  int root_ = 0;
  std::vector<int> bone_child_;
  std::vector<int> joint_bone_;
  std::vector<int> order_;
};

enum class Units { Millimeters, Meters, Pixels, NormalizedImage };
enum class OriginSpace { Camera, World, Image, Body };

// n frames of J keypoints in D in {2, 3} dimensions. Each frame is J x D.
struct PoseSequence {
  std::vector<Eigen::MatrixXd> frames;
  Units units = Units::Millimeters;
  double fps = 50.0;
  OriginSpace origin = OriginSpace::Camera;

  int num_frames() const { return static_cast<int>(frames.size()); }
  int num_joints() const { return frames.empty() ? 0 : static_cast<int>(frames[0].rows()); }
  int dim() const { return frames.empty() ? 0 : static_cast<int>(frames[0].cols()); }
  // Throws ShapeError on empty/ragged data or non-finite coordinates.
  void validate() const;
};

// n frames of J-1 bone vectors, each frame (J-1) x D, in bone index order.
struct BoneSequence {
  std::vector<Eigen::MatrixXd> bones;

  int num_frames() const { return static_cast<int>(bones.size()); }
  int num_bones() const { return bones.empty() ? 0 : static_cast<int>(bones[0].rows()); }
  int dim() const { return bones.empty() ? 0 : static_cast<int>(bones[0].cols()); }
  // n x (J-1) matrix of bone norms.
  Eigen::MatrixXd lengths() const;
};

BoneSequence joints_to_bones(const PoseSequence& pose, const SkeletonTopology& topo);

// Inverse of joints_to_bones with the root joint placed at `root_position`
// in every frame. The root position's size fixes D.
PoseSequence bones_to_joints(const BoneSequence& bones, const Eigen::VectorXd& root_position,
                             const SkeletonTopology& topo);

// Per-frame Gram matrix of the bone vectors: (J-1) x (J-1), entry (a, b) is
// bone_a . bone_b, so the diagonal holds squared bone lengths.
std::vector<Eigen::MatrixXd> kcs(const BoneSequence& bones);
std::vector<Eigen::MatrixXd> kcs(const PoseSequence& pose, const SkeletonTopology& topo);

// KCS restricted to the bones of one limb, |part| x |part| per frame.
std::vector<Eigen::MatrixXd> partwise_kcs(const BoneSequence& bones, BodyPart part,
                                          const SkeletonTopology& topo);

// Rotates every bone about a uniformly random axis by an angle drawn
// uniformly from [0, max_angle_deg). One rotation is drawn per bone and shared
// by all frames, so the perturbed sequence stays temporally coherent.
// max_angle_deg must lie in (0, 10].
BoneSequence perturb_bones(const BoneSequence& bones, double max_angle_deg, Rng& rng);

// Same draw as perturb_bones, returned as one 3x3 rotation per bone.
std::vector<Eigen::Matrix3d> sample_bone_perturbations(int num_bones, double max_angle_deg,
                                                       Rng& rng);

}  // namespace motionadapt
