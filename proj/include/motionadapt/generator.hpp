// Copyright 2026 The motionadapt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "motionadapt/autodiff.hpp"
#include "motionadapt/geometry.hpp"
#include "motionadapt/nn.hpp"
#include "motionadapt/rng.hpp"
#include "motionadapt/skeleton.hpp"

namespace motionadapt {

enum class BoneMethod { BG1, BG2, BG3 };
enum class CameraMode { Deterministic, Probabilistic };

// ---- reference bone generators (one sample, plain values) --------------------------
//
// `delta` and `axes` are (J-1) x 3, `lambda` and `angles` hold one value per
// bone. All three scale bone b by (1 + lambda_b).

// B'_t = normalize(B_t + delta) * |B_t| * (1 + lambda) for every frame.
BoneSequence bg1(const BoneSequence& bones, const Eigen::MatrixXd& delta,
                 const Eigen::VectorXd& lambda);

// Frames j = 0..n: normalize(B0 + j delta / n) * |B0| * (1 + lambda). For n = 0
// the single frame uses j / n = 0.
BoneSequence bg2(const Eigen::MatrixXd& bones_t0, const Eigen::MatrixXd& delta,
                 const Eigen::VectorXd& lambda, int n);

// Frames j = 0..n: bone b rotated about axes_b by j * angles_b / n, then scaled.
BoneSequence bg3(const Eigen::MatrixXd& bones_t0, const Eigen::MatrixXd& axes,
                 const Eigen::VectorXd& angles, const Eigen::VectorXd& lambda, int n);

// ---- fake samples ---------------------------------------------------------------------

struct NoiseVector {
  Eigen::VectorXd z;

  static NoiseVector sample(int z_dim, Rng& rng);
};

struct Provenance {
  std::string source_clip;
  int window_center = 0;
  int stride = 1;
  std::uint64_t seed = 0;
};

struct FakeSample {
  PoseSequence x3d;  // camera space, mm
  PoseSequence x2d;  // pixels
  CameraExtrinsics camera;
  Provenance provenance;
};

// Rebuilds joints from `bones` (mm) with the root at `root_positions[t]` (body
// space, zero when empty), applies `camera`, and projects with `K`. Throws
// BehindCameraError if any joint ends at nonpositive depth.
FakeSample assemble_fake(const BoneSequence& bones, const CameraExtrinsics& camera,
                         const CameraIntrinsics& K, const SkeletonTopology& topo,
                         const std::vector<Eigen::Vector3d>& root_positions = {});

// ---- generator network ------------------------------------------------------------------

struct GeneratorConfig {
  int n_frames = 27;
  int z_dim = 64;
  BoneMethod bone_method = BoneMethod::BG3;
  CameraMode camera_mode = CameraMode::Probabilistic;
  RotationRepr camera_repr = RotationRepr::AxisAngle;
  int width = 256;
  int layers = 2;
  double leaky_slope = 0.2;
  double lambda_bound = 0.3;
  double min_depth_m = 1.5;
  double init_depth_m = 5.0;
  double sigma_init = 0.1;

  void validate() const;
};

// Batched generator input. Rows are sample-major: row b * n_frames + t.
struct GeneratorInput {
  ad::Tensor bones;         // B*n x 3(J-1), source window bones, meters
  ad::Tensor center_bones;  // B x 3(J-1)
  ad::Tensor z;             // B x z_dim
  ad::Tensor camera_eps;    // B x 4 standard normals (first 3 used unless quaternion)
};

struct GeneratorOutput {
  // Bone head.
  ad::Var delta;   // B x 3(J-1), BG1/BG2
  ad::Var lambda;  // B x (J-1)
  ad::Var axes;    // B x 3(J-1), BG3
  ad::Var angles;  // B x (J-1), BG3
  // Camera head; `cam_sigma` is empty in deterministic mode.
  ad::Var cam_mu;
  ad::Var cam_sigma;
  ad::Var cam_angle;   // B x 1, probabilistic axis-angle only
  ad::Var cam_params;  // sampled parameters before conversion
  ad::Var R;           // B x 9 row-major generated rotation
  ad::Var T;           // B x 3 meters
  // Assembled sequence.
  ad::Var bones_fake;  // B*n x 3(J-1), body space
  ad::Var joints_cam;  // B*n x 3J, camera space, meters
  ad::Var bones_cam;   // B*n x 3(J-1), R applied
  ad::Var x2d_px;      // B*n x 2J pixels
};

class Generator {
 public:
  Generator(const GeneratorConfig& config, const SkeletonTopology& topo, Rng& init_rng);
  Generator(const Generator&) = delete;
  Generator& operator=(const Generator&) = delete;

  GeneratorOutput forward(ad::Graph& g, const GeneratorInput& in, const CameraIntrinsics& K) const;

  const GeneratorConfig& config() const { return cfg_; }
  ad::ParameterSet& params() { return params_; }
  const ad::ParameterSet& params() const { return params_; }

 private:
  ad::Var bones_bg1(ad::Graph& g, ad::Var bones, ad::Var delta, ad::Var scale) const;
  ad::Var bones_bg2(ad::Graph& g, ad::Var center, ad::Var delta, ad::Var scale) const;
  ad::Var bones_bg3(ad::Graph& g, ad::Var center, ad::Var axes, ad::Var angles, ad::Var scale) const;

  GeneratorConfig cfg_;
  SkeletonTopology topo_;
  ad::ParameterSet params_;
  std::vector<Dense> trunk_;
  Dense head_delta_;
  Dense head_lambda_;
  Dense head_angle_;
  Dense head_cam_mu_;
  Dense head_cam_sigma_;
  Dense head_cam_angle_;
  Dense head_trans_;
  ad::Tensor joints_from_bones_;  // 3(J-1) x 3J: joints row = bones row * M
  ad::Tensor frame_fraction_;     // cached j / n per frame
};

// Constant matrix mapping a flattened bone row to a flattened joint row with
// the root at the origin.
ad::Tensor bones_to_joints_matrix(const SkeletonTopology& topo);
// Constant matrix mapping a flattened joint row (J*dim) to its bone row.
ad::Tensor joints_to_bones_matrix(const SkeletonTopology& topo, int dim);

}  // namespace motionadapt
