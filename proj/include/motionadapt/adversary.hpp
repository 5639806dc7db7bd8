// Copyright 2026 The motionadapt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "motionadapt/autodiff.hpp"
#include "motionadapt/nn.hpp"
#include "motionadapt/rng.hpp"
#include "motionadapt/skeleton.hpp"

namespace motionadapt {

struct DiscriminatorConfig {
  int n_frames = 27;
  int width = 128;
  int layers = 2;
  double leaky_slope = 0.2;
  // Multiplies 2D KCS entries so that normalized-image Gram values are O(1).
  double kcs_scale = 10.0;
};

// Scores normalized, not root-centered, 2D windows. Branch A reads the
// flattened keypoints, branch B the upper triangle of each frame's 2D KCS.
class DomainDiscriminator {
 public:
  DomainDiscriminator(const DiscriminatorConfig& config, const SkeletonTopology& topo, Rng& init_rng);
  DomainDiscriminator(const DomainDiscriminator&) = delete;
  DomainDiscriminator& operator=(const DomainDiscriminator&) = delete;

  // x2d: B*n x 2J rows (sample-major) -> B x 1 scores. Prints a warning once
  // when the input looks root-centered.
  ad::Var score(ad::Graph& g, ad::Var x2d) const;
  Eigen::VectorXd score_values(const ad::Tensor& x2d) const;

  // Inputs of the two branches for a B*n x 2J batch.
  ad::Tensor branch_a_input(const ad::Tensor& x2d) const;
  ad::Tensor branch_b_input(const ad::Tensor& x2d) const;

  ad::ParameterSet& params() { return params_; }
  const ad::ParameterSet& params() const { return params_; }
  const DiscriminatorConfig& config() const { return cfg_; }

 private:
  ad::Var kcs_branch_input(ad::Graph& g, ad::Var x2d) const;

  DiscriminatorConfig cfg_;
  SkeletonTopology topo_;
  ad::ParameterSet params_;
  std::vector<Dense> branch_a_;
  std::vector<Dense> branch_b_;
  Dense head_hidden_;
  Dense head_out_;
  ad::Tensor bone_matrix_;  // 2J x 2(J-1)
  mutable bool warned_ = false;
};

// Fraction of frames whose root keypoint sits exactly at the origin.
double root_at_origin_fraction(const ad::Tensor& x2d, int root);

// Scores 3D bone windows (meters). The full-KCS branch reads `bones`; the
// four part-wise branches read `part_bones`, which callers perturb for real
// samples (pass the same Var to disable perturbation).
class Discriminator3D {
 public:
  Discriminator3D(const DiscriminatorConfig& config, const SkeletonTopology& topo, Rng& init_rng);
  Discriminator3D(const Discriminator3D&) = delete;
  Discriminator3D& operator=(const Discriminator3D&) = delete;

  // bones, part_bones: B*n x 3(J-1) -> B x 1.
  ad::Var score(ad::Graph& g, ad::Var bones, ad::Var part_bones) const;
  Eigen::VectorXd score_values(const ad::Tensor& bones, const ad::Tensor& part_bones) const;

  ad::ParameterSet& params() { return params_; }
  const ad::ParameterSet& params() const { return params_; }

 private:
  DiscriminatorConfig cfg_;
  SkeletonTopology topo_;
  ad::ParameterSet params_;
  std::vector<Dense> branch_full_;
  std::array<std::vector<Dense>, kNumBodyParts> branch_part_;
  Dense head_hidden_;
  Dense head_out_;
};

// Rotates every bone of each sample's window by one random rotation per bone
// (shared across that sample's frames). max_angle_deg <= 0 returns a copy.
ad::Tensor perturb_bone_rows(const ad::Tensor& bones, int n_frames, double max_angle_deg, Rng& rng);

struct LiftingConfig {
  int n_frames = 27;
  int width = 1024;
  int blocks = 2;
  double leaky_slope = 0.2;
  bool zero_init_output = false;
};

// Dense residual lifting network: a flattened 2D window (B x 2Jn) to the
// center frame's root-relative 3D pose (B x 3J, millimeters).
class LiftingNetwork {
 public:
  LiftingNetwork(const LiftingConfig& config, const SkeletonTopology& topo, Rng& init_rng);
  LiftingNetwork(const LiftingNetwork&) = delete;
  LiftingNetwork& operator=(const LiftingNetwork&) = delete;

  // Throws ShapeError when the window length does not match the config.
  ad::Var predict(ad::Graph& g, ad::Var x2d_window) const;
  ad::Tensor predict_values(const ad::Tensor& x2d_window) const;

  ad::ParameterSet& params() { return params_; }
  const ad::ParameterSet& params() const { return params_; }
  const LiftingConfig& config() const { return cfg_; }
  int input_width() const { return cfg_.n_frames * 2 * num_joints_; }

 private:
  void check_input(Eigen::Index cols) const;

  LiftingConfig cfg_;
  int num_joints_;
  ad::ParameterSet params_;
  Dense input_;
  std::vector<std::pair<Dense, Dense>> blocks_;
  Dense output_;
};

// ---- losses -----------------------------------------------------------------------

struct SelectionConstants {
  double a = 2.0;
  double b = 1.5;
  double c = 2.0;
  double d = 1.5;

  void validate() const;
};

// 1/2 E[(D(real) - 1)^2] + 1/2 E[D(fake)^2]. Throws ShapeError on empty batches.
ad::Var lsgan_discriminator_loss(ad::Var real_scores, ad::Var fake_scores);
double lsgan_discriminator_loss(const Eigen::VectorXd& real_scores, const Eigen::VectorXd& fake_scores);
// 1/2 E[(D(fake) - 1)^2].
ad::Var lsgan_generator_loss(ad::Var fake_scores);
double lsgan_generator_loss(const Eigen::VectorXd& fake_scores);

// || P / |P| - X / |X| ||_1 with P the first two coordinates of the lifted
// pose (J x 3) and X the 2D pose (J x 2). Throws DegenerateError on a zero norm.
double projection_loss(const Eigen::MatrixXd& x2d, const Eigen::MatrixXd& lifted3d);
// Batched: x2d B x 2J, lifted B x 3J; mean of the per-sample values.
ad::Var projection_loss(ad::Var x2d, ad::Var lifted);

// f = (err_fake / err_src - c)^2; f if f < d^2 else 0. The denominator is
// guarded with 1e-8.
double hard_ratio_loss(double err_fake, double err_src, double c, double d);
// Mean over the batch of the per-sample hard-ratio term; err_fake is B x 1.
ad::Var hard_ratio_loss(ad::Var err_fake, const Eigen::VectorXd& err_src, double c, double d);

// keep_i iff (err_fake_i / err_src_i - a)^2 < b^2.
std::vector<bool> selection_mask(const Eigen::VectorXd& err_fake, const Eigen::VectorXd& err_src, double a,
                                 double b);

// Mean per-joint Euclidean distance of each sample (rows B x 3J) after moving
// both poses' root joint to the origin: B x 1.
ad::Var per_sample_error(ad::Var pred, ad::Var gt, int root);
Eigen::VectorXd per_sample_error(const ad::Tensor& pred, const ad::Tensor& gt, int root);

// Source term plus fake term; an invalid (empty) fake pair contributes 0.
ad::Var lifting_loss(ad::Var pred_src, ad::Var gt_src, ad::Var pred_fake, ad::Var gt_fake, int root);

struct LossBundle {
  double L_DD = 0.0;
  double L_D3D = 0.0;
  double L_Gadv = 0.0;
  double L_proj = 0.0;
  double L_hr = 0.0;
  double L_G = 0.0;
  double L_N = 0.0;
  double keep_rate = 0.0;
  double alpha = 1.0;
  double beta = 1.0;

  bool all_finite() const;
  // |L_G - (L_Gadv + L_proj + L_hr)| <= tol
  bool decomposition_holds(double tol = 1e-9) const;
};

}  // namespace motionadapt
