// Copyright 2026 The motionadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include "motionadapt/generator.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "motionadapt/error.hpp"

namespace motionadapt {

using ad::Tensor;
using ad::Var;

namespace {

double frame_fraction(int j, int n) { return n == 0 ? 0.0 : static_cast<double>(j) / n; }

Eigen::Vector3d unit_or_throw(const Eigen::Vector3d& v, int bone, const char* op) {
  const double n = v.norm();
  if (n < 1e-9) {
    throw DegenerateError(std::string(op) + ": degenerate direction for bone " + std::to_string(bone));
  }
  return v / n;
}

void check_bone_args(const Eigen::MatrixXd& b0, const Eigen::MatrixXd& m, const Eigen::VectorXd& lambda,
                     const char* op) {
  if (b0.cols() != 3 || m.rows() != b0.rows() || m.cols() != 3 || lambda.size() != b0.rows()) {
    throw ShapeError(std::string(op) + ": expected (J-1) x 3 bones, (J-1) x 3 offsets, J-1 ratios");
  }
}

double inverse_softplus(double y) { return y > 30.0 ? y : std::log(std::expm1(y)); }

}  // namespace

BoneSequence bg1(const BoneSequence& bones, const Eigen::MatrixXd& delta, const Eigen::VectorXd& lambda) {
  BoneSequence out;
  out.bones.reserve(bones.bones.size());
  for (const auto& frame : bones.bones) {
    check_bone_args(frame, delta, lambda, "bg1");
    Eigen::MatrixXd f(frame.rows(), 3);
    for (Eigen::Index b = 0; b < frame.rows(); ++b) {
      const Eigen::Vector3d src = frame.row(b).transpose();
      const Eigen::Vector3d dir = unit_or_throw(src + delta.row(b).transpose(), static_cast<int>(b), "bg1");
      f.row(b) = (dir * src.norm() * (1.0 + lambda(b))).transpose();
    }
    out.bones.push_back(std::move(f));
  }
  return out;
}

BoneSequence bg2(const Eigen::MatrixXd& bones_t0, const Eigen::MatrixXd& delta, const Eigen::VectorXd& lambda,
                 int n) {
  check_bone_args(bones_t0, delta, lambda, "bg2");
  if (n < 0) throw ConfigError("bg2: n must be >= 0");
  BoneSequence out;
  for (int j = 0; j <= n; ++j) {
    const double s = frame_fraction(j, n);
    Eigen::MatrixXd f(bones_t0.rows(), 3);
    for (Eigen::Index b = 0; b < bones_t0.rows(); ++b) {
      const Eigen::Vector3d src = bones_t0.row(b).transpose();
      const Eigen::Vector3d dir =
          unit_or_throw(src + s * delta.row(b).transpose(), static_cast<int>(b), "bg2");
      f.row(b) = (dir * src.norm() * (1.0 + lambda(b))).transpose();
    }
    out.bones.push_back(std::move(f));
  }
  return out;
}

BoneSequence bg3(const Eigen::MatrixXd& bones_t0, const Eigen::MatrixXd& axes, const Eigen::VectorXd& angles,
                 const Eigen::VectorXd& lambda, int n) {
  check_bone_args(bones_t0, axes, lambda, "bg3");
  if (angles.size() != bones_t0.rows()) throw ShapeError("bg3: one angle per bone expected");
  if (n < 0) throw ConfigError("bg3: n must be >= 0");
  BoneSequence out;
  for (int j = 0; j <= n; ++j) {
    const double s = frame_fraction(j, n);
    Eigen::MatrixXd f(bones_t0.rows(), 3);
    for (Eigen::Index b = 0; b < bones_t0.rows(); ++b) {
      const Mat3 R = rotmat_from_quat(quat_from_axis_angle(axes.row(b).transpose(), s * angles(b)));
      f.row(b) = (R * bones_t0.row(b).transpose() * (1.0 + lambda(b))).transpose();
    }
    out.bones.push_back(std::move(f));
  }
  return out;
}

NoiseVector NoiseVector::sample(int z_dim, Rng& rng) {
  NoiseVector v;
  v.z.resize(z_dim);
  for (int i = 0; i < z_dim; ++i) v.z(i) = rng.normal();
  return v;
}

FakeSample assemble_fake(const BoneSequence& bones, const CameraExtrinsics& camera, const CameraIntrinsics& K,
                         const SkeletonTopology& topo, const std::vector<Eigen::Vector3d>& root_positions) {
  if (!root_positions.empty() && static_cast<int>(root_positions.size()) != bones.num_frames()) {
    throw ShapeError("assemble_fake: one root position per frame expected");
  }
  PoseSequence body = bones_to_joints(bones, Eigen::Vector3d::Zero(), topo);
  body.origin = OriginSpace::Body;
  if (!root_positions.empty()) {
    for (int t = 0; t < body.num_frames(); ++t) {
      body.frames[t].rowwise() += root_positions[t].transpose();
    }
  }
  FakeSample out;
  out.camera = camera;
  out.x3d = apply_camera(body, camera);
  out.x2d = project_perspective(out.x3d, K);
  return out;
}

// ---- generator network ----------------------------------------------------------------------

void GeneratorConfig::validate() const {
  if (n_frames < 1) throw ConfigError("n_frames must be >= 1", "/model/n_frames");
  if (z_dim < 0) throw ConfigError("z_dim must be >= 0", "/model/z_dim");
  if (width < 1 || layers < 1) throw ConfigError("generator width/layers must be >= 1", "/model/generator_width");
  if (!(lambda_bound > 0.0 && lambda_bound < 1.0)) {
    throw ConfigError("lambda_bound must lie in (0, 1)", "/model/lambda_bound");
  }
  if (!(min_depth_m > 0.0)) throw ConfigError("min_depth_mm must be positive", "/model/min_depth_mm");
  if (!(init_depth_m > min_depth_m)) {
    throw ConfigError("init_depth_mm must exceed min_depth_mm", "/model/init_depth_mm");
  }
  if (!(sigma_init > 0.0)) throw ConfigError("sigma_init must be positive", "/model/sigma_init");
  if (camera_mode == CameraMode::Deterministic && camera_repr != RotationRepr::AxisAngle) {
    throw ConfigError("deterministic camera mode is defined for axis_angle only", "/model/camera_mode");
  }
}

Tensor bones_to_joints_matrix(const SkeletonTopology& topo) {
  const int J = topo.num_joints();
  const int nb = topo.num_bones();
  Tensor M = Tensor::Zero(3 * nb, 3 * J);
  for (int j = 0; j < J; ++j) {
    for (int k = j; topo.parents()[k] != SkeletonTopology::kNoParent; k = topo.parents()[k]) {
      const int b = topo.bone_of_joint(k);
      for (int c = 0; c < 3; ++c) M(3 * b + c, 3 * j + c) = 1.0;
    }
  }
  return M;
}

Tensor joints_to_bones_matrix(const SkeletonTopology& topo, int dim) {
  const int J = topo.num_joints();
  const int nb = topo.num_bones();
  Tensor M = Tensor::Zero(dim * J, dim * nb);
  for (int b = 0; b < nb; ++b) {
    for (int c = 0; c < dim; ++c) {
      M(dim * topo.bone_child(b) + c, dim * b + c) = 1.0;
      M(dim * topo.bone_parent(b) + c, dim * b + c) = -1.0;
    }
  }
  return M;
}

Generator::Generator(const GeneratorConfig& config, const SkeletonTopology& topo, Rng& init_rng)
    : cfg_(config), topo_(topo) {
  cfg_.validate();
  const int nb = topo_.num_bones();
  int in = 3 * nb + cfg_.z_dim;
  for (int l = 0; l < cfg_.layers; ++l) {
    trunk_.emplace_back(params_, "gen.trunk" + std::to_string(l), in, cfg_.width, init_rng);
    in = cfg_.width;
  }
  const double head_scale = 0.1;
  if (cfg_.bone_method == BoneMethod::BG3) {
    head_delta_ = Dense(params_, "gen.bone_axis", in, 3 * nb, init_rng, 1.0);
    head_angle_ = Dense(params_, "gen.bone_angle", in, nb, init_rng, head_scale);
  } else {
    head_delta_ = Dense(params_, "gen.bone_delta", in, 3 * nb, init_rng, head_scale);
  }
  head_lambda_ = Dense(params_, "gen.bone_lambda", in, nb, init_rng, head_scale);

  const int np = cfg_.camera_repr == RotationRepr::Quaternion ? 4 : 3;
  head_cam_mu_ = Dense(params_, "gen.cam_mu", in, np, init_rng, head_scale);
  if (cfg_.camera_repr == RotationRepr::Quaternion) head_cam_mu_.bias().value(0, 0) = 1.0;
  if (cfg_.camera_mode == CameraMode::Probabilistic) {
    head_cam_sigma_ = Dense(params_, "gen.cam_sigma", in, np, init_rng, head_scale);
    head_cam_sigma_.bias().value.setConstant(inverse_softplus(cfg_.sigma_init));
    if (cfg_.camera_repr == RotationRepr::AxisAngle) {
      head_cam_angle_ = Dense(params_, "gen.cam_angle", in, 1, init_rng, head_scale);
    }
  }
  head_trans_ = Dense(params_, "gen.cam_trans", in, 3, init_rng, head_scale);
  head_trans_.bias().value(0, 2) = inverse_softplus(cfg_.init_depth_m - cfg_.min_depth_m);

  joints_from_bones_ = bones_to_joints_matrix(topo_);
  frame_fraction_.resize(cfg_.n_frames, 1);
  for (int j = 0; j < cfg_.n_frames; ++j) frame_fraction_(j, 0) = frame_fraction(j, cfg_.n_frames - 1);
}

Var Generator::bones_bg1(ad::Graph& g, Var bones, Var delta, Var scale) const {
  const int n = cfg_.n_frames;
  const Eigen::Index rows = bones.rows() * topo_.num_bones();
  Var v = ad::reshape(ad::add(bones, ad::repeat_rows(delta, n)), rows, 3);
  Var norm = ad::row_norm(v);
  if (norm.value().minCoeff() < 1e-9) throw DegenerateError("bg1: degenerate bone direction");
  const Tensor src_len = Eigen::Map<const Tensor>(bones.value().data(), rows, 3).rowwise().norm();
  Var factor = ad::mul(g.constant(src_len), ad::reshape(ad::repeat_rows(scale, n), rows, 1));
  return ad::reshape(ad::mul_col(ad::div_col(v, norm), factor), bones.rows(), bones.cols());
}

Var Generator::bones_bg2(ad::Graph& g, Var center, Var delta, Var scale) const {
  const int n = cfg_.n_frames;
  const Eigen::Index B = center.rows();
  const Eigen::Index rows = B * n * topo_.num_bones();
  Var c_rep = ad::repeat_rows(center, n);
  Var frac = g.constant(frame_fraction_.replicate(B, 1));
  Var v = ad::reshape(ad::add(c_rep, ad::mul_col(ad::repeat_rows(delta, n), frac)), rows, 3);
  Var norm = ad::row_norm(v);
  if (norm.value().minCoeff() < 1e-9) throw DegenerateError("bg2: degenerate bone direction");
  const Tensor src_len = Eigen::Map<const Tensor>(c_rep.value().data(), rows, 3).rowwise().norm();
  Var factor = ad::mul(g.constant(src_len), ad::reshape(ad::repeat_rows(scale, n), rows, 1));
  return ad::reshape(ad::mul_col(ad::div_col(v, norm), factor), B * n, center.cols());
}

Var Generator::bones_bg3(ad::Graph& g, Var center, Var axes, Var angles, Var scale) const {
  const int n = cfg_.n_frames;
  const Eigen::Index B = center.rows();
  const Eigen::Index rows = B * n * topo_.num_bones();
  Var frac = g.constant(frame_fraction_.replicate(B, 1));
  Var ax = ad::reshape(ad::repeat_rows(axes, n), rows, 3);
  Var ang = ad::reshape(ad::mul_col(ad::repeat_rows(angles, n), frac), rows, 1);
  Var R = ad::rotmat_from_quat(ad::quat_from_axis_angle(ax, ang));
  Var b0 = ad::reshape(ad::repeat_rows(center, n), rows, 3);
  Var rotated = ad::rotate_points(R, b0);
  Var out = ad::mul_col(rotated, ad::reshape(ad::repeat_rows(scale, n), rows, 1));
  return ad::reshape(out, B * n, center.cols());
}

GeneratorOutput Generator::forward(ad::Graph& g, const GeneratorInput& in, const CameraIntrinsics& K) const {
  const int n = cfg_.n_frames;
  const int nb = topo_.num_bones();
  const Eigen::Index B = in.center_bones.rows();
  if (in.center_bones.cols() != 3 * nb || in.z.rows() != B || in.z.cols() != cfg_.z_dim) {
    throw ShapeError("generator: center bones must be B x " + std::to_string(3 * nb) + " and z B x " +
                     std::to_string(cfg_.z_dim));
  }
  if (cfg_.bone_method == BoneMethod::BG1 && (in.bones.rows() != B * n || in.bones.cols() != 3 * nb)) {
    throw ShapeError("generator: BG1 needs the full window of bones (B*n rows)");
  }
  const bool prob = cfg_.camera_mode == CameraMode::Probabilistic;
  const int np = cfg_.camera_repr == RotationRepr::Quaternion ? 4 : 3;
  if (prob && (in.camera_eps.rows() != B || in.camera_eps.cols() < np)) {
    throw ShapeError("generator: camera noise must be B x " + std::to_string(np));
  }

  GeneratorOutput out;
  Var center = g.constant(in.center_bones);
  Var h = ad::concat_cols({center, g.constant(in.z)});
  for (const auto& layer : trunk_) h = ad::leaky_relu(layer(g, h), cfg_.leaky_slope);

  out.lambda = ad::scale(ad::tanh(head_lambda_(g, h)), cfg_.lambda_bound);
  Var ratio = ad::add_scalar(out.lambda, 1.0);
  switch (cfg_.bone_method) {
    case BoneMethod::BG1:
      out.delta = head_delta_(g, h);
      out.bones_fake = bones_bg1(g, g.constant(in.bones), out.delta, ratio);
      break;
    case BoneMethod::BG2:
      out.delta = head_delta_(g, h);
      out.bones_fake = bones_bg2(g, center, out.delta, ratio);
      break;
    case BoneMethod::BG3:
      out.axes = head_delta_(g, h);
      out.angles = ad::scale(ad::tanh(head_angle_(g, h)), std::numbers::pi);
      out.bones_fake = bones_bg3(g, center, out.axes, out.angles, ratio);
      break;
  }

  out.cam_mu = head_cam_mu_(g, h);
  if (prob) {
    out.cam_sigma = ad::softplus(head_cam_sigma_(g, h));
    Var eps = g.constant(in.camera_eps.leftCols(np));
    out.cam_params = ad::add(out.cam_mu, ad::mul(out.cam_sigma, eps));
  } else {
    out.cam_params = out.cam_mu;
  }
  switch (cfg_.camera_repr) {
    case RotationRepr::AxisAngle:
      if (prob) {
        out.cam_angle = ad::scale(ad::tanh(head_cam_angle_(g, h)), std::numbers::pi);
        out.R = ad::rotmat_from_quat(ad::quat_from_axis_angle(out.cam_params, out.cam_angle));
      } else {
        out.R = ad::rotmat_from_quat(ad::quat_from_rotation_vector(out.cam_params));
      }
      break;
    case RotationRepr::Euler:
      out.R = ad::rotmat_from_euler(out.cam_params);
      break;
    case RotationRepr::Quaternion: {
      Var qn = ad::row_norm(out.cam_params);
      if (qn.value().minCoeff() < 1e-12) throw DegenerateError("generator: zero quaternion sample");
      out.R = ad::rotmat_from_quat(ad::div_col(out.cam_params, qn));
      break;
    }
  }
  Var raw_t = head_trans_(g, h);
  out.T = ad::concat_cols(
      {ad::slice_cols(raw_t, 0, 2), ad::add_scalar(ad::softplus(ad::slice_cols(raw_t, 2, 1)), cfg_.min_depth_m)});

  const int J = topo_.num_joints();
  Var R_rep = ad::repeat_rows(out.R, n);
  Var joints_body = ad::matmul(out.bones_fake, g.constant(joints_from_bones_));
  out.joints_cam = ad::add(ad::rotate_points(R_rep, joints_body), ad::tile_cols(ad::repeat_rows(out.T, n), J));
  out.bones_cam = ad::rotate_points(R_rep, out.bones_fake);
  out.x2d_px = ad::project_perspective(out.joints_cam, K);
  return out;
}

}  // namespace motionadapt
