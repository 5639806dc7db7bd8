// Copyright 2026 The motionadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include "motionadapt/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "motionadapt/error.hpp"

namespace motionadapt {

void RotationDistribution::validate() const {
  if (mean.size() != num_params() || stddev.size() != num_params()) {
    throw ConfigError("rotation distribution expects " + std::to_string(num_params()) +
                      " mean/stddev pairs");
  }
  if ((stddev.array() < 0.0).any()) throw ConfigError("rotation stddev must be >= 0");
}

void CameraExtrinsics::validate() const {
  if ((R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-8 ||
      std::abs(R.determinant() - 1.0) > 1e-8) {
    throw ConfigError("camera rotation is not a proper rotation matrix");
  }
  if (!T.allFinite()) throw ConfigError("camera translation is not finite");
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0 && fy > 0)) throw ConfigError("focal lengths must be positive");
  if (!(width > 0 && height > 0)) throw ConfigError("image size must be positive");
}

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Quaternion quat_from_axis_angle(const Vec3& axis, double angle) {
  const double n = axis.norm();
  if (n <= 1e-12) {
    if (angle == 0.0) return Quaternion(1.0, 0.0, 0.0, 0.0);
    throw DegenerateError("rotation axis has zero norm with nonzero angle");
  }
  const double s = std::sin(0.5 * angle);
  const Vec3 u = axis / n;
  return Quaternion(std::cos(0.5 * angle), u.x() * s, u.y() * s, u.z() * s);
}

Mat3 rotmat_from_quat(const Quaternion& q_in) {
  const double n = q_in.norm();
  if (std::abs(n - 1.0) >= 1e-6) {
    throw DegenerateError("quaternion is not unit norm (|q| = " + std::to_string(n) + ")");
  }
  const Quaternion q = q_in / n;
  const double qr = q(0);
  const Vec3 v(q(1), q(2), q(3));
  const Mat3 vx = skew(v);
  return v * v.transpose() + qr * qr * Mat3::Identity() + 2.0 * qr * vx + vx * vx;
}

Mat3 rotmat_from_euler(double alpha, double beta, double gamma) {
  const double ca = std::cos(alpha), sa = std::sin(alpha);
  const double cb = std::cos(beta), sb = std::sin(beta);
  const double cg = std::cos(gamma), sg = std::sin(gamma);
  Mat3 rz, ry, rx;
  rz << ca, -sa, 0, sa, ca, 0, 0, 0, 1;
  ry << cb, 0, sb, 0, 1, 0, -sb, 0, cb;
  rx << 1, 0, 0, 0, cg, -sg, 0, sg, cg;
  return rz * ry * rx;
}

Mat3 rotmat_from_rotation_vector(const Vec3& r) {
  const double angle = r.norm();
  if (angle == 0.0) return Mat3::Identity();
  return rotmat_from_quat(quat_from_axis_angle(r, angle));
}

Mat3 to_rotation_matrix(const RotationSpec& spec) {
  struct Visitor {
    Mat3 operator()(const AxisAngle& a) const {
      return rotmat_from_quat(quat_from_axis_angle(a.axis, a.angle));
    }
    Mat3 operator()(const EulerZYX& e) const { return rotmat_from_euler(e); }
    Mat3 operator()(const Quaternion& q) const { return rotmat_from_quat(q.normalized()); }
  };
  return std::visit(Visitor{}, spec);
}

EulerDecomposition euler_from_rotmat(const Mat3& R) {
  EulerDecomposition out;
  const double sb = std::clamp(-R(2, 0), -1.0, 1.0);
  out.angles.beta = std::asin(sb);
  const double cb = std::sqrt(R(2, 1) * R(2, 1) + R(2, 2) * R(2, 2));
  if (cb < 1e-9) {
    // Gimbal lock: only alpha -/+ gamma is observable.
    out.degenerate = true;
    out.angles.gamma = 0.0;
    out.angles.alpha = std::atan2(-R(0, 1), R(1, 1));
  } else {
    out.angles.alpha = std::atan2(R(1, 0), R(0, 0));
    out.angles.gamma = std::atan2(R(2, 1), R(2, 2));
  }
  return out;
}

namespace {

constexpr int kMaxAxisRetries = 8;

Mat3 params_to_rotation(const RotationDistribution& dist, const Eigen::VectorXd& p) {
  switch (dist.repr) {
    case RotationRepr::AxisAngle:
      return rotmat_from_quat(quat_from_axis_angle(p.head<3>(), dist.angle));
    case RotationRepr::Euler:
      return rotmat_from_euler(p(0), p(1), p(2));
    case RotationRepr::Quaternion:
      return rotmat_from_quat(Quaternion(p.head<4>()).normalized());
  }
  throw ConfigError("unknown rotation representation");
}

}  // namespace

RotationSample sample_rotation(const RotationDistribution& dist, std::span<const double> eps,
                               SamplingMode mode) {
  dist.validate();
  RotationSample out;
  if (mode == SamplingMode::Deterministic) {
    if (dist.repr != RotationRepr::AxisAngle) {
      throw ConfigError("deterministic camera mode is defined for axis-angle only");
    }
    out.params = dist.mean;
    out.rotation = rotmat_from_rotation_vector(dist.mean.head<3>());
    return out;
  }
  if (static_cast<int>(eps.size()) != dist.num_params()) {
    throw ShapeError("eps length " + std::to_string(eps.size()) + " does not match " +
                     std::to_string(dist.num_params()) + " rotation parameters");
  }
  Eigen::VectorXd e = Eigen::Map<const Eigen::VectorXd>(eps.data(), dist.num_params());
  for (int attempt = 0; attempt <= kMaxAxisRetries; ++attempt) {
    out.params = dist.mean + dist.stddev.cwiseProduct(e);
    const bool needs_direction = dist.repr == RotationRepr::Quaternion ||
                                 (dist.repr == RotationRepr::AxisAngle && dist.angle != 0.0);
    if (!needs_direction || out.params.norm() > 1e-12) {
      out.rotation = params_to_rotation(dist, out.params);
      out.retries = attempt;
      return out;
    }
    e.array() += 1e-3 * (attempt + 1);
  }
  throw DegenerateError("sampled rotation axis stayed degenerate after retries");
}

double camera_elevation(const Mat3& world_to_camera) {
  return std::asin(std::clamp(-world_to_camera(2, 2), -1.0, 1.0));
}

PoseSequence apply_camera(const PoseSequence& pose, const CameraExtrinsics& ext) {
  PoseSequence out = pose;
  for (std::size_t t = 0; t < out.frames.size(); ++t) {
    auto& f = out.frames[t];
    if (f.cols() != 3) throw ShapeError("apply_camera needs 3D poses");
    f = (f * ext.R.transpose()).rowwise() + ext.T.transpose();
    if (f.col(2).minCoeff() <= 0.0) {
      throw BehindCameraError("frame " + std::to_string(t) + " has a joint behind the camera");
    }
  }
  out.origin = OriginSpace::Camera;
  return out;
}

PoseSequence project_perspective(const PoseSequence& pose, const CameraIntrinsics& K) {
  PoseSequence out;
  out.units = Units::Pixels;
  out.fps = pose.fps;
  out.origin = OriginSpace::Image;
  out.frames.reserve(pose.frames.size());
  for (std::size_t t = 0; t < pose.frames.size(); ++t) {
    const auto& f = pose.frames[t];
    if (f.cols() != 3) throw ShapeError("project_perspective needs 3D poses");
    Eigen::MatrixXd uv(f.rows(), 2);
    for (Eigen::Index j = 0; j < f.rows(); ++j) {
      const double z = f(j, 2);
      if (!(z > 0.0)) {
        throw ProjectionError("frame " + std::to_string(t) + " joint " + std::to_string(j) +
                              " has nonpositive depth");
      }
      uv(j, 0) = K.fx * f(j, 0) / z + K.cx;
      uv(j, 1) = K.fy * f(j, 1) / z + K.cy;
    }
    out.frames.push_back(std::move(uv));
  }
  return out;
}

Eigen::MatrixXd procrustes_align(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& gt) {
  if (pred.rows() != gt.rows() || pred.cols() != 3 || gt.cols() != 3) {
    throw ShapeError("procrustes_align needs matching J x 3 poses");
  }
  const Eigen::RowVector3d mu_gt = gt.colwise().mean();
  const Eigen::RowVector3d mu_pred = pred.colwise().mean();
  Eigen::MatrixXd x0 = gt.rowwise() - mu_gt;
  Eigen::MatrixXd y0 = pred.rowwise() - mu_pred;
  const double norm_x = x0.norm();
  const double norm_y = y0.norm();
  if (norm_x < 1e-12 || norm_y < 1e-12) {
    throw AlignmentError("procrustes alignment of coincident points");
  }
  x0 /= norm_x;
  y0 /= norm_y;
  // Row-vector convention: aligned = s * pred * R + t.
  const Mat3 H = x0.transpose() * y0;
  Eigen::JacobiSVD<Mat3> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 V = svd.matrixV();
  Vec3 s = svd.singularValues();
  const Mat3 U = svd.matrixU();
  Mat3 R = V * U.transpose();
  if (R.determinant() < 0.0) {
    V.col(2) *= -1.0;
    s(2) *= -1.0;
    R = V * U.transpose();
  }
  const double scale = s.sum() * norm_x / norm_y;
  const Eigen::RowVector3d t = mu_gt - scale * mu_pred * R;
  return ((scale * pred * R).rowwise() + t).eval();
}

PoseSequence procrustes_align(const PoseSequence& pred, const PoseSequence& gt) {
  if (pred.num_frames() != gt.num_frames()) throw ShapeError("frame count mismatch");
  PoseSequence out = pred;
  for (int t = 0; t < pred.num_frames(); ++t) out.frames[t] = procrustes_align(pred.frames[t], gt.frames[t]);
  return out;
}

}  // namespace motionadapt
