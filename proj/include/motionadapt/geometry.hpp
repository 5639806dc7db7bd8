// Copyright 2026 The motionadapt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <variant>

#include <Eigen/Core>

#include "motionadapt/skeleton.hpp"

namespace motionadapt {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
// Quaternion stored as (q_r, q_x, q_y, q_z).
using Quaternion = Eigen::Vector4d;

enum class RotationRepr { AxisAngle, Euler, Quaternion };
enum class SamplingMode { Deterministic, Probabilistic };

struct AxisAngle {
  Vec3 axis = Vec3::UnitZ();
  double angle = 0.0;  // radians
};

// R = Rz(alpha) * Ry(beta) * Rx(gamma), radians.
struct EulerZYX {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};

using RotationSpec = std::variant<AxisAngle, EulerZYX, Quaternion>;

// Independent normals over the rotation parameters: 3 for the axis-angle axis
// and for Euler angles, 4 for quaternions. `angle` is the deterministic
// rotation angle used by the probabilistic axis-angle mode.
struct RotationDistribution {
  RotationRepr repr = RotationRepr::AxisAngle;
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;
  double angle = 0.0;

  int num_params() const { return repr == RotationRepr::Quaternion ? 4 : 3; }
  // Throws ConfigError for size mismatch or negative deviations.
  void validate() const;
};

struct RotationSample {
  Mat3 rotation;
  Eigen::VectorXd params;  // sampled parameters before conversion
  int retries = 0;
};

struct CameraExtrinsics {
  Mat3 R = Mat3::Identity();
  Vec3 T = Vec3::Zero();  // millimeters

  // Throws ConfigError unless R is a proper rotation within 1e-8.
  void validate() const;
};

struct CameraIntrinsics {
  double fx = 1000.0;
  double fy = 1000.0;
  double cx = 500.0;
  double cy = 500.0;
  double width = 1000.0;
  double height = 1000.0;

  void validate() const;
};

// Cross-product matrix: skew(v) * w == v.cross(w).
Mat3 skew(const Vec3& v);

// Unit quaternion for a rotation of `angle` radians about `axis`. A zero axis is
// accepted only with a zero angle; otherwise DegenerateError.
Quaternion quat_from_axis_angle(const Vec3& axis, double angle);

// R = v v^T + q_r^2 I + 2 q_r [v]x + [v]x^2 for a unit quaternion. Inputs
// within 1e-6 of unit norm are normalized first; others throw DegenerateError.
Mat3 rotmat_from_quat(const Quaternion& q);

Mat3 rotmat_from_euler(double alpha, double beta, double gamma);
inline Mat3 rotmat_from_euler(const EulerZYX& e) { return rotmat_from_euler(e.alpha, e.beta, e.gamma); }

// Rotation vector: direction is the axis, norm is the angle.
Mat3 rotmat_from_rotation_vector(const Vec3& r);

Mat3 to_rotation_matrix(const RotationSpec& spec);

struct EulerDecomposition {
  EulerZYX angles;
  bool degenerate = false;  // |cos(beta)| ~ 0; gamma fixed to 0
};

// Inverse of rotmat_from_euler.
EulerDecomposition euler_from_rotmat(const Mat3& R);

// Draws a rotation from `dist`. Probabilistic mode uses mean + stddev * eps;
// deterministic mode (axis-angle only) reads the mean as a rotation vector.
// A degenerate sampled axis is retried with a nudged eps a bounded number of
// times before DegenerateError.
RotationSample sample_rotation(const RotationDistribution& dist, std::span<const double> eps,
                               SamplingMode mode);

// Elevation of the camera above the subject's horizontal plane, radians,
// for a world(z-up)-to-camera rotation with the camera looking along +z.
double camera_elevation(const Mat3& world_to_camera);

// Every joint x -> R x + T. Throws BehindCameraError if any depth ends <= 0.
PoseSequence apply_camera(const PoseSequence& pose, const CameraExtrinsics& ext);

// Pinhole projection to pixels. Throws ProjectionError naming the frame with
// a nonpositive depth.
PoseSequence project_perspective(const PoseSequence& pose, const CameraIntrinsics& K);

// Best similarity transform s R pred + t onto gt, per frame (J x 3).
Eigen::MatrixXd procrustes_align(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& gt);
PoseSequence procrustes_align(const PoseSequence& pred, const PoseSequence& gt);

}  // namespace motionadapt
