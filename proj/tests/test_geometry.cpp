// Copyright 2026 The motionadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <array>
#include <cmath>

#include "motionadapt/error.hpp"
#include "motionadapt/geometry.hpp"
#include "oracles.hpp"

namespace motionadapt {
namespace {

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

TEST(Skew, CrossProductProperty) {
  std::mt19937_64 gen(1);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 v = oracle::random_matrix(3, 1, gen, 10.0);
    const Vec3 w = oracle::random_matrix(3, 1, gen, 10.0);
    EXPECT_LT((skew(v) * w - oracle::cross(v, w)).norm(), 1e-12);
    EXPECT_EQ(skew(v).transpose(), -skew(v));
  }
}

TEST(Quaternion, IdentityAndHalfTurn) {
  EXPECT_EQ(rotmat_from_quat(Quaternion(1, 0, 0, 0)), Mat3::Identity());
  EXPECT_EQ(rotmat_from_quat(quat_from_axis_angle(Vec3::Zero(), 0.0)), Mat3::Identity());
  const Mat3 r = rotmat_from_quat(quat_from_axis_angle(Vec3::UnitZ(), M_PI));
  EXPECT_LT(max_abs(r - Eigen::Vector3d(-1, -1, 1).asDiagonal().toDenseMatrix()), 1e-15);
}

TEST(Quaternion, DegenerateInputs) {
  EXPECT_THROW(quat_from_axis_angle(Vec3::Zero(), 0.3), DegenerateError);
  EXPECT_THROW(rotmat_from_quat(Quaternion(2, 0, 0, 0)), DegenerateError);
  // Nearly unit is normalized.
  EXPECT_LT(max_abs(rotmat_from_quat(Quaternion(1 + 5e-7, 0, 0, 0)) - Mat3::Identity()), 1e-12);
}

TEST(Quaternion, RodriguesOracle) {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> ang(-2 * M_PI, 2 * M_PI);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 axis = oracle::random_matrix(3, 1, gen);
    const double a = ang(gen);
    const Mat3 r = rotmat_from_quat(quat_from_axis_angle(axis, a));
    EXPECT_LT(max_abs(r - oracle::rodrigues(axis, a)), 1e-10);
    EXPECT_LT(max_abs(r.transpose() * r - Mat3::Identity()), 1e-12);
    EXPECT_NEAR(r.determinant(), 1.0, 1e-12);
    EXPECT_LT(max_abs(rotmat_from_rotation_vector(axis.normalized() * a) - r), 1e-10);
  }
}

TEST(Euler, ElementaryProduct) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-M_PI, M_PI);
  for (int i = 0; i < 500; ++i) {
    const double a = u(gen), b = u(gen), c = u(gen);
    EXPECT_LT(max_abs(rotmat_from_euler(a, b, c) - oracle::euler_zyx(a, b, c)), 1e-14);
  }
}

TEST(Euler, RoundTrip) {
  std::mt19937_64 gen(4);
  for (int i = 0; i < 1000; ++i) {
    const Mat3 r = oracle::random_rotation(gen);
    const auto d = euler_from_rotmat(r);
    ASSERT_FALSE(d.degenerate);
    EXPECT_LT(max_abs(rotmat_from_euler(d.angles) - r), 1e-8);
    EXPECT_LE(std::abs(d.angles.beta), M_PI / 2);
  }
}

TEST(Euler, GimbalLock) {
  for (double beta : {M_PI / 2, -M_PI / 2}) {
    const Mat3 r = rotmat_from_euler(0.7, beta, 0.0);
    const auto d = euler_from_rotmat(r);
    EXPECT_TRUE(d.degenerate);
    EXPECT_EQ(d.angles.gamma, 0.0);
    EXPECT_LT(max_abs(rotmat_from_euler(d.angles) - r), 1e-8);
  }
}

TEST(Rotation, VariantDispatch) {
  const RotationSpec a = AxisAngle{Vec3::UnitX(), 0.5};
  const RotationSpec e = EulerZYX{0.0, 0.0, 0.5};
  const RotationSpec q = Quaternion(std::cos(0.25), std::sin(0.25), 0, 0);
  EXPECT_LT(max_abs(to_rotation_matrix(a) - to_rotation_matrix(e)), 1e-15);
  EXPECT_LT(max_abs(to_rotation_matrix(a) - to_rotation_matrix(q)), 1e-15);
}

TEST(SampleRotation, ProbabilisticFormula) {
  RotationDistribution d;
  d.repr = RotationRepr::Euler;
  d.mean = Eigen::Vector3d(0.1, 0.2, 0.3);
  d.stddev = Eigen::Vector3d(0.5, 0.5, 0.5);
  const std::array<double, 3> eps{1.0, -2.0, 0.0};
  const auto s = sample_rotation(d, eps, SamplingMode::Probabilistic);
  EXPECT_LT(max_abs(s.rotation - oracle::euler_zyx(0.6, -0.8, 0.3)), 1e-14);
}

TEST(SampleRotation, AxisAngleAndQuaternion) {
  RotationDistribution d;
  d.mean = Eigen::Vector3d(0, 0, 1);
  d.stddev = Eigen::Vector3d::Zero();
  d.angle = 0.4;
  const std::array<double, 3> eps{0, 0, 0};
  EXPECT_LT(max_abs(sample_rotation(d, eps, SamplingMode::Probabilistic).rotation -
                    oracle::rodrigues(Vec3::UnitZ(), 0.4)),
            1e-12);

  RotationDistribution q;
  q.repr = RotationRepr::Quaternion;
  q.mean = Eigen::Vector4d(2, 0, 0, 0);  // normalized before use
  q.stddev = Eigen::Vector4d::Zero();
  const std::array<double, 4> e4{0, 0, 0, 0};
  EXPECT_LT(max_abs(sample_rotation(q, e4, SamplingMode::Probabilistic).rotation - Mat3::Identity()), 1e-15);
}

TEST(SampleRotation, DegenerateAxisIsRetried) {
  RotationDistribution d;
  d.mean = Eigen::Vector3d::Zero();
  d.stddev = Eigen::Vector3d::Ones();
  d.angle = 0.3;
  const std::array<double, 3> eps{0, 0, 0};
  const auto s = sample_rotation(d, eps, SamplingMode::Probabilistic);
  EXPECT_GE(s.retries, 1);
  EXPECT_NEAR(s.rotation.determinant(), 1.0, 1e-12);

  d.stddev = Eigen::Vector3d::Zero();
  EXPECT_THROW(sample_rotation(d, eps, SamplingMode::Probabilistic), DegenerateError);
}

TEST(SampleRotation, DeterministicAndValidation) {
  RotationDistribution d;
  d.mean = Eigen::Vector3d(0.2, 0, 0);
  d.stddev = Eigen::Vector3d::Ones();
  EXPECT_LT(max_abs(sample_rotation(d, {}, SamplingMode::Deterministic).rotation -
                    oracle::rodrigues(Vec3::UnitX(), 0.2)),
            1e-12);
  d.repr = RotationRepr::Euler;
  EXPECT_THROW(sample_rotation(d, {}, SamplingMode::Deterministic), ConfigError);
  d.stddev = Eigen::Vector3d(-1, 0, 0);
  EXPECT_THROW(d.validate(), ConfigError);
  d.stddev = Eigen::Vector2d(1, 1);
  EXPECT_THROW(d.validate(), ConfigError);
}

TEST(Camera, ElevationOfTiltedCamera) {
  // Camera looking horizontally along world +y, z up maps to -y in camera.
  Mat3 level;
  level << 1, 0, 0, 0, 0, -1, 0, 1, 0;
  EXPECT_NEAR(camera_elevation(level), 0.0, 1e-15);
  for (double deg : {-30.0, 15.0, 45.0}) {
    const Mat3 tilted = oracle::elementary(0, deg * M_PI / 180.0) * level;
    EXPECT_NEAR(camera_elevation(tilted) * 180.0 / M_PI, deg, 1e-10);
  }
}

TEST(Camera, ExtrinsicsValidation) {
  CameraExtrinsics ext;
  EXPECT_NO_THROW(ext.validate());
  ext.R(0, 0) = -1.0;  // reflection
  EXPECT_THROW(ext.validate(), ConfigError);
  CameraIntrinsics K;
  K.fx = 0.0;
  EXPECT_THROW(K.validate(), ConfigError);
}

TEST(Projection, PinholeOracle) {
  std::mt19937_64 gen(5);
  CameraIntrinsics K{1145.0, 1143.8, 512.5, 515.4, 1000, 1002};
  PoseSequence p;
  p.frames.push_back(oracle::random_matrix(16, 3, gen, 500.0));
  p.frames[0].col(2).array() += 4000.0;
  const auto img = project_perspective(p, K);
  EXPECT_EQ(img.units, Units::Pixels);
  for (int j = 0; j < 16; ++j) {
    const Eigen::Vector2d want = oracle::project(p.frames[0].row(j).transpose(), K.fx, K.fy, K.cx, K.cy);
    EXPECT_LT((img.frames[0].row(j).transpose() - want).norm(), 1e-10);
  }
}

TEST(Projection, OnAxisPointHitsPrincipalPoint) {
  PoseSequence p;
  p.frames.push_back((Eigen::MatrixXd(1, 3) << 0, 0, 3000).finished());
  const auto img = project_perspective(p, CameraIntrinsics{});
  EXPECT_EQ(img.frames[0](0, 0), 500.0);
  EXPECT_EQ(img.frames[0](0, 1), 500.0);
}

TEST(Projection, NonPositiveDepth) {
  PoseSequence p;
  p.frames.push_back(Eigen::MatrixXd::Ones(2, 3));
  p.frames.push_back((Eigen::MatrixXd(2, 3) << 0, 0, 1, 0, 0, 0).finished());
  try {
    project_perspective(p, CameraIntrinsics{});
    FAIL() << "expected ProjectionError";
  } catch (const ProjectionError& e) {
    EXPECT_NE(std::string(e.what()).find("frame 1"), std::string::npos);
  }
}

TEST(ApplyCamera, TransformAndBehindCamera) {
  std::mt19937_64 gen(6);
  CameraExtrinsics ext{oracle::random_rotation(gen), Vec3(10, -20, 5000)};
  PoseSequence p;
  p.frames.push_back(oracle::random_matrix(16, 3, gen, 500.0));
  const auto cam = apply_camera(p, ext);
  for (int j = 0; j < 16; ++j) {
    const Vec3 want = ext.R * p.frames[0].row(j).transpose() + ext.T;
    EXPECT_LT((cam.frames[0].row(j).transpose() - want).norm(), 1e-9);
  }
  ext.T = Vec3(0, 0, -6000);
  EXPECT_THROW(apply_camera(p, ext), BehindCameraError);
}

TEST(Procrustes, RecoversSimilarity) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> s(0.5, 2.0);
  for (int i = 0; i < 100; ++i) {
    const Eigen::MatrixXd gt = oracle::random_matrix(16, 3, gen, 400.0);
    const Mat3 R = oracle::random_rotation(gen);
    const double scale = s(gen);
    const Eigen::RowVector3d t = oracle::random_matrix(1, 3, gen, 1000.0);
    const Eigen::MatrixXd pred = ((scale * gt * R.transpose()).rowwise() + t);
    EXPECT_LT(max_abs(procrustes_align(pred, gt) - gt), 1e-6);
  }
}

TEST(Procrustes, ErrorCases) {
  EXPECT_THROW(procrustes_align(Eigen::MatrixXd::Ones(4, 3), Eigen::MatrixXd::Zero(4, 3)), AlignmentError);
  EXPECT_THROW(procrustes_align(Eigen::MatrixXd::Ones(4, 3), Eigen::MatrixXd::Ones(3, 3)), ShapeError);
}

}  // namespace
}  // namespace motionadapt
