// Copyright 2026 The motionadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "motionadapt/error.hpp"
#include "motionadapt/skeleton.hpp"
#include "oracles.hpp"

namespace motionadapt {
namespace {

SkeletonTopology chain3() { return SkeletonTopology({-1, 0, 1}, {{{0}, {1}, {}, {}}}); }

PoseSequence single_frame(const Eigen::MatrixXd& joints) {
  PoseSequence p;
  p.frames = {joints};
  return p;
}

PoseSequence random_pose(int frames, int J, std::mt19937_64& gen) {
  PoseSequence p;
  for (int t = 0; t < frames; ++t) p.frames.push_back(oracle::random_matrix(J, 3, gen, 500.0));
  return p;
}

TEST(Topology, H36mDefault) {
  const auto topo = SkeletonTopology::h36m16();
  EXPECT_EQ(topo.num_joints(), 16);
  EXPECT_EQ(topo.num_bones(), 15);
  EXPECT_EQ(topo.root(), 0);
  EXPECT_EQ(topo.part(BodyPart::RightArm), (std::vector<int>{12, 13, 14}));
  EXPECT_EQ(topo.part(BodyPart::LeftLeg), (std::vector<int>{3, 4, 5}));
  for (int b = 0; b < topo.num_bones(); ++b) EXPECT_EQ(topo.bone_child(b), b + 1);
}

TEST(Topology, RejectsBrokenTrees) {
  EXPECT_THROW(SkeletonTopology({-1, -1, 1}, {}), TopologyError);  // two roots
  EXPECT_THROW(SkeletonTopology({1, 2, 0}, {}), TopologyError);    // no root
  EXPECT_THROW(SkeletonTopology({-1, 2, 1}, {}), TopologyError);   // cycle
  EXPECT_THROW(SkeletonTopology({-1, 0, 1}, {{{0}, {0}, {}, {}}}), TopologyError);  // overlapping parts
  EXPECT_THROW(SkeletonTopology({-1, 0, 1}, {{{2}, {}, {}, {}}}), TopologyError);   // bone out of range
}

TEST(Topology, UnknownPartIsConfigError) {
  EXPECT_THROW(SkeletonTopology::h36m16().part(static_cast<BodyPart>(7)), ConfigError);
}

TEST(Bones, ChainExample) {
  Eigen::MatrixXd j(3, 3);
  j << 0, 0, 0, 0, 1, 0, 0, 1, 2;
  const auto b = joints_to_bones(single_frame(j), chain3());
  ASSERT_EQ(b.num_bones(), 2);
  EXPECT_EQ(b.bones[0].row(0), Eigen::RowVector3d(0, 1, 0));
  EXPECT_EQ(b.bones[0].row(1), Eigen::RowVector3d(0, 0, 2));

  const auto back = bones_to_joints(b, Eigen::Vector3d::Zero(), chain3());
  EXPECT_EQ(back.frames[0], j);
}

TEST(Bones, DegenerateAndZero) {
  const auto topo = SkeletonTopology::h36m16();
  const Eigen::MatrixXd same = Eigen::MatrixXd::Constant(16, 3, 7.0);
  const auto b = joints_to_bones(single_frame(same), topo);
  EXPECT_EQ(b.bones[0].cwiseAbs().maxCoeff(), 0.0);

  const Eigen::Vector3d root(1, 2, 3);
  const auto j = bones_to_joints(b, root, topo);
  for (int k = 0; k < 16; ++k) EXPECT_EQ(j.frames[0].row(k), root.transpose());
}

TEST(Bones, MatchesEdgeOracle) {
  std::mt19937_64 gen(3);
  const auto topo = SkeletonTopology::h36m16();
  const auto pose = random_pose(4, 16, gen);
  const auto b = joints_to_bones(pose, topo);
  for (int t = 0; t < 4; ++t) {
    EXPECT_LT((b.bones[t] - oracle::bones_by_edges(pose.frames[t], topo.parents())).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Bones, JointCountMismatch) {
  PoseSequence p = single_frame(Eigen::MatrixXd::Zero(15, 3));
  EXPECT_THROW(joints_to_bones(p, SkeletonTopology::h36m16()), TopologyError);
}

TEST(Bones, RoundTripProperty) {
  std::mt19937_64 gen(11);
  const auto topo = SkeletonTopology::h36m16();
  for (int trial = 0; trial < 50; ++trial) {
    BoneSequence b;
    for (int t = 0; t < 3; ++t) b.bones.push_back(oracle::random_matrix(15, 3, gen, 300.0));
    const Eigen::Vector3d root = oracle::random_matrix(3, 1, gen, 1000.0);
    const auto j = bones_to_joints(b, root, topo);
    const auto back = joints_to_bones(j, topo);
    for (int t = 0; t < 3; ++t) EXPECT_LT((back.bones[t] - b.bones[t]).cwiseAbs().maxCoeff(), 1e-12);

    const auto pose = random_pose(2, 16, gen);
    const auto rebuilt = bones_to_joints(joints_to_bones(pose, topo), pose.frames[0].row(0).transpose(), topo);
    EXPECT_LT((rebuilt.frames[0] - pose.frames[0]).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Bones, LengthsAreNorms) {
  std::mt19937_64 gen(5);
  BoneSequence b;
  b.bones.push_back(oracle::random_matrix(15, 3, gen));
  const Eigen::MatrixXd L = b.lengths();
  for (int k = 0; k < 15; ++k) EXPECT_NEAR(L(0, k), b.bones[0].row(k).norm(), 1e-12);
}

TEST(Kcs, Definitions) {
  BoneSequence one;
  one.bones.push_back((Eigen::MatrixXd(1, 2) << 3, 4).finished());
  EXPECT_DOUBLE_EQ(kcs(one)[0](0, 0), 25.0);

  BoneSequence ortho;
  ortho.bones.push_back((Eigen::MatrixXd(2, 3) << 1, 0, 0, 0, 2, 0).finished());
  const auto k = kcs(ortho)[0];
  EXPECT_EQ(k(0, 1), 0.0);
  EXPECT_EQ(k(1, 0), 0.0);
  EXPECT_EQ(k(1, 1), 4.0);
}

TEST(Kcs, MatchesLoopOracleAndIsPsd) {
  std::mt19937_64 gen(17);
  const auto topo = SkeletonTopology::h36m16();
  for (int dim : {2, 3}) {
    BoneSequence b;
    b.bones.push_back(oracle::random_matrix(15, dim, gen));
    const Eigen::MatrixXd k = kcs(b)[0];
    EXPECT_LT((k - oracle::gram_loop(b.bones[0])).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((k - k.transpose()).cwiseAbs().maxCoeff(), 1e-15);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
    EXPECT_GT(es.eigenvalues().minCoeff(), -1e-10);
    EXPECT_NEAR(k.trace(), b.bones[0].squaredNorm(), 1e-10);
  }
}

TEST(Kcs, PartwiseMatchesMaskedColumns) {
  std::mt19937_64 gen(19);
  const auto topo = SkeletonTopology::h36m16();
  BoneSequence b;
  b.bones.push_back(oracle::random_matrix(15, 3, gen));
  const auto& arm = topo.part(BodyPart::RightArm);
  Eigen::MatrixXd sub(arm.size(), 3);
  for (std::size_t i = 0; i < arm.size(); ++i) sub.row(i) = b.bones[0].row(arm[i]);
  const auto k = partwise_kcs(b, BodyPart::RightArm, topo)[0];
  ASSERT_EQ(k.rows(), 3);
  EXPECT_LT((k - oracle::gram_loop(sub)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Kcs, PartwiseSingleBoneAndWholeBody) {
  const SkeletonTopology single({-1, 0}, {{{0}, {}, {}, {}}});
  BoneSequence b;
  b.bones.push_back((Eigen::MatrixXd(1, 3) << 0, 2, 0).finished());
  EXPECT_DOUBLE_EQ(partwise_kcs(b, BodyPart::RightArm, single)[0](0, 0), 4.0);

  std::mt19937_64 gen(23);
  const SkeletonTopology all({-1, 0, 1, 2}, {{{0, 1, 2}, {}, {}, {}}});
  BoneSequence r;
  r.bones.push_back(oracle::random_matrix(3, 3, gen));
  EXPECT_EQ(partwise_kcs(r, BodyPart::RightArm, all)[0], kcs(r)[0]);
}

TEST(Perturb, PreservesLengthsAndIsSeeded) {
  std::mt19937_64 gen(29);
  BoneSequence b;
  for (int t = 0; t < 5; ++t) b.bones.push_back(oracle::random_matrix(15, 3, gen, 300.0));
  Rng r1(4), r2(4);
  const auto p1 = perturb_bones(b, 10.0, r1);
  const auto p2 = perturb_bones(b, 10.0, r2);
  for (int t = 0; t < 5; ++t) {
    EXPECT_EQ(p1.bones[t], p2.bones[t]);
    const Eigen::VectorXd l0 = b.bones[t].rowwise().norm();
    const Eigen::VectorXd l1 = p1.bones[t].rowwise().norm();
    EXPECT_LT(((l1 - l0).array() / l0.array()).abs().maxCoeff(), 1e-9);
  }
}

TEST(Perturb, SharedAcrossFrames) {
  BoneSequence b;
  const Eigen::MatrixXd f = Eigen::MatrixXd::Identity(15, 3) + Eigen::MatrixXd::Constant(15, 3, 0.1);
  b.bones = {f, f};
  Rng rng(8);
  const auto p = perturb_bones(b, 5.0, rng);
  EXPECT_EQ(p.bones[0], p.bones[1]);
}

TEST(Perturb, RangeChecks) {
  BoneSequence b;
  b.bones.push_back(Eigen::MatrixXd::Ones(15, 3));
  Rng rng(1);
  EXPECT_THROW(perturb_bones(b, 0.0, rng), ConfigError);
  EXPECT_THROW(perturb_bones(b, 10.5, rng), ConfigError);
  EXPECT_NO_THROW(perturb_bones(b, 10.0, rng));
}

TEST(Perturb, TinyAngleLeavesBonesUnchanged) {
  BoneSequence b;
  b.bones.push_back(Eigen::MatrixXd::Ones(15, 3));
  Rng rng(1);
  const auto p = perturb_bones(b, 1e-12, rng);
  EXPECT_LT((p.bones[0] - b.bones[0]).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Perturb, MonteCarloAngleBound) {
  Rng rng(99);
  double max_dev = 0.0;
  const Eigen::Vector3d v(0.3, -0.2, 0.9);
  for (int i = 0; i < 100000; ++i) {
    const Eigen::Matrix3d R = sample_bone_perturbations(1, 10.0, rng)[0];
    const double d = oracle::angle_deg(v, R * v);
    ASSERT_LT(d, 10.0);
    max_dev = std::max(max_dev, d);
  }
  EXPECT_GT(max_dev, 9.9);
}

}  // namespace
}  // namespace motionadapt
