// Copyright 2026 The motionadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "motionadapt/adversary.hpp"
#include "motionadapt/error.hpp"
#include "oracles.hpp"

namespace motionadapt {
namespace {

using ad::Graph;
using ad::Tensor;

DiscriminatorConfig disc(int n) {
  DiscriminatorConfig c;
  c.n_frames = n;
  c.width = 16;
  return c;
}

Tensor uniform(int r, int c, std::mt19937_64& gen, double s) {
  return oracle::random_matrix(r, c, gen, s);
}

TEST(Lsgan, ClosedForms) {
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(4), zeros = Eigen::VectorXd::Zero(4);
  const Eigen::VectorXd half = Eigen::VectorXd::Constant(4, 0.5);
  EXPECT_EQ(lsgan_discriminator_loss(ones, zeros), 0.0);
  EXPECT_EQ(lsgan_generator_loss(ones), 0.0);
  EXPECT_EQ(lsgan_discriminator_loss(half, half), 0.25);
  EXPECT_EQ(lsgan_generator_loss(half), 0.125);
  EXPECT_EQ(lsgan_discriminator_loss(zeros, ones), 1.0);
  EXPECT_THROW(lsgan_generator_loss(Eigen::VectorXd()), ShapeError);
}

TEST(Lsgan, GraphFormMatchesValues) {
  std::mt19937_64 gen(1);
  const Eigen::MatrixXd r = uniform(6, 1, gen, 2.0), f = uniform(5, 1, gen, 2.0);
  Graph g;
  const double v = lsgan_discriminator_loss(g.constant(r), g.constant(f)).scalar();
  double want = 0.0;
  for (int i = 0; i < 6; ++i) want += 0.5 * std::pow(r(i) - 1.0, 2) / 6.0;
  for (int i = 0; i < 5; ++i) want += 0.5 * f(i) * f(i) / 5.0;
  EXPECT_NEAR(v, want, 1e-14);
  EXPECT_NEAR(lsgan_generator_loss(g.constant(f)).scalar(), lsgan_generator_loss(Eigen::VectorXd(f.col(0))), 1e-15);
}

TEST(HardRatio, BoundaryAndZero) {
  const double err_src = 40.0, c = 2.0;
  const double err_fake = 141.0;
  const double r = err_fake / (err_src + 1e-8);
  const double d = std::abs(r - c);  // f == d^2 exactly
  EXPECT_EQ(hard_ratio_loss(err_fake, err_src, c, d), 0.0);
  EXPECT_GT(hard_ratio_loss(err_fake, err_src, c, std::nextafter(d, 10.0)), 0.0);
  EXPECT_NEAR(hard_ratio_loss(80.0, 40.0, 2.0, 1.5), 0.0, 1e-15);
  EXPECT_NEAR(hard_ratio_loss(60.0, 40.0, 2.0, 1.5), 0.25, 1e-9);
  EXPECT_EQ(hard_ratio_loss(400.0, 40.0, 2.0, 1.5), 0.0);
  EXPECT_TRUE(std::isfinite(hard_ratio_loss(1.0, 0.0, 2.0, 1.5)));
}

TEST(HardRatio, BatchedMatchesScalar) {
  Eigen::VectorXd fake(4), src(4);
  fake << 60, 80, 400, 45;
  src << 40, 40, 40, 30;
  Graph g;
  const double v = hard_ratio_loss(g.constant(Tensor(fake)), src, 2.0, 1.5).scalar();
  double want = 0.0;
  for (int i = 0; i < 4; ++i) want += hard_ratio_loss(fake(i), src(i), 2.0, 1.5) / 4.0;
  EXPECT_NEAR(v, want, 1e-14);
}

TEST(Selection, BruteForceOracle) {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> e(1.0, 300.0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd fake(256), src(256);
    for (int i = 0; i < 256; ++i) {
      src(i) = e(gen);
      fake(i) = e(gen);
    }
    const auto keep = selection_mask(fake, src, 2.0, 1.5);
    ASSERT_EQ(keep.size(), 256u);
    for (int i = 0; i < 256; ++i) {
      const double ratio = fake(i) / (src(i) + 1e-8);
      const bool want = ratio > 0.5 && ratio < 3.5;  // (ratio - a)^2 < b^2
      EXPECT_EQ(keep[i], want) << i;
    }
  }
}

TEST(Selection, Validation) {
  SelectionConstants s;
  EXPECT_NO_THROW(s.validate());
  s.b = 0.0;
  try {
    s.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "/selection/b");
  }
  EXPECT_THROW(selection_mask(Eigen::VectorXd::Ones(2), Eigen::VectorXd::Ones(3), 2, 1.5), ShapeError);
}

TEST(ProjectionLoss, ScaleInvarianceAndZero) {
  std::mt19937_64 gen(3);
  const Eigen::MatrixXd P = uniform(16, 3, gen, 500.0);
  const Eigen::MatrixXd X = P.leftCols(2) * 0.001;
  EXPECT_NEAR(projection_loss(X, P), 0.0, 1e-14);
  const Eigen::MatrixXd Y = uniform(16, 2, gen, 1.0);
  const double base = projection_loss(Y, P);
  EXPECT_NEAR(projection_loss(Y * 7.0, P * 0.2), base, 1e-12);
  // Manual L1 of normalized vectors.
  const Eigen::MatrixXd pn = P.leftCols(2) / P.leftCols(2).norm();
  EXPECT_NEAR(base, (pn - Y / Y.norm()).cwiseAbs().sum(), 1e-12);
  EXPECT_THROW(projection_loss(Eigen::MatrixXd::Zero(16, 2), P), DegenerateError);
}

TEST(ProjectionLoss, BatchedIsMeanOfSamples) {
  std::mt19937_64 gen(4);
  Tensor x(2, 32), l(2, 48);
  x = uniform(2, 32, gen, 1.0);
  l = uniform(2, 48, gen, 500.0);
  Graph g;
  const double v = projection_loss(g.constant(x), g.constant(l)).scalar();
  double want = 0.0;
  for (int b = 0; b < 2; ++b) {
    Eigen::MatrixXd X(16, 2), P(16, 3);
    for (int j = 0; j < 16; ++j) {
      X.row(j) << x(b, 2 * j), x(b, 2 * j + 1);
      P.row(j) << l(b, 3 * j), l(b, 3 * j + 1), l(b, 3 * j + 2);
    }
    want += projection_loss(X, P) / 2.0;
  }
  EXPECT_NEAR(v, want, 1e-12);
}

TEST(PerSampleError, RootAlignedOracle) {
  std::mt19937_64 gen(5);
  const Tensor pred = uniform(3, 48, gen, 500.0), gt = uniform(3, 48, gen, 500.0);
  const Eigen::VectorXd e = per_sample_error(pred, gt, 0);
  Graph g;
  const Tensor eg = per_sample_error(g.constant(pred), g.constant(gt), 0).value();
  for (int b = 0; b < 3; ++b) {
    Eigen::MatrixXd P(16, 3), G(16, 3);
    for (int j = 0; j < 16; ++j) {
      P.row(j) = pred.row(b).segment<3>(3 * j) - pred.row(b).segment<3>(0);
      G.row(j) = gt.row(b).segment<3>(3 * j) - gt.row(b).segment<3>(0);
    }
    const double want = oracle::mpjpe_loop({P}, {G});
    EXPECT_NEAR(e(b), want, 1e-9);
    EXPECT_NEAR(eg(b, 0), want, 1e-9);
  }
}

TEST(LiftingLoss, EmptyFakeTermContributesZero) {
  std::mt19937_64 gen(6);
  const Tensor p = uniform(2, 48, gen, 100.0), q = uniform(2, 48, gen, 100.0);
  Graph g;
  const double src_only = lifting_loss(g.constant(p), g.constant(q), ad::Var(), ad::Var(), 0).scalar();
  EXPECT_NEAR(src_only, per_sample_error(p, q, 0).mean(), 1e-12);
  const double both = lifting_loss(g.constant(p), g.constant(q), g.constant(q), g.constant(p), 0).scalar();
  EXPECT_NEAR(both, 2.0 * src_only, 1e-12);
}

TEST(LossBundleTest, DecompositionAndFiniteness) {
  LossBundle L;
  L.L_Gadv = 0.3;
  L.L_proj = 0.2;
  L.L_hr = 0.1;
  L.L_G = 0.6;
  EXPECT_TRUE(L.decomposition_holds());
  L.L_G = 0.61;
  EXPECT_FALSE(L.decomposition_holds());
  EXPECT_TRUE(L.all_finite());
  L.L_N = std::numeric_limits<double>::quiet_NaN();
  EXPECT_FALSE(L.all_finite());
}

TEST(DomainDisc, ShapesAndBranchInputs) {
  Rng init(7);
  const auto topo = SkeletonTopology::h36m16();
  DomainDiscriminator D(disc(3), topo, init);
  std::mt19937_64 gen(8);
  const Tensor x = uniform(6, 32, gen, 0.5);
  EXPECT_EQ(D.score_values(x).size(), 2);
  const Tensor a = D.branch_a_input(x);
  ASSERT_EQ(a.rows(), 2);
  ASSERT_EQ(a.cols(), 96);
  EXPECT_EQ(a(1, 32), x(4, 0));

  // Branch B is the per-frame upper-triangular 2D bone Gram, scaled.
  const Tensor b = D.branch_b_input(x);
  Eigen::MatrixXd joints(16, 2);
  for (int j = 0; j < 16; ++j) joints.row(j) << x(0, 2 * j), x(0, 2 * j + 1);
  const Eigen::MatrixXd gram = oracle::gram_loop(oracle::bones_by_edges(joints, topo.parents()));
  EXPECT_NEAR(b(0, 0), D.config().kcs_scale * gram(0, 0), 1e-12);
  EXPECT_NEAR(b(0, 1), D.config().kcs_scale * gram(0, 1), 1e-12);
  EXPECT_NEAR(b(0, 15), D.config().kcs_scale * gram(1, 1), 1e-12);

  EXPECT_THROW(D.score_values(uniform(5, 32, gen, 0.5)), ShapeError);
}

TEST(DomainDisc, RootAtOriginFraction) {
  Tensor x = Tensor::Ones(4, 32);
  x(0, 0) = x(0, 1) = 0.0;
  x(2, 0) = x(2, 1) = 0.0;
  EXPECT_DOUBLE_EQ(root_at_origin_fraction(x, 0), 0.5);
}

TEST(Disc3D, PerturbationOnlyAffectsPartBranch) {
  Rng init(9);
  Discriminator3D D(disc(2), SkeletonTopology::h36m16(), init);
  std::mt19937_64 gen(10);
  const Tensor bones = uniform(4, 45, gen, 0.2);
  Rng pr(1);
  const Tensor part = perturb_bone_rows(bones, 2, 10.0, pr);
  EXPECT_EQ(D.score_values(bones, bones).size(), 2);
  EXPECT_NE(D.score_values(bones, part)(0), D.score_values(bones, bones)(0));
  EXPECT_THROW(D.score_values(uniform(3, 45, gen, 0.2), uniform(3, 45, gen, 0.2)), ShapeError);
}

TEST(PerturbRows, LengthsKeptAndSharedAcrossFrames) {
  std::mt19937_64 gen(11);
  Tensor bones(6, 45);
  const Tensor one = uniform(1, 45, gen, 0.3);
  for (int r = 0; r < 6; ++r) bones.row(r) = one;
  Rng rng(2);
  const Tensor p = perturb_bone_rows(bones, 3, 10.0, rng);
  for (int b = 0; b < 15; ++b) {
    EXPECT_NEAR(p.row(0).segment<3>(3 * b).norm(), bones.row(0).segment<3>(3 * b).norm(), 1e-12);
    const Eigen::Vector3d v0 = p.row(0).segment<3>(3 * b).transpose(), v2 = p.row(2).segment<3>(3 * b).transpose();
    EXPECT_EQ(v0, v2);
    EXPECT_LT(oracle::angle_deg(v0, bones.row(0).segment<3>(3 * b).transpose()), 10.0);
  }
  // Different samples draw different rotations.
  EXPECT_NE(p.row(0), p.row(3));
  Rng rng2(2);
  EXPECT_EQ(perturb_bone_rows(bones, 3, 0.0, rng2), bones);
  EXPECT_THROW(perturb_bone_rows(bones, 4, 10.0, rng2), ShapeError);
}

TEST(Lifting, ShapesAndValuesAgree) {
  Rng init(12);
  LiftingConfig c;
  c.n_frames = 3;
  c.width = 32;
  LiftingNetwork N(c, SkeletonTopology::h36m16(), init);
  EXPECT_EQ(N.input_width(), 96);
  std::mt19937_64 gen(13);
  const Tensor x = uniform(4, 96, gen, 0.5);
  Graph g;
  const Tensor a = N.predict(g, g.constant(x)).value();
  const Tensor b = N.predict_values(x);
  EXPECT_EQ(a.cols(), 48);
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_THROW(N.predict_values(uniform(4, 64, gen, 0.5)), ShapeError);

  c.zero_init_output = true;
  Rng init2(12);
  LiftingNetwork Z(c, SkeletonTopology::h36m16(), init2);
  EXPECT_EQ(Z.predict_values(x).cwiseAbs().maxCoeff(), 0.0);
}

}  // namespace
}  // namespace motionadapt
