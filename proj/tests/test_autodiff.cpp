// Copyright 2026 The motionadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <functional>
#include <string>

#include "motionadapt/autodiff.hpp"
#include "motionadapt/error.hpp"
#include "motionadapt/nn.hpp"
#include "oracles.hpp"

namespace motionadapt::ad {
namespace {

Tensor rand_tensor(int r, int c, std::mt19937_64& gen, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t(r, c);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < c; ++j) t(i, j) = u(gen);
  }
  return t;
}

// Contracts an op output against fixed random weights so every output entry
// contributes a distinct gradient.
Var weighted(Graph& g, Var y, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  return sum(mul(y, g.constant(rand_tensor(y.rows(), y.cols(), gen))));
}

using UnaryOp = std::function<Var(Graph&, Var)>;

void check_unary(const std::string& name, const UnaryOp& op, Tensor x0) {
  ParameterSet ps;
  Parameter& x = ps.add("x", std::move(x0));
  const auto report = grad_check(
      ps, [&](Graph& g) { return weighted(g, op(g, g.param(x)), 99); }, 1e-6, 64);
  EXPECT_TRUE(report.passed) << name << " rel " << report.max_rel_error << " at " << report.worst;
}

TEST(GradCheck, ElementwiseOps) {
  std::mt19937_64 gen(1);
  check_unary("scale", [](Graph&, Var a) { return scale(a, -2.5); }, rand_tensor(3, 4, gen));
  check_unary("add_scalar", [](Graph&, Var a) { return add_scalar(a, 3.0); }, rand_tensor(3, 4, gen));
  check_unary("neg", [](Graph&, Var a) { return neg(a); }, rand_tensor(3, 4, gen));
  check_unary("leaky_relu", [](Graph&, Var a) { return leaky_relu(a, 0.2); }, rand_tensor(3, 4, gen));
  check_unary("tanh", [](Graph&, Var a) { return tanh(a); }, rand_tensor(3, 4, gen));
  check_unary("sigmoid", [](Graph&, Var a) { return sigmoid(a); }, rand_tensor(3, 4, gen));
  check_unary("softplus", [](Graph&, Var a) { return softplus(a); }, rand_tensor(3, 4, gen, -3, 3));
  check_unary("exp", [](Graph&, Var a) { return exp(a); }, rand_tensor(3, 4, gen));
  check_unary("sqrt", [](Graph&, Var a) { return sqrt(a); }, rand_tensor(3, 4, gen, 0.5, 2.0));
  check_unary("square", [](Graph&, Var a) { return square(a); }, rand_tensor(3, 4, gen));
  check_unary("abs", [](Graph&, Var a) { return abs(a); }, rand_tensor(3, 4, gen, 0.1, 1.0));
  check_unary("mean", [](Graph&, Var a) { return mean(a); }, rand_tensor(3, 4, gen));
  check_unary("row_sum", [](Graph&, Var a) { return row_sum(a); }, rand_tensor(3, 4, gen));
  check_unary("row_norm", [](Graph&, Var a) { return row_norm(a); }, rand_tensor(3, 4, gen));
}

TEST(GradCheck, BinaryAndBroadcastOps) {
  std::mt19937_64 gen(2);
  const Tensor b34 = rand_tensor(3, 4, gen, 0.5, 1.5);
  const Tensor row = rand_tensor(1, 4, gen, 0.5, 1.5);
  const Tensor col = rand_tensor(3, 1, gen, 0.5, 1.5);
  const Tensor m45 = rand_tensor(4, 5, gen);
  check_unary("add", [&](Graph& g, Var a) { return add(a, g.constant(b34)); }, rand_tensor(3, 4, gen));
  check_unary("sub", [&](Graph& g, Var a) { return sub(g.constant(b34), a); }, rand_tensor(3, 4, gen));
  check_unary("mul", [&](Graph& g, Var a) { return mul(a, a); }, rand_tensor(3, 4, gen));
  check_unary("div", [&](Graph& g, Var a) { return div(g.constant(b34), a); }, rand_tensor(3, 4, gen, 0.5, 1.5));
  check_unary("matmul_l", [&](Graph& g, Var a) { return matmul(a, g.constant(m45)); }, rand_tensor(3, 4, gen));
  check_unary("matmul_r", [&](Graph& g, Var a) { return matmul(g.constant(b34), a); }, rand_tensor(4, 2, gen));
  check_unary("add_row", [&](Graph& g, Var a) { return add_row(g.constant(b34), a); }, rand_tensor(1, 4, gen));
  check_unary("mul_row", [&](Graph& g, Var a) { return mul_row(a, g.constant(row)); }, rand_tensor(3, 4, gen));
  check_unary("mul_row_r", [&](Graph& g, Var a) { return mul_row(g.constant(b34), a); }, rand_tensor(1, 4, gen));
  check_unary("mul_col", [&](Graph& g, Var a) { return mul_col(g.constant(b34), a); }, rand_tensor(3, 1, gen));
  check_unary("div_col", [&](Graph& g, Var a) { return div_col(a, g.constant(col)); }, rand_tensor(3, 4, gen));
  check_unary("div_col_r", [&](Graph& g, Var a) { return div_col(g.constant(b34), a); },
              rand_tensor(3, 1, gen, 0.5, 1.5));
}

TEST(GradCheck, StructuralOps) {
  std::mt19937_64 gen(3);
  check_unary("reshape", [](Graph&, Var a) { return reshape(a, 2, 6); }, rand_tensor(3, 4, gen));
  check_unary("concat_cols", [](Graph&, Var a) { return concat_cols({a, square(a)}); }, rand_tensor(3, 2, gen));
  check_unary("concat_rows", [](Graph&, Var a) { return concat_rows({a, scale(a, 2.0)}); }, rand_tensor(3, 2, gen));
  check_unary("slice_cols", [](Graph&, Var a) { return slice_cols(a, 1, 2); }, rand_tensor(3, 4, gen));
  check_unary("slice_rows", [](Graph&, Var a) { return slice_rows(a, 1, 2); }, rand_tensor(3, 4, gen));
  check_unary("gather_cols", [](Graph&, Var a) { return gather_cols(a, {3, 0, 0, 2}); }, rand_tensor(3, 4, gen));
  check_unary("gather_rows", [](Graph&, Var a) { return gather_rows(a, {2, 2, 0}); }, rand_tensor(3, 4, gen));
  check_unary("repeat_rows", [](Graph&, Var a) { return repeat_rows(a, 3); }, rand_tensor(2, 4, gen));
  check_unary("tile_cols", [](Graph&, Var a) { return tile_cols(a, 3); }, rand_tensor(2, 4, gen));
}

TEST(GradCheck, GeometryOps) {
  std::mt19937_64 gen(4);
  const Tensor angle = rand_tensor(3, 1, gen, -2.0, 2.0);
  const Tensor pts = rand_tensor(3, 12, gen);
  const Tensor axes = rand_tensor(3, 3, gen, 0.2, 1.0);
  const Tensor rots = rand_tensor(3, 9, gen);
  check_unary("quat_axis", [&](Graph& g, Var a) { return quat_from_axis_angle(a, g.constant(angle)); },
              rand_tensor(3, 3, gen, 0.2, 1.0));
  check_unary("quat_angle",
              [&](Graph& g, Var a) { return quat_from_axis_angle(g.constant(axes), a); },
              angle);
  check_unary("quat_rotvec", [](Graph&, Var a) { return quat_from_rotation_vector(a); }, rand_tensor(3, 3, gen));
  check_unary("quat_rotvec_small", [](Graph&, Var a) { return quat_from_rotation_vector(a); },
              rand_tensor(2, 3, gen, -1e-4, 1e-4));
  // Unit quaternions only, so normalize first as the generator head does.
  check_unary("rotmat_from_quat", [](Graph&, Var a) { return rotmat_from_quat(div_col(a, row_norm(a))); },
              rand_tensor(3, 4, gen, 0.3, 1.0));
  check_unary("rotmat_from_euler", [](Graph&, Var a) { return rotmat_from_euler(a); }, rand_tensor(3, 3, gen, -3, 3));
  check_unary("rotate_points_R", [&](Graph& g, Var a) { return rotate_points(a, g.constant(pts)); },
              rand_tensor(3, 9, gen));
  check_unary("rotate_points_X", [&](Graph& g, Var a) { return rotate_points(g.constant(rots), a); }, pts);
  Tensor x3 = rand_tensor(2, 12, gen, -0.5, 0.5);
  for (int k = 0; k < 4; ++k) x3.col(3 * k + 2).array() += 4.0;
  check_unary("project", [](Graph&, Var a) { return project_perspective(a, CameraIntrinsics{}); }, x3);
  check_unary("gram_upper", [](Graph&, Var a) { return gram_upper(a, 4, 3); }, rand_tensor(3, 12, gen));
}

TEST(Forward, GeometryMatchesPlainFunctions) {
  std::mt19937_64 gen(5);
  Graph g;
  const Tensor ang = rand_tensor(4, 3, gen, -3, 3);
  const Tensor R = rotmat_from_euler(g.constant(ang)).value();
  for (int i = 0; i < 4; ++i) {
    const Mat3 want = oracle::euler_zyx(ang(i, 0), ang(i, 1), ang(i, 2));
    for (int k = 0; k < 9; ++k) EXPECT_NEAR(R(i, k), want(k / 3, k % 3), 1e-14);
  }
  const Tensor rv = rand_tensor(4, 3, gen);
  const Tensor Rq = rotmat_from_quat(quat_from_rotation_vector(g.constant(rv))).value();
  for (int i = 0; i < 4; ++i) {
    const Eigen::Vector3d r = rv.row(i).transpose();
    const Mat3 want = oracle::rodrigues(r, r.norm());
    for (int k = 0; k < 9; ++k) EXPECT_NEAR(Rq(i, k), want(k / 3, k % 3), 1e-12);
  }
  const Tensor X = rand_tensor(2, 6, gen);
  const Tensor G = gram_upper(g.constant(X), 2, 3).value();
  ASSERT_EQ(G.cols(), 3);
  for (int i = 0; i < 2; ++i) {
    const Eigen::Vector3d a = X.row(i).segment<3>(0), b = X.row(i).segment<3>(3);
    EXPECT_NEAR(G(i, 0), a.dot(a), 1e-14);
    EXPECT_NEAR(G(i, 1), a.dot(b), 1e-14);
    EXPECT_NEAR(G(i, 2), b.dot(b), 1e-14);
  }
}

TEST(Forward, ZeroRotationVectorIsIdentity) {
  Graph g;
  const Tensor q = quat_from_rotation_vector(g.constant(Tensor::Zero(1, 3))).value();
  EXPECT_EQ(q(0, 0), 1.0);
  EXPECT_EQ(q.rightCols(3).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Graph, BackwardOnlyOnce) {
  ParameterSet ps;
  Parameter& p = ps.add("w", Tensor::Ones(2, 2));
  Graph g;
  Var loss = sum(square(g.param(p)));
  g.backward(loss);
  EXPECT_EQ(g.state(), Graph::State::Consumed);
  EXPECT_DOUBLE_EQ(p.grad(1, 1), 2.0);
  EXPECT_THROW(g.backward(loss), StateError);
  EXPECT_THROW(square(loss), StateError);
  g.reset();
  EXPECT_EQ(g.state(), Graph::State::Empty);
}

TEST(Graph, GradientsAreOverwrittenNotAccumulated) {
  ParameterSet ps;
  Parameter& p = ps.add("w", Tensor::Ones(1, 3));
  for (int i = 0; i < 2; ++i) {
    Graph g;
    g.backward(sum(scale(g.param(p), 3.0)));
  }
  EXPECT_EQ(p.grad, Tensor::Constant(1, 3, 3.0));
}

TEST(Graph, FanOutAccumulates) {
  ParameterSet ps;
  Parameter& p = ps.add("w", Tensor::Constant(1, 1, 2.0));
  Graph g;
  Var x = g.param(p);
  g.backward(sum(add(mul(x, x), x)));  // d/dx (x^2 + x) = 2x + 1
  EXPECT_DOUBLE_EQ(p.grad(0, 0), 5.0);
}

TEST(Graph, DetachBlocksGradient) {
  ParameterSet ps;
  Parameter& p = ps.add("w", Tensor::Constant(1, 1, 2.0));
  Graph g;
  Var x = g.param(p);
  g.backward(sum(mul(x, detach(x))));
  EXPECT_DOUBLE_EQ(p.grad(0, 0), 2.0);
}

TEST(Graph, ShapeErrorsAndNamedInputs) {
  Graph g;
  Var a = g.input("a", Tensor::Ones(2, 3));
  Var b = g.constant(Tensor::Ones(2, 2));
  EXPECT_THROW(add(a, b), GraphError);
  EXPECT_THROW(matmul(a, a), GraphError);
  EXPECT_THROW(reshape(a, 4, 2), GraphError);
  EXPECT_EQ(g.named_input("a").id(), a.id());
  EXPECT_THROW(g.named_input("missing"), GraphError);
  EXPECT_THROW(g.backward(a), GraphError);  // not 1x1
}

TEST(Graph, ReshapeIsRowMajorReinterpretation) {
  Graph g;
  Tensor t(2, 3);
  t << 1, 2, 3, 4, 5, 6;
  const Tensor r = reshape(g.constant(t), 3, 2).value();
  EXPECT_EQ(r(1, 0), 3.0);
  EXPECT_EQ(r(2, 1), 6.0);
}

TEST(ParameterSetTest, DuplicateNamesAndSnapshots) {
  ParameterSet ps;
  ps.add("a", Tensor::Ones(2, 2));
  EXPECT_THROW(ps.add("a", Tensor::Ones(1, 1)), std::exception);
  ps.add("b", Tensor::Zero(1, 3));
  EXPECT_EQ(ps.num_scalars(), 7u);
  const auto snap = ps.snapshot();
  ps.at("a").value.setConstant(9.0);
  ps.restore(snap);
  EXPECT_EQ(ps.at("a").value, Tensor::Ones(2, 2));
  EXPECT_EQ(ps.list()[1]->name, "b");
}

TEST(DenseTest, MatchesManualAffineAndGradChecks) {
  Rng rng(7);
  ParameterSet ps;
  Dense layer(ps, "fc", 5, 3, rng);
  std::mt19937_64 gen(8);
  const Tensor x = rand_tensor(4, 5, gen);
  const Tensor want = (x * layer.weight().value).rowwise() + layer.bias().value.row(0);
  EXPECT_LT((layer.apply(x) - want).cwiseAbs().maxCoeff(), 1e-14);
  Graph g;
  EXPECT_LT((layer(g, g.constant(x)).value() - want).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_THROW(layer(g, g.constant(Tensor::Ones(1, 4))), GraphError);

  const auto report = grad_check(
      ps, [&](Graph& gg) { return weighted(gg, tanh(layer(gg, gg.constant(x))), 3); }, 1e-6, 32);
  EXPECT_TRUE(report.passed) << report.max_rel_error;
}

TEST(DenseTest, ZeroScaleIsZeroLayer) {
  Rng rng(1);
  ParameterSet ps;
  Dense layer(ps, "z", 3, 2, rng, 0.0);
  EXPECT_EQ(layer.apply(Tensor::Ones(2, 3)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(AdamTest, FirstStepMovesByLearningRate) {
  ParameterSet ps;
  Parameter& p = ps.add("w", Tensor::Zero(1, 3));
  p.grad = Tensor(1, 3);
  p.grad << 0.5, -2.0, 1e-3;
  Adam opt(ps, {0.01});
  opt.step();
  // Bias-corrected first step is -lr * g / (|g| + eps').
  EXPECT_NEAR(p.value(0, 0), -0.01, 1e-9);
  EXPECT_NEAR(p.value(0, 1), 0.01, 1e-9);
  EXPECT_NEAR(p.value(0, 2), -0.01, 1e-7);
  EXPECT_EQ(opt.steps(), 1);
}

TEST(AdamTest, MinimizesQuadratic) {
  ParameterSet ps;
  Parameter& p = ps.add("w", Tensor::Constant(1, 2, 3.0));
  Adam opt(ps, {0.05});
  for (int i = 0; i < 2000; ++i) {
    Graph g;
    g.backward(sum(square(add_scalar(g.param(p), -1.0))));
    opt.step();
  }
  EXPECT_LT((p.value.array() - 1.0).abs().maxCoeff(), 1e-3);
}

TEST(AdamTest, StateRoundTrip) {
  ParameterSet ps;
  Parameter& p = ps.add("w", Tensor::Constant(1, 2, 3.0));
  Adam opt(ps, {0.1});
  p.grad = Tensor::Ones(1, 2);
  opt.step();
  const auto state = opt.state_to_json();

  ParameterSet ps2;
  ps2.add("w", Tensor::Constant(1, 2, 3.0));
  Adam opt2(ps2, {0.1});
  opt2.state_from_json(state);
  EXPECT_EQ(opt2.steps(), 1);

  ParameterSet other;
  other.add("v", Tensor::Zero(1, 2));
  Adam bad(other, {0.1});
  EXPECT_THROW(bad.state_from_json(state), StateError);
}

TEST(Serialization, ParamsJsonRoundTrip) {
  std::mt19937_64 gen(9);
  ParameterSet ps;
  ps.add("a", rand_tensor(2, 3, gen));
  ps.add("b", rand_tensor(1, 1, gen));
  const auto j = params_to_json(ps);
  ParameterSet back;
  back.add("a", Tensor::Zero(2, 3));
  back.add("b", Tensor::Zero(1, 1));
  params_from_json(back, j);
  EXPECT_EQ(back.at("a").value, ps.at("a").value);
  EXPECT_EQ(back.at("b").value, ps.at("b").value);

  ParameterSet wrong;
  wrong.add("a", Tensor::Zero(3, 2));
  EXPECT_THROW(params_from_json(wrong, j), StateError);
}

}  // namespace
}  // namespace motionadapt::ad
