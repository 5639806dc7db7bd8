// Copyright 2026 The motionadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include "motionadapt/adversary.hpp"

#include <cmath>
#include <iostream>
#include <string>

#include "motionadapt/error.hpp"
#include "motionadapt/generator.hpp"

namespace motionadapt {

using ad::Tensor;
using ad::Var;

namespace {

constexpr double kRatioEps = 1e-8;

std::vector<Dense> make_stack(ad::ParameterSet& params, const std::string& prefix, int in, int width,
                              int layers, Rng& rng) {
  std::vector<Dense> out;
  for (int l = 0; l < layers; ++l) {
    out.emplace_back(params, prefix + std::to_string(l), in, width, rng);
    in = width;
  }
  return out;
}

Var run_stack(ad::Graph& g, const std::vector<Dense>& stack, Var x, double slope) {
  for (const auto& layer : stack) x = ad::leaky_relu(layer(g, x), slope);
  return x;
}

Eigen::VectorXd column(const Tensor& t) { return t.col(0); }

void require_batch(const Var& v, const char* op) {
  if (!v.valid() || v.rows() == 0) throw ShapeError(std::string(op) + ": empty batch");
}

std::vector<int> part_columns(const std::vector<int>& bones) {
  std::vector<int> cols;
  for (int b : bones) {
    for (int c = 0; c < 3; ++c) cols.push_back(3 * b + c);
  }
  return cols;
}

int tri(int k) { return k * (k + 1) / 2; }

}  // namespace

// ---- domain discriminator ----------------------------------------------------------------

DomainDiscriminator::DomainDiscriminator(const DiscriminatorConfig& config, const SkeletonTopology& topo,
                                         Rng& init_rng)
    : cfg_(config), topo_(topo) {
  const int J = topo_.num_joints();
  const int n = cfg_.n_frames;
  branch_a_ = make_stack(params_, "dd.a", n * 2 * J, cfg_.width, cfg_.layers, init_rng);
  branch_b_ = make_stack(params_, "dd.kcs", n * tri(topo_.num_bones()), cfg_.width, cfg_.layers, init_rng);
  head_hidden_ = Dense(params_, "dd.head", 2 * cfg_.width, cfg_.width, init_rng);
  head_out_ = Dense(params_, "dd.out", cfg_.width, 1, init_rng);
  bone_matrix_ = joints_to_bones_matrix(topo_, 2);
}

Var DomainDiscriminator::kcs_branch_input(ad::Graph& g, Var x2d) const {
  const int nb = topo_.num_bones();
  Var bones = ad::matmul(x2d, g.constant(bone_matrix_));
  Var kcs = ad::scale(ad::gram_upper(bones, nb, 2), cfg_.kcs_scale);
  return ad::reshape(kcs, x2d.rows() / cfg_.n_frames, cfg_.n_frames * tri(nb));
}

Var DomainDiscriminator::score(ad::Graph& g, Var x2d) const {
  const int J = topo_.num_joints();
  if (x2d.cols() != 2 * J || x2d.rows() % cfg_.n_frames != 0) {
    throw ShapeError("domain discriminator expects B*" + std::to_string(cfg_.n_frames) + " x " +
                     std::to_string(2 * J) + " input");
  }
  if (!warned_ && root_at_origin_fraction(x2d.value(), topo_.root()) > 0.9) {
    warned_ = true;
    std::clog << "warning: domain discriminator input looks root-centered; it expects image coordinates\n";
  }
  const Eigen::Index B = x2d.rows() / cfg_.n_frames;
  Var a = run_stack(g, branch_a_, ad::reshape(x2d, B, cfg_.n_frames * 2 * J), cfg_.leaky_slope);
  Var b = run_stack(g, branch_b_, kcs_branch_input(g, x2d), cfg_.leaky_slope);
  Var h = ad::leaky_relu(head_hidden_(g, ad::concat_cols({a, b})), cfg_.leaky_slope);
  return head_out_(g, h);
}

Eigen::VectorXd DomainDiscriminator::score_values(const Tensor& x2d) const {
  ad::Graph g;
  return column(score(g, g.constant(x2d)).value());
}

Tensor DomainDiscriminator::branch_a_input(const Tensor& x2d) const {
  const Eigen::Index B = x2d.rows() / cfg_.n_frames;
  return Eigen::Map<const Tensor>(x2d.data(), B, cfg_.n_frames * x2d.cols());
}

Tensor DomainDiscriminator::branch_b_input(const Tensor& x2d) const {
  ad::Graph g;
  return kcs_branch_input(g, g.constant(x2d)).value();
}

double root_at_origin_fraction(const Tensor& x2d, int root) {
  if (x2d.rows() == 0) return 0.0;
  int hits = 0;
  for (Eigen::Index i = 0; i < x2d.rows(); ++i) {
    if (x2d(i, 2 * root) == 0.0 && x2d(i, 2 * root + 1) == 0.0) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(x2d.rows());
}

// ---- 3D discriminator ---------------------------------------------------------------------------

Discriminator3D::Discriminator3D(const DiscriminatorConfig& config, const SkeletonTopology& topo, Rng& init_rng)
    : cfg_(config), topo_(topo) {
  const int n = cfg_.n_frames;
  branch_full_ = make_stack(params_, "d3d.kcs", n * tri(topo_.num_bones()), cfg_.width, cfg_.layers, init_rng);
  for (int p = 0; p < kNumBodyParts; ++p) {
    const int k = static_cast<int>(topo_.part_sets()[p].size());
    branch_part_[p] =
        make_stack(params_, "d3d.part" + std::to_string(p) + ".", n * tri(k), cfg_.width, cfg_.layers, init_rng);
  }
  head_hidden_ = Dense(params_, "d3d.head", (1 + kNumBodyParts) * cfg_.width, cfg_.width, init_rng);
  head_out_ = Dense(params_, "d3d.out", cfg_.width, 1, init_rng);
}

Var Discriminator3D::score(ad::Graph& g, Var bones, Var part_bones) const {
  const int nb = topo_.num_bones();
  const int n = cfg_.n_frames;
  if (bones.cols() != 3 * nb || bones.rows() % n != 0 || part_bones.rows() != bones.rows() ||
      part_bones.cols() != bones.cols()) {
    throw ShapeError("3D discriminator expects B*" + std::to_string(n) + " x " + std::to_string(3 * nb) +
                     " bone rows");
  }
  const Eigen::Index B = bones.rows() / n;
  std::vector<Var> features;
  Var full = ad::reshape(ad::gram_upper(bones, nb, 3), B, n * tri(nb));
  features.push_back(run_stack(g, branch_full_, full, cfg_.leaky_slope));
  for (int p = 0; p < kNumBodyParts; ++p) {
    const auto& part = topo_.part_sets()[p];
    const int k = static_cast<int>(part.size());
    Var sel = ad::gather_cols(part_bones, part_columns(part));
    Var kcs = ad::reshape(ad::gram_upper(sel, k, 3), B, n * tri(k));
    features.push_back(run_stack(g, branch_part_[p], kcs, cfg_.leaky_slope));
  }
  Var h = ad::leaky_relu(head_hidden_(g, ad::concat_cols(features)), cfg_.leaky_slope);
  return head_out_(g, h);
}

Eigen::VectorXd Discriminator3D::score_values(const Tensor& bones, const Tensor& part_bones) const {
  ad::Graph g;
  return column(score(g, g.constant(bones), g.constant(part_bones)).value());
}

Tensor perturb_bone_rows(const Tensor& bones, int n_frames, double max_angle_deg, Rng& rng) {
  Tensor out = bones;
  if (max_angle_deg <= 0.0) return out;
  if (bones.cols() % 3 != 0 || n_frames < 1 || bones.rows() % n_frames != 0) {
    throw ShapeError("perturb_bone_rows: expected B*n x 3(J-1) rows");
  }
  const int nb = static_cast<int>(bones.cols() / 3);
  for (Eigen::Index s = 0; s < bones.rows() / n_frames; ++s) {
    const auto rots = sample_bone_perturbations(nb, max_angle_deg, rng);
    for (int t = 0; t < n_frames; ++t) {
      const Eigen::Index row = s * n_frames + t;
      for (int b = 0; b < nb; ++b) {
        const Eigen::Vector3d v = bones.row(row).segment<3>(3 * b).transpose();
        out.row(row).segment<3>(3 * b) = (rots[b] * v).transpose();
      }
    }
  }
  return out;
}

// ---- lifting network ------------------------------------------------------------------------------

LiftingNetwork::LiftingNetwork(const LiftingConfig& config, const SkeletonTopology& topo, Rng& init_rng)
    : cfg_(config), num_joints_(topo.num_joints()) {
  if (cfg_.n_frames < 1 || cfg_.width < 1 || cfg_.blocks < 0) {
    throw ConfigError("invalid lifting network size", "/model/lifting_width");
  }
  input_ = Dense(params_, "lift.in", input_width(), cfg_.width, init_rng);
  for (int k = 0; k < cfg_.blocks; ++k) {
    const std::string p = "lift.block" + std::to_string(k);
    Dense a(params_, p + ".0", cfg_.width, cfg_.width, init_rng);
    Dense b(params_, p + ".1", cfg_.width, cfg_.width, init_rng);
    blocks_.emplace_back(a, b);
  }
  output_ = Dense(params_, "lift.out", cfg_.width, 3 * num_joints_, init_rng, cfg_.zero_init_output ? 0.0 : 1.0);
}

void LiftingNetwork::check_input(Eigen::Index cols) const {
  if (cols != input_width()) {
    throw ShapeError("lifting network expects windows of " + std::to_string(cfg_.n_frames) + " frames (" +
                     std::to_string(input_width()) + " values), got " + std::to_string(cols));
  }
}

Var LiftingNetwork::predict(ad::Graph& g, Var x) const {
  check_input(x.cols());
  const double s = cfg_.leaky_slope;
  Var h = ad::leaky_relu(input_(g, x), s);
  for (const auto& [a, b] : blocks_) {
    h = ad::add(h, ad::leaky_relu(b(g, ad::leaky_relu(a(g, h), s)), s));
  }
  return ad::scale(output_(g, h), 1000.0);
}

Tensor LiftingNetwork::predict_values(const Tensor& x) const {
  check_input(x.cols());
  const double s = cfg_.leaky_slope;
  auto leaky = [s](Tensor t) {
    t = t.unaryExpr([s](double v) { return v > 0.0 ? v : s * v; });
    return t;
  };
  Tensor h = leaky(input_.apply(x));
  for (const auto& [a, b] : blocks_) h += leaky(b.apply(leaky(a.apply(h))));
  return output_.apply(h) * 1000.0;
}

// ---- losses ------------------------------------------------------------------------------------------

void SelectionConstants::validate() const {
  if (!(b > 0.0)) throw ConfigError("selection constant b must be positive", "/selection/b");
  if (!(d > 0.0)) throw ConfigError("hard-ratio constant d must be positive", "/selection/d");
  if (!std::isfinite(a)) throw ConfigError("selection constant a must be finite", "/selection/a");
  if (!std::isfinite(c)) throw ConfigError("hard-ratio constant c must be finite", "/selection/c");
}

Var lsgan_discriminator_loss(Var real, Var fake) {
  require_batch(real, "lsgan_discriminator_loss");
  require_batch(fake, "lsgan_discriminator_loss");
  return ad::add(ad::scale(ad::mean(ad::square(ad::add_scalar(real, -1.0))), 0.5),
                 ad::scale(ad::mean(ad::square(fake)), 0.5));
}

double lsgan_discriminator_loss(const Eigen::VectorXd& real, const Eigen::VectorXd& fake) {
  if (real.size() == 0 || fake.size() == 0) throw ShapeError("lsgan_discriminator_loss: empty batch");
  return 0.5 * (real.array() - 1.0).square().mean() + 0.5 * fake.array().square().mean();
}

Var lsgan_generator_loss(Var fake) {
  require_batch(fake, "lsgan_generator_loss");
  return ad::scale(ad::mean(ad::square(ad::add_scalar(fake, -1.0))), 0.5);
}

double lsgan_generator_loss(const Eigen::VectorXd& fake) {
  if (fake.size() == 0) throw ShapeError("lsgan_generator_loss: empty batch");
  return 0.5 * (fake.array() - 1.0).square().mean();
}

double projection_loss(const Eigen::MatrixXd& x2d, const Eigen::MatrixXd& lifted3d) {
  if (x2d.cols() != 2 || lifted3d.cols() != 3 || x2d.rows() != lifted3d.rows()) {
    throw ShapeError("projection_loss: expected J x 2 and J x 3 poses");
  }
  const Eigen::MatrixXd p = lifted3d.leftCols(2);
  const double np = p.norm(), nx = x2d.norm();
  if (np == 0.0 || nx == 0.0) throw DegenerateError("projection_loss: zero-norm operand");
  return (p / np - x2d / nx).cwiseAbs().sum();
}

Var projection_loss(Var x2d, Var lifted) {
  require_batch(x2d, "projection_loss");
  const Eigen::Index J = x2d.cols() / 2;
  if (x2d.cols() != 2 * J || lifted.cols() != 3 * J || lifted.rows() != x2d.rows()) {
    throw ShapeError("projection_loss: expected B x 2J and B x 3J");
  }
  std::vector<int> xy;
  for (int j = 0; j < J; ++j) {
    xy.push_back(3 * j);
    xy.push_back(3 * j + 1);
  }
  Var p = ad::gather_cols(lifted, xy);
  Var np = ad::row_norm(p), nx = ad::row_norm(x2d);
  if (np.value().minCoeff() == 0.0 || nx.value().minCoeff() == 0.0) {
    throw DegenerateError("projection_loss: zero-norm operand");
  }
  return ad::mean(ad::row_sum(ad::abs(ad::sub(ad::div_col(p, np), ad::div_col(x2d, nx)))));
}

double hard_ratio_loss(double err_fake, double err_src, double c, double d) {
  const double r = err_fake / (err_src + kRatioEps);
  const double f = (r - c) * (r - c);
  return f < d * d ? f : 0.0;
}

Var hard_ratio_loss(Var err_fake, const Eigen::VectorXd& err_src, double c, double d) {
  require_batch(err_fake, "hard_ratio_loss");
  if (err_fake.cols() != 1 || err_fake.rows() != err_src.size()) {
    throw ShapeError("hard_ratio_loss: fake and source errors must pair up");
  }
  ad::Graph& g = *err_fake.graph();
  Tensor inv = (err_src.array() + kRatioEps).inverse().matrix();
  Var f = ad::square(ad::add_scalar(ad::mul(err_fake, g.constant(inv)), -c));
  Tensor mask = (f.value().array() < d * d).cast<double>().matrix();
  return ad::mean(ad::mul(f, g.constant(mask)));
}

std::vector<bool> selection_mask(const Eigen::VectorXd& err_fake, const Eigen::VectorXd& err_src, double a,
                                 double b) {
  if (err_fake.size() != err_src.size()) throw ShapeError("selection_mask: errors must pair up");
  std::vector<bool> keep(static_cast<std::size_t>(err_fake.size()));
  for (Eigen::Index i = 0; i < err_fake.size(); ++i) {
    const double r = err_fake(i) / (err_src(i) + kRatioEps);
    keep[static_cast<std::size_t>(i)] = (r - a) * (r - a) < b * b;
  }
  return keep;
}

Var per_sample_error(Var pred, Var gt, int root) {
  if (pred.cols() != gt.cols() || pred.rows() != gt.rows() || pred.cols() % 3 != 0) {
    throw ShapeError("per_sample_error: prediction and ground truth differ in shape");
  }
  const int J = static_cast<int>(pred.cols() / 3);
  Var diff = ad::sub(pred, gt);
  Var root_diff = ad::tile_cols(ad::slice_cols(diff, 3 * root, 3), J);
  Var rel = ad::reshape(ad::sub(diff, root_diff), pred.rows() * J, 3);
  Var dist = ad::reshape(ad::row_norm(rel), pred.rows(), J);
  return ad::scale(ad::row_sum(dist), 1.0 / J);
}

Eigen::VectorXd per_sample_error(const Tensor& pred, const Tensor& gt, int root) {
  if (pred.cols() != gt.cols() || pred.rows() != gt.rows() || pred.cols() % 3 != 0) {
    throw ShapeError("per_sample_error: prediction and ground truth differ in shape");
  }
  const Eigen::Index J = pred.cols() / 3;
  Eigen::VectorXd out(pred.rows());
  for (Eigen::Index i = 0; i < pred.rows(); ++i) {
    const Eigen::Vector3d r = (pred.row(i).segment<3>(3 * root) - gt.row(i).segment<3>(3 * root)).transpose();
    double s = 0.0;
    for (Eigen::Index j = 0; j < J; ++j) {
      s += ((pred.row(i).segment<3>(3 * j) - gt.row(i).segment<3>(3 * j)).transpose() - r).norm();
    }
    out(i) = s / static_cast<double>(J);
  }
  return out;
}

Var lifting_loss(Var pred_src, Var gt_src, Var pred_fake, Var gt_fake, int root) {
  Var loss = ad::mean(per_sample_error(pred_src, gt_src, root));
  if (pred_fake.valid() && pred_fake.rows() > 0) {
    loss = ad::add(loss, ad::mean(per_sample_error(pred_fake, gt_fake, root)));
  }
  return loss;
}

bool LossBundle::all_finite() const {
  for (double v : {L_DD, L_D3D, L_Gadv, L_proj, L_hr, L_G, L_N}) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

bool LossBundle::decomposition_holds(double tol) const {
  return std::abs(L_G - (L_Gadv + L_proj + L_hr)) <= tol;
}

}  // namespace motionadapt
