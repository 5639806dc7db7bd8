// Copyright 2026 The motionadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include "motionadapt/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "motionadapt/error.hpp"

namespace motionadapt {

using ad::Tensor;
using ad::Var;
using nlohmann::json;

namespace {

struct PadFrame {
  double w_pad;
  double pad_x;
  double h;
};

PadFrame pad_frame(const CameraIntrinsics& K) {
  const double w_pad = std::max(K.width, K.height);
  return {w_pad, K.height > K.width ? 0.5 * (K.height - K.width) : 0.0, K.height};
}

Tensor flatten_frame(const Eigen::MatrixXd& f) {
  Tensor row(1, f.size());
  for (Eigen::Index j = 0; j < f.rows(); ++j) {
    for (Eigen::Index c = 0; c < f.cols(); ++c) row(0, j * f.cols() + c) = f(j, c);
  }
  return row;
}

Eigen::MatrixXd unflatten_row(const Tensor& t, Eigen::Index r, int dim) {
  const Eigen::Index J = t.cols() / dim;
  Eigen::MatrixXd f(J, dim);
  for (Eigen::Index j = 0; j < J; ++j) {
    for (int c = 0; c < dim; ++c) f(j, c) = t(r, j * dim + c);
  }
  return f;
}

Eigen::MatrixXd bones_of(const Eigen::MatrixXd& joints, const SkeletonTopology& topo) {
  Eigen::MatrixXd b(topo.num_bones(), joints.cols());
  for (int k = 0; k < topo.num_bones(); ++k) b.row(k) = joints.row(topo.bone_child(k)) - joints.row(topo.bone_parent(k));
  return b;
}

// Center row b * n + half of every sample.
std::vector<int> center_rows(Eigen::Index B, int n) {
  std::vector<int> rows(B);
  for (Eigen::Index b = 0; b < B; ++b) rows[b] = static_cast<int>(b) * n + (n - 1) / 2;
  return rows;
}

Tensor as_windows(const Tensor& rows, int n) {
  return Eigen::Map<const Tensor>(rows.data(), rows.rows() / n, rows.cols() * n);
}

Tensor gather(const Tensor& t, const std::vector<int>& rows) {
  Tensor out(rows.size(), t.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(i) = t.row(rows[i]);
  return out;
}

std::vector<Eigen::MatrixXd> preprocess_clip(const PoseSequence& seq, const CameraIntrinsics& K, Preprocessing mode,
                                             int root) {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(seq.frames.size());
  for (const auto& f : seq.frames) {
    out.push_back(mode == Preprocessing::ImageNormalize ? normalize_2d_coords(f, K) : root_frobenius(f, root));
  }
  return out;
}

void require_role(const DatasetFile& file, std::initializer_list<DatasetRole> roles, const char* what) {
  for (auto r : roles) {
    if (file.role == r) return;
  }
  throw DatasetError(std::string(what) + ": dataset '" + file.name + "' has role '" + to_string(file.role) + "'");
}

json log_row_to_json(const LogRow& r) {
  const auto& l = r.loss;
  return json::array({r.step, r.epoch, l.L_DD, l.L_D3D, l.L_Gadv, l.L_proj, l.L_hr, l.L_G, l.L_N, l.keep_rate});
}

LogRow log_row_from_json(const json& j) {
  LogRow r;
  r.step = j.at(0).get<long>();
  r.epoch = j.at(1).get<int>();
  auto& l = r.loss;
  l.L_DD = j.at(2).get<double>();
  l.L_D3D = j.at(3).get<double>();
  l.L_Gadv = j.at(4).get<double>();
  l.L_proj = j.at(5).get<double>();
  l.L_hr = j.at(6).get<double>();
  l.L_G = j.at(7).get<double>();
  l.L_N = j.at(8).get<double>();
  l.keep_rate = j.at(9).get<double>();
  return r;
}

}  // namespace

// ---- preprocessing ---------------------------------------------------------------------

Eigen::MatrixXd normalize_2d_coords(const Eigen::MatrixXd& px, const CameraIntrinsics& K) {
  if (px.cols() != 2) throw ShapeError("normalize_2d_coords expects J x 2 pixels");
  const PadFrame p = pad_frame(K);
  Eigen::MatrixXd out(px.rows(), 2);
  out.col(0) = (2.0 * (px.col(0).array() + p.pad_x) / p.w_pad - 1.0).matrix();
  out.col(1) = (2.0 * px.col(1).array() / p.w_pad - p.h / p.w_pad).matrix();
  return out;
}

Eigen::MatrixXd denormalize_2d_coords(const Eigen::MatrixXd& xy, const CameraIntrinsics& K) {
  if (xy.cols() != 2) throw ShapeError("denormalize_2d_coords expects J x 2 coordinates");
  const PadFrame p = pad_frame(K);
  Eigen::MatrixXd out(xy.rows(), 2);
  out.col(0) = ((xy.col(0).array() + 1.0) * p.w_pad / 2.0 - p.pad_x).matrix();
  out.col(1) = ((xy.col(1).array() + p.h / p.w_pad) * p.w_pad / 2.0).matrix();
  return out;
}

Eigen::MatrixXd root_frobenius(const Eigen::MatrixXd& px, int root) {
  if (root < 0 || root >= px.rows()) throw ShapeError("root_frobenius: root index out of range");
  Eigen::MatrixXd c = px.rowwise() - px.row(root);
  const double n = c.norm();
  if (n < 1e-12) throw DegenerateError("root_frobenius: all joints coincide with the root");
  return c / n;
}

Tensor preprocess_rows(const Tensor& px, const CameraIntrinsics& K, Preprocessing mode, int root) {
  Tensor out(px.rows(), px.cols());
  for (Eigen::Index r = 0; r < px.rows(); ++r) {
    const Eigen::MatrixXd f = unflatten_row(px, r, 2);
    out.row(r) = flatten_frame(mode == Preprocessing::ImageNormalize ? normalize_2d_coords(f, K)
                                                                     : root_frobenius(f, root));
  }
  return out;
}

Var preprocess_rows(Var px, const CameraIntrinsics& K, Preprocessing mode, int root) {
  ad::Graph& g = *px.graph();
  const Eigen::Index cols = px.cols();
  if (mode == Preprocessing::ImageNormalize) {
    const PadFrame p = pad_frame(K);
    Tensor offset(1, cols);
    for (Eigen::Index c = 0; c < cols; ++c) offset(0, c) = c % 2 == 0 ? 2.0 * p.pad_x / p.w_pad - 1.0 : -p.h / p.w_pad;
    return ad::add_row(ad::scale(px, 2.0 / p.w_pad), g.constant(offset));
  }
  const int J = static_cast<int>(cols / 2);
  Var centered = ad::sub(px, ad::tile_cols(ad::gather_cols(px, {2 * root, 2 * root + 1}), J));
  Var norm = ad::row_norm(centered);
  if (norm.value().minCoeff() < 1e-12) throw DegenerateError("root_frobenius: all joints coincide with the root");
  return ad::div_col(centered, norm);
}

// ---- windows ---------------------------------------------------------------------------

std::vector<int> window_indices(int center, int half, int stride) {
  std::vector<int> idx;
  idx.reserve(2 * half + 1);
  for (int k = center - half; k <= center + half; ++k) idx.push_back(stride * k);
  return idx;
}

WindowDraw sample_window_downsampled(int clip_len, int n_frames, int r_min, int r_max, Rng& rng) {
  if (n_frames < 1 || n_frames % 2 == 0) throw ConfigError("n_frames must be odd and positive", "/model/n_frames");
  if (r_min < 1 || r_max < r_min) throw ConfigError("invalid downsample range", "/train/downsample");
  const int half = (n_frames - 1) / 2;
  WindowDraw w;
  w.stride = rng.uniform_int(r_min, r_max);
  const int t_max = (clip_len - 1) / w.stride;
  if (clip_len < 1 || t_max < 2 * half) {
    throw DatasetError("clip of " + std::to_string(clip_len) + " frames cannot hold a " + std::to_string(n_frames) +
                       "-frame window at stride " + std::to_string(w.stride));
  }
  constexpr int kRetries = 64;
  for (int attempt = 0; attempt < kRetries; ++attempt) {
    const int t = rng.uniform_int(0, t_max);
    if (t - half >= 0 && t + half <= t_max) {
      w.center = t;
      w.frames = window_indices(t, half, w.stride);
      return w;
    }
  }
  throw DatasetError("no valid window center found after " + std::to_string(kRetries) + " draws");
}

std::vector<int> clamped_window(int center, int n_frames, int stride, int clip_len) {
  const int half = (n_frames - 1) / 2;
  std::vector<int> idx;
  idx.reserve(n_frames);
  for (int k = -half; k <= half; ++k) idx.push_back(std::clamp(center + k * stride, 0, clip_len - 1));
  return idx;
}

// ---- data views ------------------------------------------------------------------------

SourceData SourceData::from_dataset(const DatasetFile& file, Preprocessing mode) {
  require_role(file, {DatasetRole::Source, DatasetRole::Generated}, "source data");
  SourceData d;
  d.K_ = file.intrinsics;
  d.topo_ = file.topology;
  for (const auto& c : file.clips) {
    if (!c.frames3d) throw DatasetError("source clip '" + c.id + "' has no 3D frames");
    SourceClip s;
    s.id = c.id;
    s.x2d = preprocess_clip(c.frames2d, file.intrinsics, mode, file.topology.root());
    s.x3d = c.frames3d->frames;
    if (c.camera) s.rotation = c.camera->R;
    d.clips_.push_back(std::move(s));
  }
  return d;
}

Target2DData Target2DData::from_dataset(const DatasetFile& file, Preprocessing mode) {
  require_role(file, {DatasetRole::Target}, "target data");
  Target2DData d;
  for (const auto& c : file.clips) {
    d.clips_.push_back(preprocess_clip(c.frames2d, file.intrinsics, mode, file.topology.root()));
  }
  return d;
}

EvalData EvalData::from_dataset(const DatasetFile& file, Preprocessing mode) {
  require_role(file, {DatasetRole::Evaluation, DatasetRole::Source, DatasetRole::Generated}, "evaluation data");
  EvalData d;
  d.topo_ = file.topology;
  for (const auto& c : file.clips) {
    if (!c.frames3d) throw DatasetError("evaluation clip '" + c.id + "' has no 3D frames");
    d.clips_.push_back({c.id, preprocess_clip(c.frames2d, file.intrinsics, mode, file.topology.root()), *c.frames3d});
  }
  return d;
}

SourceBatch sample_source_batch(const SourceData& data, int batch, int n_frames, int r_min, int r_max, Rng& rng) {
  if (data.clips().empty()) throw DatasetError("source data has no clips");
  const SkeletonTopology& topo = data.topology();
  const int J = topo.num_joints();
  const int nb = topo.num_bones();
  const int root = topo.root();
  SourceBatch out;
  out.x2d.resize(batch * n_frames, 2 * J);
  out.bones_m.resize(batch * n_frames, 3 * nb);
  out.center_bones_m.resize(batch, 3 * nb);
  out.center_3d_mm.resize(batch, 3 * J);
  for (int b = 0; b < batch; ++b) {
    const int ci = rng.uniform_int(0, static_cast<int>(data.clips().size()) - 1);
    const SourceClip& clip = data.clips()[ci];
    const WindowDraw w = sample_window_downsampled(static_cast<int>(clip.x2d.size()), n_frames, r_min, r_max, rng);
    for (int k = 0; k < n_frames; ++k) {
      const int f = w.frames[k];
      out.x2d.row(b * n_frames + k) = flatten_frame(clip.x2d[f]);
      out.bones_m.row(b * n_frames + k) = flatten_frame(bones_of(clip.x3d[f], topo) / 1000.0);
    }
    const int c = w.frames[(n_frames - 1) / 2];
    out.center_bones_m.row(b) = flatten_frame(bones_of(clip.x3d[c], topo) / 1000.0);
    const Eigen::MatrixXd rel = clip.x3d[c].rowwise() - clip.x3d[c].row(root);
    out.center_3d_mm.row(b) = flatten_frame(rel);
    out.rotations.push_back(clip.rotation);
    out.provenance.push_back({clip.id, c, w.stride, 0});
  }
  return out;
}

Tensor sample_target_batch(const Target2DData& data, int batch, int n_frames, int r_min, int r_max, Rng& rng) {
  if (data.clips().empty()) throw DatasetError("target data has no clips");
  const Eigen::Index width = data.clips()[0][0].size();
  Tensor out(batch * n_frames, width);
  for (int b = 0; b < batch; ++b) {
    const auto& clip = data.clips()[rng.uniform_int(0, static_cast<int>(data.clips().size()) - 1)];
    const WindowDraw w = sample_window_downsampled(static_cast<int>(clip.size()), n_frames, r_min, r_max, rng);
    for (int k = 0; k < n_frames; ++k) out.row(b * n_frames + k) = flatten_frame(clip[w.frames[k]]);
  }
  return out;
}

// ---- trainer ---------------------------------------------------------------------------

json EvalComparison::to_json() const { return {{"before", before.to_json()}, {"after", after.to_json()}}; }

struct Trainer::Snapshot {
  std::vector<Tensor> gen, dd, d3, lift, lift_before;
  Adam opt_gen, opt_dd, opt_d3, opt_lift;
  RunState state;
};

Trainer::Trainer(const TrainConfig& config, SourceData source, std::optional<Target2DData> target)
    : cfg_(config), source_(std::move(source)), target_(std::move(target)) {
  cfg_.validate();
  if (cfg_.mode == TrainMode::Adapt && !target_) throw ConfigError("adapt mode needs target data", "/data/target");
  Rng master(cfg_.seed);
  Rng gen_init = master.split();
  Rng dd_init = master.split();
  Rng d3_init = master.split();
  Rng lift_init = master.split();
  state_.data_rng = master.split();
  state_.noise_rng = master.split();
  state_.perturb_rng = master.split();
  const SkeletonTopology& topo = source_.topology();
  gen_ = std::make_unique<Generator>(cfg_.generator_config(), topo, gen_init);
  dd_ = std::make_unique<DomainDiscriminator>(cfg_.discriminator_config(), topo, dd_init);
  d3_ = std::make_unique<Discriminator3D>(cfg_.discriminator_config(), topo, d3_init);
  Rng before_init = lift_init;
  lift_ = std::make_unique<LiftingNetwork>(cfg_.lifting_config(), topo, lift_init);
  lift_before_ = std::make_unique<LiftingNetwork>(cfg_.lifting_config(), topo, before_init);
  opt_gen_ = std::make_unique<Adam>(gen_->params(), cfg_.adam(cfg_.lr_generator));
  opt_dd_ = std::make_unique<Adam>(dd_->params(), cfg_.adam(cfg_.lr_discriminator));
  opt_d3_ = std::make_unique<Adam>(d3_->params(), cfg_.adam(cfg_.lr_discriminator));
  opt_lift_ = std::make_unique<Adam>(lift_->params(), cfg_.adam(cfg_.lr_lifting));
}

Trainer::~Trainer() = default;

GeneratorInput Trainer::generator_input(const SourceBatch& src, Rng& noise) const {
  const Eigen::Index B = src.center_bones_m.rows();
  GeneratorInput in;
  in.bones = src.bones_m;
  in.center_bones = src.center_bones_m;
  in.z.resize(B, cfg_.z_dim);
  in.camera_eps.resize(B, 4);
  for (Eigen::Index b = 0; b < B; ++b) {
    for (int k = 0; k < cfg_.z_dim; ++k) in.z(b, k) = noise.normal();
    for (int k = 0; k < 4; ++k) in.camera_eps(b, k) = noise.normal();
  }
  return in;
}

FakeBatch Trainer::generate_batch(const SourceBatch& src, Rng& noise) const {
  const GeneratorInput in = generator_input(src, noise);
  ad::Graph g;
  const GeneratorOutput out = gen_->forward(g, in, source_.intrinsics());
  const int n = cfg_.n_frames;
  FakeBatch fb;
  fb.x2d_px = out.x2d_px.value();
  fb.x2d = preprocess_rows(fb.x2d_px, source_.intrinsics(), cfg_.preprocessing, source_.topology().root());
  fb.joints_mm = 1000.0 * out.joints_cam.value();
  fb.center_3d_mm = gather(fb.joints_mm, center_rows(in.z.rows(), n));
  fb.R = out.R.value();
  fb.T_mm = 1000.0 * out.T.value();
  return fb;
}

double Trainer::lifting_update(const SourceBatch& src, const FakeBatch* fake, const std::vector<bool>* keep) {
  const int n = cfg_.n_frames;
  const int root = source_.topology().root();
  ad::Graph g;
  Var pred_src = lift_->predict(g, g.constant(as_windows(src.x2d, n)));
  Var gt_src = g.constant(src.center_3d_mm);
  Var pred_fake, gt_fake;
  if (fake && keep) {
    std::vector<int> rows;
    for (std::size_t i = 0; i < keep->size(); ++i) {
      if ((*keep)[i]) rows.push_back(static_cast<int>(i));
    }
    if (!rows.empty()) {
      pred_fake = lift_->predict(g, g.constant(gather(as_windows(fake->x2d, n), rows)));
      gt_fake = g.constant(gather(fake->center_3d_mm, rows));
    }
  }
  Var loss = lifting_loss(pred_src, gt_src, pred_fake, gt_fake, root);
  const double value = loss.scalar();
  if (std::isfinite(value)) {
    g.backward(loss);
    opt_lift_->step();
  }
  return value;
}

void Trainer::pretrain() {
  while (state_.pretrain_done < cfg_.pretrain_steps) {
    const SourceBatch src = sample_source_batch(source_, cfg_.batch_size, cfg_.n_frames, cfg_.downsample_min,
                                                cfg_.downsample_max, state_.data_rng);
    const double loss = lifting_update(src, nullptr, nullptr);
    if (!std::isfinite(loss)) throw TrainingError("non-finite lifting loss during pretraining");
    if (++state_.pretrain_done == cfg_.pretrain_steps) lift_before_->params().copy_values_from(lift_->params());
  }
}

Trainer::Snapshot Trainer::take_snapshot() const {
  return {gen_->params().snapshot(), dd_->params().snapshot(), d3_->params().snapshot(),
          lift_->params().snapshot(), lift_before_->params().snapshot(),
          *opt_gen_, *opt_dd_, *opt_d3_, *opt_lift_, state_};
}

void Trainer::restore_snapshot(const Snapshot& s) {
  gen_->params().restore(s.gen);
  dd_->params().restore(s.dd);
  d3_->params().restore(s.d3);
  lift_->params().restore(s.lift);
  lift_before_->params().restore(s.lift_before);
  *opt_gen_ = s.opt_gen;
  *opt_dd_ = s.opt_dd;
  *opt_d3_ = s.opt_d3;
  *opt_lift_ = s.opt_lift;
  state_ = s.state;
}

LossBundle Trainer::train_step() {
  if (!epoch_start_) epoch_start_ = std::make_unique<Snapshot>(take_snapshot());
  const int n = cfg_.n_frames;
  const int B = cfg_.batch_size;
  const int root = source_.topology().root();
  const CameraIntrinsics& K = source_.intrinsics();
  const SelectionConstants& sel = cfg_.selection;

  LossBundle L;
  L.alpha = cfg_.alpha;
  L.beta = cfg_.beta;
  const SourceBatch src =
      sample_source_batch(source_, B, n, cfg_.downsample_min, cfg_.downsample_max, state_.data_rng);

  if (cfg_.mode == TrainMode::SourceOnly) {
    L.L_N = lifting_update(src, nullptr, nullptr);
  } else {
    const Tensor tgt = sample_target_batch(*target_, B, n, cfg_.target_downsample_min, cfg_.target_downsample_max,
                                           state_.data_rng);
    const GeneratorInput gin = generator_input(src, state_.noise_rng);
    ad::Graph gG;
    const GeneratorOutput go = gen_->forward(gG, gin, K);
    Var fake2d = preprocess_rows(go.x2d_px, K, cfg_.preprocessing, root);

    // (1) discriminators on detached fakes
    {
      ad::Graph g;
      Var loss = lsgan_discriminator_loss(dd_->score(g, g.constant(tgt)), dd_->score(g, g.constant(fake2d.value())));
      L.L_DD = loss.scalar();
      g.backward(loss);
      opt_dd_->step();
    }
    {
      ad::Graph g;
      const Tensor real_part = perturb_bone_rows(src.bones_m, n, cfg_.perturb_max_deg, state_.perturb_rng);
      const Tensor& fake_bones = go.bones_cam.value();
      const Tensor fake_part =
          cfg_.perturb_fake ? perturb_bone_rows(fake_bones, n, cfg_.perturb_max_deg, state_.perturb_rng) : fake_bones;
      Var real = d3_->score(g, g.constant(src.bones_m), g.constant(real_part));
      Var fake = d3_->score(g, g.constant(fake_bones), g.constant(fake_part));
      Var loss = lsgan_discriminator_loss(real, fake);
      L.L_D3D = loss.scalar();
      g.backward(loss);
      opt_d3_->step();
    }

    // (2) generator
    const std::vector<int> centers = center_rows(B, n);
    Var adv = ad::add(ad::scale(lsgan_generator_loss(dd_->score(gG, fake2d)), cfg_.alpha),
                      ad::scale(lsgan_generator_loss(d3_->score(gG, go.bones_cam, go.bones_cam)), cfg_.beta));
    const Tensor lifted_tgt = lift_->predict_values(as_windows(tgt, n));
    Var proj = cfg_.projection_comparand == ProjectionComparand::Fake2D
                   ? projection_loss(ad::gather_rows(fake2d, centers), gG.constant(lifted_tgt))
                   : projection_loss(gG.constant(gather(tgt, centers)), gG.constant(lifted_tgt));
    const Eigen::VectorXd err_src =
        per_sample_error(lift_->predict_values(as_windows(src.x2d, n)), src.center_3d_mm, root);
    Var pred_fake = lift_->predict(gG, ad::reshape(fake2d, B, fake2d.cols() * n));
    Var gt_fake = ad::scale(ad::gather_rows(go.joints_cam, centers), 1000.0);
    Var hr = hard_ratio_loss(per_sample_error(pred_fake, gt_fake, root), err_src, sel.c, sel.d);
    Var total = ad::add(ad::add(adv, proj), hr);
    L.L_Gadv = adv.scalar();
    L.L_proj = proj.scalar();
    L.L_hr = hr.scalar();
    L.L_G = total.scalar();
    if (std::isfinite(L.L_G)) {
      gG.backward(total);
      opt_gen_->step();
    }

    // (3) lifting on source plus selected fresh fakes
    const FakeBatch fb = generate_batch(src, state_.noise_rng);
    const Eigen::VectorXd err_fake =
        per_sample_error(lift_->predict_values(as_windows(fb.x2d, n)), fb.center_3d_mm, root);
    const std::vector<bool> keep = selection_mask(err_fake, err_src, sel.a, sel.b);
    L.keep_rate = static_cast<double>(std::count(keep.begin(), keep.end(), true)) / B;
    L.L_N = lifting_update(src, &fb, &keep);
  }

  if (!L.all_finite()) {
    const long failed = state_.step + 1;
    restore_snapshot(*epoch_start_);
    if (!failure_path_.empty()) save_checkpoint(failure_path_);
    throw TrainingError("non-finite loss at step " + std::to_string(failed) + "; restored the state of epoch " +
                        std::to_string(state_.epoch));
  }
  ++state_.step;
  state_.log.push_back({state_.step, state_.epoch, L});
  return L;
}

void Trainer::train_epoch() {
  epoch_start_ = std::make_unique<Snapshot>(take_snapshot());
  const long end = static_cast<long>(state_.epoch + 1) * cfg_.steps_per_epoch;
  while (state_.step < end) train_step();
  ++state_.epoch;
}

void Trainer::run() {
  pretrain();
  while (state_.epoch < cfg_.epochs) train_epoch();
}

std::vector<FakeSample> Trainer::generate(int count, Rng& rng) const {
  const int n = cfg_.n_frames;
  std::vector<FakeSample> out;
  while (static_cast<int>(out.size()) < count) {
    const int b = std::min(cfg_.batch_size, count - static_cast<int>(out.size()));
    const SourceBatch src = sample_source_batch(source_, b, n, cfg_.downsample_min, cfg_.downsample_max, rng);
    const FakeBatch fb = generate_batch(src, rng);
    for (int i = 0; i < b; ++i) {
      FakeSample s;
      s.x3d.units = Units::Millimeters;
      s.x3d.origin = OriginSpace::Camera;
      s.x2d.units = Units::Pixels;
      s.x2d.origin = OriginSpace::Image;
      for (int k = 0; k < n; ++k) {
        s.x3d.frames.push_back(unflatten_row(fb.joints_mm, i * n + k, 3));
        s.x2d.frames.push_back(unflatten_row(fb.x2d_px, i * n + k, 2));
      }
      Mat3 R_gen;
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) R_gen(r, c) = fb.R(i, 3 * r + c);
      }
      s.camera.R = R_gen * src.rotations[i];
      s.camera.T = fb.T_mm.row(i).transpose();
      s.provenance = src.provenance[i];
      s.provenance.seed = cfg_.seed;
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::vector<Mat3> Trainer::generated_rotations(int count, Rng& rng) const {
  std::vector<Mat3> out;
  while (static_cast<int>(out.size()) < count) {
    const int b = std::min(cfg_.batch_size, count - static_cast<int>(out.size()));
    const SourceBatch src =
        sample_source_batch(source_, b, cfg_.n_frames, cfg_.downsample_min, cfg_.downsample_max, rng);
    const FakeBatch fb = generate_batch(src, rng);
    for (int i = 0; i < b; ++i) {
      Mat3 R_gen;
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) R_gen(r, c) = fb.R(i, 3 * r + c);
      }
      out.push_back(R_gen * src.rotations[i]);
    }
  }
  return out;
}

double Trainer::domain_disc_accuracy(const Target2DData& target, int samples, Rng& rng) const {
  const int n = cfg_.n_frames;
  const Tensor real =
      sample_target_batch(target, samples, n, cfg_.target_downsample_min, cfg_.target_downsample_max, rng);
  const SourceBatch src = sample_source_batch(source_, samples, n, cfg_.downsample_min, cfg_.downsample_max, rng);
  const FakeBatch fb = generate_batch(src, rng);
  const Eigen::VectorXd sr = dd_->score_values(real);
  const Eigen::VectorXd sf = dd_->score_values(fb.x2d);
  const long correct = (sr.array() > 0.5).count() + (sf.array() < 0.5).count();
  return static_cast<double>(correct) / (2.0 * samples);
}

std::vector<EvalClip> Trainer::predict_clips(const EvalData& eval, const LiftingNetwork& net) const {
  const int n = cfg_.n_frames;
  const int stride = cfg_.target_downsample_min;
  std::vector<EvalClip> out;
  for (const auto& clip : eval.clips()) {
    const int len = static_cast<int>(clip.x2d.size());
    std::vector<int> centers;
    for (int t = 0; t < len; t += cfg_.eval_stride) centers.push_back(t);
    const Eigen::Index width = clip.x2d[0].size();
    Tensor windows(static_cast<Eigen::Index>(centers.size()), width * n);
    for (std::size_t i = 0; i < centers.size(); ++i) {
      const std::vector<int> idx = clamped_window(centers[i], n, stride, len);
      for (int k = 0; k < n; ++k) windows.block(i, k * width, 1, width) = flatten_frame(clip.x2d[idx[k]]);
    }
    const Tensor pred = net.predict_values(windows);
    EvalClip ec;
    ec.id = clip.id;
    ec.pred.units = ec.gt.units = Units::Millimeters;
    ec.pred.fps = ec.gt.fps = clip.x3d.fps;
    for (std::size_t i = 0; i < centers.size(); ++i) {
      ec.pred.frames.push_back(unflatten_row(pred, static_cast<Eigen::Index>(i), 3));
      ec.gt.frames.push_back(clip.x3d.frames[centers[i]]);
    }
    out.push_back(std::move(ec));
  }
  return out;
}

EvalComparison Trainer::fine_tune_evaluate(const EvalData& eval) const {
  const int root = eval.topology().root();
  EvalComparison out;
  out.before = evaluate_clips(predict_clips(eval, *lift_before_), root, cfg_.pck_threshold_mm);
  out.after = evaluate_clips(predict_clips(eval, *lift_), root, cfg_.pck_threshold_mm);
  return out;
}

// ---- checkpoints ---------------------------------------------------------------------

json Trainer::checkpoint() const {
  json doc;
  doc["format"] = "motionadapt-checkpoint";
  doc["version"] = 1;
  doc["config"] = cfg_.to_json();
  doc["epoch"] = state_.epoch;
  doc["step"] = state_.step;
  doc["pretrain_done"] = state_.pretrain_done;
  doc["rng"] = {{"data", state_.data_rng.state()},
                {"noise", state_.noise_rng.state()},
                {"perturb", state_.perturb_rng.state()}};
  doc["params"] = {{"generator", params_to_json(gen_->params())},
                   {"domain_disc", params_to_json(dd_->params())},
                   {"disc3d", params_to_json(d3_->params())},
                   {"lifting", params_to_json(lift_->params())},
                   {"lifting_before", params_to_json(lift_before_->params())}};
  doc["optim"] = {{"generator", opt_gen_->state_to_json()},
                  {"domain_disc", opt_dd_->state_to_json()},
                  {"disc3d", opt_d3_->state_to_json()},
                  {"lifting", opt_lift_->state_to_json()}};
  json log = json::array();
  for (const auto& r : state_.log) log.push_back(log_row_to_json(r));
  doc["log"] = std::move(log);
  return doc;
}

void Trainer::save_checkpoint(const std::string& path) const { write_document(path, checkpoint()); }

void Trainer::restore_checkpoint(const json& doc) {
  try {
    if (doc.value("format", std::string()) != "motionadapt-checkpoint" || doc.value("version", 0) != 1) {
      throw StateError("not a version 1 motionadapt checkpoint");
    }
    const Snapshot backup = take_snapshot();
    try {
      const auto& p = doc.at("params");
      params_from_json(gen_->params(), p.at("generator"));
      params_from_json(dd_->params(), p.at("domain_disc"));
      params_from_json(d3_->params(), p.at("disc3d"));
      params_from_json(lift_->params(), p.at("lifting"));
      params_from_json(lift_before_->params(), p.at("lifting_before"));
      const auto& o = doc.at("optim");
      opt_gen_->state_from_json(o.at("generator"));
      opt_dd_->state_from_json(o.at("domain_disc"));
      opt_d3_->state_from_json(o.at("disc3d"));
      opt_lift_->state_from_json(o.at("lifting"));
      state_.epoch = doc.at("epoch").get<int>();
      state_.step = doc.at("step").get<long>();
      state_.pretrain_done = doc.at("pretrain_done").get<int>();
      state_.data_rng.set_state(doc.at("rng").at("data").get<std::string>());
      state_.noise_rng.set_state(doc.at("rng").at("noise").get<std::string>());
      state_.perturb_rng.set_state(doc.at("rng").at("perturb").get<std::string>());
      state_.log.clear();
      for (const auto& r : doc.at("log")) state_.log.push_back(log_row_from_json(r));
    } catch (...) {
      restore_snapshot(backup);
      throw;
    }
  } catch (const json::exception& e) {
    throw StateError(std::string("malformed checkpoint: ") + e.what());
  }
  epoch_start_.reset();
}

void write_loss_csv(const std::string& path, const std::vector<LogRow>& log) {
  std::ofstream out(path);
  if (!out) throw FileError("cannot open '" + path + "' for writing", path);
  out << "step,epoch,L_DD,L_D3D,L_Gadv,L_proj,L_hr,L_G,L_N,keep_rate\n";
  char buf[512];
  for (const auto& r : log) {
    const auto& l = r.loss;
    std::snprintf(buf, sizeof(buf), "%ld,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.step, r.epoch,
                  l.L_DD, l.L_D3D, l.L_Gadv, l.L_proj, l.L_hr, l.L_G, l.L_N, l.keep_rate);
    out << buf;
  }
  if (!out) throw FileError("failed writing '" + path + "'", path);
}

void Trainer::write_loss_csv(const std::string& path) const { motionadapt::write_loss_csv(path, state_.log); }

}  // namespace motionadapt
