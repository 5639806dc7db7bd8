// Copyright 2026 The motionadapt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "motionadapt/adversary.hpp"
#include "motionadapt/config.hpp"
#include "motionadapt/dataset.hpp"
#include "motionadapt/generator.hpp"
#include "motionadapt/metrics.hpp"
#include "motionadapt/nn.hpp"

namespace motionadapt {

// ---- 2D preprocessing --------------------------------------------------------------

// Maps [0, w] to [-1, 1] with the aspect ratio kept. Portrait frames are
// padded symmetrically to a square first. Input and output are J x 2.
Eigen::MatrixXd normalize_2d_coords(const Eigen::MatrixXd& px, const CameraIntrinsics& K);
Eigen::MatrixXd denormalize_2d_coords(const Eigen::MatrixXd& xy, const CameraIntrinsics& K);

// Root-centered pose divided by its Frobenius norm. DegenerateError when all
// joints coincide with the root.
Eigen::MatrixXd root_frobenius(const Eigen::MatrixXd& px, int root);

// Row-batched forms over M x 2J pixel rows (x0, y0, x1, y1, ...).
ad::Tensor preprocess_rows(const ad::Tensor& px, const CameraIntrinsics& K, Preprocessing mode, int root);
ad::Var preprocess_rows(ad::Var px, const CameraIntrinsics& K, Preprocessing mode, int root);

// ---- window sampling -----------------------------------------------------------------

// stride * (center - half), ..., stride * (center + half).
std::vector<int> window_indices(int center, int half, int stride);

struct WindowDraw {
  int center = 0;  // t, in downsampled units
  int stride = 1;  // r
  std::vector<int> frames;
};

// Draws r uniformly from [r_min, r_max] and then t until the whole window
// fits in the clip. DatasetError when the clip cannot hold the window at r.
WindowDraw sample_window_downsampled(int clip_len, int n_frames, int r_min, int r_max, Rng& rng);

// Frame indices of an evaluation window around `center` with edge frames
// repeated past the clip boundaries.
std::vector<int> clamped_window(int center, int n_frames, int stride, int clip_len);

// ---- data views ------------------------------------------------------------------------

struct SourceClip {
  std::string id;
  std::vector<Eigen::MatrixXd> x2d;  // preprocessed, J x 2
  std::vector<Eigen::MatrixXd> x3d;  // camera space, mm, J x 3
  Mat3 rotation = Mat3::Identity();  // world to camera
};

// Source role: 2D, 3D and cameras.
class SourceData {
 public:
  static SourceData from_dataset(const DatasetFile& file, Preprocessing mode);
  const std::vector<SourceClip>& clips() const { return clips_; }
  const CameraIntrinsics& intrinsics() const { return K_; }
  const SkeletonTopology& topology() const { return topo_; }

 private:
  std::vector<SourceClip> clips_;
  CameraIntrinsics K_;
  SkeletonTopology topo_ = SkeletonTopology::h36m16();
};

// Target role: only the preprocessed 2D frames are kept, so no training code
// path can reach target 3D labels.
class Target2DData {
 public:
  static Target2DData from_dataset(const DatasetFile& file, Preprocessing mode);
  const std::vector<std::vector<Eigen::MatrixXd>>& clips() const { return clips_; }

 private:
  std::vector<std::vector<Eigen::MatrixXd>> clips_;
};

struct EvalClipData {
  std::string id;
  std::vector<Eigen::MatrixXd> x2d;  // preprocessed
  PoseSequence x3d;                  // mm
};

class EvalData {
 public:
  static EvalData from_dataset(const DatasetFile& file, Preprocessing mode);
  const std::vector<EvalClipData>& clips() const { return clips_; }
  const SkeletonTopology& topology() const { return topo_; }

 private:
  std::vector<EvalClipData> clips_;
  SkeletonTopology topo_ = SkeletonTopology::h36m16();
};

struct SourceBatch {
  ad::Tensor x2d;             // B*n x 2J preprocessed
  ad::Tensor bones_m;         // B*n x 3(J-1), camera space
  ad::Tensor center_bones_m;  // B x 3(J-1)
  ad::Tensor center_3d_mm;    // B x 3J root-relative
  std::vector<Mat3> rotations;
  std::vector<Provenance> provenance;
};

SourceBatch sample_source_batch(const SourceData& data, int batch, int n_frames, int r_min, int r_max, Rng& rng);
ad::Tensor sample_target_batch(const Target2DData& data, int batch, int n_frames, int r_min, int r_max, Rng& rng);

// ---- training -------------------------------------------------------------------------

struct LogRow {
  long step = 0;
  int epoch = 0;
  LossBundle loss;
};

struct RunState {
  int epoch = 0;          // completed epochs
  long step = 0;          // completed adversarial steps
  int pretrain_done = 0;  // completed lifting pretraining steps
  Rng data_rng;
  Rng noise_rng;
  Rng perturb_rng;
  std::vector<LogRow> log;
};

// Values of one generated batch.
struct FakeBatch {
  ad::Tensor x2d;           // B*n x 2J preprocessed
  ad::Tensor x2d_px;        // B*n x 2J
  ad::Tensor joints_mm;     // B*n x 3J camera space
  ad::Tensor center_3d_mm;  // B x 3J
  ad::Tensor R;             // B x 9
  ad::Tensor T_mm;          // B x 3
};

struct EvalComparison {
  MetricReport before;
  MetricReport after;
  nlohmann::json to_json() const;
};

class Trainer {
 public:
  // The target set is required in adapt mode.
  Trainer(const TrainConfig& config, SourceData source, std::optional<Target2DData> target);
  ~Trainer();
  Trainer(const Trainer&) = delete;
  Trainer& operator=(const Trainer&) = delete;

  // Runs the remaining lifting pretraining steps on source data and then
  // snapshots the lifting network as the "before" baseline.
  void pretrain();
  // One adversarial step (or one lifting step in source-only mode). On a
  // non-finite loss the epoch-start state is restored, a checkpoint is
  // written when a failure path is set, and TrainingError is thrown.
  LossBundle train_step();
  void train_epoch();
  // pretrain() then the remaining epochs.
  void run();

  FakeBatch generate_batch(const SourceBatch& src, Rng& noise) const;
  std::vector<FakeSample> generate(int count, Rng& rng) const;
  // World-to-generated-camera rotations R_gen * R_src.
  std::vector<Mat3> generated_rotations(int count, Rng& rng) const;
  // Held-out real-vs-fake accuracy of the domain discriminator at 0.5.
  double domain_disc_accuracy(const Target2DData& target, int samples, Rng& rng) const;
  // Same windows for both networks; target labels only score predictions.
  EvalComparison fine_tune_evaluate(const EvalData& eval) const;
  std::vector<EvalClip> predict_clips(const EvalData& eval, const LiftingNetwork& net) const;

  nlohmann::json checkpoint() const;
  void save_checkpoint(const std::string& path) const;
  // Throws StateError when the checkpoint does not match this configuration.
  void restore_checkpoint(const nlohmann::json& doc);
  void set_failure_checkpoint(std::string path) { failure_path_ = std::move(path); }
  // Header step,epoch,L_DD,L_D3D,L_Gadv,L_proj,L_hr,L_G,L_N,keep_rate.
  void write_loss_csv(const std::string& path) const;

  const TrainConfig& config() const { return cfg_; }
  const RunState& state() const { return state_; }
  const SourceData& source() const { return source_; }
  Generator& generator() { return *gen_; }
  const Generator& generator() const { return *gen_; }
  DomainDiscriminator& domain_discriminator() { return *dd_; }
  Discriminator3D& discriminator3d() { return *d3_; }
  LiftingNetwork& lifting() { return *lift_; }
  const LiftingNetwork& lifting() const { return *lift_; }
  const LiftingNetwork& lifting_before() const { return *lift_before_; }

 private:
  struct Snapshot;
  GeneratorInput generator_input(const SourceBatch& src, Rng& noise) const;
  double lifting_update(const SourceBatch& src, const FakeBatch* fake, const std::vector<bool>* keep);
  Snapshot take_snapshot() const;
  void restore_snapshot(const Snapshot& s);

  TrainConfig cfg_;
  SourceData source_;
  std::optional<Target2DData> target_;
  RunState state_;
  std::unique_ptr<Generator> gen_;
  std::unique_ptr<DomainDiscriminator> dd_;
  std::unique_ptr<Discriminator3D> d3_;
  std::unique_ptr<LiftingNetwork> lift_;
  std::unique_ptr<LiftingNetwork> lift_before_;
  std::unique_ptr<Adam> opt_gen_;
  std::unique_ptr<Adam> opt_dd_;
  std::unique_ptr<Adam> opt_d3_;
  std::unique_ptr<Adam> opt_lift_;
  std::unique_ptr<Snapshot> epoch_start_;
  std::string failure_path_;
};

void write_loss_csv(const std::string& path, const std::vector<LogRow>& log);

}  // namespace motionadapt
