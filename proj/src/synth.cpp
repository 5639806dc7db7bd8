// Copyright 2026 The motionadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include "motionadapt/synth.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Geometry>

#include "json_reader.hpp"
#include "motionadapt/error.hpp"

namespace motionadapt {

using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

Mat3 rot_x(double a) { return rotmat_from_euler(0.0, 0.0, a); }
Mat3 rot_y(double a) { return rotmat_from_euler(0.0, a, 0.0); }
Mat3 rot_z(double a) { return rotmat_from_euler(a, 0.0, 0.0); }

// Rest offsets of the 16-joint skeleton in the parent frame (meters); body
// frame x forward, y left, z up.
Eigen::Matrix<double, 16, 3> rest_offsets() {
  Eigen::Matrix<double, 16, 3> o;
  o << 0.0, 0.0, 0.0,       // pelvis
      0.0, -0.13, 0.0,      // r-hip
      0.0, 0.0, -0.45,      // r-knee
      0.0, 0.0, -0.44,      // r-ankle
      0.0, 0.13, 0.0,       // l-hip
      0.0, 0.0, -0.45,      // l-knee
      0.0, 0.0, -0.44,      // l-ankle
      0.0, 0.0, 0.23,       // spine
      0.0, 0.0, 0.25,       // thorax
      0.02, 0.0, 0.22,      // head
      0.0, 0.17, -0.03,     // l-shoulder
      0.0, 0.0, -0.28,      // l-elbow
      0.0, 0.0, -0.25,      // l-wrist
      0.0, -0.17, -0.03,    // r-shoulder
      0.0, 0.0, -0.28,      // r-elbow
      0.0, 0.0, -0.25;      // r-wrist
  return o;
}

struct Subject {
  std::string name;
  Eigen::Matrix<double, 16, 3> offsets;
  double scale = 1.0;
  double speed_hz = 1.0;
};

enum class Program { Walker, Reacher };

struct Pose {
  std::array<Mat3, 16> local;
  Eigen::Vector3d root;
};

// Joint-angle programs. phi is the motion phase in radians.
Pose program_pose(Program p, double phi, double yaw, double hip_height) {
  Pose pose;
  pose.local.fill(Mat3::Identity());
  const double s = std::sin(phi);
  const double flex = 0.5 - 0.5 * std::cos(phi);
  if (p == Program::Walker) {
    pose.root = {0.0, 0.0, hip_height + 0.02 * std::sin(2.0 * phi)};
    pose.local[0] = rot_z(yaw) * rot_y(0.04 + 0.02 * std::sin(2.0 * phi));
    pose.local[1] = rot_y(-0.45 * s);
    pose.local[4] = rot_y(0.45 * s);
    pose.local[2] = rot_y(0.7 * (0.5 - 0.5 * std::cos(phi + 0.6 * kPi)));
    pose.local[5] = rot_y(0.7 * (0.5 - 0.5 * std::cos(phi + 1.6 * kPi)));
    pose.local[7] = rot_z(0.15 * s);
    pose.local[10] = rot_y(-0.4 * s) * rot_x(0.12);
    pose.local[13] = rot_y(0.4 * s) * rot_x(-0.12);
    pose.local[11] = rot_y(-0.35 - 0.2 * (0.5 - 0.5 * s));
    pose.local[14] = rot_y(-0.35 - 0.2 * (0.5 + 0.5 * s));
  } else {
    const double reach_r = flex;
    const double reach_l = 0.5 - 0.5 * std::cos(phi + kPi);
    pose.root = {0.0, 0.0, hip_height - 0.04 - 0.03 * flex};
    pose.local[0] = rot_z(yaw);
    pose.local[1] = rot_y(-0.15 - 0.1 * flex);
    pose.local[4] = rot_y(-0.15 - 0.1 * flex);
    pose.local[2] = rot_y(0.3 + 0.2 * flex);
    pose.local[5] = rot_y(0.3 + 0.2 * flex);
    pose.local[7] = rot_z(0.3 * std::sin(0.5 * phi)) * rot_y(0.35 * flex);
    pose.local[9] = rot_y(0.2 * flex);
    pose.local[13] = rot_y(-1.4 * reach_r) * rot_x(-0.15);
    pose.local[10] = rot_y(-1.4 * reach_l) * rot_x(0.15);
    pose.local[14] = rot_y(-0.9 * (1.0 - reach_r));
    pose.local[11] = rot_y(-0.9 * (1.0 - reach_l));
  }
  return pose;
}

// World joint positions (meters) by forward kinematics.
Eigen::MatrixXd forward_kinematics(const Pose& pose, const Subject& subj, const SkeletonTopology& topo) {
  const int J = topo.num_joints();
  Eigen::MatrixXd X(J, 3);
  std::vector<Mat3> G(J);
  for (int j : topo.traversal_order()) {
    const int p = topo.parents()[j];
    if (p == SkeletonTopology::kNoParent) {
      G[j] = pose.local[j];
      X.row(j) = pose.root.transpose();
    } else {
      G[j] = G[p] * pose.local[j];
      X.row(j) = X.row(p) + (G[p] * subj.offsets.row(j).transpose()).transpose();
    }
  }
  return X;
}

struct Band {
  std::array<double, 2> elevation_deg;
  std::array<double, 2> limb_scale;
  std::array<double, 2> speed_hz;
  double fps;
  int clip_len;
};

Subject make_subject(const std::string& name, const Band& band, Rng& rng) {
  Subject s;
  s.name = name;
  s.scale = rng.uniform(band.limb_scale[0], band.limb_scale[1]);
  s.speed_hz = rng.uniform(band.speed_hz[0], band.speed_hz[1]);
  s.offsets = rest_offsets() * s.scale;
  for (int j = 1; j < 16; ++j) s.offsets.row(j) *= rng.uniform(0.97, 1.03);
  return s;
}

DatasetClip render_clip(const std::string& id, const Subject& subj, Program program, const Band& band,
                        const SynthSpec& spec, const SkeletonTopology& topo, Rng& rng, bool keep_3d,
                        bool keep_camera_info) {
  const double elevation = rng.uniform(band.elevation_deg[0], band.elevation_deg[1]);
  const double azimuth = rng.uniform(0.0, 360.0);
  const double distance = rng.uniform(spec.distance_m[0], spec.distance_m[1]);
  const double yaw = rng.uniform(0.0, 2.0 * kPi);
  const double phase0 = rng.uniform(0.0, 2.0 * kPi);
  const double hip_height = -(subj.offsets(2, 2) + subj.offsets(3, 2));

  const Eigen::Vector3d look = {0.0, 0.0, 1000.0 * hip_height};
  const double e = elevation * kDeg, a = azimuth * kDeg;
  const Eigen::Vector3d center =
      look + 1000.0 * distance * Eigen::Vector3d(std::cos(e) * std::cos(a), std::cos(e) * std::sin(a), std::sin(e));
  const CameraExtrinsics cam = look_at_camera(center, look);

  PoseSequence world;
  world.units = Units::Millimeters;
  world.origin = OriginSpace::World;
  world.fps = band.fps;
  for (int k = 0; k < band.clip_len; ++k) {
    const double phi = 2.0 * kPi * subj.speed_hz * k / band.fps + phase0;
    world.frames.push_back(1000.0 * forward_kinematics(program_pose(program, phi, yaw, hip_height), subj, topo));
  }
  DatasetClip clip;
  clip.id = id;
  clip.subject = subj.name;
  PoseSequence cam3d = apply_camera(world, cam);
  cam3d.fps = band.fps;
  clip.frames2d = project_perspective(cam3d, spec.intrinsics);
  clip.frames2d.fps = band.fps;
  if (keep_3d) {
    clip.frames3d = cam3d;
    clip.camera = cam;
  }
  if (keep_camera_info) {
    clip.provenance = {{"program", program == Program::Walker ? "walker" : "reacher"},
                       {"elevation_deg", elevation},
                       {"azimuth_deg", azimuth},
                       {"distance_m", distance},
                       {"limb_scale", subj.scale},
                       {"speed_hz", subj.speed_hz}};
  }
  return clip;
}

DatasetFile make_file(const std::string& name, DatasetRole role, const SynthSpec& spec, double fps) {
  DatasetFile f;
  f.name = name;
  f.role = role;
  f.fps = fps;
  f.intrinsics = spec.intrinsics;
  f.synthetic = true;
  f.provenance = {{"generator", "synth_motion_dataset"}, {"seed", spec.seed}};
  return f;
}

void range_check(const std::array<double, 2>& r, bool positive, const char* field) {
  if (!(r[0] <= r[1]) || (positive && !(r[0] > 0.0))) {
    throw ConfigError(positive ? "expected 0 < min <= max" : "expected min <= max", field);
  }
}

}  // namespace

void SynthSpec::validate() const {
  if (source_subjects < 1) throw ConfigError("must be >= 1", "/source_subjects");
  if (target_subjects < 1) throw ConfigError("must be >= 1", "/target_subjects");
  if (eval_subjects < 1) throw ConfigError("must be >= 1", "/eval_subjects");
  if (clips_per_subject < 1) throw ConfigError("must be >= 1", "/clips_per_subject");
  if (source_clip_len < 1) throw ConfigError("must be >= 1", "/source_clip_len");
  if (target_clip_len < 1) throw ConfigError("must be >= 1", "/target_clip_len");
  if (!(source_fps > 0.0)) throw ConfigError("must be positive", "/source_fps");
  if (!(target_fps > 0.0)) throw ConfigError("must be positive", "/target_fps");
  range_check(source_elevation_deg, false, "/source_elevation_deg");
  range_check(target_elevation_deg, false, "/target_elevation_deg");
  for (const auto* r : {&source_elevation_deg, &target_elevation_deg}) {
    if ((*r)[0] <= -80.0 || (*r)[1] >= 80.0) {
      throw ConfigError("elevations must lie in (-80, 80) degrees",
                        r == &source_elevation_deg ? "/source_elevation_deg" : "/target_elevation_deg");
    }
  }
  if (!(source_elevation_deg[1] < target_elevation_deg[0] || target_elevation_deg[1] < source_elevation_deg[0])) {
    throw ConfigError("source and target elevation bands must be disjoint", "/target_elevation_deg");
  }
  range_check(source_limb_scale, true, "/source_limb_scale");
  range_check(target_limb_scale, true, "/target_limb_scale");
  range_check(distance_m, true, "/distance_m");
  if (distance_m[0] < 2.5) throw ConfigError("cameras closer than 2.5 m may clip the subject", "/distance_m");
  range_check(source_speed_hz, true, "/source_speed_hz");
  range_check(target_speed_hz, true, "/target_speed_hz");
  try {
    intrinsics.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(e.what(), "/intrinsics");
  }
}

json SynthSpec::to_json() const {
  return {{"source_subjects", source_subjects},
          {"target_subjects", target_subjects},
          {"eval_subjects", eval_subjects},
          {"clips_per_subject", clips_per_subject},
          {"source_clip_len", source_clip_len},
          {"target_clip_len", target_clip_len},
          {"source_fps", source_fps},
          {"target_fps", target_fps},
          {"source_elevation_deg", source_elevation_deg},
          {"target_elevation_deg", target_elevation_deg},
          {"source_limb_scale", source_limb_scale},
          {"target_limb_scale", target_limb_scale},
          {"distance_m", distance_m},
          {"source_speed_hz", source_speed_hz},
          {"target_speed_hz", target_speed_hz},
          {"intrinsics",
           {{"fx", intrinsics.fx},
            {"fy", intrinsics.fy},
            {"cx", intrinsics.cx},
            {"cy", intrinsics.cy},
            {"width", intrinsics.width},
            {"height", intrinsics.height}}},
          {"seed", seed}};
}

SynthSpec SynthSpec::from_json(const json& j) {
  SynthSpec s;
  detail::Section root(&j, "");
  root.read("source_subjects", s.source_subjects);
  root.read("target_subjects", s.target_subjects);
  root.read("eval_subjects", s.eval_subjects);
  root.read("clips_per_subject", s.clips_per_subject);
  root.read("source_clip_len", s.source_clip_len);
  root.read("target_clip_len", s.target_clip_len);
  root.read("source_fps", s.source_fps);
  root.read("target_fps", s.target_fps);
  root.read("source_elevation_deg", s.source_elevation_deg);
  root.read("target_elevation_deg", s.target_elevation_deg);
  root.read("source_limb_scale", s.source_limb_scale);
  root.read("target_limb_scale", s.target_limb_scale);
  root.read("distance_m", s.distance_m);
  root.read("source_speed_hz", s.source_speed_hz);
  root.read("target_speed_hz", s.target_speed_hz);
  {
    detail::Section k = root.sub("intrinsics");
    k.read("fx", s.intrinsics.fx);
    k.read("fy", s.intrinsics.fy);
    k.read("cx", s.intrinsics.cx);
    k.read("cy", s.intrinsics.cy);
    k.read("width", s.intrinsics.width);
    k.read("height", s.intrinsics.height);
    k.finish();
  }
  root.read("seed", s.seed);
  root.finish();
  s.validate();
  return s;
}

CameraExtrinsics look_at_camera(const Eigen::Vector3d& center, const Eigen::Vector3d& target) {
  const Eigen::Vector3d f = (target - center).normalized();
  const Eigen::Vector3d x = f.cross(Eigen::Vector3d::UnitZ());
  if (x.norm() < 1e-9) throw DegenerateError("look_at_camera: viewing direction is vertical");
  const Eigen::Vector3d xc = x.normalized();
  const Eigen::Vector3d yc = f.cross(xc);
  CameraExtrinsics cam;
  cam.R.row(0) = xc.transpose();
  cam.R.row(1) = yc.transpose();
  cam.R.row(2) = f.transpose();
  cam.T = -cam.R * center;
  return cam;
}

SynthDatasets synth_motion_dataset(const SynthSpec& spec) {
  spec.validate();
  const SkeletonTopology topo = SkeletonTopology::h36m16();
  Rng master(spec.seed);
  Rng src_rng = master.split();
  Rng tgt_rng = master.split();
  Rng eval_rng = master.split();

  const Band source_band{spec.source_elevation_deg, spec.source_limb_scale, spec.source_speed_hz, spec.source_fps,
                         spec.source_clip_len};
  const Band target_band{spec.target_elevation_deg, spec.target_limb_scale, spec.target_speed_hz, spec.target_fps,
                         spec.target_clip_len};

  SynthDatasets out;
  out.source = make_file("synthetic-source", DatasetRole::Source, spec, spec.source_fps);
  out.target = make_file("synthetic-target", DatasetRole::Target, spec, spec.target_fps);
  out.target_eval = make_file("synthetic-target-eval", DatasetRole::Evaluation, spec, spec.target_fps);
  out.source.provenance["elevation_deg"] = spec.source_elevation_deg;
  out.target_eval.provenance["elevation_deg"] = spec.target_elevation_deg;

  auto fill = [&](DatasetFile& file, const std::string& prefix, int subjects, const Band& band, Rng& rng,
                  bool keep_3d) {
    for (int s = 0; s < subjects; ++s) {
      const Subject subj = make_subject(prefix + "S" + std::to_string(s), band, rng);
      for (int c = 0; c < spec.clips_per_subject; ++c) {
        const Program program = c % 2 == 0 ? Program::Walker : Program::Reacher;
        const std::string id = subj.name + "_c" + std::to_string(c);
        file.clips.push_back(render_clip(id, subj, program, band, spec, topo, rng, keep_3d, keep_3d));
      }
    }
  };
  fill(out.source, "src_", spec.source_subjects, source_band, src_rng, true);
  fill(out.target, "tgt_", spec.target_subjects, target_band, tgt_rng, false);
  fill(out.target_eval, "eval_", spec.eval_subjects, target_band, eval_rng, true);
  return out;
}

}  // namespace motionadapt
