// Copyright 2026 The motionadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "motionadapt/dataset.hpp"
#include "motionadapt/error.hpp"
#include "motionadapt/synth.hpp"
#include "motionadapt/viewpoint.hpp"
#include "oracles.hpp"

namespace motionadapt {
namespace {

namespace fs = std::filesystem;

SynthSpec small_spec(std::uint64_t seed = 3) {
  SynthSpec s;
  s.source_subjects = 2;
  s.target_subjects = 2;
  s.eval_subjects = 1;
  s.clips_per_subject = 2;
  s.source_clip_len = 40;
  s.target_clip_len = 30;
  s.seed = seed;
  return s;
}

const SynthDatasets& shared() {
  static const SynthDatasets d = synth_motion_dataset(small_spec());
  return d;
}

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("motionadapt_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

TEST(Synth, RolesAndCounts) {
  const auto& d = shared();
  EXPECT_EQ(d.source.role, DatasetRole::Source);
  EXPECT_EQ(d.target.role, DatasetRole::Target);
  EXPECT_EQ(d.target_eval.role, DatasetRole::Evaluation);
  EXPECT_EQ(d.source.clips.size(), 4u);
  EXPECT_EQ(d.target.clips.size(), 4u);
  EXPECT_EQ(d.target_eval.clips.size(), 2u);
  EXPECT_EQ(d.source.clips[0].frames2d.num_frames(), 40);
  EXPECT_TRUE(d.source.synthetic);
  for (const auto& c : d.target.clips) {
    EXPECT_FALSE(c.frames3d.has_value());
    EXPECT_FALSE(c.camera.has_value());
  }
  for (const auto& c : d.target_eval.clips) EXPECT_TRUE(c.frames3d.has_value());
}

TEST(Synth, ReprojectionResidual) {
  const auto& d = shared();
  const auto& K = d.source.intrinsics;
  double worst = 0.0;
  for (const auto* file : {&d.source, &d.target_eval}) {
    for (const auto& c : file->clips) {
      for (int t = 0; t < c.frames2d.num_frames(); ++t) {
        for (int j = 0; j < 16; ++j) {
          const Eigen::Vector3d X = c.frames3d->frames[t].row(j).transpose();
          const Eigen::Vector2d x = c.frames2d.frames[t].row(j).transpose();
          worst = std::max(worst, (x - oracle::project(X, K.fx, K.fy, K.cx, K.cy)).norm());
        }
      }
    }
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Synth, ElevationBandsAreDisjointAndRespected) {
  const auto& d = shared();
  const SynthSpec s = small_spec();
  for (const auto& R : dataset_rotations(d.source)) {
    const double e = camera_elevation(R) * 180.0 / M_PI;
    EXPECT_GE(e, s.source_elevation_deg[0] - 1e-9);
    EXPECT_LE(e, s.source_elevation_deg[1] + 1e-9);
  }
  for (const auto& R : dataset_rotations(d.target_eval)) {
    const double e = camera_elevation(R) * 180.0 / M_PI;
    EXPECT_GE(e, s.target_elevation_deg[0] - 1e-9);
    EXPECT_LE(e, s.target_elevation_deg[1] + 1e-9);
  }
  EXPECT_THROW(dataset_rotations(d.target), DatasetError);
}

TEST(Synth, BytesIdenticalPerSeed) {
  const auto a = synth_motion_dataset(small_spec(9));
  const auto b = synth_motion_dataset(small_spec(9));
  const auto c = synth_motion_dataset(small_spec(10));
  EXPECT_EQ(a.source.to_json().dump(), b.source.to_json().dump());
  EXPECT_EQ(a.target.to_json().dump(), b.target.to_json().dump());
  EXPECT_EQ(a.target_eval.to_json().dump(), b.target_eval.to_json().dump());
  EXPECT_NE(a.source.to_json().dump(), c.source.to_json().dump());
}

TEST(Synth, BoneLengthsConstantWithinClip) {
  const auto& d = shared();
  const auto bones = joints_to_bones(*d.source.clips[0].frames3d, d.source.topology);
  const Eigen::MatrixXd L = bones.lengths();
  for (int t = 1; t < L.rows(); ++t) EXPECT_LT((L.row(t) - L.row(0)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Synth, SpecValidationFieldPaths) {
  SynthSpec s = small_spec();
  s.target_elevation_deg = {5.0, 30.0};
  try {
    s.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "/target_elevation_deg");
  }
  s = small_spec();
  s.distance_m = {1.0, 2.0};
  EXPECT_THROW(s.validate(), ConfigError);

  nlohmann::json j = small_spec().to_json();
  j["bogus"] = 1;
  try {
    SynthSpec::from_json(j);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "/bogus");
  }
  const SynthSpec back = SynthSpec::from_json(small_spec().to_json());
  EXPECT_EQ(back.to_json(), small_spec().to_json());
}

TEST(LookAt, ElevationAndOrthonormality) {
  for (double deg : {-20.0, 0.0, 35.0, 60.0}) {
    const double e = deg * M_PI / 180.0, az = 0.7, dist = 5000.0;
    const Eigen::Vector3d target(100, -200, 900);
    const Eigen::Vector3d center = target + dist * Eigen::Vector3d(std::cos(e) * std::cos(az),
                                                                   std::cos(e) * std::sin(az), std::sin(e));
    const auto cam = look_at_camera(center, target);
    EXPECT_NO_THROW(cam.validate());
    EXPECT_NEAR(camera_elevation(cam.R) * 180.0 / M_PI, deg, 1e-9);
    // The target lands on the optical axis at the right depth.
    const Eigen::Vector3d t = cam.R * target + cam.T;
    EXPECT_NEAR(t.x(), 0.0, 1e-9);
    EXPECT_NEAR(t.y(), 0.0, 1e-9);
    EXPECT_NEAR(t.z(), dist, 1e-9);
    // World up maps to image up (negative y).
    EXPECT_LT((cam.R * Eigen::Vector3d::UnitZ()).y(), 0.0);
  }
  EXPECT_THROW(look_at_camera(Eigen::Vector3d(0, 0, 5000), Eigen::Vector3d::Zero()), DegenerateError);
}

TEST(Dataset, SaveLoadRoundTrip) {
  const auto dir = temp_dir("roundtrip");
  const auto& d = shared();
  save_dataset((dir / "s.json").string(), d.source);
  save_dataset((dir / "t.json").string(), d.target);
  const auto s = load_dataset((dir / "s.json").string());
  const auto t = load_dataset((dir / "t.json").string());
  EXPECT_EQ(s.to_json(), d.source.to_json());
  EXPECT_EQ(t.to_json(), d.target.to_json());
  EXPECT_EQ(s.clips[1].frames3d->frames[5], d.source.clips[1].frames3d->frames[5]);
  fs::remove_all(dir);
}

TEST(Dataset, RoleViolations) {
  DatasetFile bad = shared().source;
  bad.role = DatasetRole::Target;
  EXPECT_THROW(bad.validate(), DatasetError);
  DatasetFile eval = shared().target;
  eval.role = DatasetRole::Evaluation;
  EXPECT_THROW(eval.validate(), DatasetError);
}

TEST(Dataset, ReprojectionToleranceEnforced) {
  DatasetFile d = shared().source;
  d.clips[0].frames2d.frames[3](4, 0) += 0.01;
  EXPECT_THROW(d.validate(), DatasetError);
}

TEST(Dataset, FileErrors) {
  EXPECT_THROW(load_dataset("/nonexistent/motionadapt.json"), FileError);
  const auto dir = temp_dir("garbage");
  std::ofstream((dir / "g.json").string()) << "{not json";
  EXPECT_THROW(load_dataset((dir / "g.json").string()), FileError);
  std::ofstream((dir / "e.json").string()) << R"({"name": "x", "role": "source", "clips": []})";
  EXPECT_THROW(load_dataset((dir / "e.json").string()), DatasetError);
  fs::remove_all(dir);
}

TEST(Viewpoint, RecoversEulerAngles) {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(-1.4, 1.4);
  std::vector<Mat3> rs;
  std::vector<Eigen::Vector3d> angles;
  for (int i = 0; i < 50; ++i) {
    const Eigen::Vector3d a(u(gen), u(gen), u(gen));
    angles.push_back(a);
    rs.push_back(oracle::euler_zyx(a.x(), a.y(), a.z()));
  }
  const auto rows = camera_viewpoint_stats(rs);
  ASSERT_EQ(rows.size(), 50u);
  for (int i = 0; i < 50; ++i) {
    EXPECT_NEAR(rows[i].alpha, angles[i].x(), 1e-9);
    EXPECT_NEAR(rows[i].beta, angles[i].y(), 1e-9);
    EXPECT_NEAR(rows[i].gamma, angles[i].z(), 1e-9);
    EXPECT_NEAR(rows[i].elevation, camera_elevation(rs[i]), 1e-15);
  }
}

TEST(Viewpoint, SummaryAndCsvRoundTrip) {
  std::vector<ViewpointRow> rows(3);
  rows[0].elevation = 10.0 * M_PI / 180.0;
  rows[1].elevation = 20.0 * M_PI / 180.0;
  rows[2].elevation = 60.0 * M_PI / 180.0;
  rows[1].alpha = 0.1234567890123456789;
  rows[2].degenerate = true;
  const auto s = summarize_elevation(rows);
  EXPECT_NEAR(s.mean_deg, 30.0, 1e-12);
  EXPECT_NEAR(s.min_deg, 10.0, 1e-12);
  EXPECT_NEAR(s.max_deg, 60.0, 1e-12);
  EXPECT_EQ(s.count, 3);
  // Population standard deviation of {10, 20, 60}.
  EXPECT_NEAR(s.stddev_deg, std::sqrt((400.0 + 100.0 + 900.0) / 3.0), 1e-9);

  const auto dir = temp_dir("csv");
  const std::string path = (dir / "v.csv").string();
  write_viewpoint_csv(path, rows);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "sample,alpha,beta,gamma,elevation,degenerate");
  for (int i = 0; i < 3; ++i) {
    ASSERT_TRUE(std::getline(in, line));
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    ASSERT_EQ(cells.size(), 6u);
    EXPECT_EQ(std::stoi(cells[0]), i);
    EXPECT_EQ(std::strtod(cells[1].c_str(), nullptr), rows[i].alpha);
    EXPECT_EQ(std::strtod(cells[4].c_str(), nullptr), rows[i].elevation);
    EXPECT_EQ(std::stoi(cells[5]), rows[i].degenerate ? 1 : 0);
  }
  fs::remove_all(dir);
  EXPECT_THROW(write_viewpoint_csv("/nonexistent/dir/v.csv", rows), FileError);
}

}  // namespace
}  // namespace motionadapt
