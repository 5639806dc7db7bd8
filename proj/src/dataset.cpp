// Copyright 2026 The motionadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include "motionadapt/dataset.hpp"

#include <fstream>

#include "motionadapt/error.hpp"

namespace motionadapt {

using nlohmann::json;

namespace {

const char* kPartNames[kNumBodyParts] = {"right_arm", "left_arm", "right_leg", "left_leg"};

json frames_to_json(const PoseSequence& seq) {
  json out = json::array();
  for (const auto& f : seq.frames) {
    json frame = json::array();
    for (Eigen::Index j = 0; j < f.rows(); ++j) {
      json p = json::array();
      for (Eigen::Index c = 0; c < f.cols(); ++c) p.push_back(f(j, c));
      frame.push_back(std::move(p));
    }
    out.push_back(std::move(frame));
  }
  return out;
}

PoseSequence frames_from_json(const json& j, int dim, Units units, OriginSpace origin, double fps,
                              const std::string& where) {
  if (!j.is_array()) throw DatasetError(where + ": expected an array of frames");
  PoseSequence seq;
  seq.units = units;
  seq.origin = origin;
  seq.fps = fps;
  for (const auto& frame : j) {
    if (!frame.is_array()) throw DatasetError(where + ": frame is not an array");
    Eigen::MatrixXd f(static_cast<Eigen::Index>(frame.size()), dim);
    for (std::size_t r = 0; r < frame.size(); ++r) {
      const auto& p = frame[r];
      if (!p.is_array() || static_cast<int>(p.size()) != dim) {
        throw DatasetError(where + ": expected " + std::to_string(dim) + " coordinates per joint");
      }
      for (int c = 0; c < dim; ++c) {
        if (!p[c].is_number()) throw DatasetError(where + ": non-numeric coordinate");
        f(static_cast<Eigen::Index>(r), c) = p[c].get<double>();
      }
    }
    seq.frames.push_back(std::move(f));
  }
  return seq;
}

DatasetRole role_from_string(const std::string& s) {
  if (s == "source") return DatasetRole::Source;
  if (s == "target") return DatasetRole::Target;
  if (s == "evaluation") return DatasetRole::Evaluation;
  if (s == "generated") return DatasetRole::Generated;
  throw DatasetError("unknown dataset role '" + s + "'");
}

}  // namespace

std::string to_string(DatasetRole role) {
  switch (role) {
    case DatasetRole::Source: return "source";
    case DatasetRole::Target: return "target";
    case DatasetRole::Evaluation: return "evaluation";
    case DatasetRole::Generated: return "generated";
  }
  return "?";
}

void DatasetFile::validate() const {
  const int J = topology.num_joints();
  try {
    intrinsics.validate();
  } catch (const ConfigError& e) {
    throw DatasetError(std::string("invalid intrinsics: ") + e.what());
  }
  if (!(fps > 0.0)) throw DatasetError("fps must be positive");
  if (clips.empty()) throw DatasetError("dataset has no clips");
  for (const auto& clip : clips) {
    const std::string where = "clip '" + clip.id + "'";
    try {
      clip.frames2d.validate();
    } catch (const ShapeError& e) {
      throw DatasetError(where + ": " + e.what());
    }
    if (clip.frames2d.num_joints() != J || clip.frames2d.dim() != 2) {
      throw DatasetError(where + ": 2D frames must be J x 2 with J = " + std::to_string(J));
    }
    if (role == DatasetRole::Target && clip.frames3d) {
      throw DatasetError(where + ": target-role files must not carry 3D poses");
    }
    if (role == DatasetRole::Evaluation && !clip.frames3d) {
      throw DatasetError(where + ": evaluation files must carry 3D poses");
    }
    if (role == DatasetRole::Source && !clip.frames3d) {
      throw DatasetError(where + ": source files must carry 3D poses");
    }
    if (!clip.frames3d) continue;
    const auto& f3 = *clip.frames3d;
    try {
      f3.validate();
    } catch (const ShapeError& e) {
      throw DatasetError(where + ": " + e.what());
    }
    if (f3.num_frames() != clip.frames2d.num_frames() || f3.num_joints() != J || f3.dim() != 3) {
      throw DatasetError(where + ": 3D frames must match the 2D frames and be J x 3");
    }
    if (clip.camera) {
      PoseSequence reproj;
      try {
        reproj = project_perspective(f3, intrinsics);
      } catch (const ProjectionError& e) {
        throw DatasetError(where + ": " + e.what());
      }
      for (int t = 0; t < f3.num_frames(); ++t) {
        const double r = (reproj.frames[t] - clip.frames2d.frames[t]).rowwise().norm().maxCoeff();
        if (!(r <= reprojection_tolerance_px)) {
          throw DatasetError(where + ": reprojection residual " + std::to_string(r) + " px at frame " +
                             std::to_string(t) + " exceeds tolerance");
        }
      }
    }
  }
}

json DatasetFile::to_json() const {
  json j;
  j["format"] = "motionadapt-dataset";
  j["version"] = 1;
  j["name"] = name;
  j["role"] = to_string(role);
  j["fps"] = fps;
  j["joints"] = topology.num_joints();
  j["parents"] = topology.parents();
  json parts;
  for (int p = 0; p < kNumBodyParts; ++p) parts[kPartNames[p]] = topology.part_sets()[p];
  j["parts"] = parts;
  j["intrinsics"] = {{"fx", intrinsics.fx}, {"fy", intrinsics.fy}, {"cx", intrinsics.cx},
                     {"cy", intrinsics.cy}, {"width", intrinsics.width}, {"height", intrinsics.height}};
  j["synthetic"] = synthetic;
  j["reprojection_tolerance_px"] = reprojection_tolerance_px;
  j["provenance"] = provenance;
  j["clips"] = json::array();
  for (const auto& c : clips) {
    json jc;
    jc["id"] = c.id;
    jc["subject"] = c.subject;
    jc["frames2d"] = frames_to_json(c.frames2d);
    if (c.frames3d) jc["frames3d"] = frames_to_json(*c.frames3d);
    if (c.camera) {
      std::vector<double> R(9), T(3);
      for (int r = 0; r < 3; ++r) {
        for (int k = 0; k < 3; ++k) R[3 * r + k] = c.camera->R(r, k);
        T[r] = c.camera->T(r);
      }
      jc["camera"] = {{"R", R}, {"T", T}};
    }
    if (!c.provenance.is_null()) jc["provenance"] = c.provenance;
    j["clips"].push_back(std::move(jc));
  }
  return j;
}

DatasetFile DatasetFile::from_json(const json& j) {
  DatasetFile d;
  try {
    d.name = j.value("name", std::string());
    d.role = role_from_string(j.at("role").get<std::string>());
    d.fps = j.at("fps").get<double>();
    const auto parents = j.at("parents").get<std::vector<int>>();
    if (j.contains("joints") && j.at("joints").get<int>() != static_cast<int>(parents.size())) {
      throw DatasetError("'joints' does not match the parent list");
    }
    std::array<std::vector<int>, kNumBodyParts> parts;
    if (j.contains("parts")) {
      for (int p = 0; p < kNumBodyParts; ++p) parts[p] = j.at("parts").at(kPartNames[p]).get<std::vector<int>>();
      d.topology = SkeletonTopology(parents, parts);
    } else if (parents == SkeletonTopology::h36m16().parents()) {
      d.topology = SkeletonTopology::h36m16();
    } else {
      throw DatasetError("'parts' is required for non-default skeletons");
    }
    const auto& K = j.at("intrinsics");
    d.intrinsics.fx = K.at("fx").get<double>();
    d.intrinsics.fy = K.at("fy").get<double>();
    d.intrinsics.cx = K.at("cx").get<double>();
    d.intrinsics.cy = K.at("cy").get<double>();
    d.intrinsics.width = K.at("width").get<double>();
    d.intrinsics.height = K.at("height").get<double>();
    d.synthetic = j.value("synthetic", false);
    d.reprojection_tolerance_px = j.value("reprojection_tolerance_px", 1e-6);
    d.provenance = j.value("provenance", json());
    for (const auto& jc : j.at("clips")) {
      DatasetClip c;
      c.id = jc.at("id").get<std::string>();
      c.subject = jc.value("subject", std::string());
      const std::string where = "clip '" + c.id + "'";
      c.frames2d = frames_from_json(jc.at("frames2d"), 2, Units::Pixels, OriginSpace::Image, d.fps, where);
      if (jc.contains("frames3d")) {
        c.frames3d = frames_from_json(jc.at("frames3d"), 3, Units::Millimeters, OriginSpace::Camera, d.fps, where);
      }
      if (jc.contains("camera")) {
        const auto R = jc.at("camera").at("R").get<std::vector<double>>();
        const auto T = jc.at("camera").at("T").get<std::vector<double>>();
        if (R.size() != 9 || T.size() != 3) throw DatasetError(where + ": camera needs R[9] and T[3]");
        CameraExtrinsics e;
        for (int r = 0; r < 3; ++r) {
          for (int k = 0; k < 3; ++k) e.R(r, k) = R[3 * r + k];
          e.T(r) = T[r];
        }
        c.camera = e;
      }
      c.provenance = jc.value("provenance", json());
      d.clips.push_back(std::move(c));
    }
  } catch (const json::exception& e) {
    throw DatasetError(std::string("malformed dataset: ") + e.what());
  } catch (const TopologyError& e) {
    throw DatasetError(std::string("invalid skeleton: ") + e.what());
  }
  d.validate();
  return d;
}

DatasetFile load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open dataset '" + path + "'", path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FileError("dataset '" + path + "' is not valid JSON: " + e.what(), path);
  }
  return DatasetFile::from_json(j);
}

void save_dataset(const std::string& path, const DatasetFile& data) {
  data.validate();
  std::ofstream out(path);
  if (!out) throw FileError("cannot open '" + path + "' for writing", path);
  out << data.to_json().dump() << '\n';
  if (!out) throw FileError("failed writing '" + path + "'", path);
}

}  // namespace motionadapt
