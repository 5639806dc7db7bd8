// Copyright 2026 The motionadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include "motionadapt/viewpoint.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "motionadapt/error.hpp"

namespace motionadapt {

std::vector<ViewpointRow> camera_viewpoint_stats(const std::vector<Mat3>& rotations) {
  std::vector<ViewpointRow> rows;
  rows.reserve(rotations.size());
  for (const auto& R : rotations) {
    const EulerDecomposition d = euler_from_rotmat(R);
    rows.push_back({d.angles.alpha, d.angles.beta, d.angles.gamma, camera_elevation(R), d.degenerate});
  }
  return rows;
}

std::vector<Mat3> dataset_rotations(const DatasetFile& data) {
  std::vector<Mat3> out;
  for (const auto& c : data.clips) {
    if (c.camera) out.push_back(c.camera->R);
  }
  if (out.empty()) throw DatasetError("dataset '" + data.name + "' carries no cameras");
  return out;
}

ElevationSummary summarize_elevation(const std::vector<ViewpointRow>& rows) {
  ElevationSummary s;
  s.count = static_cast<int>(rows.size());
  if (rows.empty()) return s;
  constexpr double kToDeg = 180.0 / std::numbers::pi;
  double sum = 0.0, sq = 0.0;
  s.min_deg = s.max_deg = rows[0].elevation * kToDeg;
  for (const auto& r : rows) {
    const double e = r.elevation * kToDeg;
    sum += e;
    sq += e * e;
    s.min_deg = std::min(s.min_deg, e);
    s.max_deg = std::max(s.max_deg, e);
  }
  s.mean_deg = sum / s.count;
  s.stddev_deg = std::sqrt(std::max(0.0, sq / s.count - s.mean_deg * s.mean_deg));
  return s;
}

void write_viewpoint_csv(const std::string& path, const std::vector<ViewpointRow>& rows) {
  std::ofstream out(path);
  if (!out) throw FileError("cannot open '" + path + "' for writing", path);
  out << "sample,alpha,beta,gamma,elevation,degenerate\n";
  char buf[160];
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g,%d\n", i, r.alpha, r.beta, r.gamma, r.elevation,
                  r.degenerate ? 1 : 0);
    out << buf;
  }
  if (!out) throw FileError("failed writing '" + path + "'", path);
}

}  // namespace motionadapt
