// Copyright 2026 The motionadapt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace motionadapt {

// Base class for every error raised by the library. `kind()` is a stable,
// machine-readable tag used by the CLI error line.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define MOTIONADAPT_DEFINE_ERROR(Name, tag)                    \
  class Name : public Error {                                   \
   public:                                                      \
    explicit Name(const std::string& message) : Error(tag, message) {} \
  }

MOTIONADAPT_DEFINE_ERROR(TopologyError, "topology");
MOTIONADAPT_DEFINE_ERROR(ShapeError, "shape");
MOTIONADAPT_DEFINE_ERROR(DegenerateError, "degenerate");
MOTIONADAPT_DEFINE_ERROR(ProjectionError, "projection");
MOTIONADAPT_DEFINE_ERROR(BehindCameraError, "behind_camera");
MOTIONADAPT_DEFINE_ERROR(AlignmentError, "alignment");
MOTIONADAPT_DEFINE_ERROR(GraphError, "graph");
MOTIONADAPT_DEFINE_ERROR(StateError, "state");
MOTIONADAPT_DEFINE_ERROR(DatasetError, "dataset");
MOTIONADAPT_DEFINE_ERROR(TrainingError, "training");

#undef MOTIONADAPT_DEFINE_ERROR

// Invalid configuration value. `field()` is a JSON-pointer style path
// ("/selection/b") when the value came from a config document.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message, std::string field = {})
      : Error("config", message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Missing or unreadable input file.
class FileError : public Error {
 public:
  FileError(const std::string& message, std::string path)
      : Error("file", message), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace motionadapt
