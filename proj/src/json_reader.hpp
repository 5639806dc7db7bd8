// Copyright 2026 The motionadapt Authors
// SPDX-License-Identifier: Apache-2.0

// Strict reader for nested JSON option documents.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "motionadapt/error.hpp"

namespace motionadapt::detail {

using nlohmann::json;

template <typename E>
using EnumNames = std::vector<std::pair<const char*, E>>;

template <typename E>
std::string name_of(const EnumNames<E>& names, E v) {
  for (const auto& [n, e] : names) {
    if (e == v) return n;
  }
  return "?";
}

// Reads one JSON object, remembering which keys were consumed.
class Section {
 public:
  Section(const json* j, std::string path) : j_(j), path_(std::move(path)) {
    if (j_ && !j_->is_object()) throw ConfigError("expected an object", path_.empty() ? "/" : path_);
  }

  Section sub(const char* key) {
    seen_.insert(key);
    const json* child = (j_ && j_->contains(key)) ? &(*j_)[key] : nullptr;
    return Section(child, path_ + "/" + key);
  }

  void read(const char* key, int& out) {
    if (const json* v = get(key)) {
      if (!v->is_number_integer()) throw ConfigError("expected an integer", field(key));
      out = v->get<int>();
    }
  }
  void read(const char* key, std::uint64_t& out) {
    if (const json* v = get(key)) {
      if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0)) {
        throw ConfigError("expected a non-negative integer", field(key));
      }
      out = v->get<std::uint64_t>();
    }
  }
  void read(const char* key, double& out) {
    if (const json* v = get(key)) {
      if (!v->is_number()) throw ConfigError("expected a number", field(key));
      out = v->get<double>();
      if (!std::isfinite(out)) throw ConfigError("expected a finite number", field(key));
    }
  }
  void read(const char* key, bool& out) {
    if (const json* v = get(key)) {
      if (!v->is_boolean()) throw ConfigError("expected true or false", field(key));
      out = v->get<bool>();
    }
  }
  void read(const char* key, std::string& out) {
    if (const json* v = get(key)) {
      if (!v->is_string()) throw ConfigError("expected a string", field(key));
      out = v->get<std::string>();
    }
  }
  void read(const char* key, std::array<double, 2>& out) {
    if (const json* v = get(key)) {
      if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number()) {
        throw ConfigError("expected [min, max] numbers", field(key));
      }
      out = {(*v)[0].get<double>(), (*v)[1].get<double>()};
    }
  }
  void read_range(const char* key, int& lo, int& hi) {
    if (const json* v = get(key)) {
      if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number_integer() || !(*v)[1].is_number_integer()) {
        throw ConfigError("expected [min, max] integers", field(key));
      }
      lo = (*v)[0].get<int>();
      hi = (*v)[1].get<int>();
    }
  }
  template <typename E>
  void read_enum(const char* key, E& out, const EnumNames<E>& names) {
    if (const json* v = get(key)) {
      std::string allowed;
      if (v->is_string()) {
        for (const auto& [n, e] : names) {
          if (*v == n) {
            out = e;
            return;
          }
        }
      }
      for (const auto& [n, e] : names) allowed += (allowed.empty() ? "" : ", ") + std::string(n);
      throw ConfigError("expected one of: " + allowed, field(key));
    }
  }

  void finish() const {
    if (!j_) return;
    for (const auto& [k, v] : j_->items()) {
      if (!seen_.count(k)) throw ConfigError("unknown key", path_ + "/" + k);
    }
  }

 private:
  const json* get(const char* key) {
    seen_.insert(key);
    if (!j_ || !j_->contains(key)) return nullptr;
    return &(*j_)[key];
  }
  std::string field(const char* key) const { return path_ + "/" + key; }

  const json* j_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace motionadapt::detail
