// Copyright 2026 The motionadapt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "motionadapt/autodiff.hpp"
#include "motionadapt/rng.hpp"

namespace motionadapt {

// Affine layer y = x W + b with W stored in x in_features x out_features.
class Dense {
 public:
  Dense() = default;
  // Glorot-uniform weights scaled by `init_scale`, zero bias. A zero scale
  // gives an all-zero layer.
  Dense(ad::ParameterSet& params, const std::string& name, int in_features, int out_features,
        Rng& rng, double init_scale = 1.0);

  // Throws GraphError naming the layer when x has the wrong width.
  ad::Var operator()(ad::Graph& g, ad::Var x) const;
  // Same affine map on plain values, no graph.
  ad::Tensor apply(const ad::Tensor& x) const;

  const std::string& name() const { return name_; }
  int in_features() const { return in_; }
  int out_features() const { return out_; }
  ad::Parameter& weight() const { return *W_; }
  ad::Parameter& bias() const { return *b_; }

 private:
  std::string name_;
  int in_ = 0;
  int out_ = 0;
  ad::Parameter* W_ = nullptr;
  ad::Parameter* b_ = nullptr;
};

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected adaptive-moment optimizer over every parameter of a set.
class Adam {
 public:
  Adam(ad::ParameterSet& params, AdamConfig config);

  // Applies one update from the gradients currently stored in the parameters.
  void step();
  long steps() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

  nlohmann::json state_to_json() const;
  // Throws StateError when names or shapes differ from the bound set.
  void state_from_json(const nlohmann::json& j);

 private:
  std::vector<ad::Parameter*> params_;
  std::vector<ad::Tensor> m_;
  std::vector<ad::Tensor> v_;
  long t_ = 0;
  AdamConfig cfg_;
};

nlohmann::json tensor_to_json(const ad::Tensor& t);
ad::Tensor tensor_from_json(const nlohmann::json& j);

// {"<name>": {"shape": [r, c], "values": [...row-major...]}, ...}
nlohmann::json params_to_json(const ad::ParameterSet& params);
// Every parameter of `params` must be present with a matching shape.
void params_from_json(ad::ParameterSet& params, const nlohmann::json& j);

// Writes MessagePack for ".msgpack"/".ckpt" paths and indented JSON otherwise.
void write_document(const std::string& path, const nlohmann::json& doc);
nlohmann::json read_document(const std::string& path);

}  // namespace motionadapt
