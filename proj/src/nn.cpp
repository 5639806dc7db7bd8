// Copyright 2026 The motionadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include "motionadapt/nn.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "motionadapt/error.hpp"

namespace motionadapt {

using ad::Tensor;
using nlohmann::json;

Dense::Dense(ad::ParameterSet& params, const std::string& name, int in_features, int out_features,
             Rng& rng, double init_scale)
    : name_(name), in_(in_features), out_(out_features) {
  if (in_features < 1 || out_features < 1) {
    throw ConfigError("layer '" + name + "' needs positive sizes");
  }
  const double limit = init_scale * std::sqrt(6.0 / (in_features + out_features));
  Tensor w(in_features, out_features);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-limit, limit);
  W_ = &params.add(name + ".W", std::move(w));
  b_ = &params.add(name + ".b", Tensor::Zero(1, out_features));
}

ad::Var Dense::operator()(ad::Graph& g, ad::Var x) const {
  if (x.cols() != in_) {
    throw GraphError("layer '" + name_ + "' expects " + std::to_string(in_) + " inputs, got " +
                     std::to_string(x.cols()));
  }
  return ad::add_row(ad::matmul(x, g.param(*W_)), g.param(*b_));
}

Tensor Dense::apply(const Tensor& x) const {
  if (x.cols() != in_) {
    throw GraphError("layer '" + name_ + "' expects " + std::to_string(in_) + " inputs, got " +
                     std::to_string(x.cols()));
  }
  Tensor y = x * W_->value;
  y.rowwise() += b_->value.row(0);
  return y;
}

Adam::Adam(ad::ParameterSet& params, AdamConfig config) : params_(params.list()), cfg_(config) {
  for (auto* p : params_) {
    m_.push_back(Tensor::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(Tensor::Zero(p->value.rows(), p->value.cols()));
  }
}

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& p = *params_[i];
    if (p.grad.rows() != p.value.rows() || p.grad.cols() != p.value.cols()) continue;
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * p.grad;
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * p.grad.cwiseProduct(p.grad);
    p.value.array() -=
        cfg_.lr * (m_[i].array() / bc1) / ((v_[i].array() / bc2).sqrt() + cfg_.eps);
  }
}

json Adam::state_to_json() const {
  json j;
  j["t"] = t_;
  json m = json::object(), v = json::object();
  for (std::size_t i = 0; i < params_.size(); ++i) {
    m[params_[i]->name] = tensor_to_json(m_[i]);
    v[params_[i]->name] = tensor_to_json(v_[i]);
  }
  j["m"] = std::move(m);
  j["v"] = std::move(v);
  return j;
}

void Adam::state_from_json(const json& j) {
  try {
    const long t = j.at("t").get<long>();
    std::vector<Tensor> m, v;
    for (auto* p : params_) {
      m.push_back(tensor_from_json(j.at("m").at(p->name)));
      v.push_back(tensor_from_json(j.at("v").at(p->name)));
      if (m.back().rows() != p->value.rows() || m.back().cols() != p->value.cols() ||
          v.back().rows() != p->value.rows() || v.back().cols() != p->value.cols()) {
        throw StateError("optimizer state shape mismatch for '" + p->name + "'");
      }
    }
    t_ = t;
    m_ = std::move(m);
    v_ = std::move(v);
  } catch (const json::exception& e) {
    throw StateError(std::string("malformed optimizer state: ") + e.what());
  }
}

json tensor_to_json(const Tensor& t) {
  json j;
  j["shape"] = {t.rows(), t.cols()};
  j["values"] = std::vector<double>(t.data(), t.data() + t.size());
  return j;
}

Tensor tensor_from_json(const json& j) {
  const auto shape = j.at("shape").get<std::vector<Eigen::Index>>();
  const auto values = j.at("values").get<std::vector<double>>();
  if (shape.size() != 2 || shape[0] < 0 || shape[1] < 0 ||
      static_cast<std::size_t>(shape[0] * shape[1]) != values.size()) {
    throw StateError("tensor shape does not match its value count");
  }
  return Eigen::Map<const Tensor>(values.data(), shape[0], shape[1]);
}

json params_to_json(const ad::ParameterSet& params) {
  json j = json::object();
  for (const auto* p : params.list()) j[p->name] = tensor_to_json(p->value);
  return j;
}

void params_from_json(ad::ParameterSet& params, const json& j) {
  std::vector<Tensor> values;
  for (const auto* p : std::as_const(params).list()) {
    if (!j.contains(p->name)) throw StateError("checkpoint lacks parameter '" + p->name + "'");
    try {
      values.push_back(tensor_from_json(j.at(p->name)));
    } catch (const json::exception& e) {
      throw StateError("malformed parameter '" + p->name + "': " + e.what());
    }
    if (values.back().rows() != p->value.rows() || values.back().cols() != p->value.cols()) {
      throw StateError("parameter '" + p->name + "' has a different shape in the checkpoint");
    }
  }
  params.restore(values);
}

namespace {

bool is_binary_path(const std::string& path) {
  const auto ext = std::filesystem::path(path).extension().string();
  return ext == ".msgpack" || ext == ".ckpt";
}

}  // namespace

void write_document(const std::string& path, const json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileError("cannot open '" + path + "' for writing", path);
  if (is_binary_path(path)) {
    const auto bytes = json::to_msgpack(doc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  } else {
    out << doc.dump(1) << '\n';
  }
  if (!out) throw FileError("failed writing '" + path + "'", path);
}

json read_document(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open '" + path + "'", path);
  try {
    if (is_binary_path(path)) {
      std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      return json::from_msgpack(bytes);
    }
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FileError("cannot parse '" + path + "': " + e.what(), path);
  }
}

}  // namespace motionadapt
