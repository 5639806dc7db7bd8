// Copyright 2026 The motionadapt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "motionadapt/geometry.hpp"

namespace motionadapt::ad {

// Row-major so that reshape is a reinterpretation of the same buffer. Batched
// values keep one sample (or one sample-frame) per row.
using Tensor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
};

// Named parameters with stable addresses; insertion order is the canonical
// order used by optimizers and checkpoints.
class ParameterSet {
 public:
  ParameterSet() = default;
  ParameterSet(ParameterSet&&) noexcept = default;
  ParameterSet& operator=(ParameterSet&&) noexcept = default;
  ParameterSet(const ParameterSet&) = delete;
  ParameterSet& operator=(const ParameterSet&) = delete;

  Parameter& add(std::string name, Tensor init);
  Parameter& at(std::string_view name);
  const Parameter& at(std::string_view name) const;
  bool contains(std::string_view name) const { return index_.find(name) != index_.end(); }

  std::vector<Parameter*> list();
  std::vector<const Parameter*> list() const;
  std::size_t size() const { return params_.size(); }
  std::size_t num_scalars() const;

  // Copies values (not gradients) from a set with identical names and shapes.
  void copy_values_from(const ParameterSet& other);
  std::vector<Tensor> snapshot() const;
  void restore(const std::vector<Tensor>& values);

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::map<std::string, Parameter*, std::less<>> index_;
};

class Graph;

// Handle to a node of a Graph.
class Var {
 public:
  Var() = default;
  const Tensor& value() const;
  // Gradient accumulated by the last backward pass; empty if none reached.
  const Tensor& grad() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const;
  bool requires_grad() const;
  Graph* graph() const { return graph_; }
  int id() const { return id_; }
  bool valid() const { return graph_ != nullptr; }

 private:
  friend class Graph;
  Var(Graph* g, int id) : graph_(g), id_(id) {}
  Graph* graph_ = nullptr;
  int id_ = -1;
};

// Define-by-run tape. Building nodes is the forward pass; backward() walks the
// tape once in reverse and may run only once per forward.
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, int self, const Tensor& grad_out)>;
  enum class State { Empty, Forward, Consumed };

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var input(const std::string& name, Tensor value, bool requires_grad = false);
  Var constant(Tensor value);
  Var param(Parameter& p);
  // Looks up a named input (GraphError if absent).
  Var named_input(const std::string& name) const;

  // Appends an op node. `fn` is dropped when no input requires a gradient.
  Var record(const char* op, Tensor value, std::initializer_list<Var> inputs, BackwardFn fn);
  Var record(const char* op, Tensor value, const std::vector<Var>& inputs, BackwardFn fn);

  // Seeds d(loss)/d(loss) = 1 for a 1x1 loss. Parameter gradient slots bound
  // in this graph are zeroed first, then overwritten with this pass's result.
  void backward(Var loss);
  void backward(Var output, const Tensor& seed);

  void reset();
  State state() const { return state_; }
  std::size_t size() const { return nodes_.size(); }

  const Tensor& value(int id) const { return nodes_[id].value; }
  const Tensor& grad(int id) const { return nodes_[id].grad; }
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }
  const std::string& op_name(int id) const { return nodes_[id].op; }
  // Adds `g` into the gradient slot of node `id` (no-op if it needs none).
  void accumulate(int id, const Tensor& g);
  template <typename Expr>
  void accumulate_expr(int id, const Expr& g) {
    if (!nodes_[id].requires_grad) return;
    auto& slot = nodes_[id].grad;
    if (slot.size() == 0) {
      slot = g;
    } else {
      slot += g;
    }
  }

 private:
  struct Node {
    std::string op;
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    BackwardFn backward;
    Parameter* param = nullptr;
  };
  void check_open(const char* op) const;

  std::vector<Node> nodes_;
  std::map<std::string, int> inputs_;
  State state_ = State::Empty;
};

// ---- elementwise / linear algebra -------------------------------------------------
Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);
Var add_row(Var a, Var row);   // a (M x C) + row (1 x C) broadcast
Var mul_row(Var a, Var row);   // a (M x C) * row (1 x C) broadcast
Var mul_col(Var a, Var col);   // a (M x C) * col (M x 1) broadcast
Var div_col(Var a, Var col);   // a (M x C) / col (M x 1) broadcast
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
Var neg(Var a);
Var leaky_relu(Var a, double slope);
Var tanh(Var a);
Var sigmoid(Var a);
Var softplus(Var a);
Var exp(Var a);
Var sqrt(Var a);
Var square(Var a);
Var abs(Var a);

// ---- reductions ---------------------------------------------------------------
Var sum(Var a);       // 1 x 1
Var mean(Var a);      // 1 x 1
Var row_sum(Var a);   // M x 1
Var row_norm(Var a);  // M x 1 Euclidean norm of each row

// ---- structure ----------------------------------------------------------------
Var reshape(Var a, Eigen::Index rows, Eigen::Index cols);
Var concat_cols(const std::vector<Var>& parts);
Var concat_rows(const std::vector<Var>& parts);
Var slice_cols(Var a, Eigen::Index start, Eigen::Index count);
Var slice_rows(Var a, Eigen::Index start, Eigen::Index count);
Var gather_cols(Var a, const std::vector<int>& columns);
Var gather_rows(Var a, const std::vector<int>& rows);
Var repeat_rows(Var a, int times);  // row i -> rows i*times .. i*times+times-1
Var tile_cols(Var a, int times);    // [a a ... a]
Var detach(Var a);

// ---- geometry primitives (one rotation / point set per row) ----------------------
// axis M x 3 (normalized internally), angle M x 1 -> M x 4 (q_r, q_x, q_y, q_z).
Var quat_from_axis_angle(Var axis, Var angle);
// Rotation vector M x 3 -> unit quaternion M x 4, smooth through zero.
Var quat_from_rotation_vector(Var r);
// Unit quaternion rows M x 4 -> row-major rotation matrices M x 9.
Var rotmat_from_quat(Var q);
// (alpha, beta, gamma) rows M x 3 -> Rz Ry Rx as M x 9.
Var rotmat_from_euler(Var angles);
// Rotates K points per row: R (M x 9), X (M x 3K) -> M x 3K.
Var rotate_points(Var R, Var X);
// Pinhole projection of K points per row: M x 3K -> M x 2K pixels.
Var project_perspective(Var X, const CameraIntrinsics& K);
// Upper triangle (row-major, with diagonal) of the Gram matrix of K vectors of
// dimension D stored per row: M x (K*D) -> M x K(K+1)/2.
Var gram_upper(Var X, int num_vectors, int dim);

// ---- gradient checking ----------------------------------------------------------
struct GradCheckReport {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  int probes = 0;
  bool passed = false;
  std::string worst;  // "<param>[index]" of the worst probe
};

// Compares backward() gradients with central differences on randomly probed
// coordinates (at least one per parameter). Relative error is
// |a - n| / max(|a|, |n|, abs_floor).
GradCheckReport grad_check(ParameterSet& params, const std::function<Var(Graph&)>& loss_fn,
                           double tolerance, int probes = 32, double step = 1e-5,
                           std::uint64_t seed = 0, double abs_floor = 1e-6);

}  // namespace motionadapt::ad
