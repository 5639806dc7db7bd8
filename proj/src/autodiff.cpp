// Copyright 2026 The motionadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include "motionadapt/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "motionadapt/error.hpp"
#include "motionadapt/rng.hpp"

namespace motionadapt::ad {

// ---- ParameterSet ------------------------------------------------------------------

Parameter& ParameterSet::add(std::string name, Tensor init) {
  if (contains(name)) throw GraphError("duplicate parameter name '" + name + "'");
  auto p = std::make_unique<Parameter>();
  p->name = std::move(name);
  p->grad = Tensor::Zero(init.rows(), init.cols());
  p->value = std::move(init);
  Parameter* raw = p.get();
  params_.push_back(std::move(p));
  index_.emplace(raw->name, raw);
  return *raw;
}

Parameter& ParameterSet::at(std::string_view name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw GraphError("unknown parameter '" + std::string(name) + "'");
  return *it->second;
}

const Parameter& ParameterSet::at(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw GraphError("unknown parameter '" + std::string(name) + "'");
  return *it->second;
}

std::vector<Parameter*> ParameterSet::list() {
  std::vector<Parameter*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<const Parameter*> ParameterSet::list() const {
  std::vector<const Parameter*> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

std::size_t ParameterSet::num_scalars() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p->value.size());
  return n;
}

void ParameterSet::copy_values_from(const ParameterSet& other) {
  if (other.size() != size()) throw GraphError("parameter sets differ in size");
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto& src = *other.params_[i];
    auto& dst = *params_[i];
    if (src.name != dst.name || src.value.rows() != dst.value.rows() ||
        src.value.cols() != dst.value.cols()) {
      throw GraphError("parameter '" + dst.name + "' does not match '" + src.name + "'");
    }
    dst.value = src.value;
  }
}

std::vector<Tensor> ParameterSet::snapshot() const {
  std::vector<Tensor> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p->value);
  return out;
}

void ParameterSet::restore(const std::vector<Tensor>& values) {
  if (values.size() != params_.size()) throw GraphError("snapshot size mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i].rows() != params_[i]->value.rows() || values[i].cols() != params_[i]->value.cols()) {
      throw GraphError("snapshot shape mismatch for '" + params_[i]->name + "'");
    }
    params_[i]->value = values[i];
  }
}

// ---- Var / Graph ----------------------------------------------------------------------

const Tensor& Var::value() const { return graph_->value(id_); }
const Tensor& Var::grad() const { return graph_->grad(id_); }
bool Var::requires_grad() const { return graph_->requires_grad(id_); }

double Var::scalar() const {
  const auto& v = value();
  if (v.rows() != 1 || v.cols() != 1) throw GraphError("scalar() on a non-scalar value");
  return v(0, 0);
}

void Graph::check_open(const char* op) const {
  if (state_ == State::Consumed) {
    throw StateError(std::string(op) + ": graph already consumed by backward(); call reset()");
  }
}

Var Graph::input(const std::string& name, Tensor value, bool requires_grad) {
  check_open("input");
  if (inputs_.count(name)) throw GraphError("duplicate graph input '" + name + "'");
  Node n;
  n.op = "input:" + name;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  state_ = State::Forward;
  const int id = static_cast<int>(nodes_.size()) - 1;
  inputs_.emplace(name, id);
  return Var(this, id);
}

Var Graph::constant(Tensor value) {
  check_open("constant");
  Node n;
  n.op = "constant";
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  state_ = State::Forward;
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Graph::param(Parameter& p) {
  check_open("param");
  Node n;
  n.op = "param:" + p.name;
  n.value = p.value;
  n.requires_grad = true;
  n.param = &p;
  nodes_.push_back(std::move(n));
  state_ = State::Forward;
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Graph::named_input(const std::string& name) const {
  auto it = inputs_.find(name);
  if (it == inputs_.end()) throw GraphError("graph has no input named '" + name + "'");
  return Var(const_cast<Graph*>(this), it->second);
}

Var Graph::record(const char* op, Tensor value, std::initializer_list<Var> inputs, BackwardFn fn) {
  return record(op, std::move(value), std::vector<Var>(inputs), std::move(fn));
}

Var Graph::record(const char* op, Tensor value, const std::vector<Var>& inputs, BackwardFn fn) {
  check_open(op);
  Node n;
  n.op = op;
  n.value = std::move(value);
  for (const auto& v : inputs) {
    if (v.graph() != this) throw GraphError(std::string(op) + ": input from another graph");
    n.requires_grad = n.requires_grad || nodes_[v.id()].requires_grad;
  }
  if (n.requires_grad) n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  state_ = State::Forward;
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

void Graph::accumulate(int id, const Tensor& g) { accumulate_expr(id, g); }

void Graph::backward(Var loss) {
  if (loss.graph() == this && state_ == State::Forward &&
      (loss.rows() != 1 || loss.cols() != 1)) {
    throw GraphError("backward(loss) needs a 1x1 loss; use backward(output, seed)");
  }
  backward(loss, Tensor::Ones(1, 1));
}

void Graph::backward(Var output, const Tensor& seed) {
  if (state_ == State::Empty) throw StateError("backward() called before any forward pass");
  if (state_ == State::Consumed) {
    throw StateError("backward() called twice without an intermediate forward pass");
  }
  if (output.graph() != this) throw GraphError("backward(): output belongs to another graph");
  const int out = output.id();
  if (seed.rows() != nodes_[out].value.rows() || seed.cols() != nodes_[out].value.cols()) {
    throw GraphError("backward(): seed shape does not match output");
  }
  for (auto& n : nodes_) {
    n.grad.resize(0, 0);
    if (n.param) n.param->grad.setZero(n.param->value.rows(), n.param->value.cols());
  }
  if (nodes_[out].requires_grad) nodes_[out].grad = seed;
  for (int i = out; i >= 0; --i) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.size() == 0) continue;
    if (n.backward) n.backward(*this, i, n.grad);
    if (n.param) n.param->grad += n.grad;
  }
  state_ = State::Consumed;
}

void Graph::reset() {
  nodes_.clear();
  inputs_.clear();
  state_ = State::Empty;
}

// ---- op helpers ---------------------------------------------------------------------------

namespace {

std::string shape(const Var& v) {
  std::ostringstream os;
  os << v.rows() << "x" << v.cols();
  return os.str();
}

Graph& graph_of(std::initializer_list<Var> vars, const char* op) {
  Graph* g = nullptr;
  for (const auto& v : vars) {
    if (!v.valid()) throw GraphError(std::string(op) + ": invalid (empty) variable");
    if (g && v.graph() != g) throw GraphError(std::string(op) + ": operands from different graphs");
    g = v.graph();
  }
  return *g;
}

[[noreturn]] void shape_error(const char* op, const Var& a, const Var& b) {
  throw GraphError(std::string(op) + ": shape mismatch " + shape(a) + " vs " + shape(b) +
                   " at node " + std::to_string(a.graph()->size()));
}

void require_same_shape(const char* op, const Var& a, const Var& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) shape_error(op, a, b);
}

template <typename F, typename D>
Var unary(const char* op, Var a, F forward, D derivative) {
  Graph& g = graph_of({a}, op);
  Tensor out = a.value().unaryExpr(forward);
  const int ia = a.id();
  return g.record(op, std::move(out), {a}, [ia, derivative](Graph& g, int self, const Tensor& go) {
    const Tensor& x = g.value(ia);
    const Tensor& y = g.value(self);
    Tensor d(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.size(); ++i) d.data()[i] = derivative(x.data()[i], y.data()[i]);
    g.accumulate_expr(ia, go.cwiseProduct(d));
  });
}

}  // namespace

// ---- elementwise / linear algebra -------------------------------------------------------------

Var matmul(Var a, Var b) {
  Graph& g = graph_of({a, b}, "matmul");
  if (a.cols() != b.rows()) shape_error("matmul", a, b);
  Tensor out = a.value() * b.value();
  const int ia = a.id(), ib = b.id();
  return g.record("matmul", std::move(out), {a, b}, [ia, ib](Graph& g, int, const Tensor& go) {
    if (g.requires_grad(ia)) g.accumulate_expr(ia, go * g.value(ib).transpose());
    if (g.requires_grad(ib)) g.accumulate_expr(ib, g.value(ia).transpose() * go);
  });
}

Var add(Var a, Var b) {
  Graph& g = graph_of({a, b}, "add");
  require_same_shape("add", a, b);
  Tensor out = a.value() + b.value();
  const int ia = a.id(), ib = b.id();
  return g.record("add", std::move(out), {a, b}, [ia, ib](Graph& g, int, const Tensor& go) {
    g.accumulate(ia, go);
    g.accumulate(ib, go);
  });
}

Var sub(Var a, Var b) {
  Graph& g = graph_of({a, b}, "sub");
  require_same_shape("sub", a, b);
  Tensor out = a.value() - b.value();
  const int ia = a.id(), ib = b.id();
  return g.record("sub", std::move(out), {a, b}, [ia, ib](Graph& g, int, const Tensor& go) {
    g.accumulate(ia, go);
    g.accumulate_expr(ib, -go);
  });
}

Var mul(Var a, Var b) {
  Graph& g = graph_of({a, b}, "mul");
  require_same_shape("mul", a, b);
  Tensor out = a.value().cwiseProduct(b.value());
  const int ia = a.id(), ib = b.id();
  return g.record("mul", std::move(out), {a, b}, [ia, ib](Graph& g, int, const Tensor& go) {
    if (g.requires_grad(ia)) g.accumulate_expr(ia, go.cwiseProduct(g.value(ib)));
    if (g.requires_grad(ib)) g.accumulate_expr(ib, go.cwiseProduct(g.value(ia)));
  });
}

Var div(Var a, Var b) {
  Graph& g = graph_of({a, b}, "div");
  require_same_shape("div", a, b);
  Tensor out = a.value().cwiseQuotient(b.value());
  const int ia = a.id(), ib = b.id();
  return g.record("div", std::move(out), {a, b}, [ia, ib](Graph& g, int self, const Tensor& go) {
    const Tensor& bv = g.value(ib);
    if (g.requires_grad(ia)) g.accumulate_expr(ia, go.cwiseQuotient(bv));
    if (g.requires_grad(ib)) {
      g.accumulate_expr(ib, -(go.cwiseProduct(g.value(self))).cwiseQuotient(bv));
    }
  });
}

Var add_row(Var a, Var row) {
  Graph& g = graph_of({a, row}, "add_row");
  if (row.rows() != 1 || row.cols() != a.cols()) shape_error("add_row", a, row);
  Tensor out = a.value().rowwise() + row.value().row(0);
  const int ia = a.id(), ir = row.id();
  return g.record("add_row", std::move(out), {a, row}, [ia, ir](Graph& g, int, const Tensor& go) {
    g.accumulate(ia, go);
    if (g.requires_grad(ir)) g.accumulate_expr(ir, go.colwise().sum());
  });
}

Var mul_row(Var a, Var row) {
  Graph& g = graph_of({a, row}, "mul_row");
  if (row.rows() != 1 || row.cols() != a.cols()) shape_error("mul_row", a, row);
  Tensor out = a.value().array().rowwise() * row.value().row(0).array();
  const int ia = a.id(), ir = row.id();
  return g.record("mul_row", std::move(out), {a, row}, [ia, ir](Graph& g, int, const Tensor& go) {
    if (g.requires_grad(ia)) {
      g.accumulate_expr(ia, (go.array().rowwise() * g.value(ir).row(0).array()).matrix());
    }
    if (g.requires_grad(ir)) {
      g.accumulate_expr(ir, go.cwiseProduct(g.value(ia)).colwise().sum());
    }
  });
}

Var mul_col(Var a, Var col) {
  Graph& g = graph_of({a, col}, "mul_col");
  if (col.cols() != 1 || col.rows() != a.rows()) shape_error("mul_col", a, col);
  Tensor out = a.value().array().colwise() * col.value().col(0).array();
  const int ia = a.id(), ic = col.id();
  return g.record("mul_col", std::move(out), {a, col}, [ia, ic](Graph& g, int, const Tensor& go) {
    if (g.requires_grad(ia)) {
      g.accumulate_expr(ia, (go.array().colwise() * g.value(ic).col(0).array()).matrix());
    }
    if (g.requires_grad(ic)) {
      g.accumulate_expr(ic, go.cwiseProduct(g.value(ia)).rowwise().sum());
    }
  });
}

Var div_col(Var a, Var col) {
  Graph& g = graph_of({a, col}, "div_col");
  if (col.cols() != 1 || col.rows() != a.rows()) shape_error("div_col", a, col);
  Tensor out = a.value().array().colwise() / col.value().col(0).array();
  const int ia = a.id(), ic = col.id();
  return g.record("div_col", std::move(out), {a, col}, [ia, ic](Graph& g, int self, const Tensor& go) {
    const auto c = g.value(ic).col(0).array();
    if (g.requires_grad(ia)) g.accumulate_expr(ia, (go.array().colwise() / c).matrix());
    if (g.requires_grad(ic)) {
      Tensor t = -(go.cwiseProduct(g.value(self))).rowwise().sum();
      t.array().col(0) /= c;
      g.accumulate(ic, t);
    }
  });
}

Var scale(Var a, double s) {
  Graph& g = graph_of({a}, "scale");
  Tensor out = a.value() * s;
  const int ia = a.id();
  return g.record("scale", std::move(out), {a},
                  [ia, s](Graph& g, int, const Tensor& go) { g.accumulate_expr(ia, go * s); });
}

Var add_scalar(Var a, double s) {
  Graph& g = graph_of({a}, "add_scalar");
  Tensor out = a.value().array() + s;
  const int ia = a.id();
  return g.record("add_scalar", std::move(out), {a},
                  [ia](Graph& g, int, const Tensor& go) { g.accumulate(ia, go); });
}

Var neg(Var a) { return scale(a, -1.0); }

Var leaky_relu(Var a, double slope) {
  return unary(
      "leaky_relu", a, [slope](double x) { return x > 0.0 ? x : slope * x; },
      [slope](double x, double) { return x > 0.0 ? 1.0 : slope; });
}

Var tanh(Var a) {
  return unary(
      "tanh", a, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(Var a) {
  return unary(
      "sigmoid", a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
      [](double, double y) { return y * (1.0 - y); });
}

Var softplus(Var a) {
  return unary(
      "softplus", a,
      [](double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); },
      [](double x, double) { return 1.0 / (1.0 + std::exp(-x)); });
}

Var exp(Var a) {
  return unary(
      "exp", a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var sqrt(Var a) {
  return unary(
      "sqrt", a, [](double x) { return std::sqrt(x); },
      [](double, double y) { return y > 0.0 ? 0.5 / y : 0.0; });
}

Var square(Var a) {
  return unary(
      "square", a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Var abs(Var a) {
  return unary(
      "abs", a, [](double x) { return std::abs(x); },
      [](double x, double) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

// ---- reductions -----------------------------------------------------------------------------------

Var sum(Var a) {
  Graph& g = graph_of({a}, "sum");
  Tensor out(1, 1);
  out(0, 0) = a.value().sum();
  const int ia = a.id();
  const auto r = a.rows(), c = a.cols();
  return g.record("sum", std::move(out), {a}, [ia, r, c](Graph& g, int, const Tensor& go) {
    g.accumulate_expr(ia, Tensor::Constant(r, c, go(0, 0)));
  });
}

Var mean(Var a) {
  if (a.value().size() == 0) throw GraphError("mean of an empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.value().size()));
}

Var row_sum(Var a) {
  Graph& g = graph_of({a}, "row_sum");
  Tensor out = a.value().rowwise().sum();
  const int ia = a.id();
  const auto c = a.cols();
  return g.record("row_sum", std::move(out), {a}, [ia, c](Graph& g, int, const Tensor& go) {
    g.accumulate_expr(ia, go.replicate(1, c));
  });
}

Var row_norm(Var a) {
  Graph& g = graph_of({a}, "row_norm");
  Tensor out = a.value().rowwise().norm();
  const int ia = a.id();
  return g.record("row_norm", std::move(out), {a}, [ia](Graph& g, int self, const Tensor& go) {
    const Tensor& x = g.value(ia);
    const Tensor& n = g.value(self);
    Tensor d(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double s = n(i, 0) > 0.0 ? go(i, 0) / n(i, 0) : 0.0;
      d.row(i) = x.row(i) * s;
    }
    g.accumulate(ia, d);
  });
}

// ---- structure ---------------------------------------------------------------------------------------

Var reshape(Var a, Eigen::Index rows, Eigen::Index cols) {
  Graph& g = graph_of({a}, "reshape");
  if (rows * cols != a.value().size()) {
    throw GraphError("reshape: cannot view " + shape(a) + " as " + std::to_string(rows) + "x" +
                     std::to_string(cols));
  }
  Tensor out = Eigen::Map<const Tensor>(a.value().data(), rows, cols);
  const int ia = a.id();
  const auto r = a.rows(), c = a.cols();
  return g.record("reshape", std::move(out), {a}, [ia, r, c](Graph& g, int, const Tensor& go) {
    g.accumulate_expr(ia, Eigen::Map<const Tensor>(go.data(), r, c));
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw GraphError("concat_cols: no inputs");
  Graph& g = *parts[0].graph();
  Eigen::Index total = 0;
  for (const auto& p : parts) {
    if (p.graph() != &g) throw GraphError("concat_cols: operands from different graphs");
    if (p.rows() != parts[0].rows()) shape_error("concat_cols", parts[0], p);
    total += p.cols();
  }
  Tensor out(parts[0].rows(), total);
  std::vector<std::pair<int, Eigen::Index>> spans;
  Eigen::Index off = 0;
  for (const auto& p : parts) {
    out.middleCols(off, p.cols()) = p.value();
    spans.emplace_back(p.id(), off);
    off += p.cols();
  }
  return g.record("concat_cols", std::move(out), parts, [spans](Graph& g, int, const Tensor& go) {
    for (const auto& [id, start] : spans) {
      if (g.requires_grad(id)) g.accumulate_expr(id, go.middleCols(start, g.value(id).cols()));
    }
  });
}

Var concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw GraphError("concat_rows: no inputs");
  Graph& g = *parts[0].graph();
  Eigen::Index total = 0;
  for (const auto& p : parts) {
    if (p.graph() != &g) throw GraphError("concat_rows: operands from different graphs");
    if (p.cols() != parts[0].cols()) shape_error("concat_rows", parts[0], p);
    total += p.rows();
  }
  Tensor out(total, parts[0].cols());
  std::vector<std::pair<int, Eigen::Index>> spans;
  Eigen::Index off = 0;
  for (const auto& p : parts) {
    out.middleRows(off, p.rows()) = p.value();
    spans.emplace_back(p.id(), off);
    off += p.rows();
  }
  return g.record("concat_rows", std::move(out), parts, [spans](Graph& g, int, const Tensor& go) {
    for (const auto& [id, start] : spans) {
      if (g.requires_grad(id)) g.accumulate_expr(id, go.middleRows(start, g.value(id).rows()));
    }
  });
}

Var slice_cols(Var a, Eigen::Index start, Eigen::Index count) {
  Graph& g = graph_of({a}, "slice_cols");
  if (start < 0 || count < 0 || start + count > a.cols()) {
    throw GraphError("slice_cols: range out of bounds for " + shape(a));
  }
  Tensor out = a.value().middleCols(start, count);
  const int ia = a.id();
  const auto r = a.rows(), c = a.cols();
  return g.record("slice_cols", std::move(out), {a},
                  [ia, r, c, start, count](Graph& g, int, const Tensor& go) {
                    Tensor d = Tensor::Zero(r, c);
                    d.middleCols(start, count) = go;
                    g.accumulate(ia, d);
                  });
}

Var slice_rows(Var a, Eigen::Index start, Eigen::Index count) {
  Graph& g = graph_of({a}, "slice_rows");
  if (start < 0 || count < 0 || start + count > a.rows()) {
    throw GraphError("slice_rows: range out of bounds for " + shape(a));
  }
  Tensor out = a.value().middleRows(start, count);
  const int ia = a.id();
  const auto r = a.rows(), c = a.cols();
  return g.record("slice_rows", std::move(out), {a},
                  [ia, r, c, start, count](Graph& g, int, const Tensor& go) {
                    Tensor d = Tensor::Zero(r, c);
                    d.middleRows(start, count) = go;
                    g.accumulate(ia, d);
                  });
}

Var gather_cols(Var a, const std::vector<int>& columns) {
  Graph& g = graph_of({a}, "gather_cols");
  Tensor out(a.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t k = 0; k < columns.size(); ++k) {
    if (columns[k] < 0 || columns[k] >= a.cols()) throw GraphError("gather_cols: index out of range");
    out.col(static_cast<Eigen::Index>(k)) = a.value().col(columns[k]);
  }
  const int ia = a.id();
  const auto r = a.rows(), c = a.cols();
  return g.record("gather_cols", std::move(out), {a},
                  [ia, r, c, columns](Graph& g, int, const Tensor& go) {
                    Tensor d = Tensor::Zero(r, c);
                    for (std::size_t k = 0; k < columns.size(); ++k) {
                      d.col(columns[k]) += go.col(static_cast<Eigen::Index>(k));
                    }
                    g.accumulate(ia, d);
                  });
}

Var gather_rows(Var a, const std::vector<int>& rows) {
  Graph& g = graph_of({a}, "gather_rows");
  Tensor out(static_cast<Eigen::Index>(rows.size()), a.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] < 0 || rows[k] >= a.rows()) throw GraphError("gather_rows: index out of range");
    out.row(static_cast<Eigen::Index>(k)) = a.value().row(rows[k]);
  }
  const int ia = a.id();
  const auto r = a.rows(), c = a.cols();
  return g.record("gather_rows", std::move(out), {a},
                  [ia, r, c, rows](Graph& g, int, const Tensor& go) {
                    Tensor d = Tensor::Zero(r, c);
                    for (std::size_t k = 0; k < rows.size(); ++k) {
                      d.row(rows[k]) += go.row(static_cast<Eigen::Index>(k));
                    }
                    g.accumulate(ia, d);
                  });
}

Var repeat_rows(Var a, int times) {
  Graph& g = graph_of({a}, "repeat_rows");
  if (times < 1) throw GraphError("repeat_rows: times must be >= 1");
  const auto r = a.rows(), c = a.cols();
  Tensor out(r * times, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (int k = 0; k < times; ++k) out.row(i * times + k) = a.value().row(i);
  }
  const int ia = a.id();
  return g.record("repeat_rows", std::move(out), {a}, [ia, r, c, times](Graph& g, int, const Tensor& go) {
    Tensor d = Tensor::Zero(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
      for (int k = 0; k < times; ++k) d.row(i) += go.row(i * times + k);
    }
    g.accumulate(ia, d);
  });
}

Var tile_cols(Var a, int times) {
  Graph& g = graph_of({a}, "tile_cols");
  if (times < 1) throw GraphError("tile_cols: times must be >= 1");
  const auto r = a.rows(), c = a.cols();
  Tensor out = a.value().replicate(1, times);
  const int ia = a.id();
  return g.record("tile_cols", std::move(out), {a}, [ia, r, c, times](Graph& g, int, const Tensor& go) {
    Tensor d = Tensor::Zero(r, c);
    for (int k = 0; k < times; ++k) d += go.middleCols(k * c, c);
    g.accumulate(ia, d);
  });
}

Var detach(Var a) {
  Graph& g = graph_of({a}, "detach");
  return g.constant(a.value());
}

// ---- grad check ----------------------------------------------------------------------------------------

GradCheckReport grad_check(ParameterSet& params, const std::function<Var(Graph&)>& loss_fn,
                           double tolerance, int probes, double step, std::uint64_t seed,
                           double abs_floor) {
  GradCheckReport report;
  auto list = params.list();
  if (list.empty()) {
    report.passed = true;
    return report;
  }
  for (auto* p : list) p->grad.setZero(p->value.rows(), p->value.cols());
  {
    Graph g;
    Var loss = loss_fn(g);
    g.backward(loss);
  }
  std::vector<Tensor> analytic;
  analytic.reserve(list.size());
  for (auto* p : list) analytic.push_back(p->grad);

  auto evaluate = [&]() {
    Graph g;
    return loss_fn(g).scalar();
  };

  Rng rng(seed);
  const auto total_scalars = static_cast<double>(params.num_scalars());
  const int count = std::max<int>(probes, static_cast<int>(list.size()));
  for (int k = 0; k < count; ++k) {
    std::size_t pi = 0;
    if (k < static_cast<int>(list.size())) {
      pi = static_cast<std::size_t>(k);
    } else {
      // Pick a parameter proportionally to its size.
      double u = rng.uniform() * total_scalars;
      for (pi = 0; pi + 1 < list.size(); ++pi) {
        u -= static_cast<double>(list[pi]->value.size());
        if (u < 0) break;
      }
    }
    Parameter& p = *list[pi];
    if (p.value.size() == 0) continue;
    const int idx = rng.uniform_int(0, static_cast<int>(p.value.size()) - 1);
    double& x = p.value.data()[idx];
    const double orig = x;
    x = orig + step;
    const double fp = evaluate();
    x = orig - step;
    const double fm = evaluate();
    x = orig;
    const double numeric = (fp - fm) / (2.0 * step);
    const double a = analytic[pi].data()[idx];
    const double abs_err = std::abs(a - numeric);
    const double rel = abs_err / std::max({std::abs(a), std::abs(numeric), abs_floor});
    ++report.probes;
    report.max_abs_error = std::max(report.max_abs_error, abs_err);
    if (report.worst.empty() || rel > report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst = p.name + "[" + std::to_string(idx) + "]";
    }
  }
  report.passed = report.max_rel_error < tolerance;
  return report;
}

}  // namespace motionadapt::ad
