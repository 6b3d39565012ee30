#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "divita/random.hpp"

namespace divita::tensor {

// Dense row-major float64 array of rank 1..3. Graph operations work on
// rank-2 values; vectors are 1 x n.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  Tensor(std::vector<std::size_t> shape, std::vector<double> values);

  static Tensor matrix(std::size_t rows, std::size_t cols, double fill = 0.0) {
    return Tensor({rows, cols}, fill);
  }
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
    return Tensor({rows, cols}, std::move(values));
  }
  static Tensor row(std::span<const double> values);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t rows() const { return shape_.empty() ? 0 : (rank() == 1 ? 1 : shape_[0]); }
  std::size_t cols() const { return shape_.empty() ? 0 : shape_.back(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols() + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols() + j]; }
  double& operator[](std::size_t k) { return data_[k]; }
  double operator[](std::size_t k) const { return data_[k]; }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  void fill(double v);

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
};

// Named parameters in insertion order; the order is part of the checkpoint.
class ParamStore {
 public:
  Parameter& add(const std::string& name, Tensor init);
  std::size_t index_of(const std::string& name) const;
  Parameter& at(const std::string& name) { return params_[index_of(name)]; }
  const Parameter& at(const std::string& name) const { return params_[index_of(name)]; }
  Parameter& at(std::size_t index) { return params_[index]; }
  const Parameter& at(std::size_t index) const { return params_[index]; }
  bool contains(const std::string& name) const;

  std::vector<Parameter>& items() { return params_; }
  const std::vector<Parameter>& items() const { return params_; }
  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;

  void zero_grad();

  friend bool operator==(const ParamStore& a, const ParamStore& b);

 private:
  std::vector<Parameter> params_;
};

class Graph;

// Handle to a node of a Graph; cheap to copy, valid for the graph's lifetime.
struct Var {
  Graph* graph = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  const Tensor& grad() const;
};

// Append-only reverse-mode tape. Nodes are created in topological order, so
// backward is one sweep in reverse creation order.
class Graph {
 public:
  explicit Graph(bool record_gradients = true) : record_(record_gradients) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  // Leaf bound to store.at(name); backward() adds into Parameter::grad.
  // Repeated requests for the same parameter return the same node.
  Var param(ParamStore& store, const std::string& name);
  // Read-only binding; only valid on a graph that does not record.
  Var param(const ParamStore& store, const std::string& name);

  const Tensor& value(Var v) const { return nodes_[v.id].value; }
  const Tensor& grad(Var v) const { return nodes_[v.id].grad; }
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }
  bool recording() const { return record_; }
  std::size_t size() const { return nodes_.size(); }

  // Root must be 1 x 1. Node gradients are recomputed on every call while
  // parameter gradients accumulate until ParamStore::zero_grad().
  void backward(Var root);

  using BackwardFn = std::function<void(Graph&, std::size_t)>;
  // Used by operation implementations.
  Var emit(Tensor value, std::initializer_list<Var> inputs, BackwardFn fn);
  Var emit(Tensor value, const std::vector<Var>& inputs, BackwardFn fn);
  Tensor& node_grad(std::size_t id) { return nodes_[id].grad; }
  const Tensor& node_value(std::size_t id) const { return nodes_[id].value; }
  bool node_requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    bool requires_grad = false;
    ParamStore* store = nullptr;
    std::size_t param_index = 0;
  };
  Var bind(const ParamStore& store, ParamStore* mutable_store, const std::string& name);

  std::vector<Node> nodes_;
  std::map<std::pair<const ParamStore*, std::size_t>, std::size_t> bound_;
  bool record_;
};

Var matmul(Var a, Var b);
// b may match a's shape or be 1 x cols(a) (broadcast over rows).
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
Var concat(const std::vector<Var>& parts, int axis);
Var slice(Var a, int axis, std::size_t begin, std::size_t end);
Var transpose(Var a);
Var softmax(Var a, int axis);
// Normalizes to zero mean / unit variance along `axis`, no affine part.
Var normalize(Var a, int axis, double eps);
// normalize along columns then gamma * x + beta, gamma/beta 1 x cols.
Var layer_norm(Var x, Var gamma, Var beta, double eps = 1e-5);
Var relu(Var a);
Var sigmoid(Var a);
Var tanh(Var a);
// axis 0: 1 x cols, axis 1: rows x 1.
Var mean(Var a, int axis);
Var sum(Var a);
// Inverted dropout; identity when rate == 0 or the graph does not record.
Var dropout(Var a, double rate, Rng& rng);
// Mean binary cross entropy of probabilities `p` against 0/1 `targets`,
// with p clamped to [kProbClamp, 1 - kProbClamp] before the logs.
inline constexpr double kProbClamp = 1e-7;
Var binary_cross_entropy(Var p, const Tensor& targets);

// Fixed sinusoidal table (rows = positions, cols = width), original
// Transformer layout: sin on even columns, cos on odd.
Tensor sinusoidal_positions(std::size_t positions, std::size_t width);

}  // namespace divita::tensor
