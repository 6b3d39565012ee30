#include "divita/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "divita/error.hpp"

namespace divita::tensor {

namespace {

std::size_t product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_str(const Tensor& t) {
  std::string s = "[";
  for (std::size_t i = 0; i < t.rank(); ++i) s += (i ? "x" : "") + std::to_string(t.shape()[i]);
  return s + "]";
}

void require_matrix(const Tensor& t, const char* op) {
  if (t.rank() != 2) fail(ErrorKind::dimension, std::string(op) + ": expected a matrix, got " + shape_str(t));
}

void check_axis(int axis, const char* op) {
  if (axis != 0 && axis != 1) fail(ErrorKind::argument, std::string(op) + ": axis must be 0 or 1");
}

// Row broadcast: b has the shape of a, or is 1 x cols(a).
bool broadcast_rows(const Tensor& a, const Tensor& b, const char* op) {
  require_matrix(a, op);
  require_matrix(b, op);
  if (a.same_shape(b)) return false;
  if (b.rows() == 1 && b.cols() == a.cols()) return true;
  fail(ErrorKind::dimension, std::string(op) + ": shapes " + shape_str(a) + " and " + shape_str(b) +
                                 " are not compatible");
}

Graph& graph_of(Var a) {
  if (!a.graph) fail(ErrorKind::argument, "variable is not attached to a graph");
  return *a.graph;
}

}  // namespace

// ---------------------------------------------------------------------------
// Tensor / ParamStore

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(product(shape_), fill) {
  if (shape_.empty() || shape_.size() > 3) fail(ErrorKind::dimension, "tensor rank must be 1..3");
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  if (shape_.empty() || shape_.size() > 3) fail(ErrorKind::dimension, "tensor rank must be 1..3");
  if (data_.size() != product(shape_)) fail(ErrorKind::dimension, "payload length does not match shape");
}

Tensor Tensor::row(std::span<const double> values) {
  return Tensor({1, values.size()}, std::vector<double>(values.begin(), values.end()));
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Parameter& ParamStore::add(const std::string& name, Tensor init) {
  if (contains(name)) fail(ErrorKind::argument, "duplicate parameter '" + name + "'");
  Tensor grad(init.shape(), 0.0);
  params_.push_back({name, std::move(init), std::move(grad)});
  return params_.back();
}

std::size_t ParamStore::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < params_.size(); ++i)
    if (params_[i].name == name) return i;
  fail(ErrorKind::argument, "no parameter named '" + name + "'");
}

bool ParamStore::contains(const std::string& name) const {
  return std::any_of(params_.begin(), params_.end(), [&](const Parameter& p) { return p.name == name; });
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& p : params_) p.grad.fill(0.0);
}

bool operator==(const ParamStore& a, const ParamStore& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.params_[i].name != b.params_[i].name || a.params_[i].value != b.params_[i].value) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Graph

const Tensor& Var::value() const { return graph->value(*this); }
const Tensor& Var::grad() const { return graph->grad(*this); }

Var Graph::constant(Tensor value) {
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return {this, nodes_.size() - 1};
}

Var Graph::param(ParamStore& store, const std::string& name) { return bind(store, &store, name); }

Var Graph::param(const ParamStore& store, const std::string& name) {
  if (record_) fail(ErrorKind::argument, "a recording graph needs a mutable parameter store");
  return bind(store, nullptr, name);
}

Var Graph::bind(const ParamStore& store, ParamStore* mutable_store, const std::string& name) {
  const auto idx = store.index_of(name);
  auto key = std::make_pair(&store, idx);
  if (auto it = bound_.find(key); it != bound_.end()) return {this, it->second};
  Node node;
  node.value = store.at(idx).value;
  node.requires_grad = record_ && mutable_store != nullptr;
  node.store = node.requires_grad ? mutable_store : nullptr;
  node.param_index = idx;
  nodes_.push_back(std::move(node));
  bound_.emplace(key, nodes_.size() - 1);
  return {this, nodes_.size() - 1};
}

Var Graph::emit(Tensor value, std::initializer_list<Var> inputs, BackwardFn fn) {
  return emit(std::move(value), std::vector<Var>(inputs), std::move(fn));
}

Var Graph::emit(Tensor value, const std::vector<Var>& inputs, BackwardFn fn) {
  Node node;
  node.value = std::move(value);
  for (const auto& v : inputs) {
    if (v.graph != this) fail(ErrorKind::argument, "operands belong to different graphs");
    node.inputs.push_back(v.id);
    node.requires_grad = node.requires_grad || nodes_[v.id].requires_grad;
  }
  if (node.requires_grad) node.backward = std::move(fn);
  nodes_.push_back(std::move(node));
  return {this, nodes_.size() - 1};
}

void Graph::backward(Var root) {
  if (root.graph != this) fail(ErrorKind::argument, "root belongs to another graph");
  const auto& rv = nodes_[root.id].value;
  if (rv.size() != 1) fail(ErrorKind::argument, "backward root must be a scalar, got " + shape_str(rv));
  for (std::size_t i = 0; i <= root.id; ++i) {
    auto& n = nodes_[i];
    if (n.requires_grad) {
      if (n.grad.same_shape(n.value))
        n.grad.fill(0.0);
      else
        n.grad = Tensor(n.value.shape(), 0.0);
    }
  }
  if (!nodes_[root.id].requires_grad) return;
  nodes_[root.id].grad[0] = 1.0;
  for (std::size_t i = root.id + 1; i-- > 0;) {
    auto& n = nodes_[i];
    if (!n.requires_grad) continue;
    if (n.backward) n.backward(*this, i);
    if (n.store) {
      auto& g = n.store->at(n.param_index).grad;
      for (std::size_t k = 0; k < g.size(); ++k) g[k] += n.grad[k];
    }
  }
}

// ---------------------------------------------------------------------------
// Operations. Each backward adds into the grads of inputs that need them.

Var matmul(Var a, Var b) {
  auto& g = graph_of(a);
  const auto& A = a.value();
  const auto& B = b.value();
  require_matrix(A, "matmul");
  require_matrix(B, "matmul");
  const std::size_t m = A.rows(), k = A.cols(), n = B.cols();
  if (B.rows() != k) fail(ErrorKind::dimension, "matmul: " + shape_str(A) + " x " + shape_str(B));
  Tensor C = Tensor::matrix(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    double* c = C.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = A(i, p);
      if (av == 0.0) continue;
      const double* brow = B.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) c[j] += av * brow[j];
    }
  }
  return g.emit(std::move(C), {a, b}, [ia = a.id, ib = b.id, m, k, n](Graph& gr, std::size_t self) {
    const auto& G = gr.node_grad(self);
    const auto& Av = gr.node_value(ia);
    const auto& Bv = gr.node_value(ib);
    if (gr.node_requires_grad(ia)) {
      auto& dA = gr.node_grad(ia);
      for (std::size_t i = 0; i < m; ++i) {
        const double* grow = G.data() + i * n;
        for (std::size_t p = 0; p < k; ++p) {
          const double* brow = Bv.data() + p * n;
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
          dA(i, p) += acc;
        }
      }
    }
    if (gr.node_requires_grad(ib)) {
      auto& dB = gr.node_grad(ib);
      for (std::size_t i = 0; i < m; ++i) {
        const double* grow = G.data() + i * n;
        for (std::size_t p = 0; p < k; ++p) {
          const double av = Av(i, p);
          if (av == 0.0) continue;
          double* drow = dB.data() + p * n;
          for (std::size_t j = 0; j < n; ++j) drow[j] += av * grow[j];
        }
      }
    }
  });
}

namespace {

Var add_impl(Var a, Var b, double sign, const char* op) {
  auto& g = graph_of(a);
  const auto& A = a.value();
  const auto& B = b.value();
  const bool bc = broadcast_rows(A, B, op);
  Tensor C = A;
  const std::size_t cols = A.cols();
  for (std::size_t k = 0; k < C.size(); ++k) C[k] += sign * B[bc ? k % cols : k];
  return g.emit(std::move(C), {a, b}, [ia = a.id, ib = b.id, bc, cols, sign](Graph& gr, std::size_t self) {
    const auto& G = gr.node_grad(self);
    if (gr.node_requires_grad(ia)) {
      auto& dA = gr.node_grad(ia);
      for (std::size_t k = 0; k < G.size(); ++k) dA[k] += G[k];
    }
    if (gr.node_requires_grad(ib)) {
      auto& dB = gr.node_grad(ib);
      for (std::size_t k = 0; k < G.size(); ++k) dB[bc ? k % cols : k] += sign * G[k];
    }
  });
}

}  // namespace

Var add(Var a, Var b) { return add_impl(a, b, 1.0, "add"); }
Var sub(Var a, Var b) { return add_impl(a, b, -1.0, "sub"); }

Var mul(Var a, Var b) {
  auto& g = graph_of(a);
  const auto& A = a.value();
  const auto& B = b.value();
  const bool bc = broadcast_rows(A, B, "mul");
  const std::size_t cols = A.cols();
  Tensor C = A;
  for (std::size_t k = 0; k < C.size(); ++k) C[k] *= B[bc ? k % cols : k];
  return g.emit(std::move(C), {a, b}, [ia = a.id, ib = b.id, bc, cols](Graph& gr, std::size_t self) {
    const auto& G = gr.node_grad(self);
    const auto& Av = gr.node_value(ia);
    const auto& Bv = gr.node_value(ib);
    if (gr.node_requires_grad(ia)) {
      auto& dA = gr.node_grad(ia);
      for (std::size_t k = 0; k < G.size(); ++k) dA[k] += G[k] * Bv[bc ? k % cols : k];
    }
    if (gr.node_requires_grad(ib)) {
      auto& dB = gr.node_grad(ib);
      for (std::size_t k = 0; k < G.size(); ++k) dB[bc ? k % cols : k] += G[k] * Av[k];
    }
  });
}

Var scale(Var a, double s) {
  auto& g = graph_of(a);
  Tensor C = a.value();
  for (auto& v : C.values()) v *= s;
  return g.emit(std::move(C), {a}, [ia = a.id, s](Graph& gr, std::size_t self) {
    const auto& G = gr.node_grad(self);
    auto& dA = gr.node_grad(ia);
    for (std::size_t k = 0; k < G.size(); ++k) dA[k] += s * G[k];
  });
}

Var add_scalar(Var a, double s) {
  auto& g = graph_of(a);
  Tensor C = a.value();
  for (auto& v : C.values()) v += s;
  return g.emit(std::move(C), {a}, [ia = a.id](Graph& gr, std::size_t self) {
    const auto& G = gr.node_grad(self);
    auto& dA = gr.node_grad(ia);
    for (std::size_t k = 0; k < G.size(); ++k) dA[k] += G[k];
  });
}

Var concat(const std::vector<Var>& parts, int axis) {
  check_axis(axis, "concat");
  if (parts.empty()) fail(ErrorKind::argument, "concat: no operands");
  auto& g = graph_of(parts[0]);
  std::size_t rows = 0, cols = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto& t = parts[i].value();
    require_matrix(t, "concat");
    if (axis == 0) {
      if (i > 0 && t.cols() != cols) fail(ErrorKind::dimension, "concat: column counts differ");
      cols = t.cols();
      rows += t.rows();
    } else {
      if (i > 0 && t.rows() != rows) fail(ErrorKind::dimension, "concat: row counts differ");
      rows = t.rows();
      cols += t.cols();
    }
  }
  Tensor C = Tensor::matrix(rows, cols);
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const auto& v : parts) {
    const auto& t = v.value();
    offsets.push_back(off);
    for (std::size_t i = 0; i < t.rows(); ++i)
      for (std::size_t j = 0; j < t.cols(); ++j) {
        if (axis == 0)
          C(off + i, j) = t(i, j);
        else
          C(i, off + j) = t(i, j);
      }
    off += axis == 0 ? t.rows() : t.cols();
  }
  std::vector<std::size_t> ids;
  for (const auto& v : parts) ids.push_back(v.id);
  return g.emit(std::move(C), parts, [ids, offsets, axis](Graph& gr, std::size_t self) {
    const auto& G = gr.node_grad(self);
    for (std::size_t p = 0; p < ids.size(); ++p) {
      if (!gr.node_requires_grad(ids[p])) continue;
      auto& dT = gr.node_grad(ids[p]);
      for (std::size_t i = 0; i < dT.rows(); ++i)
        for (std::size_t j = 0; j < dT.cols(); ++j)
          dT(i, j) += axis == 0 ? G(offsets[p] + i, j) : G(i, offsets[p] + j);
    }
  });
}

Var slice(Var a, int axis, std::size_t begin, std::size_t end) {
  check_axis(axis, "slice");
  auto& g = graph_of(a);
  const auto& A = a.value();
  require_matrix(A, "slice");
  const std::size_t extent = axis == 0 ? A.rows() : A.cols();
  if (begin >= end || end > extent) fail(ErrorKind::dimension, "slice: range out of bounds");
  const std::size_t rows = axis == 0 ? end - begin : A.rows();
  const std::size_t cols = axis == 1 ? end - begin : A.cols();
  Tensor C = Tensor::matrix(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      C(i, j) = axis == 0 ? A(begin + i, j) : A(i, begin + j);
  return g.emit(std::move(C), {a}, [ia = a.id, axis, begin](Graph& gr, std::size_t self) {
    const auto& G = gr.node_grad(self);
    auto& dA = gr.node_grad(ia);
    for (std::size_t i = 0; i < G.rows(); ++i)
      for (std::size_t j = 0; j < G.cols(); ++j) {
        if (axis == 0)
          dA(begin + i, j) += G(i, j);
        else
          dA(i, begin + j) += G(i, j);
      }
  });
}

Var transpose(Var a) {
  auto& g = graph_of(a);
  const auto& A = a.value();
  require_matrix(A, "transpose");
  Tensor C = Tensor::matrix(A.cols(), A.rows());
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t j = 0; j < A.cols(); ++j) C(j, i) = A(i, j);
  return g.emit(std::move(C), {a}, [ia = a.id](Graph& gr, std::size_t self) {
    const auto& G = gr.node_grad(self);
    auto& dA = gr.node_grad(ia);
    for (std::size_t i = 0; i < dA.rows(); ++i)
      for (std::size_t j = 0; j < dA.cols(); ++j) dA(i, j) += G(j, i);
  });
}

namespace {

// Visits each 1-D lane along `axis` as (start offset, stride, length).
template <typename Fn>
void for_each_lane(const Tensor& t, int axis, Fn&& fn) {
  if (axis == 1) {
    for (std::size_t i = 0; i < t.rows(); ++i) fn(i * t.cols(), std::size_t{1}, t.cols());
  } else {
    for (std::size_t j = 0; j < t.cols(); ++j) fn(j, t.cols(), t.rows());
  }
}

}  // namespace

Var softmax(Var a, int axis) {
  check_axis(axis, "softmax");
  auto& g = graph_of(a);
  const auto& A = a.value();
  require_matrix(A, "softmax");
  if ((axis == 1 ? A.cols() : A.rows()) == 0) fail(ErrorKind::argument, "softmax over an empty axis");
  Tensor Y = A;
  for_each_lane(Y, axis, [&](std::size_t off, std::size_t stride, std::size_t len) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < len; ++t) mx = std::max(mx, Y[off + t * stride]);
    double z = 0.0;
    for (std::size_t t = 0; t < len; ++t) {
      auto& v = Y[off + t * stride];
      v = std::exp(v - mx);
      z += v;
    }
    for (std::size_t t = 0; t < len; ++t) Y[off + t * stride] /= z;
  });
  return g.emit(std::move(Y), {a}, [ia = a.id, axis](Graph& gr, std::size_t self) {
    const auto& G = gr.node_grad(self);
    const auto& Yv = gr.node_value(self);
    auto& dA = gr.node_grad(ia);
    for_each_lane(Yv, axis, [&](std::size_t off, std::size_t stride, std::size_t len) {
      double dot = 0.0;
      for (std::size_t t = 0; t < len; ++t) dot += G[off + t * stride] * Yv[off + t * stride];
      for (std::size_t t = 0; t < len; ++t) {
        const auto k = off + t * stride;
        dA[k] += Yv[k] * (G[k] - dot);
      }
    });
  });
}

Var normalize(Var a, int axis, double eps) {
  check_axis(axis, "normalize");
  auto& g = graph_of(a);
  const auto& A = a.value();
  require_matrix(A, "normalize");
  if ((axis == 1 ? A.cols() : A.rows()) == 0) fail(ErrorKind::argument, "layer_norm over an empty axis");
  if (!(eps >= 0.0)) fail(ErrorKind::argument, "layer_norm eps must be non-negative");
  Tensor Y = A;
  std::vector<double> inv_std;
  for_each_lane(Y, axis, [&](std::size_t off, std::size_t stride, std::size_t len) {
    double mu = 0.0;
    for (std::size_t t = 0; t < len; ++t) mu += Y[off + t * stride];
    mu /= static_cast<double>(len);
    double var = 0.0;
    for (std::size_t t = 0; t < len; ++t) {
      const double d = Y[off + t * stride] - mu;
      var += d * d;
    }
    var /= static_cast<double>(len);
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std.push_back(is);
    for (std::size_t t = 0; t < len; ++t) {
      auto& v = Y[off + t * stride];
      v = (v - mu) * is;
    }
  });
  return g.emit(std::move(Y), {a}, [ia = a.id, axis, inv_std](Graph& gr, std::size_t self) {
    const auto& G = gr.node_grad(self);
    const auto& Yv = gr.node_value(self);
    auto& dA = gr.node_grad(ia);
    std::size_t lane = 0;
    for_each_lane(Yv, axis, [&](std::size_t off, std::size_t stride, std::size_t len) {
      double gm = 0.0, gy = 0.0;
      for (std::size_t t = 0; t < len; ++t) {
        const auto k = off + t * stride;
        gm += G[k];
        gy += G[k] * Yv[k];
      }
      gm /= static_cast<double>(len);
      gy /= static_cast<double>(len);
      const double is = inv_std[lane++];
      for (std::size_t t = 0; t < len; ++t) {
        const auto k = off + t * stride;
        dA[k] += is * (G[k] - gm - Yv[k] * gy);
      }
    });
  });
}

Var layer_norm(Var x, Var gamma, Var beta, double eps) {
  return add(mul(normalize(x, 1, eps), gamma), beta);
}

namespace {

template <typename Fwd, typename Deriv>
Var unary(Var a, Fwd fwd, Deriv deriv) {
  auto& g = graph_of(a);
  Tensor Y = a.value();
  for (auto& v : Y.values()) v = fwd(v);
  return g.emit(std::move(Y), {a}, [ia = a.id, deriv](Graph& gr, std::size_t self) {
    const auto& G = gr.node_grad(self);
    const auto& X = gr.node_value(ia);
    const auto& Yv = gr.node_value(self);
    auto& dA = gr.node_grad(ia);
    for (std::size_t k = 0; k < G.size(); ++k) dA[k] += G[k] * deriv(X[k], Yv[k]);
  });
}

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Var relu(Var a) {
  return unary(a, [](double x) { return x > 0.0 ? x : 0.0; },
               [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var sigmoid(Var a) {
  return unary(a, stable_sigmoid, [](double, double y) { return y * (1.0 - y); });
}

Var tanh(Var a) {
  return unary(a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var mean(Var a, int axis) {
  check_axis(axis, "mean");
  auto& g = graph_of(a);
  const auto& A = a.value();
  require_matrix(A, "mean");
  const std::size_t len = axis == 0 ? A.rows() : A.cols();
  if (len == 0) fail(ErrorKind::argument, "mean over an empty axis");
  Tensor Y = axis == 0 ? Tensor::matrix(1, A.cols()) : Tensor::matrix(A.rows(), 1);
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t j = 0; j < A.cols(); ++j) Y[axis == 0 ? j : i] += A(i, j);
  for (auto& v : Y.values()) v /= static_cast<double>(len);
  return g.emit(std::move(Y), {a}, [ia = a.id, axis, len](Graph& gr, std::size_t self) {
    const auto& G = gr.node_grad(self);
    auto& dA = gr.node_grad(ia);
    const double inv = 1.0 / static_cast<double>(len);
    for (std::size_t i = 0; i < dA.rows(); ++i)
      for (std::size_t j = 0; j < dA.cols(); ++j) dA(i, j) += inv * G[axis == 0 ? j : i];
  });
}

Var sum(Var a) {
  auto& g = graph_of(a);
  double s = 0.0;
  for (double v : a.value().values()) s += v;
  return g.emit(Tensor::matrix(1, 1, s), {a}, [ia = a.id](Graph& gr, std::size_t self) {
    const double G = gr.node_grad(self)[0];
    auto& dA = gr.node_grad(ia);
    for (auto& v : dA.values()) v += G;
  });
}

Var dropout(Var a, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) fail(ErrorKind::argument, "dropout rate must be in [0, 1)");
  auto& g = graph_of(a);
  if (rate == 0.0 || !g.recording()) return a;
  Tensor mask(a.value().shape(), 0.0);
  const double keep = 1.0 - rate;
  for (auto& m : mask.values()) m = uniform01(rng) < keep ? 1.0 / keep : 0.0;
  return mul(a, g.constant(std::move(mask)));
}

Var binary_cross_entropy(Var p, const Tensor& targets) {
  auto& g = graph_of(p);
  const auto& P = p.value();
  if (!P.same_shape(targets)) fail(ErrorKind::dimension, "bce: prediction/target shapes differ");
  const double n = static_cast<double>(P.size());
  double loss = 0.0;
  for (std::size_t k = 0; k < P.size(); ++k) {
    const double q = std::clamp(P[k], kProbClamp, 1.0 - kProbClamp);
    const double y = targets[k];
    loss -= y * std::log(q) + (1.0 - y) * std::log(1.0 - q);
  }
  loss /= n;
  return g.emit(Tensor::matrix(1, 1, loss), {p}, [ip = p.id, targets, n](Graph& gr, std::size_t self) {
    const double G = gr.node_grad(self)[0];
    const auto& Pv = gr.node_value(ip);
    auto& dP = gr.node_grad(ip);
    for (std::size_t k = 0; k < Pv.size(); ++k) {
      const double q = Pv[k];
      if (q < kProbClamp || q > 1.0 - kProbClamp) continue;
      const double y = targets[k];
      dP[k] += G * (-y / q + (1.0 - y) / (1.0 - q)) / n;
    }
  });
}

Tensor sinusoidal_positions(std::size_t positions, std::size_t width) {
  Tensor pe = Tensor::matrix(positions, width);
  for (std::size_t pos = 0; pos < positions; ++pos)
    for (std::size_t j = 0; j < width; ++j) {
      const double rate = std::pow(10000.0, static_cast<double>(j - j % 2) / static_cast<double>(width));
      const double angle = static_cast<double>(pos) / rate;
      pe(pos, j) = j % 2 == 0 ? std::sin(angle) : std::cos(angle);
    }
  return pe;
}

}  // namespace divita::tensor
