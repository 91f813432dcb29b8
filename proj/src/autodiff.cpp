#include "lagan/autodiff.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <unordered_set>

namespace lagan::ad {

namespace {

std::atomic<std::uint64_t> next_id{1};

void require_rank2(const char* op, const Tensor& t) {
  if (t.rank() != 2) throw ShapeError(op, "expects a rank-2 operand, got " + shape_str(t.shape()));
}

}  // namespace

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ']';
  return os.str();
}

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

ShapeError::ShapeError(const std::string& op, const Shape& a, const Shape& b)
    : std::invalid_argument(op + ": shape mismatch " + shape_str(a) + " vs " + shape_str(b)) {}

ShapeError::ShapeError(const std::string& op, const std::string& what)
    : std::invalid_argument(op + ": " + what) {}

Tensor make_node(Shape shape, std::vector<double> value, std::vector<Tensor> parents,
                 std::function<void(Node&)> backward_fn) {
  auto node = std::make_shared<Node>();
  node->id = next_id.fetch_add(1, std::memory_order_relaxed);
  node->shape = std::move(shape);
  node->value = std::move(value);
  node->leaf = false;
  for (const auto& p : parents) node->requires_grad = node->requires_grad || p.requires_grad();
  if (node->requires_grad) {
    node->parents.reserve(parents.size());
    for (const auto& p : parents) node->parents.push_back(p.node_ptr());
    node->backward_fn = std::move(backward_fn);
    node->grad.assign(node->value.size(), 0.0);
  }
  return Tensor(std::move(node));
}

// ---------------------------------------------------------------------------
// Tensor

namespace {

std::shared_ptr<Node> make_leaf(Shape shape, std::vector<double> values, bool requires_grad) {
  if (shape_numel(shape) != values.size())
    throw ShapeError("tensor", "shape " + shape_str(shape) + " holds " +
                                   std::to_string(shape_numel(shape)) + " values, got " +
                                   std::to_string(values.size()));
  auto node = std::make_shared<Node>();
  node->id = next_id.fetch_add(1, std::memory_order_relaxed);
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->grad.assign(node->value.size(), 0.0);
  node->requires_grad = requires_grad;
  node->leaf = true;
  return node;
}

}  // namespace

Tensor Tensor::constant(Shape shape, std::vector<double> values) {
  return Tensor(make_leaf(std::move(shape), std::move(values), false));
}

Tensor Tensor::parameter(Shape shape, std::vector<double> values) {
  return Tensor(make_leaf(std::move(shape), std::move(values), true));
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  auto n = shape_numel(shape);
  return Tensor(make_leaf(std::move(shape), std::vector<double>(n, 0.0), requires_grad));
}

Tensor Tensor::scalar(double value) { return constant({1}, {value}); }

const Shape& Tensor::shape() const { return node_->shape; }
std::size_t Tensor::numel() const { return node_->value.size(); }

std::size_t Tensor::rows() const { return rank() == 0 ? 1 : shape()[0]; }
std::size_t Tensor::cols() const { return rank() < 2 ? 1 : shape()[1]; }

std::span<const double> Tensor::values() const { return node_->value; }
std::span<double> Tensor::mutable_values() { return node_->value; }

std::span<const double> Tensor::grad() const {
  if (node_->grad.size() != node_->value.size()) node_->grad.assign(node_->value.size(), 0.0);
  return node_->grad;
}

std::span<double> Tensor::mutable_grad() {
  if (node_->grad.size() != node_->value.size()) node_->grad.assign(node_->value.size(), 0.0);
  return node_->grad;
}

double Tensor::item() const {
  if (numel() != 1) throw ShapeError("item", "tensor " + shape_str(shape()) + " is not a scalar");
  return node_->value[0];
}

double Tensor::at(std::size_t r, std::size_t c) const { return node_->value[r * cols() + c]; }

void Tensor::zero_grad() { std::fill(node_->grad.begin(), node_->grad.end(), 0.0); }
bool Tensor::requires_grad() const { return node_->requires_grad; }

void Tensor::set_requires_grad(bool on) {
  if (!node_->leaf) throw std::logic_error("set_requires_grad: only leaves can be frozen");
  node_->requires_grad = on;
  if (node_->grad.size() != node_->value.size()) node_->grad.assign(node_->value.size(), 0.0);
}

bool Tensor::is_leaf() const { return node_->leaf; }
std::uint64_t Tensor::node_id() const { return node_->id; }

Tensor Tensor::detach() const { return constant(shape(), node_->value); }

// ---------------------------------------------------------------------------
// Ops

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank2("matmul", a);
  require_rank2("matmul", b);
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  if (b.rows() != k) throw ShapeError("matmul", a.shape(), b.shape());
  std::vector<double> out(n * m, 0.0);
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < n; ++i) {
    double* orow = out.data() + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = av[i * k + p];
      if (aip == 0.0) continue;
      const double* brow = bv.data() + p * m;
      for (std::size_t j = 0; j < m; ++j) orow[j] += aip * brow[j];
    }
  }
  return make_node({n, m}, std::move(out), {a, b}, [n, k, m](Node& self) {
    Node& na = *self.parents[0];
    Node& nb = *self.parents[1];
    const double* g = self.grad.data();
    if (na.requires_grad) {
      // dA = G * B^T
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double s = 0.0;
          const double* brow = nb.value.data() + p * m;
          const double* grow = g + i * m;
          for (std::size_t j = 0; j < m; ++j) s += grow[j] * brow[j];
          na.grad[i * k + p] += s;
        }
    }
    if (nb.requires_grad) {
      // dB = A^T * G
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const double aip = na.value[i * k + p];
          if (aip == 0.0) continue;
          double* bgrow = nb.grad.data() + p * m;
          const double* grow = g + i * m;
          for (std::size_t j = 0; j < m; ++j) bgrow[j] += aip * grow[j];
        }
    }
  });
}

namespace {

template <class Fwd, class Bwd>
Tensor binary_elementwise(const char* op, const Tensor& a, const Tensor& b, Fwd fwd, Bwd bwd) {
  if (a.shape() != b.shape()) throw ShapeError(op, a.shape(), b.shape());
  const auto n = a.numel();
  std::vector<double> out(n);
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < n; ++i) out[i] = fwd(av[i], bv[i]);
  return make_node(a.shape(), std::move(out), {a, b}, [n, bwd](Node& self) {
    Node& na = *self.parents[0];
    Node& nb = *self.parents[1];
    for (std::size_t i = 0; i < n; ++i) {
      double da = 0.0, db = 0.0;
      bwd(na.value[i], nb.value[i], self.grad[i], da, db);
      if (na.requires_grad) na.grad[i] += da;
      if (nb.requires_grad) nb.grad[i] += db;
    }
  });
}

// dfn receives (input, output) and returns the local derivative.
template <class Fwd, class Dfn>
Tensor unary_elementwise(const Tensor& x, Fwd fwd, Dfn dfn) {
  const auto n = x.numel();
  std::vector<double> out(n);
  auto xv = x.values();
  for (std::size_t i = 0; i < n; ++i) out[i] = fwd(xv[i]);
  return make_node(x.shape(), std::move(out), {x}, [n, dfn](Node& self) {
    Node& nx = *self.parents[0];
    for (std::size_t i = 0; i < n; ++i) nx.grad[i] += self.grad[i] * dfn(nx.value[i], self.value[i]);
  });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return binary_elementwise(
      "add", a, b, [](double x, double y) { return x + y; },
      [](double, double, double g, double& da, double& db) {
        da = g;
        db = g;
      });
}

Tensor sub(const Tensor& a, const Tensor& b) { return add(a, affine(b, -1.0, 0.0)); }

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary_elementwise(
      "mul", a, b, [](double x, double y) { return x * y; },
      [](double x, double y, double g, double& da, double& db) {
        da = g * y;
        db = g * x;
      });
}

Tensor affine(const Tensor& x, double scale, double shift) {
  return unary_elementwise(
      x, [scale, shift](double v) { return scale * v + shift; },
      [scale](double, double) { return scale; });
}

Tensor tanh(const Tensor& x) {
  return unary_elementwise(
      x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor exp(const Tensor& x) {
  return unary_elementwise(
      x, [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& x) {
  auto xv = x.values();
  for (std::size_t i = 0; i < xv.size(); ++i)
    if (!(xv[i] > 0.0))
      throw DomainError("log: non-positive argument " + std::to_string(xv[i]) + " at index " +
                        std::to_string(i));
  return unary_elementwise(
      x, [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
}

Tensor relu(const Tensor& x) {
  return unary_elementwise(
      x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor log_softmax(const Tensor& x) {
  if (x.rank() == 0) throw ShapeError("log_softmax", "scalar operand");
  const std::size_t width = x.shape().back();
  if (width == 0) throw ShapeError("log_softmax", "empty last axis");
  const std::size_t rows = x.numel() / width;
  std::vector<double> out(x.numel());
  auto xv = x.values();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = xv.data() + r * width;
    double mx = *std::max_element(in, in + width);
    double s = 0.0;
    for (std::size_t c = 0; c < width; ++c) s += std::exp(in[c] - mx);
    const double lse = mx + std::log(s);
    for (std::size_t c = 0; c < width; ++c) out[r * width + c] = in[c] - lse;
  }
  return make_node(x.shape(), std::move(out), {x}, [rows, width](Node& self) {
    Node& nx = *self.parents[0];
    for (std::size_t r = 0; r < rows; ++r) {
      const double* g = self.grad.data() + r * width;
      const double* y = self.value.data() + r * width;
      double gs = 0.0;
      for (std::size_t c = 0; c < width; ++c) gs += g[c];
      for (std::size_t c = 0; c < width; ++c) nx.grad[r * width + c] += g[c] - std::exp(y[c]) * gs;
    }
  });
}

Tensor sum(const Tensor& x) {
  double s = 0.0;
  for (double v : x.values()) s += v;
  const auto n = x.numel();
  return make_node({1}, {s}, {x}, [n](Node& self) {
    Node& nx = *self.parents[0];
    const double g = self.grad[0];
    for (std::size_t i = 0; i < n; ++i) nx.grad[i] += g;
  });
}

Tensor mean(const Tensor& x) {
  if (x.numel() == 0) throw ShapeError("mean", "empty operand");
  return affine(sum(x), 1.0 / static_cast<double>(x.numel()), 0.0);
}

Tensor gather(const Tensor& x, std::vector<std::size_t> indices, Shape out_shape) {
  if (shape_numel(out_shape) != indices.size())
    throw ShapeError("gather", "output shape " + shape_str(out_shape) + " does not hold " +
                                   std::to_string(indices.size()) + " indices");
  const auto n = x.numel();
  auto xv = x.values();
  std::vector<double> out(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= n)
      throw ShapeError("gather", "index " + std::to_string(indices[i]) + " out of range for " +
                                     shape_str(x.shape()));
    out[i] = xv[indices[i]];
  }
  return make_node(std::move(out_shape), std::move(out), {x},
                   [idx = std::move(indices)](Node& self) {
                     Node& nx = *self.parents[0];
                     for (std::size_t i = 0; i < idx.size(); ++i) nx.grad[idx[i]] += self.grad[i];
                   });
}

Tensor gather_rows(const Tensor& x, std::span<const std::size_t> rows) {
  require_rank2("gather_rows", x);
  const auto w = x.cols();
  std::vector<std::size_t> idx;
  idx.reserve(rows.size() * w);
  for (auto r : rows) {
    if (r >= x.rows())
      throw ShapeError("gather_rows", "row " + std::to_string(r) + " out of range for " +
                                          shape_str(x.shape()));
    for (std::size_t c = 0; c < w; ++c) idx.push_back(r * w + c);
  }
  return gather(x, std::move(idx), {rows.size(), w});
}

Tensor pick_per_row(const Tensor& x, std::span<const std::size_t> cols) {
  require_rank2("pick_per_row", x);
  if (cols.size() != x.rows())
    throw ShapeError("pick_per_row", "got " + std::to_string(cols.size()) + " column indices for " +
                                         shape_str(x.shape()));
  const auto w = x.cols();
  std::vector<std::size_t> idx(cols.size());
  for (std::size_t r = 0; r < cols.size(); ++r) {
    if (cols[r] >= w)
      throw ShapeError("pick_per_row", "column " + std::to_string(cols[r]) + " out of range for " +
                                           shape_str(x.shape()));
    idx[r] = r * w + cols[r];
  }
  return gather(x, std::move(idx), {cols.size(), 1});
}

Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t end) {
  require_rank2("slice_cols", x);
  if (begin > end || end > x.cols())
    throw ShapeError("slice_cols", "range [" + std::to_string(begin) + ", " + std::to_string(end) +
                                       ") invalid for " + shape_str(x.shape()));
  const auto w = x.cols();
  std::vector<std::size_t> idx;
  idx.reserve(x.rows() * (end - begin));
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = begin; c < end; ++c) idx.push_back(r * w + c);
  return gather(x, std::move(idx), {x.rows(), end - begin});
}

// ---------------------------------------------------------------------------
// Backprop

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.numel() != 1)
    throw ShapeError("backward", "loss must hold exactly one element, got " +
                                     (loss.defined() ? shape_str(loss.shape()) : std::string("null")));
  Node* root = loss.node();
  if (!root->requires_grad) return;
  if (root->leaf) {
    root->grad[0] += 1.0;
    return;
  }

  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<Node*> stack{root};
  while (!stack.empty()) {
    Node* n = stack.back();
    stack.pop_back();
    if (!n->requires_grad || !seen.insert(n).second) continue;
    order.push_back(n);
    for (const auto& p : n->parents) stack.push_back(p.get());
  }
  // Creation order is a topological order: operands always exist before results.
  std::sort(order.begin(), order.end(), [](Node* a, Node* b) { return a->id > b->id; });

  // Each pass computes leaf gradients into clean buffers and only then adds
  // them to what was already accumulated, so two passes give exactly 2x.
  std::vector<std::vector<double>> previous;
  std::vector<Node*> leaves;
  for (Node* n : order) {
    if (n->leaf) {
      leaves.push_back(n);
      previous.push_back(n->grad);
    }
    std::fill(n->grad.begin(), n->grad.end(), 0.0);
  }
  root->grad[0] = 1.0;
  for (Node* n : order)
    if (!n->leaf && n->backward_fn) n->backward_fn(*n);
  for (std::size_t i = 0; i < leaves.size(); ++i)
    for (std::size_t j = 0; j < previous[i].size(); ++j) leaves[i]->grad[j] += previous[i][j];
}

std::vector<double> finite_diff_grad(const std::function<double(std::span<const double>)>& f,
                                     std::span<const double> params, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_diff_grad: step must be positive");
  std::vector<double> p(params.begin(), params.end());
  std::vector<double> g(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double orig = p[i];
    p[i] = orig + h;
    const double fp = f(p);
    p[i] = orig - h;
    const double fm = f(p);
    p[i] = orig;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace lagan::ad
