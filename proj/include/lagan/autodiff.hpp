#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lagan::ad {

using Shape = std::vector<std::size_t>;

std::string shape_str(const Shape& shape);
std::size_t shape_numel(const Shape& shape);

class ShapeError : public std::invalid_argument {
 public:
  ShapeError(const std::string& op, const Shape& a, const Shape& b);
  ShapeError(const std::string& op, const std::string& what);
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct Node;

// Handle to a node of the computation graph. Copies share the node.
//
// Leaves are created with constant() or parameter(). Every op returns a new
// node that keeps its operands alive, so a graph lives exactly as long as the
// tensors that reference it; rebuilding the graph each iteration is the
// intended usage.
class Tensor {
 public:
  Tensor() = default;

  static Tensor constant(Shape shape, std::vector<double> values);
  static Tensor parameter(Shape shape, std::vector<double> values);
  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor scalar(double value);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t numel() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> values() const;
  std::span<double> mutable_values();
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  double item() const;
  double at(std::size_t r, std::size_t c) const;

  void zero_grad();
  bool requires_grad() const;
  // Only meaningful on leaves: freezing a parameter skips its gradient.
  void set_requires_grad(bool on);
  bool is_leaf() const;
  std::uint64_t node_id() const;

  // Leaf copy of the values, cut from the graph.
  Tensor detach() const;

  Node* node() const { return node_.get(); }
  const std::shared_ptr<Node>& node_ptr() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}
  std::shared_ptr<Node> node_;

  friend Tensor make_node(Shape, std::vector<double>, std::vector<Tensor>,
                          std::function<void(Node&)>);
};

struct Node {
  std::uint64_t id = 0;
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  std::vector<std::shared_ptr<Node>> parents;
  // Pushes this node's grad into the parents' grads.
  std::function<void(Node&)> backward_fn;
  bool requires_grad = false;
  bool leaf = true;
};

// Supported op set.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor affine(const Tensor& x, double scale, double shift);
Tensor tanh(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor log(const Tensor& x);
Tensor relu(const Tensor& x);
Tensor log_softmax(const Tensor& x);
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
// out.flat[i] = x.flat[indices[i]]; the scatter-add of the gradient handles
// repeated indices.
Tensor gather(const Tensor& x, std::vector<std::size_t> indices, Shape out_shape);

// Convenience wrappers built from gather.
Tensor gather_rows(const Tensor& x, std::span<const std::size_t> rows);
Tensor pick_per_row(const Tensor& x, std::span<const std::size_t> cols);
Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t end);

// Accumulates d(loss)/d(leaf) into every reachable leaf that requires grad.
void backward(const Tensor& loss);

// Central differences, one coordinate at a time.
std::vector<double> finite_diff_grad(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> params, double h);

}  // namespace lagan::ad
