#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "qot/core/tensor.hpp"

namespace qot::ag {

struct Node;
using NodePtr = std::shared_ptr<Node>;

/// Local backward rule: reads the node's own grad and accumulates into parents.
using BackwardFn = std::function<void(Node& self)>;

struct Node {
  Tensor value;
  Tensor grad;  // empty shape + size 1 until first accumulation; see has_grad
  bool has_grad = false;
  bool requires_grad = false;
  std::string op;
  std::vector<NodePtr> parents;
  BackwardFn backward;

  /// Zero-initialised gradient buffer, allocated on first use.
  Tensor& grad_buffer();
};

/// Handle to a graph node. Copies share the node.
class Var {
public:
  Var() = default;
  explicit Var(NodePtr node) : node_(std::move(node)) {}

  /// Non-differentiable input.
  static Var constant(Tensor value);
  /// Trainable leaf.
  static Var parameter(Tensor value);

  const Tensor& value() const { return node_->value; }
  /// Direct access for optimizers and grad_check; never call between forward and backward.
  Tensor& mutable_value() const { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  void set_requires_grad(bool on) { node_->requires_grad = on; }

  /// dLoss/dthis after backward(); zeros if nothing flowed here.
  const Tensor& grad() const;
  bool has_grad() const { return node_->has_grad; }
  void zero_grad() const;

  const std::string& op() const { return node_->op; }
  const NodePtr& node() const { return node_; }
  explicit operator bool() const { return static_cast<bool>(node_); }

private:
  NodePtr node_;
};

/// Record an operation result. Parents that do not require grad are not retained.
Var make_result(std::string op, Tensor value, std::vector<Var> inputs, BackwardFn backward);

/// Ordered record of the operations reachable from a root, in forward
/// (topological) order. Every node appears exactly once.
class Tape {
public:
  static Tape record(const Var& root);

  const std::vector<Node*>& nodes() const { return nodes_; }
  /// Run every backward rule once, in reverse order, seeding root grad with `seed`.
  void backward(const Tensor& seed);

  /// First node in forward order whose value holds a NaN or infinity, or nullptr.
  const Node* first_non_finite() const;

private:
  std::vector<Node*> nodes_;
  NodePtr root_;
};

/// Reverse-mode sweep from a scalar loss. Gradients accumulate into leaves.
void backward(const Var& loss);

bool grad_enabled();

/// Disables graph recording on this thread for the guard's lifetime.
class NoGradGuard {
public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
  bool previous_;
};

}  // namespace qot::ag
