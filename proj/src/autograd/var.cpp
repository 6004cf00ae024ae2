#include "qot/autograd/var.hpp"

#include <unordered_set>

#include "qot/core/error.hpp"

namespace qot::ag {

namespace {
thread_local bool g_grad_enabled = true;
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

Tensor& Node::grad_buffer() {
  if (!has_grad) {
    grad = Tensor(value.shape());
    has_grad = true;
  }
  return grad;
}

Var Var::constant(Tensor value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->op = "constant";
  return Var(std::move(n));
}

Var Var::parameter(Tensor value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = true;
  n->op = "parameter";
  return Var(std::move(n));
}

const Tensor& Var::grad() const {
  if (!node_->has_grad && node_->grad.shape() != node_->value.shape()) node_->grad = Tensor(node_->value.shape());
  return node_->grad;
}

void Var::zero_grad() const {
  node_->has_grad = false;
  node_->grad = Tensor();
}

Var make_result(std::string op, Tensor value, std::vector<Var> inputs, BackwardFn backward) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->op = std::move(op);
  if (g_grad_enabled) {
    for (const Var& in : inputs) {
      if (in.requires_grad()) {
        n->requires_grad = true;
        break;
      }
    }
  }
  if (n->requires_grad) {
    n->parents.reserve(inputs.size());
    for (const Var& in : inputs) n->parents.push_back(in.node());
    n->backward = std::move(backward);
  }
  return Var(std::move(n));
}

Tape Tape::record(const Var& root) {
  Tape tape;
  tape.root_ = root.node();
  std::unordered_set<const Node*> seen;
  // Iterative post-order DFS; parents are emitted before children.
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(root.node().get(), 0);
  seen.insert(root.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      tape.nodes_.push_back(node);
      stack.pop_back();
    }
  }
  return tape;
}

void Tape::backward(const Tensor& seed) {
  if (nodes_.empty()) return;
  Node* root = nodes_.back();
  if (seed.shape() != root->value.shape()) {
    throw DimensionError("backward seed " + to_string(seed.shape()) + " vs root " + to_string(root->value.shape()));
  }
  Tensor& g = root->grad_buffer();
  for (std::size_t n = 0; n < g.size(); ++n) g[n] += seed[n];
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    Node* node = *it;
    if (node->backward && node->has_grad) node->backward(*node);
  }
}

const Node* Tape::first_non_finite() const {
  for (const Node* n : nodes_) {
    if (!n->value.all_finite()) return n;
  }
  return nullptr;
}

void backward(const Var& loss) {
  if (loss.value().size() != 1) {
    throw ContractError("backward() needs a scalar loss, got shape " + to_string(loss.shape()));
  }
  if (!loss.requires_grad()) return;
  Tape::record(loss).backward(Tensor(loss.shape(), {1.0}));
}

}  // namespace qot::ag
