#pragma once

#include <functional>
#include <memory>
#include <string>
#include <unordered_set>
#include <vector>

#include "vesselcast/common.hpp"
#include "vesselcast/tensor.hpp"

namespace vesselcast::nn {

// Taping can be switched off for pure inference so forward passes do not
// retain the graph.
class GradMode {
 public:
  static bool& enabled() {
    thread_local bool on = true;
    return on;
  }
};

struct NoGradGuard {
  bool prev;
  NoGradGuard() : prev(GradMode::enabled()) { GradMode::enabled() = false; }
  ~NoGradGuard() { GradMode::enabled() = prev; }
};

template <typename T>
struct Node {
  Tensor<T> value;
  Tensor<T> grad;  // allocated lazily, same shape as value
  bool requires_grad = false;
  bool backward_done = false;
  std::string name;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backprop;  // accumulates into parents' grads

  Tensor<T>& grad_ref() {
    if (grad.numel() == 0) grad = Tensor<T>::zeros(value.shape);
    return grad;
  }
};

// Value-semantics handle on a graph node. Ops build new nodes eagerly and
// record a backward closure when any input requires gradients.
template <typename T>
class Var {
 public:
  Var() = default;
  explicit Var(Tensor<T> value, bool requires_grad = false,
               std::string name = {}) {
    node_ = std::make_shared<Node<T>>();
    node_->value = std::move(value);
    node_->requires_grad = requires_grad;
    node_->name = std::move(name);
  }

  bool defined() const { return node_ != nullptr; }
  const Tensor<T>& value() const { return node_->value; }
  Tensor<T>& value_mut() { return node_->value; }
  const Tensor<T>& grad() const { return node_->grad; }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  const std::string& name() const { return node_->name; }
  std::shared_ptr<Node<T>> node() const { return node_; }

  void zero_grad() {
    if (node_->grad.numel() != 0)
      std::fill(node_->grad.data.begin(), node_->grad.data.end(), T{0});
  }

  // Reverse-mode sweep from a scalar loss. Gradients accumulate into every
  // reachable node that requires them; calling backward twice on the same
  // recorded graph is a state error.
  void backward() {
    if (!node_) throw StateError("backward: undefined variable");
    if (node_->value.numel() != 1)
      throw ShapeError("backward: loss must be a scalar, got " +
                       shape_str(node_->value.shape));
    if (node_->backward_done)
      throw StateError("backward: graph already consumed; run forward again");
    node_->backward_done = true;

    // iterative topological order over the recorded graph
    std::vector<Node<T>*> topo;
    std::unordered_set<Node<T>*> seen;
    std::vector<std::pair<Node<T>*, std::size_t>> stack{{node_.get(), 0}};
    seen.insert(node_.get());
    while (!stack.empty()) {
      auto& [n, next_child] = stack.back();
      if (next_child < n->parents.size()) {
        Node<T>* p = n->parents[next_child].get();
        ++next_child;
        if (p && !seen.count(p)) {
          seen.insert(p);
          stack.push_back({p, 0});
        }
      } else {
        topo.push_back(n);
        stack.pop_back();
      }
    }

    node_->grad_ref().data[0] = T{1};
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
      Node<T>* n = *it;
      if (n->backprop && n->grad.numel() != 0) n->backprop(*n);
    }
  }

 private:
  std::shared_ptr<Node<T>> node_;
};

template <typename T>
bool tape_active(const std::initializer_list<const Var<T>*> inputs) {
  if (!GradMode::enabled()) return false;
  for (const auto* v : inputs)
    if (v->defined() && v->node()->requires_grad) return true;
  return false;
}

// Builds the result node for an op: value moved in, parents attached and
// requires_grad propagated only while taping.
template <typename T>
Var<T> make_result(Tensor<T> value, std::vector<Var<T>> parents,
                   std::function<void(Node<T>&)> backprop) {
  bool record = GradMode::enabled();
  if (record) {
    record = false;
    for (const auto& p : parents)
      if (p.defined() && p.node()->requires_grad) record = true;
  }
  Var<T> out(std::move(value));
  if (record) {
    out.node()->requires_grad = true;
    for (auto& p : parents) out.node()->parents.push_back(p.node());
    out.node()->backprop = std::move(backprop);
  }
  return out;
}

}  // namespace vesselcast::nn
