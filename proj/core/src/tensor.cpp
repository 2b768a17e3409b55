#include "eegglt/tensor.hpp"

#include <cmath>
#include <unordered_set>

#include "eegglt/error.hpp"

namespace eegglt::ad {

size_t numel(const Shape& shape) {
  size_t n = 1;
  for (int d : shape) n *= static_cast<size_t>(d);
  return n;
}

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

std::vector<double>& Node::ensure_grad() {
  if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  return grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  auto node = std::make_shared<Node>();
  node->value.assign(numel(shape), 0.0);
  node->shape = std::move(shape);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  if (numel(shape) != values.size()) {
    throw Error(ErrorCode::ShapeMismatch, shape_string(shape) + " does not hold " +
                                              std::to_string(values.size()) + " values");
  }
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(double v, bool requires_grad) { return from({1}, {v}, requires_grad); }

double Tensor::item() const {
  if (size() != 1) throw Error(ErrorCode::ShapeMismatch, "item() on " + shape_string(shape()));
  return node_->value[0];
}

std::span<const double> Tensor::grad() const {
  // Callers expect a full-length view; materialize zeros on first access.
  return node_->ensure_grad();
}

void Tensor::zero_grad() { node_->grad.assign(node_->value.size(), 0.0); }

void Tensor::backward() {
  if (size() != 1) throw Error(ErrorCode::ShapeMismatch, "backward() needs a scalar");
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  // Iterative post-order DFS; graphs here are a few dozen nodes deep.
  std::vector<std::pair<Node*, size_t>> stack{{node_.get(), 0}};
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      Node* p = n->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }
  node_->ensure_grad()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward && !n->grad.empty()) n->backward(*n);
  }
}

namespace {
thread_local bool g_grad_enabled = true;
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }
bool grad_enabled() { return g_grad_enabled; }

void check_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteValue, std::string(what) + " produced NaN/Inf");
  }
}

Tensor make_result(Shape shape, std::vector<double> value, std::vector<Tensor> parents,
                   std::function<void(Node& self)> backward, const char* op_name) {
  check_finite(value, op_name);
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  if (g_grad_enabled) {
    for (auto& p : parents) {
      if (p.defined() && p.requires_grad()) node->requires_grad = true;
    }
  }
  if (node->requires_grad) {
    node->parents.reserve(parents.size());
    for (auto& p : parents) {
      if (p.defined()) node->parents.push_back(p.ptr());
    }
    node->backward = std::move(backward);
  }
  return Tensor(std::move(node));
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() { return normal_(engine_); }

std::uint64_t Rng::below(std::uint64_t n) {
  return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
}

}  // namespace eegglt::ad
