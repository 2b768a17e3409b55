#pragma once

// Minimal reverse-mode differentiation over dense float64 tensors.
//
// A Tensor is a handle to a tape node. Ops build new nodes that keep their
// inputs alive and carry a backward closure; Tensor::backward() on a scalar
// walks the graph in reverse topological order and accumulates gradients into
// every node that requires them. Parameters are leaf nodes that outlive the
// per-step graph.

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace eegglt::ad {

using Shape = std::vector<int>;

size_t numel(const Shape& shape);
std::string shape_string(const Shape& shape);

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until first accumulation
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node& self)> backward;

  std::vector<double>& ensure_grad();
};

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double v, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  int dim(size_t axis) const { return node_->shape.at(axis); }
  size_t rank() const { return node_->shape.size(); }
  size_t size() const { return node_->value.size(); }
  bool requires_grad() const { return node_->requires_grad; }

  std::span<const double> value() const { return node_->value; }
  std::span<double> mutable_value() { return node_->value; }
  double item() const;
  double at(size_t flat) const { return node_->value[flat]; }

  /// Zero-filled view when nothing has been accumulated yet.
  std::span<const double> grad() const;
  std::span<double> mutable_grad() { return node_->ensure_grad(); }
  void zero_grad();

  /// Seeds d(this)/d(this) = 1 and back-propagates. Requires a single-element tensor.
  void backward();

  Node* node() const { return node_.get(); }
  const std::shared_ptr<Node>& ptr() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

/// Builds an op output. requires_grad is inherited from the parents; the backward
/// closure is dropped when no parent needs a gradient. Throws NonFiniteValue on NaN/Inf.
Tensor make_result(Shape shape, std::vector<double> value, std::vector<Tensor> parents,
                   std::function<void(Node& self)> backward, const char* op_name);

void check_finite(std::span<const double> values, const char* what);

/// While alive, ops on this thread record no backward graph.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

/// Deterministic generator shared by init, dropout and shuffling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  /// Uniform integer on [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace eegglt::ad
