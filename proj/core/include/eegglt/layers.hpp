#pragma once

// Differentiable ops for the Chebyshev GCN classifier: graph conv, batch norm,
// ReLU, dropout, mean pooling, dense layers, softmax cross-entropy, and the
// mask -> scaled Laplacian -> Chebyshev terms chain that makes the adjacency
// mask trainable.

#include <span>
#include <vector>

#include "eegglt/graph.hpp"
#include "eegglt/tensor.hpp"

namespace eegglt::ad {

enum class Mode { Train, Eval };

/// Scaled Laplacian 2L/lambda_max - I of (original ⊙ mask) as an [N, N] tensor.
/// lambda_max is treated as a constant in the backward pass. Isolated nodes found
/// during the forward pass are reported through `isolated` when non-null.
Tensor scaled_laplacian(const Tensor& mask, const graph::Matrix& original,
                        const graph::LaplacianOptions& opts = {},
                        std::vector<int>* isolated = nullptr);

/// Constant [N, N] tensor from a matrix.
Tensor matrix_tensor(const graph::Matrix& m, bool requires_grad = false);

/// Stacks T_0..T_{K-1} of an [N, N] scaled Laplacian into a [K, N, N] tensor.
Tensor chebyshev_terms(const Tensor& scaled, int order);

/// Constant [K, N, N] tensor from an already built basis.
Tensor basis_tensor(const graph::ChebBasis& basis);

/// out[b] = sum_k T_k x[b] theta[k] + bias.
/// x: [B, N, F_in], terms: [K', N, N] with K' >= K, theta: [K, F_in, F_out], bias: [N, F_out].
Tensor cheb_conv(const Tensor& x, const Tensor& terms, const Tensor& theta, const Tensor& bias);

struct BatchNormState {
  std::vector<double> running_mean;
  std::vector<double> running_var;
  double momentum = 0.1;
  double eps = 1e-5;

  explicit BatchNormState(int features = 0)
      : running_mean(static_cast<size_t>(features), 0.0),
        running_var(static_cast<size_t>(features), 1.0) {}
  void reset();
};

/// Normalizes each feature (last axis) over every other axis.
/// Train mode uses batch statistics and updates `state`; eval mode uses the running stats.
Tensor batch_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, BatchNormState& state,
                  Mode mode);

Tensor relu(const Tensor& x);

/// Inverted dropout; identity in eval mode or at rate 0.
Tensor dropout(const Tensor& x, double rate, Mode mode, Rng& rng);

/// [B, N, F] -> [B, F].
Tensor global_mean_pool(const Tensor& x);

/// [B, D_in] x [D_in, D_out] + [D_out].
Tensor fully_connected(const Tensor& x, const Tensor& weight, const Tensor& bias);

/// Mean cross-entropy of softmax(logits) against class indices. logits: [B, O], O >= 2.
Tensor softmax_cross_entropy(const Tensor& logits, std::span<const int> labels);

/// Same loss against one-hot rows; each row must hold exactly one 1.
Tensor softmax_cross_entropy_onehot(const Tensor& logits, std::span<const double> onehot);

/// Row-wise softmax of a [B, O] value array.
std::vector<double> softmax_rows(std::span<const double> logits, int classes);

}  // namespace eegglt::ad
