#pragma once

// Chebyshev spectral GCN classifier:
//   (ChebConv -> BN -> ReLU) x L -> global mean pool -> FC stack -> logits
// over a fixed adjacency (geodesic, PCC) or a trainable adjacency mask.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "eegglt/graph.hpp"
#include "eegglt/layers.hpp"
#include "eegglt/metrics.hpp"
#include "eegglt/params.hpp"

namespace eegglt::net {

struct ModelSpec {
  std::string name = "custom";
  std::vector<int> conv_filters;
  std::vector<int> conv_orders;
  /// Hidden widths followed by the class count.
  std::vector<int> fc_nodes;
  int n_nodes = 64;
  int n_classes = 4;
  /// BN + ReLU + dropout after every hidden FC layer.
  bool has_bn_fc = true;
  double dropout_rate = 0.5;
  /// Conv bias of shape N x F_out (per node); false gives a shared per-feature bias.
  bool per_node_bias = true;

  void validate() const;
  int max_order() const;
  /// Trainable parameter count from the layer plan (mask excluded).
  size_t parameter_count() const;

  /// Models A-F of the reference architecture table.
  static ModelSpec from_letter(char letter, int n_nodes = 64);
  static ModelSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// A batch of single-time-point samples: x is M x N row-major, y holds M labels.
struct SampleSet {
  int n_nodes = 0;
  std::vector<double> x;
  std::vector<int> y;

  size_t size() const { return y.size(); }
};

class Network {
 public:
  static Network build(const ModelSpec& spec, std::uint64_t seed);

  const ModelSpec& spec() const { return spec_; }
  ad::ParamState& params() { return params_; }
  const ad::ParamState& params() const { return params_; }

  /// Uses a constant adjacency; its Chebyshev basis is cached.
  void set_fixed_adjacency(const graph::Graph& g, const graph::LaplacianOptions& opts = {});

  /// Makes original ⊙ mask the adjacency with `mask` as a trainable, non-rewindable parameter.
  /// Entries where support is 0 are frozen at 0.
  void enable_mask(const graph::Matrix& original, const graph::Matrix& mask,
                   const graph::Matrix& support, const graph::LaplacianOptions& opts = {});
  bool mask_enabled() const { return mask_enabled_; }
  graph::Matrix mask_values() const;
  graph::Matrix mask_support() const;
  /// Overwrites mask values and support (used after pruning).
  void set_mask(const graph::Matrix& values, const graph::Matrix& support);

  /// Chebyshev terms for the current adjacency, differentiable w.r.t. the mask when enabled.
  ad::Tensor basis_terms(std::vector<int>* isolated = nullptr) const;

  /// x: [B, N, 1] -> logits [B, O].
  ad::Tensor forward(const ad::Tensor& x, ad::Mode mode);
  ad::Tensor forward(const ad::Tensor& x, const ad::Tensor& terms, ad::Mode mode);

  std::vector<ad::BatchNormState>& bn_states() { return bn_; }
  void reset_running_stats();

  ad::Rng& rng() { return rng_; }

  /// Parameters, BN running stats and the mask support for checkpoints.
  std::vector<ad::NamedArray> state_arrays() const;
  void load_state_arrays(const std::vector<ad::NamedArray>& arrays);

 private:
  ModelSpec spec_;
  ad::ParamState params_;
  std::vector<ad::BatchNormState> bn_;  // conv BNs then FC BNs
  ad::Rng rng_{0};

  graph::Matrix original_;
  graph::LaplacianOptions lap_opts_;
  bool mask_enabled_ = false;
  ad::Tensor fixed_terms_;
};

/// Builds the [B, N, 1] input tensor for rows [begin, end) of a sample set (or an index list).
ad::Tensor batch_tensor(const SampleSet& s, std::span<const size_t> indices);

struct TrainOptions {
  int batch_size = 1024;
  ad::AdamConfig adam;
};

/// One pass over `train` in shuffled mini-batches. Returns mean training loss.
/// Batches smaller than 2 are skipped (train-mode batch norm needs B >= 2).
double train_epoch(Network& net, const SampleSet& train, const TrainOptions& opts);

/// Argmax class per sample in eval mode.
std::vector<int> predict(Network& net, const SampleSet& s, int batch_size = 1024);
double evaluate_accuracy(Network& net, const SampleSet& s, int batch_size = 1024);
Metrics predict_metrics(Network& net, const SampleSet& s, int batch_size = 1024);

}  // namespace eegglt::net
