#pragma once

// Multiply-accumulate counts for one single-time-point inference.
//
// Conv layer (F_in -> F_out, order K, N nodes, nnz adjacency entries):
//   graph part  = steps x nnz x F_in, steps = K - 1 (recurrence) or K (K sparse products)
//   projection  = N x K x F_in x F_out
//   bias and BN = 2 x N x F_out
// FC layer: D_in x D_out + D_out. Mean pooling counts as 0.

#include <optional>
#include <string>
#include <vector>

#include "eegglt/chebnet.hpp"

namespace eegglt::macs {

enum class Convention { RecurrenceSteps, KProducts };

std::string_view to_string(Convention c);
Convention parse_convention(std::string_view text);

struct LayerMacs {
  std::string name;
  long long graph = 0;
  long long projection = 0;
  long long bias_bn = 0;

  long long total() const { return graph + projection + bias_bn; }
};

struct MacsBreakdown {
  std::vector<LayerMacs> layers;  // conv layers, then FC layers
  long long graph_total = 0;
  long long conv_projection_total = 0;  // conv projection plus conv bias/BN
  long long fc_total = 0;
  long long total = 0;
};

LayerMacs count_layer_macs(int f_in, int f_out, int order, int n_nodes, long long nnz,
                           Convention convention = Convention::RecurrenceSteps);

/// Adjacency entries kept at `density`: round(density x (N^2 - N)).
long long edges_at_density(double density, int n_nodes);

MacsBreakdown count_model_macs(const net::ModelSpec& spec, double density,
                               Convention convention = Convention::RecurrenceSteps);

/// Published totals for the reference models (dense, plus a few pruned densities), in MACs.
std::optional<double> reference_total(const std::string& model_name, double density = 1.0);

/// 1 - ticket / baseline, as a fraction.
double savings(double baseline_macs, double ticket_macs);
double savings_report(const net::ModelSpec& baseline, double baseline_density, const net::ModelSpec& ticket,
                      double ticket_density, Convention convention = Convention::RecurrenceSteps);

/// CSV with columns model,density,graph_macs,proj_macs,fc_macs,total,reference_total,deviation_pct,convention.
/// Reference and deviation are left empty when no published total exists for that model and density.
std::string csv_header();
std::string csv_row(const net::ModelSpec& spec, double density, const MacsBreakdown& b, Convention convention);

}  // namespace eegglt::macs
