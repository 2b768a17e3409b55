#include "eegglt/macs.hpp"

#include <cmath>
#include <cstdio>

#include "eegglt/csv.hpp"
#include "eegglt/error.hpp"

namespace eegglt::macs {

std::string_view to_string(Convention c) {
  return c == Convention::RecurrenceSteps ? "recurrence" : "k-products";
}

Convention parse_convention(std::string_view text) {
  if (text == "recurrence") return Convention::RecurrenceSteps;
  if (text == "k-products") return Convention::KProducts;
  throw Error(ErrorCode::InvalidConfig, "unknown MACs convention '" + std::string(text) + "'");
}

LayerMacs count_layer_macs(int f_in, int f_out, int order, int n_nodes, long long nnz, Convention convention) {
  if (f_in < 1 || f_out < 1 || order < 1 || n_nodes < 1 || nnz < 0) {
    throw Error(ErrorCode::InvalidSpec, "layer dimensions must be positive");
  }
  const long long steps = convention == Convention::RecurrenceSteps ? order - 1 : order;
  LayerMacs m;
  m.graph = steps * nnz * f_in;
  m.projection = static_cast<long long>(n_nodes) * order * f_in * f_out;
  m.bias_bn = 2LL * n_nodes * f_out;
  return m;
}

long long edges_at_density(double density, int n_nodes) {
  if (!(density > 0.0 && density <= 1.0)) throw Error(ErrorCode::InvalidDensity, "density must lie in (0, 1]");
  const long long full = static_cast<long long>(n_nodes) * (n_nodes - 1);
  return std::llround(density * static_cast<double>(full));
}

MacsBreakdown count_model_macs(const net::ModelSpec& spec, double density, Convention convention) {
  spec.validate();
  const long long nnz = edges_at_density(density, spec.n_nodes);
  MacsBreakdown b;
  int f_in = 1;
  for (size_t i = 0; i < spec.conv_filters.size(); ++i) {
    auto layer = count_layer_macs(f_in, spec.conv_filters[i], spec.conv_orders[i], spec.n_nodes, nnz, convention);
    layer.name = "conv" + std::to_string(i + 1);
    b.graph_total += layer.graph;
    b.conv_projection_total += layer.projection + layer.bias_bn;
    b.layers.push_back(layer);
    f_in = spec.conv_filters[i];
  }
  int d_in = f_in;
  for (size_t j = 0; j < spec.fc_nodes.size(); ++j) {
    LayerMacs layer;
    layer.name = "fc" + std::to_string(j + 1);
    layer.projection = static_cast<long long>(d_in) * spec.fc_nodes[j];
    layer.bias_bn = spec.fc_nodes[j];
    b.fc_total += layer.total();
    b.layers.push_back(layer);
    d_in = spec.fc_nodes[j];
  }
  b.total = b.graph_total + b.conv_projection_total + b.fc_total;
  return b;
}

std::optional<double> reference_total(const std::string& model_name, double density) {
  struct Ref {
    const char* model;
    double density;
    double macs;
  };
  static constexpr Ref kRefs[] = {
      {"A", 1.0, 81.89e6},    {"B", 1.0, 42.26e6},    {"C", 1.0, 22.64e6},     {"D", 1.0, 11.32e6},
      {"E", 1.0, 291.62e6},   {"F", 1.0, 146.10e6},   {"A", 0.8998, 80.67e6},  {"B", 0.1339, 36.97e6},
      {"D", 0.1339, 8.76e6},  {"D", 0.1657, 8.76e6},
  };
  for (const auto& r : kRefs) {
    if (model_name == r.model && std::abs(density - r.density) < 5e-5) return r.macs;
  }
  return std::nullopt;
}

double savings(double baseline_macs, double ticket_macs) {
  if (!(baseline_macs > 0.0)) throw Error(ErrorCode::InvalidSpec, "baseline MACs must be positive");
  return 1.0 - ticket_macs / baseline_macs;
}

double savings_report(const net::ModelSpec& baseline, double baseline_density, const net::ModelSpec& ticket,
                      double ticket_density, Convention convention) {
  const auto base = count_model_macs(baseline, baseline_density, convention);
  const auto tick = count_model_macs(ticket, ticket_density, convention);
  return savings(static_cast<double>(base.total), static_cast<double>(tick.total));
}

std::string csv_header() {
  return "model,density,graph_macs,proj_macs,fc_macs,total,reference_total,deviation_pct,convention";
}

std::string csv_row(const net::ModelSpec& spec, double density, const MacsBreakdown& b, Convention convention) {
  std::string row = spec.name + "," + csv::format_double(density) + "," + std::to_string(b.graph_total) + "," +
                    std::to_string(b.conv_projection_total) + "," + std::to_string(b.fc_total) + "," +
                    std::to_string(b.total) + ",";
  const auto ref = spec.n_nodes == 64 ? reference_total(spec.name, density) : std::nullopt;
  if (ref) {
    char dev[32];
    std::snprintf(dev, sizeof(dev), "%.2f", 100.0 * (static_cast<double>(b.total) - *ref) / *ref);
    row += std::to_string(std::llround(*ref)) + "," + dev;
  } else {
    row += ",";
  }
  row += ",";
  row += to_string(convention);
  return row;
}

}  // namespace eegglt::macs
