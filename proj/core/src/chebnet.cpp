#include "eegglt/chebnet.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "eegglt/error.hpp"

namespace eegglt::net {

namespace {

const char* const kMaskName = "adjacency_mask";

std::vector<double> glorot(ad::Rng& rng, size_t count, int fan_in, int fan_out) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::vector<double> v(count);
  for (auto& w : v) w = rng.uniform(-limit, limit);
  return v;
}

// [F] -> [N, F] by repeating the row.
ad::Tensor repeat_rows(const ad::Tensor& bias, int n) {
  const int f = static_cast<int>(bias.size());
  std::vector<double> out(static_cast<size_t>(n) * f);
  for (int i = 0; i < n; ++i) std::copy(bias.value().begin(), bias.value().end(), out.begin() + i * f);
  ad::Tensor b = bias;
  return ad::make_result(
      {n, f}, std::move(out), {bias},
      [b, n, f](ad::Node& self) mutable {
        auto g = b.mutable_grad();
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < f; ++j) g[j] += self.grad[static_cast<size_t>(i) * f + j];
        }
      },
      "repeat_rows");
}

std::string layer_name(const char* prefix, size_t i) { return prefix + std::to_string(i + 1); }

}  // namespace

void ModelSpec::validate() const {
  auto fail = [&](const std::string& why) { throw Error(ErrorCode::InvalidSpec, name + ": " + why); };
  if (conv_filters.empty()) fail("needs at least one graph convolution");
  if (conv_filters.size() != conv_orders.size()) fail("conv_filters and conv_orders differ in length");
  if (fc_nodes.empty()) fail("needs at least the output FC layer");
  if (fc_nodes.back() != n_classes) fail("last FC width must equal the class count");
  if (n_nodes < 1 || n_classes < 2) fail("n_nodes >= 1 and n_classes >= 2 required");
  for (int v : conv_filters) {
    if (v < 1) fail("filter counts must be positive");
  }
  for (int v : conv_orders) {
    if (v < 1) fail("polynomial orders must be positive");
  }
  for (int v : fc_nodes) {
    if (v < 1) fail("FC widths must be positive");
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) fail("dropout rate must be in [0, 1)");
}

int ModelSpec::max_order() const { return *std::max_element(conv_orders.begin(), conv_orders.end()); }

size_t ModelSpec::parameter_count() const {
  validate();
  size_t total = 0;
  int f_in = 1;
  for (size_t i = 0; i < conv_filters.size(); ++i) {
    const size_t f_out = static_cast<size_t>(conv_filters[i]);
    total += static_cast<size_t>(conv_orders[i]) * f_in * f_out;
    total += per_node_bias ? static_cast<size_t>(n_nodes) * f_out : f_out;
    total += 2 * f_out;  // BN gamma, beta
    f_in = conv_filters[i];
  }
  int d_in = f_in;
  for (size_t j = 0; j < fc_nodes.size(); ++j) {
    const size_t d_out = static_cast<size_t>(fc_nodes[j]);
    total += static_cast<size_t>(d_in) * d_out + d_out;
    if (j + 1 < fc_nodes.size() && has_bn_fc) total += 2 * d_out;
    d_in = fc_nodes[j];
  }
  return total;
}

ModelSpec ModelSpec::from_letter(char letter, int n_nodes) {
  ModelSpec s;
  s.n_nodes = n_nodes;
  switch (letter) {
    case 'A': case 'a':
      s.conv_filters = {16, 32, 64, 128, 256, 512};
      s.conv_orders = {5, 5, 5, 5, 5, 5};
      s.fc_nodes = {1024, 2048, 4};
      break;
    case 'B': case 'b':
      s.conv_filters = {16, 32, 64, 128, 256, 512};
      s.conv_orders = {2, 2, 2, 2, 2, 2};
      s.fc_nodes = {1024, 2048, 4};
      break;
    case 'C': case 'c':
      s.conv_filters = {16, 32, 64, 128, 256};
      s.conv_orders = {5, 5, 5, 5, 5};
      s.fc_nodes = {4};
      s.has_bn_fc = false;
      break;
    case 'D': case 'd':
      s.conv_filters = {16, 32, 64, 128, 256};
      s.conv_orders = {2, 2, 2, 2, 2};
      s.fc_nodes = {4};
      s.has_bn_fc = false;
      break;
    case 'E': case 'e':
      s.conv_filters = {64, 128, 256, 512, 1024};
      s.conv_orders = {5, 5, 5, 5, 5};
      s.fc_nodes = {512, 128, 4};
      break;
    case 'F': case 'f':
      s.conv_filters = {64, 128, 256, 512, 1024};
      s.conv_orders = {2, 2, 2, 2, 2};
      s.fc_nodes = {512, 128, 4};
      break;
    default:
      throw Error(ErrorCode::InvalidSpec, std::string("unknown model letter '") + letter + "'");
  }
  s.name = std::string(1, static_cast<char>(std::toupper(static_cast<unsigned char>(letter))));
  return s;
}

ModelSpec ModelSpec::from_json(const nlohmann::json& j) {
  try {
    ModelSpec s;
    if (j.contains("model")) {
      const auto letter = j.at("model").get<std::string>();
      if (letter.size() != 1) throw Error(ErrorCode::InvalidSpec, "model letter must be one of A-F");
      s = from_letter(letter[0], j.value("n_nodes", 64));
    } else {
      s.name = j.value("name", std::string("custom"));
      s.n_nodes = j.value("n_nodes", 64);
      s.conv_filters = j.at("conv_filters").get<std::vector<int>>();
      s.conv_orders = j.at("conv_orders").get<std::vector<int>>();
      s.fc_nodes = j.at("fc_nodes").get<std::vector<int>>();
      s.has_bn_fc = j.value("has_bn_fc", s.fc_nodes.size() > 1);
    }
    if (j.contains("conv_filters") && j.contains("model")) {
      s.conv_filters = j.at("conv_filters").get<std::vector<int>>();
    }
    s.n_classes = j.value("n_classes", s.n_classes);
    s.dropout_rate = j.value("dropout_rate", s.dropout_rate);
    s.per_node_bias = j.value("per_node_bias", s.per_node_bias);
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidSpec, std::string("model spec JSON: ") + e.what());
  }
}

nlohmann::json ModelSpec::to_json() const {
  return {{"name", name},           {"n_nodes", n_nodes},         {"n_classes", n_classes},
          {"conv_filters", conv_filters}, {"conv_orders", conv_orders}, {"fc_nodes", fc_nodes},
          {"has_bn_fc", has_bn_fc}, {"dropout_rate", dropout_rate}, {"per_node_bias", per_node_bias}};
}

Network Network::build(const ModelSpec& spec, std::uint64_t seed) {
  spec.validate();
  Network net;
  net.spec_ = spec;
  net.rng_ = ad::Rng(seed);
  const int n = spec.n_nodes;
  int f_in = 1;
  for (size_t i = 0; i < spec.conv_filters.size(); ++i) {
    const int f_out = spec.conv_filters[i];
    const int k = spec.conv_orders[i];
    net.params_.add(layer_name("conv", i) + ".theta", {k, f_in, f_out},
                    glorot(net.rng_, static_cast<size_t>(k) * f_in * f_out, f_in, f_out));
    if (spec.per_node_bias) {
      net.params_.add(layer_name("conv", i) + ".bias", {n, f_out},
                      std::vector<double>(static_cast<size_t>(n) * f_out, 0.0));
    } else {
      net.params_.add(layer_name("conv", i) + ".bias", {f_out}, std::vector<double>(f_out, 0.0));
    }
    net.params_.add(layer_name("bnc", i) + ".gamma", {f_out}, std::vector<double>(f_out, 1.0));
    net.params_.add(layer_name("bnc", i) + ".beta", {f_out}, std::vector<double>(f_out, 0.0));
    net.bn_.emplace_back(f_out);
    f_in = f_out;
  }
  int d_in = f_in;
  for (size_t j = 0; j < spec.fc_nodes.size(); ++j) {
    const int d_out = spec.fc_nodes[j];
    net.params_.add(layer_name("fc", j) + ".weight", {d_in, d_out},
                    glorot(net.rng_, static_cast<size_t>(d_in) * d_out, d_in, d_out));
    net.params_.add(layer_name("fc", j) + ".bias", {d_out}, std::vector<double>(d_out, 0.0));
    if (j + 1 < spec.fc_nodes.size() && spec.has_bn_fc) {
      net.params_.add(layer_name("bnfc", j) + ".gamma", {d_out}, std::vector<double>(d_out, 1.0));
      net.params_.add(layer_name("bnfc", j) + ".beta", {d_out}, std::vector<double>(d_out, 0.0));
      net.bn_.emplace_back(d_out);
    }
    d_in = d_out;
  }
  net.params_.snapshot();
  return net;
}

void Network::set_fixed_adjacency(const graph::Graph& g, const graph::LaplacianOptions& opts) {
  if (g.n_nodes() != spec_.n_nodes) {
    throw Error(ErrorCode::ShapeMismatch, "adjacency has " + std::to_string(g.n_nodes()) +
                                              " nodes, model expects " + std::to_string(spec_.n_nodes));
  }
  const auto bundle = graph::laplacian_bundle(g, opts);
  fixed_terms_ = ad::basis_tensor(graph::chebyshev_basis(bundle, spec_.max_order()));
  mask_enabled_ = false;
}

void Network::enable_mask(const graph::Matrix& original, const graph::Matrix& mask,
                          const graph::Matrix& support, const graph::LaplacianOptions& opts) {
  const int n = spec_.n_nodes;
  if (original.rows() != n || original.cols() != n || mask.rows() != n || mask.cols() != n ||
      support.rows() != n || support.cols() != n) {
    throw Error(ErrorCode::ShapeMismatch, "mask matrices must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  original_ = original;
  lap_opts_ = opts;
  if (!params_.contains(kMaskName)) {
    params_.add(kMaskName, {n, n}, std::vector<double>(static_cast<size_t>(n) * n, 0.0), false);
  }
  mask_enabled_ = true;
  set_mask(mask, support);
}

void Network::set_mask(const graph::Matrix& values, const graph::Matrix& support) {
  auto& p = params_.get(kMaskName);
  const int n = spec_.n_nodes;
  auto v = p.tensor.mutable_value();
  p.frozen.assign(v.size(), 0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const size_t idx = static_cast<size_t>(i) * n + j;
      const bool live = support(i, j) != 0.0 && i != j;
      v[idx] = live ? values(i, j) : 0.0;
      p.frozen[idx] = live ? 0 : 1;
    }
  }
  std::fill(p.m.begin(), p.m.end(), 0.0);
  std::fill(p.v.begin(), p.v.end(), 0.0);
}

graph::Matrix Network::mask_values() const {
  const int n = spec_.n_nodes;
  const auto& p = params_.get(kMaskName);
  graph::Matrix m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = p.tensor.at(static_cast<size_t>(i) * n + j);
  }
  return m;
}

graph::Matrix Network::mask_support() const {
  const int n = spec_.n_nodes;
  const auto& p = params_.get(kMaskName);
  graph::Matrix m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = p.frozen[static_cast<size_t>(i) * n + j] ? 0.0 : 1.0;
  }
  return m;
}

ad::Tensor Network::basis_terms(std::vector<int>* isolated) const {
  if (mask_enabled_) {
    const auto& mask = params_.get(kMaskName).tensor;
    return ad::chebyshev_terms(ad::scaled_laplacian(mask, original_, lap_opts_, isolated),
                               spec_.max_order());
  }
  if (!fixed_terms_.defined()) throw Error(ErrorCode::InvalidConfig, "network has no adjacency");
  if (isolated) isolated->clear();
  return fixed_terms_;
}

ad::Tensor Network::forward(const ad::Tensor& x, ad::Mode mode) { return forward(x, basis_terms(), mode); }

ad::Tensor Network::forward(const ad::Tensor& x, const ad::Tensor& terms, ad::Mode mode) {
  if (x.rank() != 3 || x.dim(1) != spec_.n_nodes || x.dim(2) != 1) {
    throw Error(ErrorCode::ShapeMismatch, "input must be [B, " + std::to_string(spec_.n_nodes) +
                                              ", 1], got " + ad::shape_string(x.shape()));
  }
  ad::check_finite(x.value(), "network input");
  size_t bn = 0;
  ad::Tensor h = x;
  for (size_t i = 0; i < spec_.conv_filters.size(); ++i) {
    const auto& theta = params_.get(layer_name("conv", i) + ".theta").tensor;
    ad::Tensor bias = params_.get(layer_name("conv", i) + ".bias").tensor;
    if (!spec_.per_node_bias) bias = repeat_rows(bias, spec_.n_nodes);
    h = ad::cheb_conv(h, terms, theta, bias);
    h = ad::batch_norm(h, params_.get(layer_name("bnc", i) + ".gamma").tensor,
                       params_.get(layer_name("bnc", i) + ".beta").tensor, bn_[bn++], mode);
    h = ad::relu(h);
  }
  h = ad::global_mean_pool(h);
  for (size_t j = 0; j < spec_.fc_nodes.size(); ++j) {
    h = ad::fully_connected(h, params_.get(layer_name("fc", j) + ".weight").tensor,
                            params_.get(layer_name("fc", j) + ".bias").tensor);
    if (j + 1 == spec_.fc_nodes.size()) break;
    if (spec_.has_bn_fc) {
      h = ad::batch_norm(h, params_.get(layer_name("bnfc", j) + ".gamma").tensor,
                         params_.get(layer_name("bnfc", j) + ".beta").tensor, bn_[bn++], mode);
    }
    h = ad::relu(h);
    h = ad::dropout(h, spec_.dropout_rate, mode, rng_);
  }
  return h;
}

void Network::reset_running_stats() {
  for (auto& s : bn_) s.reset();
}

std::vector<ad::NamedArray> Network::state_arrays() const {
  std::vector<ad::NamedArray> out;
  for (const auto& p : params_.all()) {
    out.push_back({p.name, p.tensor.shape(), {p.tensor.value().begin(), p.tensor.value().end()}});
    if (!p.frozen.empty()) {
      ad::NamedArray support{p.name + ".support", p.tensor.shape(), {}};
      for (auto f : p.frozen) support.values.push_back(f ? 0.0 : 1.0);
      out.push_back(std::move(support));
    }
  }
  for (size_t i = 0; i < bn_.size(); ++i) {
    const int f = static_cast<int>(bn_[i].running_mean.size());
    out.push_back({"bn" + std::to_string(i) + ".running_mean", {f}, bn_[i].running_mean});
    out.push_back({"bn" + std::to_string(i) + ".running_var", {f}, bn_[i].running_var});
  }
  return out;
}

void Network::load_state_arrays(const std::vector<ad::NamedArray>& arrays) {
  for (const auto& a : arrays) {
    if (a.name.rfind("bn", 0) == 0 && a.name.find(".running_") != std::string::npos) {
      const auto dot = a.name.find('.');
      const size_t i = std::stoul(a.name.substr(2, dot - 2));
      if (i >= bn_.size()) throw Error(ErrorCode::ShapeMismatch, "checkpoint has extra " + a.name);
      auto& dst = a.name.ends_with("running_mean") ? bn_[i].running_mean : bn_[i].running_var;
      if (dst.size() != a.values.size()) throw Error(ErrorCode::ShapeMismatch, a.name);
      dst = a.values;
      continue;
    }
    if (a.name.ends_with(".support")) continue;
    auto& p = params_.get(a.name);
    if (p.tensor.shape() != a.shape) throw Error(ErrorCode::ShapeMismatch, "checkpoint shape for " + a.name);
    std::copy(a.values.begin(), a.values.end(), p.tensor.mutable_value().begin());
  }
  for (const auto& a : arrays) {
    if (!a.name.ends_with(".support")) continue;
    auto& p = params_.get(a.name.substr(0, a.name.size() - 8));
    p.frozen.assign(a.values.size(), 0);
    for (size_t i = 0; i < a.values.size(); ++i) p.frozen[i] = a.values[i] == 0.0 ? 1 : 0;
  }
}

ad::Tensor batch_tensor(const SampleSet& s, std::span<const size_t> indices) {
  const int n = s.n_nodes;
  std::vector<double> x(indices.size() * static_cast<size_t>(n));
  for (size_t b = 0; b < indices.size(); ++b) {
    std::copy_n(s.x.begin() + static_cast<std::ptrdiff_t>(indices[b] * n), n,
                x.begin() + static_cast<std::ptrdiff_t>(b * n));
  }
  return ad::Tensor::from({static_cast<int>(indices.size()), n, 1}, std::move(x));
}

double train_epoch(Network& net, const SampleSet& train, const TrainOptions& opts) {
  if (train.size() == 0) throw Error(ErrorCode::EmptySplit, "empty training split");
  if (opts.batch_size < 2) throw Error(ErrorCode::InvalidConfig, "batch size must be >= 2");
  std::vector<size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  auto& rng = net.rng();
  for (size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

  double loss_sum = 0.0;
  size_t counted = 0;
  for (size_t start = 0; start < order.size(); start += static_cast<size_t>(opts.batch_size)) {
    const size_t end = std::min(order.size(), start + static_cast<size_t>(opts.batch_size));
    if (end - start < 2) continue;
    std::span<const size_t> idx(order.data() + start, end - start);
    const ad::Tensor x = batch_tensor(train, idx);
    std::vector<int> y(idx.size());
    for (size_t b = 0; b < idx.size(); ++b) y[b] = train.y[idx[b]];
    net.params().zero_grad();
    ad::Tensor loss = ad::softmax_cross_entropy(net.forward(x, ad::Mode::Train), y);
    if (!std::isfinite(loss.item())) throw Error(ErrorCode::NonFiniteLoss, "training loss is not finite");
    loss.backward();
    ad::adam_step(net.params(), opts.adam);
    loss_sum += loss.item() * static_cast<double>(idx.size());
    counted += idx.size();
  }
  return counted ? loss_sum / static_cast<double>(counted) : 0.0;
}

std::vector<int> predict(Network& net, const SampleSet& s, int batch_size) {
  ad::NoGradGuard no_grad;
  const ad::Tensor terms = net.basis_terms();
  const int classes = net.spec().n_classes;
  std::vector<int> out;
  out.reserve(s.size());
  std::vector<size_t> idx;
  for (size_t start = 0; start < s.size(); start += static_cast<size_t>(batch_size)) {
    const size_t end = std::min(s.size(), start + static_cast<size_t>(batch_size));
    idx.resize(end - start);
    std::iota(idx.begin(), idx.end(), start);
    const ad::Tensor logits = net.forward(batch_tensor(s, idx), terms, ad::Mode::Eval);
    const auto z = logits.value();
    for (size_t b = 0; b < idx.size(); ++b) {
      const double* row = z.data() + b * classes;
      out.push_back(static_cast<int>(std::max_element(row, row + classes) - row));
    }
  }
  return out;
}

double evaluate_accuracy(Network& net, const SampleSet& s, int batch_size) {
  if (s.size() == 0) throw Error(ErrorCode::EmptySplit, "empty split");
  const auto pred = predict(net, s, batch_size);
  size_t correct = 0;
  for (size_t i = 0; i < pred.size(); ++i) correct += pred[i] == s.y[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(s.size());
}

Metrics predict_metrics(Network& net, const SampleSet& s, int batch_size) {
  if (s.size() == 0) throw Error(ErrorCode::EmptySplit, "empty split");
  const auto pred = predict(net, s, batch_size);
  return compute_metrics(s.y, pred, net.spec().n_classes);
}

}  // namespace eegglt::net
