#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "eegglt/chebnet.hpp"
#include "eegglt/error.hpp"
#include "eegglt/synthetic.hpp"
#include "support.hpp"

using namespace eegglt;
using ad::Mode;
using ad::Tensor;

namespace {

net::ModelSpec small_spec() {
  net::ModelSpec s;
  s.name = "small";
  s.n_nodes = 6;
  s.conv_filters = {3, 2};
  s.conv_orders = {3, 2};
  s.fc_nodes = {5, 4};
  return s;
}

net::SampleSet random_samples(int n_nodes, int count, std::mt19937_64& gen) {
  net::SampleSet s;
  s.n_nodes = n_nodes;
  s.x = testing_support::random_values(static_cast<size_t>(n_nodes * count), gen, -2, 2);
  for (int i = 0; i < count; ++i) s.y.push_back(i % 4);
  return s;
}

std::vector<size_t> iota(size_t n) {
  std::vector<size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

void randomize(net::Network& net, std::mt19937_64& gen) {
  for (auto& p : net.params().all()) {
    if (p.name == "adjacency_mask") continue;
    for (auto& v : p.tensor.mutable_value()) v += std::uniform_real_distribution<double>(-0.3, 0.3)(gen);
  }
}

}  // namespace

TEST(ModelSpec, ReferenceLetters) {
  const auto a = net::ModelSpec::from_letter('A');
  EXPECT_EQ(a.conv_filters, (std::vector<int>{16, 32, 64, 128, 256, 512}));
  EXPECT_EQ(a.conv_orders, (std::vector<int>(6, 5)));
  EXPECT_EQ(a.fc_nodes, (std::vector<int>{1024, 2048, 4}));
  const auto d = net::ModelSpec::from_letter('d');
  EXPECT_EQ(d.name, "D");
  EXPECT_EQ(d.conv_orders, (std::vector<int>(5, 2)));
  EXPECT_EQ(d.fc_nodes, (std::vector<int>{4}));
  const auto f = net::ModelSpec::from_letter('F');
  EXPECT_EQ(f.conv_filters, (std::vector<int>{64, 128, 256, 512, 1024}));
  EXPECT_EQ(f.fc_nodes, (std::vector<int>{512, 128, 4}));
  EXPECT_THROW(net::ModelSpec::from_letter('G'), Error);
}

TEST(ModelSpec, ValidationAndJson) {
  auto s = small_spec();
  s.fc_nodes = {5, 3};
  EXPECT_THROW(s.validate(), Error);
  s = small_spec();
  s.conv_orders = {3};
  EXPECT_THROW(s.validate(), Error);
  const auto back = net::ModelSpec::from_json(small_spec().to_json());
  EXPECT_EQ(back.conv_filters, small_spec().conv_filters);
  EXPECT_EQ(back.fc_nodes, small_spec().fc_nodes);
  EXPECT_EQ(net::ModelSpec::from_json({{"model", "C"}, {"n_nodes", 8}}).n_nodes, 8);
  EXPECT_THROW(net::ModelSpec::from_json({{"conv_filters", "x"}}), Error);
}

TEST(ModelSpec, ParameterCountClosedForm) {
  // Model D, N = 64: sum K*Fin*Fout + N*Fout + 2*Fout over conv layers, plus 256*4 + 4.
  const auto d = net::ModelSpec::from_letter('D');
  const long theta = 2L * (1 * 16 + 16 * 32 + 32 * 64 + 64 * 128 + 128 * 256);
  const long bias = 64L * (16 + 32 + 64 + 128 + 256);
  const long bn = 2L * (16 + 32 + 64 + 128 + 256);
  EXPECT_EQ(d.parameter_count(), static_cast<size_t>(theta + bias + bn + 256 * 4 + 4));
  for (char letter : std::string("ABCDEF")) {
    const auto spec = net::ModelSpec::from_letter(letter, 8);
    const auto netw = net::Network::build(spec, 1);
    size_t actual = 0;
    for (const auto& p : netw.params().all()) actual += p.tensor.size();
    EXPECT_EQ(actual, spec.parameter_count()) << letter;
  }
}

TEST(Network, EvalIsBatchPermutationInvariant) {
  std::mt19937_64 gen(1);
  auto netw = net::Network::build(small_spec(), 3);
  netw.set_fixed_adjacency(graph::Graph{testing_support::random_symmetric_adjacency(6, gen)});
  randomize(netw, gen);
  const auto s = random_samples(6, 12, gen);
  auto idx = iota(12);
  const auto base = netw.forward(net::batch_tensor(s, idx), Mode::Eval);
  std::shuffle(idx.begin(), idx.end(), gen);
  const auto perm = netw.forward(net::batch_tensor(s, idx), Mode::Eval);
  for (size_t r = 0; r < 12; ++r) {
    for (int o = 0; o < 4; ++o) EXPECT_EQ(perm.at(r * 4 + o), base.at(idx[r] * 4 + o));
  }
}

TEST(Network, LogitsInvariantToNodeRelabeling) {
  std::mt19937_64 gen(2);
  const int n = 6;
  const graph::Matrix a = testing_support::random_symmetric_adjacency(n, gen);
  std::vector<int> pi(n);
  std::iota(pi.begin(), pi.end(), 0);
  std::shuffle(pi.begin(), pi.end(), gen);
  graph::Matrix pa(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) pa(pi[i], pi[j]) = a(i, j);
  }
  auto net1 = net::Network::build(small_spec(), 5);
  auto net2 = net::Network::build(small_spec(), 5);
  randomize(net1, gen);
  // Copy parameters; per-node bias rows move with their node.
  for (auto& p : net1.params().all()) {
    auto dst = net2.params().get(p.name).tensor.mutable_value();
    const auto src = p.tensor.value();
    if (p.name.find(".bias") != std::string::npos && p.name.rfind("conv", 0) == 0) {
      const int f = p.tensor.dim(1);
      for (int i = 0; i < n; ++i) {
        for (int c = 0; c < f; ++c) dst[pi[i] * f + c] = src[i * f + c];
      }
    } else {
      std::copy(src.begin(), src.end(), dst.begin());
    }
  }
  net1.set_fixed_adjacency(graph::Graph{a});
  net2.set_fixed_adjacency(graph::Graph{pa});
  auto s = random_samples(n, 8, gen);
  auto ps = s;
  for (int b = 0; b < 8; ++b) {
    for (int i = 0; i < n; ++i) ps.x[b * n + pi[i]] = s.x[b * n + i];
  }
  const auto l1 = net1.forward(net::batch_tensor(s, iota(8)), Mode::Eval);
  const auto l2 = net2.forward(net::batch_tensor(ps, iota(8)), Mode::Eval);
  for (size_t i = 0; i < l1.size(); ++i) EXPECT_NEAR(l1.at(i), l2.at(i), 1e-9);
}

TEST(Network, EndToEndGradientIncludingMask) {
  for (int seed = 0; seed < 20; ++seed) {
    std::mt19937_64 gen(1000 + seed);
    auto netw = net::Network::build(small_spec(), seed);
    graph::Matrix mask = graph::Matrix::Ones(6, 6);
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) mask(i, j) = i == j ? 0.0 : std::uniform_real_distribution<double>(0.5, 1.5)(gen);
    }
    graph::Matrix support = graph::Matrix::Ones(6, 6);
    support.diagonal().setZero();
    netw.enable_mask(graph::complete_graph(6).adjacency, mask, support);
    randomize(netw, gen);
    const auto s = random_samples(6, 8, gen);
    const auto x = net::batch_tensor(s, iota(8));
    const ad::Rng saved = netw.rng();
    std::vector<Tensor> wrt;
    for (auto& p : netw.params().all()) wrt.push_back(p.tensor);
    const double err = testing_support::worst_gradient_error(
        [&] {
          netw.rng() = saved;
          return ad::softmax_cross_entropy(netw.forward(x, Mode::Train), s.y);
        },
        wrt);
    EXPECT_LT(err, 1e-4) << "seed " << seed;
  }
}

TEST(Network, MaskSupportFreezesEntries) {
  auto netw = net::Network::build(small_spec(), 1);
  graph::Matrix support = graph::Matrix::Ones(6, 6);
  support.diagonal().setZero();
  support(0, 1) = 0;
  graph::Matrix mask = support;
  netw.enable_mask(graph::complete_graph(6).adjacency, mask, support);
  ASSERT_TRUE(netw.mask_enabled());
  std::mt19937_64 gen(3);
  const auto s = random_samples(6, 16, gen);
  net::TrainOptions opts;
  opts.batch_size = 8;
  net::train_epoch(netw, s, opts);
  EXPECT_EQ(netw.mask_values()(0, 1), 0.0);
  EXPECT_EQ(netw.mask_values()(2, 2), 0.0);
  EXPECT_NE(netw.mask_values()(1, 0), 1.0);
  EXPECT_EQ(netw.mask_support(), support);
}

TEST(Network, CheckpointRestoresOutputs) {
  std::mt19937_64 gen(4);
  auto a = net::Network::build(small_spec(), 1);
  a.set_fixed_adjacency(graph::complete_graph(6));
  const auto s = random_samples(6, 32, gen);
  net::TrainOptions opts;
  opts.batch_size = 8;
  net::train_epoch(a, s, opts);
  auto b = net::Network::build(small_spec(), 99);
  b.set_fixed_adjacency(graph::complete_graph(6));
  b.load_state_arrays(a.state_arrays());
  const auto x = net::batch_tensor(s, iota(32));
  const auto la = a.forward(x, Mode::Eval);
  const auto lb = b.forward(x, Mode::Eval);
  for (size_t i = 0; i < la.size(); ++i) EXPECT_EQ(la.at(i), lb.at(i));
}

TEST(Network, InputShapeIsChecked) {
  auto netw = net::Network::build(small_spec(), 1);
  EXPECT_THROW(netw.forward(Tensor::zeros({2, 6, 1}), Mode::Eval), Error);  // no adjacency yet
  netw.set_fixed_adjacency(graph::complete_graph(6));
  EXPECT_THROW(netw.forward(Tensor::zeros({2, 5, 1}), Mode::Eval), Error);
  EXPECT_THROW(netw.set_fixed_adjacency(graph::complete_graph(5)), Error);
}

TEST(Training, AdamLossDecreasesOnSeparableToy) {
  // Two classes split by the sign of a fixed random direction; single dense layer.
  std::mt19937_64 gen(17);
  std::normal_distribution<double> d;
  const int m = 64, dim = 5;
  std::vector<double> dir(dim);
  for (auto& v : dir) v = d(gen);
  std::vector<double> x(static_cast<size_t>(m * dim));
  std::vector<int> y(m);
  for (int i = 0; i < m; ++i) {
    double proj = 0.0;
    for (int j = 0; j < dim; ++j) {
      x[i * dim + j] = d(gen);
      proj += x[i * dim + j] * dir[j];
    }
    y[i] = proj > 0 ? 1 : 0;
    for (int j = 0; j < dim; ++j) x[i * dim + j] += (y[i] ? 1.0 : -1.0) * dir[j];
  }
  ad::ParamState ps;
  auto& w = ps.add("w", {dim, 2}, std::vector<double>(dim * 2, 0.0));
  auto& b = ps.add("b", {2}, {0.0, 0.0});
  ps.snapshot();
  const auto xt = Tensor::from({m, dim}, x);
  ad::AdamConfig cfg;
  cfg.learning_rate = 0.1;
  std::vector<double> losses;
  for (int step = 0; step < 50; ++step) {
    ps.zero_grad();
    auto loss = ad::softmax_cross_entropy(ad::fully_connected(xt, w, b), y);
    losses.push_back(loss.item());
    loss.backward();
    ad::adam_step(ps, cfg);
  }
  for (size_t i = 6; i < losses.size(); ++i) EXPECT_LE(losses[i], losses[i - 1]) << i;
  EXPECT_LT(losses.back(), 0.1 * losses.front());
}

TEST(Training, ShrunkenModelDFitsPlantedTask) {
  auto spec = net::ModelSpec::from_letter('D', 8);
  spec.conv_filters = {2, 2, 2, 2, 2};
  synth::PlantedOptions po;
  po.seed = 1;
  const auto task = synth::make_planted_task(po);
  auto netw = net::Network::build(spec, 1);
  netw.set_fixed_adjacency(graph::Graph{task.informative});
  net::TrainOptions opts;
  opts.batch_size = 64;
  const int steps_per_epoch = static_cast<int>(task.train.size() / 64);
  int steps = 0;
  while (steps < 300) {
    net::train_epoch(netw, task.train, opts);
    steps += steps_per_epoch;
  }
  EXPECT_GT(net::evaluate_accuracy(netw, task.train), 0.90);
}

TEST(Training, SameSeedSameResult) {
  std::mt19937_64 gen(6);
  const auto s = random_samples(6, 48, gen);
  auto run = [&] {
    auto netw = net::Network::build(small_spec(), 7);
    netw.set_fixed_adjacency(graph::complete_graph(6));
    net::TrainOptions opts;
    opts.batch_size = 16;
    net::train_epoch(netw, s, opts);
    return net::train_epoch(netw, s, opts);
  };
  EXPECT_EQ(run(), run());
}

TEST(Training, EmptySplitIsRejected) {
  auto netw = net::Network::build(small_spec(), 1);
  netw.set_fixed_adjacency(graph::complete_graph(6));
  net::SampleSet empty;
  empty.n_nodes = 6;
  EXPECT_THROW(net::train_epoch(netw, empty, {}), Error);
  EXPECT_THROW(net::evaluate_accuracy(netw, empty), Error);
}
