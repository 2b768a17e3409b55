#include <benchmark/benchmark.h>

#include <numeric>
#include <random>

#include "eegglt/chebnet.hpp"
#include "eegglt/layers.hpp"

using namespace eegglt;

namespace {

std::vector<double> noise(size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  for (auto& x : v) x = d(gen);
  return v;
}

void BM_ChebConvForwardBackward(benchmark::State& state) {
  const int b = 64, n = 64, fi = static_cast<int>(state.range(0)), fo = 2 * fi, k = 2;
  const auto bundle = graph::laplacian_bundle(graph::complete_graph(n));
  const auto terms = ad::basis_tensor(graph::chebyshev_basis(bundle, k));
  auto x = ad::Tensor::from({b, n, fi}, noise(static_cast<size_t>(b * n * fi), 1), true);
  auto theta = ad::Tensor::from({k, fi, fo}, noise(static_cast<size_t>(k * fi * fo), 2), true);
  auto bias = ad::Tensor::from({n, fo}, noise(static_cast<size_t>(n * fo), 3), true);
  std::vector<int> labels(b);
  for (int i = 0; i < b; ++i) labels[i] = i % fo;
  for (auto _ : state) {
    auto y = ad::cheb_conv(x, terms, theta, bias);
    auto loss = ad::softmax_cross_entropy(ad::global_mean_pool(y), labels);
    loss.backward();
    benchmark::DoNotOptimize(loss.item());
  }
}
BENCHMARK(BM_ChebConvForwardBackward)->Arg(1)->Arg(16)->Arg(64);

void BM_TrainEpochDeskModel(benchmark::State& state) {
  auto spec = net::ModelSpec::from_letter('D', 8);
  for (auto& f : spec.conv_filters) f = std::min(f, 8);
  auto netw = net::Network::build(spec, 0);
  netw.set_fixed_adjacency(graph::complete_graph(8));
  net::SampleSet s;
  s.n_nodes = 8;
  s.x = noise(8 * 512, 4);
  for (int i = 0; i < 512; ++i) s.y.push_back(i % 4);
  net::TrainOptions opts;
  opts.batch_size = 64;
  for (auto _ : state) benchmark::DoNotOptimize(net::train_epoch(netw, s, opts));
}
BENCHMARK(BM_TrainEpochDeskModel)->Unit(benchmark::kMillisecond);

}  // namespace
