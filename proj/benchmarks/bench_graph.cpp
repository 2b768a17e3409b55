#include <benchmark/benchmark.h>

#include <random>

#include "eegglt/graph.hpp"

using namespace eegglt;

namespace {

graph::Graph random_graph(int n) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> w(0.05, 1.0);
  graph::Matrix a = graph::Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) a(i, j) = a(j, i) = w(gen);
  }
  return {a};
}

void BM_LaplacianBundle(benchmark::State& state) {
  const auto g = random_graph(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(graph::laplacian_bundle(g));
}
BENCHMARK(BM_LaplacianBundle)->Arg(8)->Arg(64);

void BM_ChebyshevBasis(benchmark::State& state) {
  const auto bundle = graph::laplacian_bundle(random_graph(64));
  for (auto _ : state) benchmark::DoNotOptimize(graph::chebyshev_basis(bundle, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_ChebyshevBasis)->Arg(2)->Arg(5);

void BM_RecurrenceVsEigen(benchmark::State& state) {
  const auto bundle = graph::laplacian_bundle(random_graph(64));
  const std::vector<double> theta{0.3, -0.2, 0.5, 0.1, -0.4};
  const graph::Vector x = graph::Vector::Ones(64);
  const bool eigen = state.range(0) == 1;
  const auto basis = graph::chebyshev_basis(bundle, 5);
  for (auto _ : state) {
    if (eigen) benchmark::DoNotOptimize(graph::spectral_conv_oracle(bundle, theta, x));
    else benchmark::DoNotOptimize(graph::chebyshev_filter(basis, theta, x));
  }
}
BENCHMARK(BM_RecurrenceVsEigen)->Arg(0)->Arg(1);

void BM_PccAdjacency(benchmark::State& state) {
  std::mt19937_64 gen(2);
  std::normal_distribution<double> d;
  graph::Matrix s(64, state.range(0));
  for (auto& v : s.reshaped()) v = d(gen);
  for (auto _ : state) benchmark::DoNotOptimize(graph::pcc_adjacency(s));
}
BENCHMARK(BM_PccAdjacency)->Arg(320)->Arg(4800);

}  // namespace
