#pragma once

// Synthetic data: surrogate EDF subjects shaped like the motor imagery corpus,
// and small planted-graph classification tasks with known informative edges.

#include <cstdint>
#include <filesystem>

#include "eegglt/chebnet.hpp"
#include "eegglt/edf.hpp"
#include "eegglt/graph.hpp"

namespace eegglt::synth {

struct SurrogateOptions {
  int n_channels = 64;
  double fs = 160.0;
  int task_trials = 15;  // per run, each preceded by a rest period
  double task_s = 4.1;
  double rest_s = 4.2;
  int n_sources = 8;
  double source_uv = 20.0;
  double class_uv = 15.0;
  double line_noise_uv = 8.0;
  double sensor_noise_uv = 3.0;
  std::uint64_t seed = 0;
};

/// One EDF+ run. The spatial mixing depends on the subject, so channel
/// correlations differ between subjects; the class effect is a 10 Hz rhythm
/// on a class-specific source.
edf::Recording make_surrogate_run(int subject, int run, const SurrogateOptions& opts = {});

/// Writes `<dir>/S###/S###R##.edf` for every imagery run.
void write_surrogate_subject(const std::filesystem::path& dir, int subject, const SurrogateOptions& opts = {});

struct PlantedOptions {
  int n_nodes = 8;
  int train_per_class = 400;
  int val_per_class = 150;
  int test_per_class = 150;
  double amplitude_a = 1.0;
  double amplitude_b = 3.0;
  double distractor = 1.0;
  /// Factor applied to a triangle's middle node when its class bit is clear.
  double incoherent_gain = -0.5;
  double noise = 0.05;
  std::uint64_t seed = 0;
};

/// Four-class task over two node triangles {0,1,2} and {3,4,5}. Each triangle
/// carries one shared value; class bit 0 says whether triangle A's middle node
/// follows it or is scaled by incoherent_gain, bit 1 the same for triangle B.
/// The remaining nodes carry unrelated noise. The informative edges are the 12
/// directed triangle edges.
struct PlantedTask {
  net::SampleSet train;
  net::SampleSet val;
  net::SampleSet test;
  graph::Matrix informative;
};

PlantedTask make_planted_task(const PlantedOptions& opts = {});

/// Two-class task whose label is the sign of the coupling between nodes u and v.
struct EdgeSignTask {
  net::SampleSet train;
  net::SampleSet val;
  int u = 0;
  int v = 1;
};

EdgeSignTask make_edge_sign_task(int n_nodes, int u, int v, int samples_per_class, std::uint64_t seed,
                                 double noise = 0.1);

}  // namespace eegglt::synth
