#include "eegglt/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "eegglt/dataset.hpp"
#include "eegglt/error.hpp"
#include "eegglt/tensor.hpp"

namespace eegglt::synth {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

edf::Recording make_surrogate_run(int subject, int run, const SurrogateOptions& opts) {
  if (opts.n_channels < 1 || opts.n_sources < data::kClassCount || opts.task_trials < 1 || !(opts.fs > 0)) {
    throw Error(ErrorCode::InvalidConfig, "surrogate options out of range");
  }
  const int fs = static_cast<int>(std::lround(opts.fs));
  const double period = opts.rest_s + opts.task_s;
  const long n_records = static_cast<long>(std::ceil(opts.task_trials * period + 1.0));
  const long n = n_records * fs;

  ad::Rng mix_rng(opts.seed * 7919ULL + static_cast<std::uint64_t>(subject) * 104729ULL + 17ULL);
  graph::Matrix mixing(opts.n_channels, opts.n_sources);
  for (int c = 0; c < opts.n_channels; ++c) {
    for (int k = 0; k < opts.n_sources; ++k) mixing(c, k) = mix_rng.normal();
  }
  std::vector<double> line_phase(opts.n_channels);
  for (auto& p : line_phase) p = mix_rng.uniform(0.0, kTwoPi);

  ad::Rng rng(opts.seed * 1000003ULL + static_cast<std::uint64_t>(subject) * 101ULL + static_cast<std::uint64_t>(run));
  std::vector<edf::Annotation> events;
  std::vector<int> class_at(static_cast<size_t>(n), -1);
  for (int t = 0; t < opts.task_trials; ++t) {
    const double rest_onset = t * period;
    const double task_onset = rest_onset + opts.rest_s;
    events.push_back({rest_onset, opts.rest_s, "T0"});
    const std::string code = rng.uniform() < 0.5 ? "T1" : "T2";
    events.push_back({task_onset, opts.task_s, code});
    const int cls = static_cast<int>(data::label_for(run, code));
    const long b = std::lround(task_onset * fs);
    const long e = std::min(n, std::lround((task_onset + opts.task_s) * fs));
    for (long i = b; i < e; ++i) class_at[i] = cls;
  }

  graph::Matrix sources(opts.n_sources, n);
  const double rho = 0.95;
  const double innov = std::sqrt(1.0 - rho * rho);
  for (int k = 0; k < opts.n_sources; ++k) {
    double s = rng.normal();
    for (long i = 0; i < n; ++i) {
      s = rho * s + innov * rng.normal();
      sources(k, i) = opts.source_uv * s;
    }
  }
  const double phase = rng.uniform(0.0, kTwoPi);
  for (long i = 0; i < n; ++i) {
    if (class_at[i] >= 0) sources(class_at[i], i) += opts.class_uv * std::sin(kTwoPi * 10.0 * i / fs + phase);
  }
  const graph::Matrix mixed = mixing * sources / std::sqrt(static_cast<double>(opts.n_sources));

  edf::Recording rec;
  rec.header.patient = "X X X " + data::subject_dir_name(subject);
  rec.header.recording = "Startdate X X X surrogate";
  rec.header.reserved = "EDF+C";
  rec.header.n_records = n_records;
  rec.header.record_duration = 1.0;

  const auto layout = graph::default_layout();
  for (int c = 0; c < opts.n_channels; ++c) {
    edf::Signal s;
    if (static_cast<size_t>(c) < layout.names.size() && opts.n_channels == static_cast<int>(layout.size())) {
      s.label = layout.names[c];
    } else {
      s.label = "CH" + std::to_string(c + 1);
    }
    s.transducer = "surrogate";
    s.physical_dimension = "uV";
    s.physical_min = -3276.8;
    s.physical_max = 3276.7;
    s.digital_min = -32768;
    s.digital_max = 32767;
    s.samples_per_record = fs;
    s.digital.resize(static_cast<size_t>(n));
    s.physical.resize(static_cast<size_t>(n));
    for (long i = 0; i < n; ++i) {
      const double v = mixed(c, i) + opts.line_noise_uv * std::sin(kTwoPi * 50.0 * i / fs + line_phase[c]) +
                       opts.sensor_noise_uv * rng.normal();
      s.digital[i] = s.to_digital(v);
      s.physical[i] = s.to_physical(s.digital[i]);
    }
    rec.signals.push_back(std::move(s));
  }
  rec.signals.push_back(edf::annotation_signal(events, n_records, 1.0, 32));
  rec.annotations = events;
  rec.header.n_signals = static_cast<int>(rec.signals.size());
  rec.header.header_bytes = 256 * (rec.header.n_signals + 1);
  return rec;
}

void write_surrogate_subject(const std::filesystem::path& dir, int subject, const SurrogateOptions& opts) {
  const std::string name = data::subject_dir_name(subject);
  for (int run : data::kImageryRuns) {
    char file[32];
    std::snprintf(file, sizeof(file), "%sR%02d.edf", name.c_str(), run);
    edf::write_file(dir / name / file, make_surrogate_run(subject, run, opts));
  }
}

namespace {

void planted_sample(const PlantedOptions& o, int cls, ad::Rng& rng, std::vector<double>& x) {
  const int n = o.n_nodes;
  const size_t base = x.size();
  x.resize(base + n);
  auto triangle = [&](int first, bool coherent, double amp) {
    const double shared = rng.normal();
    for (int i = first; i < first + 3; ++i) x[base + i] = amp * shared;
    if (!coherent) x[base + first + 1] *= o.incoherent_gain;
  };
  triangle(0, (cls & 1) != 0, o.amplitude_a);
  triangle(3, (cls & 2) != 0, o.amplitude_b);
  for (int i = 6; i < n; ++i) x[base + i] = o.distractor * rng.normal();
  for (int i = 0; i < n; ++i) x[base + i] += o.noise * rng.normal();
}

net::SampleSet planted_split(const PlantedOptions& o, int per_class, ad::Rng& rng) {
  net::SampleSet s;
  s.n_nodes = o.n_nodes;
  for (int i = 0; i < per_class; ++i) {
    for (int c = 0; c < 4; ++c) {
      planted_sample(o, c, rng, s.x);
      s.y.push_back(c);
    }
  }
  return s;
}

}  // namespace

PlantedTask make_planted_task(const PlantedOptions& opts) {
  if (opts.n_nodes < 6) throw Error(ErrorCode::InvalidConfig, "planted task needs at least 6 nodes");
  ad::Rng rng(opts.seed);
  PlantedTask t;
  t.train = planted_split(opts, opts.train_per_class, rng);
  t.val = planted_split(opts, opts.val_per_class, rng);
  t.test = planted_split(opts, opts.test_per_class, rng);
  t.informative = graph::Matrix::Zero(opts.n_nodes, opts.n_nodes);
  for (int first : {0, 3}) {
    for (int i = first; i < first + 3; ++i) {
      for (int j = first; j < first + 3; ++j) {
        if (i != j) t.informative(i, j) = 1.0;
      }
    }
  }
  return t;
}

EdgeSignTask make_edge_sign_task(int n_nodes, int u, int v, int samples_per_class, std::uint64_t seed, double noise) {
  if (u == v || u < 0 || v < 0 || u >= n_nodes || v >= n_nodes) {
    throw Error(ErrorCode::InvalidConfig, "edge endpoints must be distinct nodes");
  }
  ad::Rng rng(seed);
  auto make = [&](int per_class) {
    net::SampleSet s;
    s.n_nodes = n_nodes;
    for (int i = 0; i < per_class; ++i) {
      for (int c = 0; c < 2; ++c) {
        const size_t base = s.x.size();
        s.x.resize(base + n_nodes);
        for (int k = 0; k < n_nodes; ++k) s.x[base + k] = rng.normal();
        s.x[base + v] = (c == 0 ? 1.0 : -1.0) * s.x[base + u] + noise * rng.normal();
        s.y.push_back(c);
      }
    }
    return s;
  };
  EdgeSignTask t;
  t.u = u;
  t.v = v;
  t.train = make(samples_per_class);
  t.val = make(std::max(1, samples_per_class / 4));
  return t;
}

}  // namespace eegglt::synth
