#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <string>
#include <vector>

#include "eegglt/tensor.hpp"

namespace eegglt::ad {

struct AdamConfig {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

struct Parameter {
  std::string name;
  Tensor tensor;
  std::vector<double> initial;  // rewind snapshot
  std::vector<double> m;        // Adam first moment
  std::vector<double> v;        // Adam second moment
  /// Entries with frozen[i] != 0 are never updated (pruned mask entries).
  std::vector<std::uint8_t> frozen;
  /// Rewind restores this parameter; the adjacency mask opts out.
  bool rewindable = true;
};

/// Every trainable tensor of a network plus its rewind snapshot and optimizer moments.
class ParamState {
 public:
  /// The returned reference stays valid as more parameters are added.
  Tensor& add(std::string name, Shape shape, std::vector<double> values, bool rewindable = true);

  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;
  bool contains(const std::string& name) const;

  std::deque<Parameter>& all() { return params_; }
  const std::deque<Parameter>& all() const { return params_; }

  long step() const { return step_; }
  void set_step(long s) { step_ = s; }

  /// theta0 := theta for every parameter.
  void snapshot();
  bool has_snapshot() const { return has_snapshot_; }
  /// theta := theta0 for rewindable parameters; zeroes all Adam moments and the step counter.
  void rewind();
  void zero_grad();

  /// Element count over rewindable parameters.
  size_t rewindable_count() const;

 private:
  std::deque<Parameter> params_;
  long step_ = 0;
  bool has_snapshot_ = false;
};

/// One bias-corrected Adam update using each parameter's accumulated gradient.
void adam_step(ParamState& params, const AdamConfig& cfg);

struct NamedArray {
  std::string name;
  Shape shape;
  std::vector<double> values;
};

/// Binary checkpoint: magic "EGLTCKPT", u32 version, u32 count, then per entry
/// u32 name length, name bytes, u32 rank, i32 dims, f64 values (all little-endian).
void save_checkpoint(const std::filesystem::path& path, const std::vector<NamedArray>& arrays);
std::vector<NamedArray> load_checkpoint(const std::filesystem::path& path);

}  // namespace eegglt::ad
