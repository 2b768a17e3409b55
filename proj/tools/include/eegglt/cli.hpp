#pragma once

// Command implementations behind the `eegglt` executable. Each command takes a
// resolved RunConfig, writes into `<out>/<subject>/<model>/<method>/` and
// throws eegglt::Error on failure; exit_code_for() maps errors to exit codes.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "eegglt/chebnet.hpp"
#include "eegglt/dataset.hpp"
#include "eegglt/graph.hpp"
#include "eegglt/macs.hpp"
#include "eegglt/pruner.hpp"

namespace eegglt::cli {

enum ExitCode : int { kOk = 0, kArgumentError = 2, kDataError = 3, kNumericError = 4 };

int exit_code_for(const std::exception& e);

struct RunConfig {
  std::string subject = "S1";
  /// Model letter A-F, or "custom" with model_json holding explicit lists.
  std::string model = "D";
  nlohmann::json model_json;
  std::string method = "eeg_glt";  // geodesic | pcc | eeg_glt
  std::string dataset = "subject";  // subject | planted
  glt::PruneConfig prune;
  int epochs = 1000;
  int batch_size = 1024;
  double learning_rate = 0.01;
  std::filesystem::path data_dir = "data";
  std::filesystem::path out_dir = "out";
  std::filesystem::path layout;  // empty: built-in 64-channel layout
  std::uint64_t seed = 0;
  bool desk_scale = false;
  int jobs = 1;
  /// Deterministic strided caps on split sizes; 0 keeps everything.
  int max_train_samples = 0;
  int max_eval_samples = 0;
  double notch_hz = 50.0;
  data::SplitRatios split;

  /// Overlays keys present in `j`; unknown keys raise InvalidConfig.
  void merge_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  /// Shrinks epochs, batch size, model width and sample counts for CI runs.
  void apply_desk_scale();
  void validate() const;

  net::ModelSpec model_spec(int n_nodes) const;
  std::string model_label() const;
  std::filesystem::path run_dir() const;
};

struct PreparedData {
  std::string subject_label;
  int n_nodes = 0;
  net::SampleSet train;
  net::SampleSet val;
  net::SampleSet test;
  graph::Matrix pcc_signal;  // channels x samples of the raw train split
};

PreparedData prepare_data(const RunConfig& cfg);

/// Geodesic or PCC adjacency for a fixed-graph run.
graph::Graph build_adjacency(const RunConfig& cfg, const PreparedData& data);

using Logger = std::function<void(const std::string&)>;

/// Writes adjacency.csv and returns its path. eeg_glt copies the selected ticket of an earlier glt run.
std::filesystem::path cmd_adjacency(const RunConfig& cfg, const Logger& log = {});

struct TrainResult {
  std::filesystem::path dir;
  Metrics train;
  Metrics val;
  Metrics test;
  int best_epoch = 0;
  double best_val_accuracy = 0.0;
};

/// Trains on a fixed adjacency; writes runlog.jsonl, metrics.csv, adjacency.csv, best.ckpt, final.ckpt.
TrainResult cmd_train(const RunConfig& cfg, const Logger& log = {});

struct GltResult {
  std::filesystem::path dir;
  glt::TicketSearch search;
};

/// Runs the ticket search; writes tickets/, runlog.jsonl, metrics.csv (accuracy vs density) and adjacency.csv.
GltResult cmd_glt(const RunConfig& cfg, const Logger& log = {});

struct MacsRequest {
  std::vector<std::string> models = {"A", "B", "C", "D", "E", "F"};
  std::vector<double> densities = {1.0};
  bool ladder = false;  // append every density of the pruning schedule
  macs::Convention convention = macs::Convention::RecurrenceSteps;
};

/// MACs CSV text (header plus one row per model and density).
std::string cmd_macs(const MacsRequest& req);

/// Percent saving, formatted to two decimals.
std::string format_saving(double baseline_macs, double ticket_macs);

/// Writes surrogate EDF subjects under `dir`.
void cmd_synth(const std::filesystem::path& dir, const std::vector<int>& subjects, std::uint64_t seed);

/// Runs `fn` over `configs` on up to `jobs` threads; rethrows the first failure.
void run_jobs(const std::vector<RunConfig>& configs, int jobs, const std::function<void(const RunConfig&)>& fn);

}  // namespace eegglt::cli
