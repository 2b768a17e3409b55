#pragma once

// Motor-imagery trials and per-time-point datasets: run/event labelling,
// t in [1 s, 3 s) windows, trial-level stratified splits, train-fitted
// standardization, subject loaders and a versioned dataset cache.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "eegglt/chebnet.hpp"
#include "eegglt/edf.hpp"
#include "eegglt/graph.hpp"

namespace eegglt::data {

enum class TaskLabel : int { LeftFist = 0, RightFist = 1, BothFists = 2, BothFeet = 3 };
constexpr int kClassCount = 4;

std::string_view to_string(TaskLabel label);
TaskLabel parse_task_label(std::string_view text);

enum class Split : std::uint8_t { Train = 0, Val = 1, Test = 2 };
std::string_view to_string(Split s);

/// Imagined-movement runs of the PhysioNet motor imagery protocol.
inline constexpr std::array<int, 6> kImageryRuns = {4, 6, 8, 10, 12, 14};

struct TrialEpoch {
  std::string subject;
  int run = 0;
  int trial_index = 0;  // position of the event within its run
  TaskLabel label = TaskLabel::LeftFist;
  graph::Matrix samples;  // channels x window columns
};

struct WindowOptions {
  double start_s = 1.0;
  double end_s = 3.0;
  /// Required number of EEG channels; 0 accepts any count.
  int expected_channels = 64;
};

/// T1/T2 label for an imagery run; UnknownRun for anything else.
TaskLabel label_for(int run, std::string_view code);

/// Windows each T1/T2 event of an imagery run. T0 (rest) is dropped, as are
/// events whose window runs past the end of the recording.
std::vector<TrialEpoch> label_trials(const edf::Recording& rec, int run, const std::string& subject = "",
                                     const WindowOptions& opts = {});

/// Applies the zero-phase notch to every EEG channel of the recording in place.
void notch_recording(edf::Recording& rec, double f0 = 50.0, double q = 30.0);

struct SplitRatios {
  double train = 0.70;
  double val = 0.15;
  double test = 0.15;

  void validate() const;
};

struct NormalizationStats {
  std::vector<double> mean;
  std::vector<double> stddev;  // population standard deviation
};

struct TrialKey {
  std::string subject;
  int run = 0;
  int trial_index = 0;
  int label = 0;
  Split split = Split::Train;
};

struct TimepointDataset {
  int n_nodes = 0;
  std::vector<double> x;       // M x N row-major, standardized
  std::vector<int> y;          // M labels
  std::vector<Split> split;    // per sample
  std::vector<int> trial;      // per sample, index into trials
  std::vector<TrialKey> trials;
  NormalizationStats stats;

  size_t size() const { return y.size(); }
  net::SampleSet subset(Split s) const;
  /// Per-class trial counts for a split.
  std::array<int, kClassCount> class_counts(Split s) const;
};

/// Assigns trials to splits (stratified by class, seeded) and emits one sample per time column.
/// Standardization statistics come from the train split only.
TimepointDataset build_timepoint_dataset(const std::vector<TrialEpoch>& epochs, const SplitRatios& ratios = {},
                                         std::uint64_t seed = 0);

/// Train-split raw windows concatenated per channel in (run, trial) order: the PCC input.
graph::Matrix pcc_input_signal(const std::vector<TrialEpoch>& epochs, const TimepointDataset& dataset);

/// "S6", "s006", "6" -> 6. Throws InvalidConfig otherwise.
int parse_subject_id(std::string_view subject);
std::string subject_dir_name(int id);

struct LoadOptions {
  WindowOptions window;
  double notch_hz = 50.0;
  double notch_q = 30.0;
  bool apply_notch = true;
  /// Sampling rate assumed for CSV trials.
  double csv_rate_hz = 160.0;
};

/// Loads every imagery run of a subject from `<data_dir>/S###/S###R##.edf`, or from the CSV layout
/// (`<data_dir>/S###/labels.csv` plus one CSV per trial) when that is present.
std::vector<TrialEpoch> load_subject(const std::filesystem::path& data_dir, std::string_view subject,
                                     const LoadOptions& opts = {});

/// CSV trial directory: labels.csv with columns file,label[,run]; each trial file has one row per
/// time sample and one column per channel (an optional header row is skipped). A trial of exactly
/// the window length is used as is; longer trials are windowed at [start_s, end_s).
std::vector<TrialEpoch> load_csv_trials(const std::filesystem::path& dir, const std::string& subject,
                                        const LoadOptions& opts = {});

/// Binary dataset cache, format "EGLTDSET" version 1.
void save_dataset(const std::filesystem::path& path, const TimepointDataset& d);
TimepointDataset load_dataset(const std::filesystem::path& path);

}  // namespace eegglt::data
