#include "eegglt/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <tuple>

#include "binio.hpp"
#include "eegglt/csv.hpp"
#include "eegglt/dsp.hpp"
#include "eegglt/error.hpp"
#include "eegglt/tensor.hpp"

namespace eegglt::data {

namespace {

constexpr std::array<std::string_view, kClassCount> kLabelNames = {"left_fist", "right_fist", "both_fists",
                                                                   "both_feet"};

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  size_t b = 0;
  size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

bool is_imagery_run(int run) {
  return std::find(kImageryRuns.begin(), kImageryRuns.end(), run) != kImageryRuns.end();
}

int window_length(const WindowOptions& w, double fs) {
  return static_cast<int>(std::lround((w.end_s - w.start_s) * fs));
}

}  // namespace

std::string_view to_string(TaskLabel label) { return kLabelNames.at(static_cast<int>(label)); }

TaskLabel parse_task_label(std::string_view text) {
  const std::string t = lower(trim(text));
  for (int i = 0; i < kClassCount; ++i) {
    if (t == kLabelNames[i]) return static_cast<TaskLabel>(i);
  }
  if (t.size() == 1 && t[0] >= '0' && t[0] < '0' + kClassCount) return static_cast<TaskLabel>(t[0] - '0');
  throw Error(ErrorCode::InvalidLabel, "unknown task label '" + std::string(text) + "'");
}

std::string_view to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "?";
}

TaskLabel label_for(int run, std::string_view code) {
  if (!is_imagery_run(run)) {
    throw Error(ErrorCode::UnknownRun, "run " + std::to_string(run) + " is not a motor imagery run");
  }
  const bool fists = run == 4 || run == 8 || run == 12;
  if (code == "T1") return fists ? TaskLabel::LeftFist : TaskLabel::BothFists;
  if (code == "T2") return fists ? TaskLabel::RightFist : TaskLabel::BothFeet;
  throw Error(ErrorCode::InvalidLabel, "event code '" + std::string(code) + "' is not a task event");
}

std::vector<TrialEpoch> label_trials(const edf::Recording& rec, int run, const std::string& subject,
                                     const WindowOptions& opts) {
  if (!is_imagery_run(run)) {
    throw Error(ErrorCode::UnknownRun, "run " + std::to_string(run) + " is not a motor imagery run");
  }
  const auto channels = rec.data_channels();
  if (channels.empty()) throw Error(ErrorCode::InconsistentHeader, "recording has no EEG channels");
  if (opts.expected_channels > 0 && static_cast<int>(channels.size()) != opts.expected_channels) {
    throw Error(ErrorCode::InconsistentHeader, "recording has " + std::to_string(channels.size()) +
                                                   " EEG channels, expected " +
                                                   std::to_string(opts.expected_channels));
  }
  const double fs = rec.sampling_rate(channels.front());
  for (int c : channels) {
    if (rec.sampling_rate(c) != fs) throw Error(ErrorCode::InconsistentHeader, "channels differ in sampling rate");
  }
  const long n_samples = static_cast<long>(rec.signals[channels.front()].physical.size());
  const int len = window_length(opts, fs);
  if (len < 1) throw Error(ErrorCode::InvalidConfig, "trial window must be at least one sample");

  std::vector<TrialEpoch> out;
  bool any_event = false;
  int index = 0;
  for (const auto& ev : rec.annotations) {
    if (ev.text != "T0" && ev.text != "T1" && ev.text != "T2") continue;
    any_event = true;
    const int trial_index = index++;
    if (ev.text == "T0") continue;
    const long start = std::lround((ev.onset + opts.start_s) * fs);
    if (start < 0 || start + len > n_samples) continue;
    TrialEpoch t;
    t.subject = subject;
    t.run = run;
    t.trial_index = trial_index;
    t.label = label_for(run, ev.text);
    t.samples.resize(static_cast<Eigen::Index>(channels.size()), len);
    for (size_t c = 0; c < channels.size(); ++c) {
      const auto& phys = rec.signals[channels[c]].physical;
      for (int j = 0; j < len; ++j) t.samples(static_cast<Eigen::Index>(c), j) = phys[start + j];
    }
    out.push_back(std::move(t));
  }
  if (!any_event) throw Error(ErrorCode::MissingAnnotation, "recording has no T0/T1/T2 annotations");
  return out;
}

void notch_recording(edf::Recording& rec, double f0, double q) {
  for (int c : rec.data_channels()) {
    auto& s = rec.signals[c];
    s.physical = dsp::notch_filter(s.physical, rec.sampling_rate(c), f0, q);
  }
}

void SplitRatios::validate() const {
  if (train <= 0.0 || val < 0.0 || test < 0.0 || std::abs(train + val + test - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidConfig, "split ratios must be non-negative, with train > 0, and sum to 1");
  }
}

net::SampleSet TimepointDataset::subset(Split s) const {
  net::SampleSet out;
  out.n_nodes = n_nodes;
  for (size_t i = 0; i < y.size(); ++i) {
    if (split[i] != s) continue;
    out.x.insert(out.x.end(), x.begin() + static_cast<long>(i) * n_nodes, x.begin() + static_cast<long>(i + 1) * n_nodes);
    out.y.push_back(y[i]);
  }
  return out;
}

std::array<int, kClassCount> TimepointDataset::class_counts(Split s) const {
  std::array<int, kClassCount> counts{};
  for (const auto& t : trials) {
    if (t.split == s) ++counts.at(t.label);
  }
  return counts;
}

TimepointDataset build_timepoint_dataset(const std::vector<TrialEpoch>& epochs, const SplitRatios& ratios,
                                         std::uint64_t seed) {
  if (epochs.empty()) throw Error(ErrorCode::EmptyInput, "no trials to build a dataset from");
  ratios.validate();
  const int n = static_cast<int>(epochs.front().samples.rows());
  const int cols = static_cast<int>(epochs.front().samples.cols());
  for (const auto& e : epochs) {
    if (e.samples.rows() != n || e.samples.cols() != cols) {
      throw Error(ErrorCode::DimensionMismatch, "trials differ in channel or sample count");
    }
  }

  // Stratified assignment: shuffle each class, deal the classes round-robin,
  // and cut the dealt order into val, test and train.
  ad::Rng rng(seed);
  std::array<std::vector<int>, kClassCount> by_class;
  for (int i = 0; i < static_cast<int>(epochs.size()); ++i) by_class[static_cast<int>(epochs[i].label)].push_back(i);
  for (auto& list : by_class) {
    for (size_t i = list.size(); i > 1; --i) std::swap(list[i - 1], list[rng.below(i)]);
  }
  std::vector<int> dealt;
  for (size_t round = 0; dealt.size() < epochs.size(); ++round) {
    for (const auto& list : by_class) {
      if (round < list.size()) dealt.push_back(list[round]);
    }
  }
  const int total = static_cast<int>(epochs.size());
  const int n_val = static_cast<int>(std::lround(ratios.val * total));
  const int n_test = static_cast<int>(std::lround(ratios.test * total));
  const int n_train = total - n_val - n_test;
  if (n_train < 1 || (ratios.val > 0 && n_val < 1) || (ratios.test > 0 && n_test < 1)) {
    throw Error(ErrorCode::DegenerateSplit, std::to_string(total) + " trials cannot fill every split");
  }

  TimepointDataset d;
  d.n_nodes = n;
  d.trials.resize(epochs.size());
  for (int i = 0; i < total; ++i) {
    const auto& e = epochs[i];
    d.trials[i] = {e.subject, e.run, e.trial_index, static_cast<int>(e.label), Split::Train};
  }
  for (int k = 0; k < total; ++k) {
    d.trials[dealt[k]].split = k < n_val ? Split::Val : (k < n_val + n_test ? Split::Test : Split::Train);
  }

  d.stats.mean.assign(n, 0.0);
  d.stats.stddev.assign(n, 0.0);
  long count = 0;
  for (int i = 0; i < total; ++i) {
    if (d.trials[i].split != Split::Train) continue;
    const auto& s = epochs[i].samples;
    for (int c = 0; c < n; ++c) d.stats.mean[c] += s.row(c).sum();
    count += cols;
  }
  for (auto& m : d.stats.mean) m /= static_cast<double>(count);
  for (int i = 0; i < total; ++i) {
    if (d.trials[i].split != Split::Train) continue;
    const auto& s = epochs[i].samples;
    for (int c = 0; c < n; ++c) d.stats.stddev[c] += (s.row(c).array() - d.stats.mean[c]).square().sum();
  }
  for (int c = 0; c < n; ++c) {
    d.stats.stddev[c] = std::sqrt(d.stats.stddev[c] / static_cast<double>(count));
    if (!(d.stats.stddev[c] > 0.0)) {
      throw Error(ErrorCode::ZeroVarianceChannel, "channel " + std::to_string(c) + " is constant over the train split");
    }
  }

  const size_t m = static_cast<size_t>(total) * cols;
  d.x.resize(m * n);
  d.y.resize(m);
  d.split.resize(m);
  d.trial.resize(m);
  size_t row = 0;
  for (int i = 0; i < total; ++i) {
    const auto& s = epochs[i].samples;
    for (int j = 0; j < cols; ++j, ++row) {
      for (int c = 0; c < n; ++c) d.x[row * n + c] = (s(c, j) - d.stats.mean[c]) / d.stats.stddev[c];
      d.y[row] = d.trials[i].label;
      d.split[row] = d.trials[i].split;
      d.trial[row] = i;
    }
  }
  return d;
}

graph::Matrix pcc_input_signal(const std::vector<TrialEpoch>& epochs, const TimepointDataset& dataset) {
  if (epochs.size() != dataset.trials.size()) {
    throw Error(ErrorCode::ShapeMismatch, "trial list does not match the dataset");
  }
  std::vector<int> train;
  for (int i = 0; i < static_cast<int>(epochs.size()); ++i) {
    if (dataset.trials[i].split == Split::Train) train.push_back(i);
  }
  if (train.empty()) throw Error(ErrorCode::EmptySplit, "train split is empty");
  std::stable_sort(train.begin(), train.end(), [&](int a, int b) {
    const auto& ta = epochs[a];
    const auto& tb = epochs[b];
    return std::tie(ta.subject, ta.run, ta.trial_index) < std::tie(tb.subject, tb.run, tb.trial_index);
  });
  const auto rows = epochs.front().samples.rows();
  const auto cols = epochs.front().samples.cols();
  graph::Matrix out(rows, cols * static_cast<Eigen::Index>(train.size()));
  for (size_t k = 0; k < train.size(); ++k) out.middleCols(static_cast<Eigen::Index>(k) * cols, cols) = epochs[train[k]].samples;
  return out;
}

int parse_subject_id(std::string_view subject) {
  std::string t = trim(subject);
  if (!t.empty() && (t[0] == 'S' || t[0] == 's')) t.erase(0, 1);
  int id = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), id);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || id < 1 || id > 999) {
    throw Error(ErrorCode::InvalidConfig, "bad subject id '" + std::string(subject) + "'");
  }
  return id;
}

std::string subject_dir_name(int id) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "S%03d", id);
  return buf;
}

std::vector<TrialEpoch> load_csv_trials(const std::filesystem::path& dir, const std::string& subject,
                                        const LoadOptions& opts) {
  const std::string labels = csv::read_text(dir / "labels.csv");
  std::istringstream in(labels);
  std::string line;
  std::vector<std::string> header;
  std::vector<TrialEpoch> out;
  const int len = window_length(opts.window, opts.csv_rate_hz);
  const long start = std::lround(opts.window.start_s * opts.csv_rate_hz);
  const long stop = std::lround(opts.window.end_s * opts.csv_rate_hz);
  int index = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto fields = csv::split(trim(line));
    for (auto& f : fields) f = trim(f);
    if (header.empty()) {
      header = fields;
      if (header.size() < 2 || lower(header[0]) != "file" || lower(header[1]) != "label") {
        throw Error(ErrorCode::ParseError, (dir / "labels.csv").string() + ": header must start with file,label");
      }
      continue;
    }
    if (fields.size() < 2) throw Error(ErrorCode::ParseError, "labels.csv row has fewer than 2 fields");
    TrialEpoch t;
    t.subject = subject;
    t.trial_index = index++;
    t.label = parse_task_label(fields[1]);
    if (fields.size() > 2 && !fields[2].empty()) t.run = static_cast<int>(csv::parse_double(fields[2]));

    const auto path = dir / fields[0];
    std::istringstream body(csv::read_text(path));
    std::vector<std::vector<double>> rows;
    std::string row;
    bool first = true;
    while (std::getline(body, row)) {
      if (trim(row).empty()) continue;
      const auto cells = csv::split(trim(row));
      std::vector<double> values;
      try {
        for (const auto& c : cells) values.push_back(csv::parse_double(c));
      } catch (const Error&) {
        if (first) {
          first = false;
          continue;
        }
        throw Error(ErrorCode::ParseError, path.string() + ": non-numeric sample row");
      }
      first = false;
      if (!rows.empty() && values.size() != rows.front().size()) {
        throw Error(ErrorCode::DimensionMismatch, path.string() + ": ragged rows");
      }
      rows.push_back(std::move(values));
    }
    if (rows.empty()) throw Error(ErrorCode::EmptyInput, path.string() + ": no samples");
    const int channels = static_cast<int>(rows.front().size());
    if (opts.window.expected_channels > 0 && channels != opts.window.expected_channels) {
      throw Error(ErrorCode::DimensionMismatch, path.string() + ": " + std::to_string(channels) + " channels, expected " +
                                                    std::to_string(opts.window.expected_channels));
    }
    long first_row = 0;
    if (static_cast<int>(rows.size()) != len) {
      if (static_cast<long>(rows.size()) < stop) {
        throw Error(ErrorCode::DimensionMismatch, path.string() + ": trial shorter than the window");
      }
      first_row = start;
    }
    t.samples.resize(channels, len);
    for (int j = 0; j < len; ++j) {
      for (int c = 0; c < channels; ++c) t.samples(c, j) = rows[first_row + j][c];
    }
    out.push_back(std::move(t));
  }
  if (out.empty()) throw Error(ErrorCode::EmptyInput, (dir / "labels.csv").string() + " lists no trials");
  return out;
}

std::vector<TrialEpoch> load_subject(const std::filesystem::path& data_dir, std::string_view subject,
                                     const LoadOptions& opts) {
  const int id = parse_subject_id(subject);
  const std::string name = subject_dir_name(id);
  const auto dir = data_dir / name;
  if (std::filesystem::exists(dir / "labels.csv")) return load_csv_trials(dir, name, opts);

  std::vector<TrialEpoch> out;
  bool found = false;
  for (int run : kImageryRuns) {
    char file[32];
    std::snprintf(file, sizeof(file), "%sR%02d.edf", name.c_str(), run);
    const auto path = dir / file;
    if (!std::filesystem::exists(path)) continue;
    found = true;
    auto rec = edf::read_file(path);
    if (opts.apply_notch) notch_recording(rec, opts.notch_hz, opts.notch_q);
    auto trials = label_trials(rec, run, name, opts.window);
    out.insert(out.end(), std::make_move_iterator(trials.begin()), std::make_move_iterator(trials.end()));
  }
  if (!found) throw Error(ErrorCode::Io, "no imagery recordings for " + name + " under " + data_dir.string());
  return out;
}

namespace {

constexpr char kMagic[8] = {'E', 'G', 'L', 'T', 'D', 'S', 'E', 'T'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

void save_dataset(const std::filesystem::path& path, const TimepointDataset& d) {
  std::string buf(kMagic, sizeof(kMagic));
  binio::put<std::uint32_t>(buf, kVersion);
  binio::put<std::int32_t>(buf, d.n_nodes);
  binio::put<std::uint64_t>(buf, d.size());
  for (double v : d.x) binio::put<double>(buf, v);
  for (int v : d.y) binio::put<std::int32_t>(buf, v);
  for (Split s : d.split) binio::put<std::uint8_t>(buf, static_cast<std::uint8_t>(s));
  for (int v : d.trial) binio::put<std::int32_t>(buf, v);
  binio::put<std::uint32_t>(buf, static_cast<std::uint32_t>(d.trials.size()));
  for (const auto& t : d.trials) {
    binio::put_string(buf, t.subject);
    binio::put<std::int32_t>(buf, t.run);
    binio::put<std::int32_t>(buf, t.trial_index);
    binio::put<std::int32_t>(buf, t.label);
    binio::put<std::uint8_t>(buf, static_cast<std::uint8_t>(t.split));
  }
  for (double v : d.stats.mean) binio::put<double>(buf, v);
  for (double v : d.stats.stddev) binio::put<double>(buf, v);
  csv::write_text(path, buf);
}

TimepointDataset load_dataset(const std::filesystem::path& path) {
  const std::string data = csv::read_text(path);
  binio::Reader in(data, path.string());
  if (in.bytes(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic))) {
    throw Error(ErrorCode::BadMagic, path.string() + " is not a dataset cache");
  }
  if (in.get<std::uint32_t>() != kVersion) throw Error(ErrorCode::BadMagic, path.string() + ": unsupported cache version");
  TimepointDataset d;
  d.n_nodes = in.get<std::int32_t>();
  const auto m = in.get<std::uint64_t>();
  if (d.n_nodes < 1 || m > data.size()) throw Error(ErrorCode::InconsistentHeader, path.string() + ": bad sizes");
  d.x.resize(m * d.n_nodes);
  for (auto& v : d.x) v = in.get<double>();
  d.y.resize(m);
  for (auto& v : d.y) v = in.get<std::int32_t>();
  d.split.resize(m);
  for (auto& s : d.split) s = static_cast<Split>(in.get<std::uint8_t>());
  d.trial.resize(m);
  for (auto& v : d.trial) v = in.get<std::int32_t>();
  const auto nt = in.get<std::uint32_t>();
  d.trials.resize(nt);
  for (auto& t : d.trials) {
    t.subject = in.string();
    t.run = in.get<std::int32_t>();
    t.trial_index = in.get<std::int32_t>();
    t.label = in.get<std::int32_t>();
    t.split = static_cast<Split>(in.get<std::uint8_t>());
  }
  d.stats.mean.resize(d.n_nodes);
  d.stats.stddev.resize(d.n_nodes);
  for (auto& v : d.stats.mean) v = in.get<double>();
  for (auto& v : d.stats.stddev) v = in.get<double>();
  if (!in.done()) throw Error(ErrorCode::InconsistentHeader, path.string() + ": trailing bytes");
  return d;
}

}  // namespace eegglt::data
