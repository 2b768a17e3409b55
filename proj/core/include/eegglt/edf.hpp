#pragma once

// EDF / EDF+ reader and writer. Samples are 16-bit little-endian two's
// complement; EDF+ annotation channels ("EDF Annotations") carry TAL events.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace eegglt::edf {

struct Header {
  std::string version = "0";
  std::string patient;
  std::string recording;
  std::string start_date = "01.01.00";
  std::string start_time = "00.00.00";
  int header_bytes = 0;
  std::string reserved;  // "EDF+C" / "EDF+D" for EDF+
  long n_records = 0;
  double record_duration = 1.0;  // seconds
  int n_signals = 0;
};

struct Signal {
  std::string label;
  std::string transducer;
  std::string physical_dimension;
  double physical_min = -1.0;
  double physical_max = 1.0;
  int digital_min = -32768;
  int digital_max = 32767;
  std::string prefiltering;
  int samples_per_record = 0;
  std::string reserved;
  std::vector<std::int16_t> digital;  // n_records * samples_per_record values
  std::vector<double> physical;       // empty for annotation signals

  bool is_annotation() const { return label == "EDF Annotations"; }
  double gain() const;
  double to_physical(std::int16_t d) const;
  std::int16_t to_digital(double p) const;
};

struct Annotation {
  double onset = 0.0;
  double duration = 0.0;
  std::string text;

  bool operator==(const Annotation&) const = default;
};

struct Recording {
  Header header;
  std::vector<Signal> signals;
  std::vector<Annotation> annotations;

  /// Indices of the ordinary (non-annotation) signals in header order.
  std::vector<int> data_channels() const;
  /// Samples per second of signal i.
  double sampling_rate(int i) const;
};

Recording parse(std::string_view bytes);
Recording read_file(const std::filesystem::path& path);

/// Decodes a concatenation of TALs; the empty time-keeping annotation of each record is dropped.
std::vector<Annotation> parse_tal(std::string_view bytes);

/// Builds an "EDF Annotations" signal holding `events` (each record starts with its time-keeping TAL).
Signal annotation_signal(const std::vector<Annotation>& events, long n_records, double record_duration,
                         int samples_per_record);

/// Serializes a recording. Header sizes are recomputed; digital samples are written as stored.
std::string serialize(const Recording& rec);
void write_file(const std::filesystem::path& path, const Recording& rec);

}  // namespace eegglt::edf
