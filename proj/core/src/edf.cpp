#include "eegglt/edf.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>

#include "eegglt/csv.hpp"
#include "eegglt/error.hpp"

namespace eegglt::edf {

static_assert(std::endian::native == std::endian::little, "EDF sample I/O assumes little-endian");

namespace {

constexpr int kFixedHeader = 256;
constexpr int kSignalHeader = 256;

std::string trim(std::string_view s) {
  size_t b = 0;
  size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\0')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\0')) --e;
  return std::string(s.substr(b, e - b));
}

double field_double(std::string_view raw, const char* what) {
  const std::string t = trim(raw);
  try {
    if (t.empty()) throw Error(ErrorCode::ParseError, "empty");
    return csv::parse_double(t);
  } catch (const Error&) {
    throw Error(ErrorCode::InconsistentHeader, std::string(what) + " is not a number: '" + t + "'");
  }
}

long field_long(std::string_view raw, const char* what) {
  const std::string t = trim(raw);
  long v = 0;
  const char* first = t.data();
  if (!t.empty() && t[0] == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw Error(ErrorCode::InconsistentHeader, std::string(what) + " is not an integer: '" + t + "'");
  }
  return v;
}

void put_field(std::string& out, std::string_view value, size_t width) {
  std::string v(value.substr(0, width));
  v.resize(width, ' ');
  out += v;
}

std::string fit_number(double v, size_t width) {
  if (v == std::floor(v) && std::abs(v) < 1e7) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.0f", v);
    if (std::strlen(buf) <= width) return buf;
  }
  std::string s = csv::format_double(v);
  if (s.size() <= width) return s;
  for (int prec = static_cast<int>(width); prec > 0; --prec) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strlen(buf) <= width) return buf;
  }
  throw Error(ErrorCode::InconsistentHeader, "value does not fit a header field");
}

}  // namespace

double Signal::gain() const {
  return (physical_max - physical_min) / static_cast<double>(digital_max - digital_min);
}

double Signal::to_physical(std::int16_t d) const {
  return (static_cast<double>(d) - digital_min) * gain() + physical_min;
}

std::int16_t Signal::to_digital(double p) const {
  const double d = std::round((p - physical_min) / gain() + digital_min);
  return static_cast<std::int16_t>(std::clamp(d, static_cast<double>(digital_min), static_cast<double>(digital_max)));
}

std::vector<int> Recording::data_channels() const {
  std::vector<int> idx;
  for (int i = 0; i < static_cast<int>(signals.size()); ++i) {
    if (!signals[i].is_annotation()) idx.push_back(i);
  }
  return idx;
}

double Recording::sampling_rate(int i) const {
  return signals.at(i).samples_per_record / header.record_duration;
}

Recording parse(std::string_view bytes) {
  if (bytes.size() < kFixedHeader) {
    throw Error(ErrorCode::TruncatedFile, "EDF file shorter than the 256-byte header");
  }
  Recording rec;
  Header& h = rec.header;
  h.version = trim(bytes.substr(0, 8));
  if (h.version != "0") throw Error(ErrorCode::BadMagic, "EDF version field is '" + h.version + "', expected '0'");
  h.patient = trim(bytes.substr(8, 80));
  h.recording = trim(bytes.substr(88, 80));
  h.start_date = trim(bytes.substr(168, 8));
  h.start_time = trim(bytes.substr(176, 8));
  h.header_bytes = static_cast<int>(field_long(bytes.substr(184, 8), "header byte count"));
  h.reserved = trim(bytes.substr(192, 44));
  h.n_records = field_long(bytes.substr(236, 8), "record count");
  h.record_duration = field_double(bytes.substr(244, 8), "record duration");
  h.n_signals = static_cast<int>(field_long(bytes.substr(252, 4), "signal count"));
  if (h.n_signals < 1) throw Error(ErrorCode::InconsistentHeader, "signal count must be positive");
  if (h.header_bytes != kFixedHeader + kSignalHeader * h.n_signals) {
    throw Error(ErrorCode::InconsistentHeader,
                "header byte count " + std::to_string(h.header_bytes) + " does not match " +
                    std::to_string(h.n_signals) + " signals");
  }
  if (bytes.size() < static_cast<size_t>(h.header_bytes)) {
    throw Error(ErrorCode::InconsistentHeader, "file holds fewer signal header blocks than declared");
  }
  if (!(h.record_duration > 0.0)) throw Error(ErrorCode::InconsistentHeader, "record duration must be > 0");

  const int ns = h.n_signals;
  rec.signals.resize(ns);
  size_t off = kFixedHeader;
  auto column = [&](size_t width, auto&& assign) {
    for (int i = 0; i < ns; ++i) assign(rec.signals[i], bytes.substr(off + width * i, width));
    off += width * ns;
  };
  column(16, [](Signal& s, std::string_view f) { s.label = trim(f); });
  column(80, [](Signal& s, std::string_view f) { s.transducer = trim(f); });
  column(8, [](Signal& s, std::string_view f) { s.physical_dimension = trim(f); });
  column(8, [](Signal& s, std::string_view f) { s.physical_min = field_double(f, "physical minimum"); });
  column(8, [](Signal& s, std::string_view f) { s.physical_max = field_double(f, "physical maximum"); });
  column(8, [](Signal& s, std::string_view f) {
    s.digital_min = static_cast<int>(field_long(f, "digital minimum"));
  });
  column(8, [](Signal& s, std::string_view f) {
    s.digital_max = static_cast<int>(field_long(f, "digital maximum"));
  });
  column(80, [](Signal& s, std::string_view f) { s.prefiltering = trim(f); });
  column(8, [](Signal& s, std::string_view f) {
    s.samples_per_record = static_cast<int>(field_long(f, "samples per record"));
  });
  column(32, [](Signal& s, std::string_view f) { s.reserved = trim(f); });

  size_t record_samples = 0;
  for (const auto& s : rec.signals) {
    if (s.samples_per_record < 1) throw Error(ErrorCode::InconsistentHeader, s.label + ": samples per record must be > 0");
    if (s.digital_max <= s.digital_min) {
      throw Error(ErrorCode::InconsistentHeader, s.label + ": digital maximum must exceed digital minimum");
    }
    record_samples += static_cast<size_t>(s.samples_per_record);
  }
  const size_t record_bytes = 2 * record_samples;
  const size_t data_bytes = bytes.size() - static_cast<size_t>(h.header_bytes);
  if (h.n_records < 0) {
    if (data_bytes % record_bytes != 0) throw Error(ErrorCode::InconsistentHeader, "partial data record");
    h.n_records = static_cast<long>(data_bytes / record_bytes);
  } else if (data_bytes != record_bytes * static_cast<size_t>(h.n_records)) {
    throw Error(ErrorCode::InconsistentHeader, "data section holds " + std::to_string(data_bytes) +
                                                   " bytes, header declares " +
                                                   std::to_string(record_bytes * h.n_records));
  }

  for (auto& s : rec.signals) s.digital.resize(static_cast<size_t>(s.samples_per_record) * h.n_records);
  const char* p = bytes.data() + h.header_bytes;
  for (long r = 0; r < h.n_records; ++r) {
    for (auto& s : rec.signals) {
      std::memcpy(s.digital.data() + static_cast<size_t>(r) * s.samples_per_record, p, 2 * s.samples_per_record);
      p += 2 * s.samples_per_record;
    }
  }
  for (auto& s : rec.signals) {
    if (s.is_annotation()) {
      std::string tal(s.digital.size() * 2, '\0');
      std::memcpy(tal.data(), s.digital.data(), tal.size());
      // Records are self-contained, so decode them one at a time.
      const size_t rb = static_cast<size_t>(s.samples_per_record) * 2;
      for (size_t o = 0; o < tal.size(); o += rb) {
        auto events = parse_tal(std::string_view(tal).substr(o, rb));
        rec.annotations.insert(rec.annotations.end(), events.begin(), events.end());
      }
    } else {
      s.physical.resize(s.digital.size());
      std::transform(s.digital.begin(), s.digital.end(), s.physical.begin(),
                     [&s](std::int16_t d) { return s.to_physical(d); });
    }
  }
  return rec;
}

Recording read_file(const std::filesystem::path& path) {
  try {
    return parse(csv::read_text(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Io) throw;
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::vector<Annotation> parse_tal(std::string_view bytes) {
  std::vector<Annotation> out;
  size_t i = 0;
  while (i < bytes.size()) {
    if (bytes[i] == '\0') {
      ++i;
      continue;
    }
    if (bytes[i] != '+' && bytes[i] != '-') {
      throw Error(ErrorCode::ParseError, "TAL must start with a signed onset");
    }
    size_t end = bytes.find('\0', i);
    if (end == std::string_view::npos) end = bytes.size();
    const std::string_view tal = bytes.substr(i, end - i);
    i = end;

    const size_t first_sep = tal.find('\x14');
    if (first_sep == std::string_view::npos) throw Error(ErrorCode::ParseError, "TAL without annotation separator");
    const std::string_view timing = tal.substr(0, first_sep);
    Annotation base;
    const size_t dur_sep = timing.find('\x15');
    try {
      base.onset = csv::parse_double(timing.substr(0, dur_sep));
      if (dur_sep != std::string_view::npos) base.duration = csv::parse_double(timing.substr(dur_sep + 1));
    } catch (const Error&) {
      throw Error(ErrorCode::ParseError, "bad TAL timing '" + std::string(timing) + "'");
    }
    size_t pos = first_sep + 1;
    while (pos < tal.size()) {
      size_t next = tal.find('\x14', pos);
      if (next == std::string_view::npos) next = tal.size();
      if (next > pos) {
        Annotation a = base;
        a.text = std::string(tal.substr(pos, next - pos));
        out.push_back(std::move(a));
      }
      pos = next + 1;
    }
  }
  return out;
}

Signal annotation_signal(const std::vector<Annotation>& events, long n_records, double record_duration,
                         int samples_per_record) {
  if (n_records < 1) throw Error(ErrorCode::InconsistentHeader, "annotation signal needs at least one record");
  const size_t rb = static_cast<size_t>(samples_per_record) * 2;
  std::vector<std::string> records(static_cast<size_t>(n_records));
  for (long r = 0; r < n_records; ++r) {
    records[r] = "+" + csv::format_double(static_cast<double>(r) * record_duration) + "\x14\x14";
    records[r] += '\0';
  }
  for (const auto& e : events) {
    long r = static_cast<long>(std::floor(e.onset / record_duration));
    r = std::clamp(r, 0L, n_records - 1);
    std::string tal = (e.onset < 0 ? "" : "+") + csv::format_double(e.onset);
    if (e.duration > 0) tal += "\x15" + csv::format_double(e.duration);
    tal += "\x14" + e.text + "\x14";
    tal += '\0';
    records[r] += tal;
  }
  Signal s;
  s.label = "EDF Annotations";
  s.samples_per_record = samples_per_record;
  s.digital_min = -32768;
  s.digital_max = 32767;
  s.physical_min = -1;
  s.physical_max = 1;
  std::string all;
  for (auto& rec : records) {
    if (rec.size() > rb) throw Error(ErrorCode::InconsistentHeader, "annotations overflow the record size");
    rec.resize(rb, '\0');
    all += rec;
  }
  s.digital.resize(all.size() / 2);
  std::memcpy(s.digital.data(), all.data(), all.size());
  return s;
}

std::string serialize(const Recording& rec) {
  const int ns = static_cast<int>(rec.signals.size());
  if (ns < 1) throw Error(ErrorCode::InconsistentHeader, "recording has no signals");
  const long n_records = rec.header.n_records;
  for (const auto& s : rec.signals) {
    if (s.digital.size() != static_cast<size_t>(s.samples_per_record) * static_cast<size_t>(n_records)) {
      throw Error(ErrorCode::InconsistentHeader, s.label + ": sample count does not match the record layout");
    }
  }
  std::string out;
  const auto& h = rec.header;
  put_field(out, h.version, 8);
  put_field(out, h.patient, 80);
  put_field(out, h.recording, 80);
  put_field(out, h.start_date, 8);
  put_field(out, h.start_time, 8);
  put_field(out, std::to_string(kFixedHeader + kSignalHeader * ns), 8);
  put_field(out, h.reserved, 44);
  put_field(out, std::to_string(n_records), 8);
  put_field(out, fit_number(h.record_duration, 8), 8);
  put_field(out, std::to_string(ns), 4);
  for (const auto& s : rec.signals) put_field(out, s.label, 16);
  for (const auto& s : rec.signals) put_field(out, s.transducer, 80);
  for (const auto& s : rec.signals) put_field(out, s.physical_dimension, 8);
  for (const auto& s : rec.signals) put_field(out, fit_number(s.physical_min, 8), 8);
  for (const auto& s : rec.signals) put_field(out, fit_number(s.physical_max, 8), 8);
  for (const auto& s : rec.signals) put_field(out, std::to_string(s.digital_min), 8);
  for (const auto& s : rec.signals) put_field(out, std::to_string(s.digital_max), 8);
  for (const auto& s : rec.signals) put_field(out, s.prefiltering, 80);
  for (const auto& s : rec.signals) put_field(out, std::to_string(s.samples_per_record), 8);
  for (const auto& s : rec.signals) put_field(out, s.reserved, 32);
  for (long r = 0; r < n_records; ++r) {
    for (const auto& s : rec.signals) {
      const char* src = reinterpret_cast<const char*>(s.digital.data() + static_cast<size_t>(r) * s.samples_per_record);
      out.append(src, 2 * static_cast<size_t>(s.samples_per_record));
    }
  }
  return out;
}

void write_file(const std::filesystem::path& path, const Recording& rec) { csv::write_text(path, serialize(rec)); }

}  // namespace eegglt::edf
