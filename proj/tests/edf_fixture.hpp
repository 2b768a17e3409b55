#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

namespace edf_fixture {

// Byte-level EDF writer that follows the file layout field by field.
struct FixtureSignal {
  std::string label;
  double pmin, pmax;
  int dmin, dmax;
  int spr;
  std::vector<std::int16_t> samples;  // n_records * spr
};

inline std::string pad(const std::string& s, size_t w) {
  std::string out = s.substr(0, w);
  out.resize(w, ' ');
  return out;
}

inline std::string fmt(double v) {
  char buf[32];
  if (v == std::floor(v)) std::snprintf(buf, sizeof(buf), "%.0f", v);
  else std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

inline std::string edf_bytes(const std::vector<FixtureSignal>& sigs, int n_records, const std::string& reserved = "",
                      const std::string& version = "0", int header_bytes_override = -1) {
  const int ns = static_cast<int>(sigs.size());
  std::string h;
  h += pad(version, 8);
  h += pad("X M 01-JAN-2000 fixture", 80);
  h += pad("Startdate 01-JAN-2000 X X X", 80);
  h += pad("01.01.00", 8);
  h += pad("12.30.00", 8);
  h += pad(std::to_string(header_bytes_override >= 0 ? header_bytes_override : 256 * (ns + 1)), 8);
  h += pad(reserved, 44);
  h += pad(std::to_string(n_records), 8);
  h += pad("1", 8);
  h += pad(std::to_string(ns), 4);
  for (const auto& s : sigs) h += pad(s.label, 16);
  for (size_t i = 0; i < sigs.size(); ++i) h += pad("AgAgCl electrode", 80);
  for (size_t i = 0; i < sigs.size(); ++i) h += pad("uV", 8);
  for (const auto& s : sigs) h += pad(fmt(s.pmin), 8);
  for (const auto& s : sigs) h += pad(fmt(s.pmax), 8);
  for (const auto& s : sigs) h += pad(std::to_string(s.dmin), 8);
  for (const auto& s : sigs) h += pad(std::to_string(s.dmax), 8);
  for (size_t i = 0; i < sigs.size(); ++i) h += pad("HP:0.1Hz", 80);
  for (const auto& s : sigs) h += pad(std::to_string(s.spr), 8);
  for (size_t i = 0; i < sigs.size(); ++i) h += pad("", 32);
  for (int r = 0; r < n_records; ++r) {
    for (const auto& s : sigs) {
      for (int k = 0; k < s.spr; ++k) {
        const auto v = static_cast<std::uint16_t>(s.samples[static_cast<size_t>(r * s.spr + k)]);
        h += static_cast<char>(v & 0xff);
        h += static_cast<char>(v >> 8);
      }
    }
  }
  return h;
}

inline std::vector<FixtureSignal> two_channel_fixture(int n_records) {
  std::vector<FixtureSignal> s(2);
  s[0] = {"Fc5.", -8092, 8092, -32768, 32767, 4, {}};
  s[1] = {"Cz..", -100.5, 100.5, -2048, 2047, 2, {}};
  for (int i = 0; i < 4 * n_records; ++i) s[0].samples.push_back(static_cast<std::int16_t>(i * 997 - 30000));
  for (int i = 0; i < 2 * n_records; ++i) s[1].samples.push_back(static_cast<std::int16_t>((i % 2 ? -1 : 1) * 37 * i));
  return s;
}

// EDF+ annotation channel bytes for records of one second each.
inline std::string tal_record(int r, const std::vector<std::string>& events, size_t bytes) {
  std::string out = "+" + std::to_string(r) + "\x14\x14";
  out += '\0';
  for (const auto& e : events) out += e + '\0';
  out.resize(bytes, '\0');
  return out;
}

}  // namespace edf_fixture
