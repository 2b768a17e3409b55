#pragma once

// Little-endian binary helpers shared by the checkpoint and dataset cache formats.

#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

#include "eegglt/error.hpp"

namespace eegglt::binio {

template <typename T>
void put(std::string& buf, T v) {
  char raw[sizeof(T)];
  std::memcpy(raw, &v, sizeof(T));
  buf.append(raw, sizeof(T));
}

inline void put_string(std::string& buf, std::string_view s) {
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(s.size()));
  buf.append(s);
}

class Reader {
 public:
  Reader(const std::string& data, std::string origin) : data_(data), origin_(std::move(origin)) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string bytes(size_t n) {
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::string string() { return bytes(get<std::uint32_t>()); }
  bool done() const { return pos_ == data_.size(); }
  const std::string& origin() const { return origin_; }

 private:
  void need(size_t n) const {
    if (n > data_.size() - pos_) throw Error(ErrorCode::TruncatedFile, origin_ + ": file truncated");
  }
  const std::string& data_;
  std::string origin_;
  size_t pos_ = 0;
};

}  // namespace eegglt::binio
