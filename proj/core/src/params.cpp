#include "eegglt/params.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "binio.hpp"
#include "eegglt/csv.hpp"
#include "eegglt/error.hpp"

namespace eegglt::ad {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

void AdamConfig::validate() const {
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::InvalidConfig, "learning rate must be > 0");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "Adam betas must lie in (0, 1)");
  }
  if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidConfig, "Adam epsilon must be > 0");
}

Tensor& ParamState::add(std::string name, Shape shape, std::vector<double> values, bool rewindable) {
  if (contains(name)) throw Error(ErrorCode::InvalidSpec, "duplicate parameter " + name);
  Parameter p;
  p.name = std::move(name);
  p.initial = values;
  p.tensor = Tensor::from(std::move(shape), std::move(values), true);
  p.m.assign(p.tensor.size(), 0.0);
  p.v.assign(p.tensor.size(), 0.0);
  p.rewindable = rewindable;
  params_.push_back(std::move(p));
  return params_.back().tensor;
}

Parameter& ParamState::get(const std::string& name) {
  for (auto& p : params_) {
    if (p.name == name) return p;
  }
  throw Error(ErrorCode::InvalidSpec, "no parameter named " + name);
}

const Parameter& ParamState::get(const std::string& name) const {
  return const_cast<ParamState*>(this)->get(name);
}

bool ParamState::contains(const std::string& name) const {
  for (const auto& p : params_) {
    if (p.name == name) return true;
  }
  return false;
}

void ParamState::snapshot() {
  for (auto& p : params_) {
    const auto v = p.tensor.value();
    p.initial.assign(v.begin(), v.end());
  }
  has_snapshot_ = true;
}

void ParamState::rewind() {
  if (!has_snapshot_) throw Error(ErrorCode::MissingSnapshot, "no initial parameter snapshot");
  for (auto& p : params_) {
    if (p.rewindable) {
      auto v = p.tensor.mutable_value();
      std::copy(p.initial.begin(), p.initial.end(), v.begin());
    }
    std::fill(p.m.begin(), p.m.end(), 0.0);
    std::fill(p.v.begin(), p.v.end(), 0.0);
    p.tensor.zero_grad();
  }
  step_ = 0;
}

void ParamState::zero_grad() {
  for (auto& p : params_) p.tensor.zero_grad();
}

size_t ParamState::rewindable_count() const {
  size_t n = 0;
  for (const auto& p : params_) {
    if (p.rewindable) n += p.tensor.size();
  }
  return n;
}

void adam_step(ParamState& params, const AdamConfig& cfg) {
  cfg.validate();
  params.set_step(params.step() + 1);
  const double t = static_cast<double>(params.step());
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (auto& p : params.all()) {
    const auto g = p.tensor.grad();
    auto w = p.tensor.mutable_value();
    if (g.size() != w.size()) throw Error(ErrorCode::ShapeMismatch, "gradient size for " + p.name);
    const bool has_frozen = !p.frozen.empty();
    for (size_t i = 0; i < w.size(); ++i) {
      if (has_frozen && p.frozen[i]) continue;
      p.m[i] = cfg.beta1 * p.m[i] + (1.0 - cfg.beta1) * g[i];
      p.v[i] = cfg.beta2 * p.v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double m_hat = p.m[i] / c1;
      const double v_hat = p.v[i] / c2;
      w[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
  }
}

namespace {

constexpr char kMagic[8] = {'E', 'G', 'L', 'T', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const std::vector<NamedArray>& arrays) {
  std::string buf(kMagic, sizeof(kMagic));
  binio::put<std::uint32_t>(buf, kVersion);
  binio::put<std::uint32_t>(buf, static_cast<std::uint32_t>(arrays.size()));
  for (const auto& a : arrays) {
    if (numel(a.shape) != a.values.size()) {
      throw Error(ErrorCode::ShapeMismatch, a.name + ": shape does not match value count");
    }
    binio::put_string(buf, a.name);
    binio::put<std::uint32_t>(buf, static_cast<std::uint32_t>(a.shape.size()));
    for (int d : a.shape) binio::put<std::int32_t>(buf, d);
    for (double v : a.values) binio::put<double>(buf, v);
  }
  csv::write_text(path, buf);
}

std::vector<NamedArray> load_checkpoint(const std::filesystem::path& path) {
  const std::string data = csv::read_text(path);
  binio::Reader in(data, path.string());
  if (in.bytes(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic))) {
    throw Error(ErrorCode::BadMagic, path.string() + " is not a checkpoint");
  }
  if (in.get<std::uint32_t>() != kVersion) {
    throw Error(ErrorCode::BadMagic, path.string() + ": unsupported checkpoint version");
  }
  const auto count = in.get<std::uint32_t>();
  std::vector<NamedArray> out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedArray a;
    a.name = in.string();
    const auto rank = in.get<std::uint32_t>();
    for (std::uint32_t r = 0; r < rank; ++r) a.shape.push_back(in.get<std::int32_t>());
    a.values.resize(numel(a.shape));
    for (auto& v : a.values) v = in.get<double>();
    out.push_back(std::move(a));
  }
  if (!in.done()) throw Error(ErrorCode::InconsistentHeader, path.string() + ": trailing bytes");
  return out;
}

}  // namespace eegglt::ad
