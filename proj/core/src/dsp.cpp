#include "eegglt/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "eegglt/error.hpp"

namespace eegglt::dsp {

Biquad design_notch(double fs, double f0, double q) {
  if (!(fs > 0.0) || !(f0 > 0.0) || !(f0 < fs / 2.0)) {
    throw Error(ErrorCode::InvalidFrequency, "notch frequency must lie in (0, fs/2)");
  }
  if (!(q > 0.0)) throw Error(ErrorCode::InvalidFrequency, "notch quality factor must be > 0");
  const double w0 = 2.0 * std::numbers::pi * f0 / fs;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double c = std::cos(w0);
  const double a0 = 1.0 + alpha;
  Biquad f;
  f.b0 = 1.0 / a0;
  f.b1 = -2.0 * c / a0;
  f.b2 = 1.0 / a0;
  f.a1 = -2.0 * c / a0;
  f.a2 = (1.0 - alpha) / a0;
  return f;
}

std::vector<double> lfilter(const Biquad& f, std::span<const double> x, double z1, double z2) {
  std::vector<double> y(x.size());
  for (size_t n = 0; n < x.size(); ++n) {
    const double out = f.b0 * x[n] + z1;
    z1 = f.b1 * x[n] - f.a1 * out + z2;
    z2 = f.b2 * x[n] - f.a2 * out;
    y[n] = out;
  }
  return y;
}

namespace {

// State that makes a unit step pass through without a transient.
void steady_state(const Biquad& f, double& z1, double& z2) {
  const double g = f.dc_gain();
  z2 = f.b2 - f.a2 * g;
  z1 = f.b1 - f.a1 * g + z2;
}

int default_pad(const Biquad& f) {
  const double r = std::sqrt(std::abs(f.a2));
  if (r <= 0.0) return 6;
  if (r >= 1.0) return 1 << 20;
  return static_cast<int>(std::ceil(3.0 / -std::log(r)));
}

}  // namespace

std::vector<double> filtfilt(const Biquad& f, std::span<const double> x, int pad_length) {
  const int n = static_cast<int>(x.size());
  if (n < 2) return std::vector<double>(x.begin(), x.end());
  int pad = pad_length < 0 ? default_pad(f) : pad_length;
  pad = std::min(pad, n - 1);

  std::vector<double> ext;
  ext.reserve(static_cast<size_t>(n + 2 * pad));
  for (int i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (int i = n - 2; i >= n - 1 - pad; --i) ext.push_back(2.0 * x[n - 1] - x[i]);

  double z1 = 0.0;
  double z2 = 0.0;
  steady_state(f, z1, z2);
  auto fwd = lfilter(f, ext, z1 * ext.front(), z2 * ext.front());
  std::reverse(fwd.begin(), fwd.end());
  auto back = lfilter(f, fwd, z1 * fwd.front(), z2 * fwd.front());
  std::reverse(back.begin(), back.end());
  return std::vector<double>(back.begin() + pad, back.begin() + pad + n);
}

std::vector<double> notch_filter(std::span<const double> x, double fs, double f0, double q) {
  return filtfilt(design_notch(fs, f0, q), x);
}

}  // namespace eegglt::dsp
