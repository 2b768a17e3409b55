#pragma once

#include <span>
#include <vector>

namespace eegglt::dsp {

/// Second-order section with a0 normalized to 1.
struct Biquad {
  double b0 = 1, b1 = 0, b2 = 0;
  double a1 = 0, a2 = 0;

  double dc_gain() const { return (b0 + b1 + b2) / (1.0 + a1 + a2); }
};

/// Band-stop biquad centred on f0 with quality factor q (RBJ cookbook form).
Biquad design_notch(double fs, double f0, double q);

/// Direct-form II transposed filtering with initial state (z1, z2).
std::vector<double> lfilter(const Biquad& f, std::span<const double> x, double z1 = 0.0, double z2 = 0.0);

/// Forward-backward (zero-phase) filtering with odd-extension padding and
/// steady-state initial conditions. pad_length < 0 picks one from the filter's decay time.
std::vector<double> filtfilt(const Biquad& f, std::span<const double> x, int pad_length = -1);

std::vector<double> notch_filter(std::span<const double> x, double fs = 160.0, double f0 = 50.0, double q = 30.0);

}  // namespace eegglt::dsp
