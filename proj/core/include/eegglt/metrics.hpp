#pragma once

#include <span>
#include <vector>

namespace eegglt {

/// Accuracy plus per-class and macro-averaged sensitivity, precision and F1.
/// A ratio whose denominator is zero counts as 0.
struct Metrics {
  std::vector<std::vector<long>> confusion;  // [truth][prediction]
  double accuracy = 0.0;
  std::vector<double> sensitivity;
  std::vector<double> precision;
  std::vector<double> f1;
  double macro_sensitivity = 0.0;
  double macro_precision = 0.0;
  double macro_f1 = 0.0;
  long total = 0;
};

Metrics metrics_from_confusion(std::vector<std::vector<long>> confusion);
Metrics compute_metrics(std::span<const int> truth, std::span<const int> predicted, int classes);

}  // namespace eegglt
