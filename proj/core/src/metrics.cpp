#include "eegglt/metrics.hpp"

#include <string>

#include "eegglt/error.hpp"

namespace eegglt {

namespace {
double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }
}  // namespace

Metrics metrics_from_confusion(std::vector<std::vector<long>> confusion) {
  const size_t k = confusion.size();
  Metrics m;
  long correct = 0;
  for (size_t i = 0; i < k; ++i) {
    if (confusion[i].size() != k) throw Error(ErrorCode::ShapeMismatch, "confusion matrix must be square");
    for (size_t j = 0; j < k; ++j) m.total += confusion[i][j];
    correct += confusion[i][i];
  }
  if (m.total == 0) throw Error(ErrorCode::EmptySplit, "no samples to score");
  m.accuracy = static_cast<double>(correct) / static_cast<double>(m.total);
  for (size_t c = 0; c < k; ++c) {
    const double tp = static_cast<double>(confusion[c][c]);
    double fn = 0.0, fp = 0.0;
    for (size_t o = 0; o < k; ++o) {
      if (o == c) continue;
      fn += static_cast<double>(confusion[c][o]);
      fp += static_cast<double>(confusion[o][c]);
    }
    const double sens = ratio(tp, tp + fn);
    const double prec = ratio(tp, tp + fp);
    m.sensitivity.push_back(sens);
    m.precision.push_back(prec);
    m.f1.push_back(ratio(2.0 * prec * sens, prec + sens));
  }
  for (size_t c = 0; c < k; ++c) {
    m.macro_sensitivity += m.sensitivity[c] / static_cast<double>(k);
    m.macro_precision += m.precision[c] / static_cast<double>(k);
    m.macro_f1 += m.f1[c] / static_cast<double>(k);
  }
  m.confusion = std::move(confusion);
  return m;
}

Metrics compute_metrics(std::span<const int> truth, std::span<const int> predicted, int classes) {
  if (truth.size() != predicted.size()) {
    throw Error(ErrorCode::ShapeMismatch, "truth and prediction counts differ");
  }
  if (truth.empty()) throw Error(ErrorCode::EmptySplit, "no samples to score");
  std::vector<std::vector<long>> confusion(classes, std::vector<long>(classes, 0));
  for (size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= classes || predicted[i] < 0 || predicted[i] >= classes) {
      throw Error(ErrorCode::InvalidLabel, "label out of range at sample " + std::to_string(i));
    }
    ++confusion[truth[i]][predicted[i]];
  }
  return metrics_from_confusion(std::move(confusion));
}

}  // namespace eegglt
