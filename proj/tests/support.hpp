#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eegglt/tensor.hpp"

namespace testing_support {

inline Eigen::MatrixXd random_symmetric_adjacency(int n, std::mt19937_64& gen, double p_zero = 0.0) {
  std::uniform_real_distribution<double> w(0.05, 1.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double v = coin(gen) < p_zero ? 0.0 : w(gen);
      a(i, j) = v;
      a(j, i) = v;
    }
  }
  return a;
}

inline std::vector<double> random_values(size_t n, std::mt19937_64& gen, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = d(gen);
  return v;
}

inline double rel_err(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / scale;
}

// Central differences of a scalar loss with respect to every entry of `wrt`.
// Returns the worst relative error against the accumulated analytic gradient.
inline double worst_gradient_error(const std::function<eegglt::ad::Tensor()>& loss_fn,
                                   std::vector<eegglt::ad::Tensor> wrt, double h = 1e-5) {
  for (auto& t : wrt) t.zero_grad();
  loss_fn().backward();
  double worst = 0.0;
  for (auto& t : wrt) {
    const std::vector<double> analytic(t.grad().begin(), t.grad().end());
    auto v = t.mutable_value();
    for (size_t i = 0; i < v.size(); ++i) {
      const double orig = v[i];
      double plus = 0.0;
      double minus = 0.0;
      {
        eegglt::ad::NoGradGuard guard;
        v[i] = orig + h;
        plus = loss_fn().item();
        v[i] = orig - h;
        minus = loss_fn().item();
      }
      v[i] = orig;
      worst = std::max(worst, rel_err(analytic[i], (plus - minus) / (2.0 * h)));
    }
  }
  return worst;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("eegglt_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing_support
