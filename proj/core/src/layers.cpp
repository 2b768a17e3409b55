#include "eegglt/layers.hpp"

#include <algorithm>
#include <cmath>

#include "eegglt/error.hpp"

namespace eegglt::ad {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapC = Eigen::Map<const RowMat>;
using Map = Eigen::Map<RowMat>;

void expect(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::ShapeMismatch, what);
}

}  // namespace

Tensor matrix_tensor(const graph::Matrix& m, bool requires_grad) {
  std::vector<double> v(static_cast<size_t>(m.size()));
  Map(v.data(), m.rows(), m.cols()) = m;
  return Tensor::from({static_cast<int>(m.rows()), static_cast<int>(m.cols())}, std::move(v),
                      requires_grad);
}

Tensor scaled_laplacian(const Tensor& mask, const graph::Matrix& original,
                        const graph::LaplacianOptions& opts, std::vector<int>* isolated) {
  const int n = static_cast<int>(original.rows());
  expect(mask.rank() == 2 && mask.dim(0) == n && mask.dim(1) == n && original.cols() == n,
         "mask " + shape_string(mask.shape()) + " vs adjacency " + std::to_string(n));
  graph::Graph g;
  g.adjacency = original.cwiseProduct(MapC(mask.value().data(), n, n));
  g.adjacency.diagonal().setZero();
  graph::LaplacianBundle bundle = graph::laplacian_bundle(g, opts);
  if (isolated) *isolated = bundle.isolated_nodes;

  graph::Vector inv_sqrt(n);
  for (int i = 0; i < n; ++i) inv_sqrt(i) = bundle.degree(i) > 0.0 ? 1.0 / std::sqrt(bundle.degree(i)) : 0.0;

  std::vector<double> out(static_cast<size_t>(n) * n);
  Map(out.data(), n, n) = bundle.scaled;
  const double lambda = bundle.lambda_max;
  graph::Matrix adjacency = std::move(g.adjacency);
  graph::Matrix orig = original;
  Tensor m = mask;
  return make_result(
      {n, n}, std::move(out), {mask},
      [m, adjacency, orig, inv_sqrt, lambda, n](Node& self) mutable {
        // L~ = (2/lambda)(I - S) - I, S = D^{-1/2} A D^{-1/2}, D = rowsum(A).
        graph::Matrix d_s = -(2.0 / lambda) * graph::Matrix(MapC(self.grad.data(), n, n));
        graph::Matrix d_a = d_s.cwiseProduct(inv_sqrt * inv_sqrt.transpose());
        const graph::Matrix weighted = d_s.cwiseProduct(adjacency);
        graph::Vector g_s = weighted * inv_sqrt + weighted.transpose() * inv_sqrt;
        graph::Vector g_d = -0.5 * inv_sqrt.array().cube() * g_s.array();
        d_a.colwise() += g_d;
        d_a = d_a.cwiseProduct(orig);
        d_a.diagonal().setZero();
        Map(m.mutable_grad().data(), n, n) += d_a;
      },
      "scaled_laplacian");
}

Tensor chebyshev_terms(const Tensor& scaled, int order) {
  if (order < 1) throw Error(ErrorCode::InvalidOrder, "Chebyshev order must be >= 1");
  expect(scaled.rank() == 2 && scaled.dim(0) == scaled.dim(1), "scaled Laplacian must be square");
  const int n = scaled.dim(0);
  const size_t nn = static_cast<size_t>(n) * n;
  const graph::Matrix lt = MapC(scaled.value().data(), n, n);
  const graph::ChebBasis basis = graph::chebyshev_basis(lt, order);
  std::vector<double> out(nn * order);
  for (int k = 0; k < order; ++k) Map(out.data() + k * nn, n, n) = basis.terms[k];
  Tensor s = scaled;
  return make_result(
      {order, n, n}, std::move(out), {scaled},
      [s, basis, lt, order, n, nn](Node& self) mutable {
        std::vector<graph::Matrix> d_t(static_cast<size_t>(order));
        for (int k = 0; k < order; ++k) d_t[k] = MapC(self.grad.data() + k * nn, n, n);
        graph::Matrix d_l = graph::Matrix::Zero(n, n);
        for (int k = order - 1; k >= 2; --k) {
          d_l.noalias() += 2.0 * d_t[k] * basis.terms[k - 1].transpose();
          d_t[k - 1].noalias() += 2.0 * lt.transpose() * d_t[k];
          d_t[k - 2] -= d_t[k];
        }
        if (order >= 2) d_l += d_t[1];
        Map(s.mutable_grad().data(), n, n) += d_l;
      },
      "chebyshev_terms");
}

Tensor basis_tensor(const graph::ChebBasis& basis) {
  const int order = basis.order();
  const int n = order > 0 ? static_cast<int>(basis.terms[0].rows()) : 0;
  const size_t nn = static_cast<size_t>(n) * n;
  std::vector<double> out(nn * order);
  for (int k = 0; k < order; ++k) Map(out.data() + k * nn, n, n) = basis.terms[k];
  return Tensor::from({order, n, n}, std::move(out));
}

Tensor cheb_conv(const Tensor& x, const Tensor& terms, const Tensor& theta, const Tensor& bias) {
  expect(x.rank() == 3, "cheb_conv input must be [B, N, F_in], got " + shape_string(x.shape()));
  const int batch = x.dim(0), n = x.dim(1), f_in = x.dim(2);
  expect(theta.rank() == 3 && theta.dim(1) == f_in,
         "theta " + shape_string(theta.shape()) + " vs F_in " + std::to_string(f_in));
  const int order = theta.dim(0), f_out = theta.dim(2);
  expect(terms.rank() == 3 && terms.dim(0) >= order && terms.dim(1) == n && terms.dim(2) == n,
         "basis " + shape_string(terms.shape()) + " vs order " + std::to_string(order) + ", N " +
             std::to_string(n));
  expect(bias.rank() == 2 && bias.dim(0) == n && bias.dim(1) == f_out,
         "bias " + shape_string(bias.shape()) + " vs [N, F_out]");
  const size_t nn = static_cast<size_t>(n) * n;
  const size_t x_stride = static_cast<size_t>(n) * f_in;
  const size_t o_stride = static_cast<size_t>(n) * f_out;
  const size_t w_stride = static_cast<size_t>(f_in) * f_out;

  std::vector<double> out(static_cast<size_t>(batch) * o_stride);
  const MapC b_mat(bias.value().data(), n, f_out);
  RowMat y(n, f_in);
  for (int b = 0; b < batch; ++b) {
    Map o(out.data() + b * o_stride, n, f_out);
    o = b_mat;
    const MapC xb(x.value().data() + b * x_stride, n, f_in);
    for (int k = 0; k < order; ++k) {
      const MapC w(theta.value().data() + k * w_stride, f_in, f_out);
      if (k == 0) {
        o.noalias() += xb * w;  // T_0 = I
      } else {
        y.noalias() = MapC(terms.value().data() + k * nn, n, n) * xb;
        o.noalias() += y * w;
      }
    }
  }
  Tensor xs = x, ts = terms, ws = theta, bs = bias;
  return make_result(
      {batch, n, f_out}, std::move(out), {x, terms, theta, bias},
      [=](Node& self) mutable {
        const bool gx = xs.requires_grad(), gt = ts.requires_grad(), gw = ws.requires_grad(),
                   gb = bs.requires_grad();
        RowMat y(n, f_in), dy(n, f_in);
        for (int b = 0; b < batch; ++b) {
          const MapC dout(self.grad.data() + b * o_stride, n, f_out);
          const MapC xb(xs.value().data() + b * x_stride, n, f_in);
          if (gb) Map(bs.mutable_grad().data(), n, f_out) += dout;
          for (int k = 0; k < order; ++k) {
            const MapC w(ws.value().data() + k * w_stride, f_in, f_out);
            const MapC t(ts.value().data() + k * nn, n, n);
            if (gw) {
              Map dw(ws.mutable_grad().data() + k * w_stride, f_in, f_out);
              if (k == 0) {
                dw.noalias() += xb.transpose() * dout;
              } else {
                y.noalias() = t * xb;
                dw.noalias() += y.transpose() * dout;
              }
            }
            if (gx || (gt && k > 0)) {
              dy.noalias() = dout * w.transpose();
              if (gx) {
                Map dx(xs.mutable_grad().data() + b * x_stride, n, f_in);
                if (k == 0) {
                  dx += dy;
                } else {
                  dx.noalias() += t.transpose() * dy;
                }
              }
              if (gt && k > 0) {
                Map(ts.mutable_grad().data() + k * nn, n, n).noalias() += dy * xb.transpose();
              }
            }
          }
        }
      },
      "cheb_conv");
}

void BatchNormState::reset() {
  std::fill(running_mean.begin(), running_mean.end(), 0.0);
  std::fill(running_var.begin(), running_var.end(), 1.0);
}

Tensor batch_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, BatchNormState& state,
                  Mode mode) {
  expect(x.rank() >= 2, "batch_norm input must have a batch axis");
  const int f = x.shape().back();
  expect(gamma.size() == static_cast<size_t>(f) && beta.size() == static_cast<size_t>(f),
         "batch_norm gamma/beta must have " + std::to_string(f) + " entries");
  expect(state.running_mean.size() == static_cast<size_t>(f), "batch_norm running stats size");
  const size_t rows = x.size() / static_cast<size_t>(f);
  if (mode == Mode::Train && x.dim(0) < 2) {
    throw Error(ErrorCode::BatchTooSmall, "train-mode batch norm needs B >= 2");
  }
  std::vector<double> mean(f, 0.0), inv_std(f, 0.0);
  const auto xv = x.value();
  if (mode == Mode::Train) {
    std::vector<double> var(f, 0.0);
    for (size_t r = 0; r < rows; ++r) {
      for (int j = 0; j < f; ++j) mean[j] += xv[r * f + j];
    }
    for (int j = 0; j < f; ++j) mean[j] /= static_cast<double>(rows);
    for (size_t r = 0; r < rows; ++r) {
      for (int j = 0; j < f; ++j) {
        const double d = xv[r * f + j] - mean[j];
        var[j] += d * d;
      }
    }
    const double unbias = rows > 1 ? static_cast<double>(rows) / static_cast<double>(rows - 1) : 1.0;
    for (int j = 0; j < f; ++j) {
      var[j] /= static_cast<double>(rows);
      inv_std[j] = 1.0 / std::sqrt(var[j] + state.eps);
      state.running_mean[j] = (1.0 - state.momentum) * state.running_mean[j] + state.momentum * mean[j];
      state.running_var[j] =
          (1.0 - state.momentum) * state.running_var[j] + state.momentum * var[j] * unbias;
    }
  } else {
    for (int j = 0; j < f; ++j) {
      mean[j] = state.running_mean[j];
      inv_std[j] = 1.0 / std::sqrt(state.running_var[j] + state.eps);
    }
  }
  std::vector<double> xhat(x.size()), out(x.size());
  const auto gv = gamma.value(), bv = beta.value();
  for (size_t r = 0; r < rows; ++r) {
    for (int j = 0; j < f; ++j) {
      const size_t i = r * f + j;
      xhat[i] = (xv[i] - mean[j]) * inv_std[j];
      out[i] = gv[j] * xhat[i] + bv[j];
    }
  }
  Tensor xs = x, gs = gamma, bs = beta;
  const bool train = mode == Mode::Train;
  return make_result(
      x.shape(), std::move(out), {x, gamma, beta},
      [=](Node& self) mutable {
        const auto& dy = self.grad;
        const auto gv = gs.value();
        std::vector<double> sum_dy(f, 0.0), sum_dy_xhat(f, 0.0);
        for (size_t r = 0; r < rows; ++r) {
          for (int j = 0; j < f; ++j) {
            sum_dy[j] += dy[r * f + j];
            sum_dy_xhat[j] += dy[r * f + j] * xhat[r * f + j];
          }
        }
        if (gs.requires_grad()) {
          auto dg = gs.mutable_grad();
          for (int j = 0; j < f; ++j) dg[j] += sum_dy_xhat[j];
        }
        if (bs.requires_grad()) {
          auto db = bs.mutable_grad();
          for (int j = 0; j < f; ++j) db[j] += sum_dy[j];
        }
        if (!xs.requires_grad()) return;
        auto dx = xs.mutable_grad();
        const double m = static_cast<double>(rows);
        for (size_t r = 0; r < rows; ++r) {
          for (int j = 0; j < f; ++j) {
            const size_t i = r * f + j;
            if (train) {
              dx[i] += gv[j] * inv_std[j] * (dy[i] - sum_dy[j] / m - xhat[i] * sum_dy_xhat[j] / m);
            } else {
              dx[i] += gv[j] * inv_std[j] * dy[i];
            }
          }
        }
      },
      "batch_norm");
}

Tensor relu(const Tensor& x) {
  std::vector<double> out(x.size());
  const auto xv = x.value();
  for (size_t i = 0; i < out.size(); ++i) out[i] = xv[i] > 0.0 ? xv[i] : 0.0;
  Tensor xs = x;
  return make_result(
      x.shape(), std::move(out), {x},
      [xs](Node& self) mutable {
        auto dx = xs.mutable_grad();
        const auto xv = xs.value();
        for (size_t i = 0; i < dx.size(); ++i) {
          if (xv[i] > 0.0) dx[i] += self.grad[i];
        }
      },
      "relu");
}

Tensor dropout(const Tensor& x, double rate, Mode mode, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw Error(ErrorCode::InvalidRate, "dropout rate must be in [0, 1)");
  if (mode == Mode::Eval || rate == 0.0) return x;
  const double scale = 1.0 / (1.0 - rate);
  std::vector<double> keep(x.size());
  for (auto& k : keep) k = rng.uniform() >= rate ? scale : 0.0;
  std::vector<double> out(x.size());
  const auto xv = x.value();
  for (size_t i = 0; i < out.size(); ++i) out[i] = xv[i] * keep[i];
  Tensor xs = x;
  return make_result(
      x.shape(), std::move(out), {x},
      [xs, keep](Node& self) mutable {
        auto dx = xs.mutable_grad();
        for (size_t i = 0; i < dx.size(); ++i) dx[i] += self.grad[i] * keep[i];
      },
      "dropout");
}

Tensor global_mean_pool(const Tensor& x) {
  expect(x.rank() == 3 && x.dim(1) >= 1, "global_mean_pool input must be [B, N, F]");
  const int batch = x.dim(0), n = x.dim(1), f = x.dim(2);
  std::vector<double> out(static_cast<size_t>(batch) * f, 0.0);
  const auto xv = x.value();
  const double inv_n = 1.0 / n;
  for (int b = 0; b < batch; ++b) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < f; ++j) out[b * f + j] += xv[(static_cast<size_t>(b) * n + i) * f + j];
    }
    for (int j = 0; j < f; ++j) out[b * f + j] *= inv_n;
  }
  Tensor xs = x;
  return make_result(
      {batch, f}, std::move(out), {x},
      [xs, batch, n, f, inv_n](Node& self) mutable {
        auto dx = xs.mutable_grad();
        for (int b = 0; b < batch; ++b) {
          for (int i = 0; i < n; ++i) {
            for (int j = 0; j < f; ++j) {
              dx[(static_cast<size_t>(b) * n + i) * f + j] += self.grad[b * f + j] * inv_n;
            }
          }
        }
      },
      "global_mean_pool");
}

Tensor fully_connected(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  expect(x.rank() == 2 && weight.rank() == 2 && weight.dim(0) == x.dim(1),
         "fully_connected " + shape_string(x.shape()) + " x " + shape_string(weight.shape()));
  const int batch = x.dim(0), d_in = x.dim(1), d_out = weight.dim(1);
  expect(bias.size() == static_cast<size_t>(d_out), "fully_connected bias size");
  std::vector<double> out(static_cast<size_t>(batch) * d_out);
  Map o(out.data(), batch, d_out);
  o.noalias() = MapC(x.value().data(), batch, d_in) * MapC(weight.value().data(), d_in, d_out);
  o.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(bias.value().data(), d_out);
  Tensor xs = x, ws = weight, bs = bias;
  return make_result(
      {batch, d_out}, std::move(out), {x, weight, bias},
      [=](Node& self) mutable {
        const MapC dout(self.grad.data(), batch, d_out);
        if (xs.requires_grad()) {
          Map(xs.mutable_grad().data(), batch, d_in).noalias() +=
              dout * MapC(ws.value().data(), d_in, d_out).transpose();
        }
        if (ws.requires_grad()) {
          Map(ws.mutable_grad().data(), d_in, d_out).noalias() +=
              MapC(xs.value().data(), batch, d_in).transpose() * dout;
        }
        if (bs.requires_grad()) {
          Eigen::Map<Eigen::RowVectorXd>(bs.mutable_grad().data(), d_out) += dout.colwise().sum();
        }
      },
      "fully_connected");
}

std::vector<double> softmax_rows(std::span<const double> logits, int classes) {
  std::vector<double> p(logits.size());
  const size_t rows = logits.size() / static_cast<size_t>(classes);
  for (size_t r = 0; r < rows; ++r) {
    const double* z = logits.data() + r * classes;
    const double mx = *std::max_element(z, z + classes);
    double sum = 0.0;
    for (int c = 0; c < classes; ++c) sum += std::exp(z[c] - mx);
    for (int c = 0; c < classes; ++c) p[r * classes + c] = std::exp(z[c] - mx) / sum;
  }
  return p;
}

Tensor softmax_cross_entropy(const Tensor& logits, std::span<const int> labels) {
  expect(logits.rank() == 2, "logits must be [B, O]");
  const int batch = logits.dim(0), classes = logits.dim(1);
  if (classes < 2) throw Error(ErrorCode::InvalidLabel, "need at least 2 classes");
  if (labels.size() != static_cast<size_t>(batch)) {
    throw Error(ErrorCode::ShapeMismatch, "label count differs from batch size");
  }
  for (int y : labels) {
    if (y < 0 || y >= classes) throw Error(ErrorCode::InvalidLabel, "label " + std::to_string(y));
  }
  const auto z = logits.value();
  double loss = 0.0;
  for (int b = 0; b < batch; ++b) {
    const double* row = z.data() + static_cast<size_t>(b) * classes;
    const double mx = *std::max_element(row, row + classes);
    double sum = 0.0;
    for (int c = 0; c < classes; ++c) sum += std::exp(row[c] - mx);
    loss += mx + std::log(sum) - row[labels[b]];
  }
  loss /= batch;
  std::vector<int> y(labels.begin(), labels.end());
  Tensor ls = logits;
  return make_result(
      {1}, {loss}, {logits},
      [ls, y, batch, classes](Node& self) mutable {
        const double scale = self.grad[0] / batch;
        const auto p = softmax_rows(ls.value(), classes);
        auto dz = ls.mutable_grad();
        for (int b = 0; b < batch; ++b) {
          for (int c = 0; c < classes; ++c) {
            const size_t i = static_cast<size_t>(b) * classes + c;
            dz[i] += scale * (p[i] - (c == y[b] ? 1.0 : 0.0));
          }
        }
      },
      "softmax_cross_entropy");
}

Tensor softmax_cross_entropy_onehot(const Tensor& logits, std::span<const double> onehot) {
  expect(logits.rank() == 2 && onehot.size() == logits.size(), "one-hot shape differs from logits");
  const int batch = logits.dim(0), classes = logits.dim(1);
  std::vector<int> labels(batch, -1);
  for (int b = 0; b < batch; ++b) {
    int hot = 0;
    for (int c = 0; c < classes; ++c) {
      const double v = onehot[static_cast<size_t>(b) * classes + c];
      if (v == 1.0) {
        ++hot;
        labels[b] = c;
      } else if (v != 0.0) {
        hot = -1;
        break;
      }
    }
    if (hot != 1) throw Error(ErrorCode::InvalidLabel, "row " + std::to_string(b) + " is not one-hot");
  }
  return softmax_cross_entropy(logits, labels);
}

}  // namespace eegglt::ad
