#include "eegglt/graph.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>

#include "eegglt/csv.hpp"
#include "eegglt/error.hpp"

namespace eegglt::graph {

namespace {

constexpr double kOffSphereTol = 1e-6;
constexpr double kSymmetryTol = 1e-9;

std::string normalize_label(std::string_view s) {
  while (!s.empty() && (s.back() == '.' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

ElectrodeLayout parse_layout(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  ElectrodeLayout layout;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = csv::split(line);
    if (header) {
      header = false;
      if (cells.size() == 4 && normalize_label(cells[0]) == "NAME") continue;
    }
    if (cells.size() != 4) {
      throw Error(ErrorCode::ParseError, origin + ": expected name,x,y,z but got '" + line + "'");
    }
    layout.names.push_back(normalize_label(cells[0]));
    layout.coords.emplace_back(csv::parse_double(cells[1]), csv::parse_double(cells[2]),
                               csv::parse_double(cells[3]));
  }
  if (layout.names.empty()) throw Error(ErrorCode::EmptyInput, origin + ": no electrodes");
  return layout;
}

const char kDefaultLayoutCsv[] =
#include "electrodes_64.inc"
    ;

}  // namespace

long Graph::nnz() const { return static_cast<long>((adjacency.array() != 0.0).count()); }

bool Graph::is_symmetric(double tol) const {
  if (adjacency.rows() != adjacency.cols()) return false;
  return (adjacency - adjacency.transpose()).cwiseAbs().maxCoeff() <= tol;
}

int ElectrodeLayout::index_of(std::string_view label) const {
  const auto key = normalize_label(label);
  for (size_t i = 0; i < names.size(); ++i) {
    if (names[i] == key) return static_cast<int>(i);
  }
  return -1;
}

Graph pcc_adjacency(const Matrix& signals) {
  const auto n = signals.rows();
  const auto t = signals.cols();
  if (t < 2) throw Error(ErrorCode::DimensionMismatch, "PCC needs at least 2 samples per channel");
  Matrix centered = signals.colwise() - signals.rowwise().mean();
  Vector sd = centered.rowwise().norm();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(sd(i) > 0.0)) {
      throw Error(ErrorCode::ZeroVarianceChannel, "channel " + std::to_string(i) + " is constant");
    }
  }
  // The 1/(T-1) factors of covariance and both deviations cancel.
  Matrix cov = centered * centered.transpose();
  Graph g;
  g.adjacency.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      g.adjacency(i, j) = i == j ? 0.0 : std::min(1.0, std::abs(cov(i, j) / (sd(i) * sd(j))));
    }
  }
  return g;
}

Graph geodesic_adjacency(const ElectrodeLayout& layout, bool normalize) {
  const int n = layout.size();
  if (static_cast<int>(layout.coords.size()) != n) {
    throw Error(ErrorCode::ShapeMismatch, "layout names/coords differ in length");
  }
  const double r = layout.radius;
  for (int i = 0; i < n; ++i) {
    if (std::abs(layout.coords[i].norm() - r) > kOffSphereTol) {
      throw Error(ErrorCode::OffSphereCoordinate,
                  layout.names[i] + " lies off the sphere of radius " + csv::format_double(r));
    }
  }
  Graph g;
  g.adjacency = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double c = std::clamp(layout.coords[i].dot(layout.coords[j]) / (r * r), -1.0, 1.0);
      g.adjacency(i, j) = std::acos(c);
    }
  }
  if (normalize && n > 1) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        lo = std::min(lo, g.adjacency(i, j));
        hi = std::max(hi, g.adjacency(i, j));
      }
    }
    const double span = hi - lo;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        g.adjacency(i, j) = span > 0.0 ? (g.adjacency(i, j) - lo) / span : 0.0;
      }
    }
  }
  return g;
}

Graph complete_graph(int n_nodes) {
  Graph g;
  g.adjacency = Matrix::Ones(n_nodes, n_nodes);
  g.adjacency.diagonal().setZero();
  return g;
}

Graph masked_adjacency(const Graph& original, const Matrix& mask) {
  if (original.adjacency.rows() != mask.rows() || original.adjacency.cols() != mask.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "mask shape differs from adjacency");
  }
  Graph g;
  g.adjacency = original.adjacency.cwiseProduct(mask);
  g.adjacency.diagonal().setZero();
  return g;
}

double power_iteration_lambda(const Matrix& symmetric, int iterations, double tolerance) {
  const auto n = symmetric.rows();
  if (n == 0) return 0.0;
  Vector v(n);
  // Alternating signs keep the start away from the constant-like bottom eigenvector of a Laplacian.
  for (Eigen::Index i = 0; i < n; ++i) v(i) = (i % 2 ? -1.0 : 1.0) * (1.0 + static_cast<double>(i) / static_cast<double>(n));
  v.normalize();
  double lambda = v.dot(symmetric * v);
  for (int it = 0; it < iterations; ++it) {
    Vector w = symmetric * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    const double next = v.dot(symmetric * v);
    const bool done = std::abs(next - lambda) < tolerance;
    lambda = next;
    if (done) break;
  }
  return lambda;
}

LaplacianBundle laplacian_bundle(const Graph& g, const LaplacianOptions& opts) {
  const auto n = g.adjacency.rows();
  if (g.adjacency.cols() != n) throw Error(ErrorCode::ShapeMismatch, "adjacency must be square");
  LaplacianBundle b;
  b.degree = g.adjacency.rowwise().sum();
  Vector inv_sqrt(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (b.degree(i) > 0.0) {
      inv_sqrt(i) = 1.0 / std::sqrt(b.degree(i));
    } else {
      if (opts.strict) {
        throw Error(ErrorCode::IsolatedNode, "node " + std::to_string(i) + " has degree " +
                                                 csv::format_double(b.degree(i)));
      }
      inv_sqrt(i) = 0.0;
      b.isolated_nodes.push_back(static_cast<int>(i));
    }
  }
  b.laplacian = -(inv_sqrt.asDiagonal() * g.adjacency * inv_sqrt.asDiagonal());
  b.laplacian.diagonal().array() += 1.0;
  if (opts.lambda_max == LambdaMaxMode::PowerIteration) {
    const Matrix sym = 0.5 * (b.laplacian + b.laplacian.transpose());
    b.lambda_max = power_iteration_lambda(sym, opts.power_iterations, opts.power_tolerance);
    if (!(b.lambda_max > 0.0)) b.lambda_max = 2.0;
  } else {
    b.lambda_max = 2.0;
  }
  b.scaled = (2.0 / b.lambda_max) * b.laplacian;
  b.scaled.diagonal().array() -= 1.0;
  return b;
}

ChebBasis chebyshev_basis(const Matrix& scaled, int order) {
  if (order < 1) throw Error(ErrorCode::InvalidOrder, "Chebyshev order must be >= 1");
  const auto n = scaled.rows();
  ChebBasis basis;
  basis.terms.reserve(static_cast<size_t>(order));
  basis.terms.push_back(Matrix::Identity(n, n));
  if (order >= 2) basis.terms.push_back(scaled);
  for (int k = 2; k < order; ++k) {
    basis.terms.push_back(2.0 * scaled * basis.terms[k - 1] - basis.terms[k - 2]);
  }
  return basis;
}

ChebBasis chebyshev_basis(const LaplacianBundle& bundle, int order) {
  return chebyshev_basis(bundle.scaled, order);
}

double chebyshev_scalar(int k, double x) {
  if (k == 0) return 1.0;
  double prev = 1.0;
  double cur = x;
  for (int i = 2; i <= k; ++i) {
    const double next = 2.0 * x * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

SpectralBasis spectral_basis(const Matrix& laplacian, double lambda_max) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(laplacian);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NonFiniteValue, "eigendecomposition failed");
  }
  SpectralBasis s;
  s.eigenvectors = solver.eigenvectors();
  s.eigenvalues = solver.eigenvalues();
  s.scaled_eigenvalues = (2.0 / lambda_max) * s.eigenvalues.array() - 1.0;
  return s;
}

Vector chebyshev_filter(const ChebBasis& basis, std::span<const double> theta, const Vector& x) {
  if (static_cast<int>(theta.size()) > basis.order()) {
    throw Error(ErrorCode::ShapeMismatch, "more coefficients than Chebyshev terms");
  }
  Vector out = Vector::Zero(x.size());
  for (size_t k = 0; k < theta.size(); ++k) out += theta[k] * (basis.terms[k] * x);
  return out;
}

Vector spectral_conv_oracle(const LaplacianBundle& bundle, std::span<const double> theta,
                            const Vector& x) {
  const Matrix& lt = bundle.scaled;
  if ((lt - lt.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol) {
    throw Error(ErrorCode::AsymmetricInput, "spectral oracle requires a symmetric Laplacian");
  }
  const SpectralBasis s = spectral_basis(bundle.laplacian, bundle.lambda_max);
  Vector response = Vector::Zero(s.eigenvalues.size());
  for (Eigen::Index l = 0; l < response.size(); ++l) {
    for (size_t k = 0; k < theta.size(); ++k) {
      response(l) += theta[k] * chebyshev_scalar(static_cast<int>(k), s.scaled_eigenvalues(l));
    }
  }
  return s.eigenvectors * (response.asDiagonal() * (s.eigenvectors.transpose() * x));
}

ElectrodeLayout load_layout(const std::filesystem::path& csv_path) {
  return parse_layout(csv::read_text(csv_path), csv_path.string());
}

ElectrodeLayout default_layout() { return parse_layout(kDefaultLayoutCsv, "builtin layout"); }

}  // namespace eegglt::graph
