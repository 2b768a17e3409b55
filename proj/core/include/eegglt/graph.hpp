#pragma once

// Adjacency construction, normalized Laplacians and Chebyshev / spectral
// graph filtering over dense N x N matrices.

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace eegglt::graph {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Weighted adjacency without self loops.
struct Graph {
  Matrix adjacency;

  int n_nodes() const { return static_cast<int>(adjacency.rows()); }
  /// Number of nonzero entries.
  long nnz() const;
  bool is_symmetric(double tol = 0.0) const;
};

enum class LambdaMaxMode { Fixed2, PowerIteration };

struct LaplacianOptions {
  LambdaMaxMode lambda_max = LambdaMaxMode::Fixed2;
  /// Raise IsolatedNode instead of zeroing D^{-1/2} for nodes with degree <= 0.
  bool strict = false;
  int power_iterations = 200;
  double power_tolerance = 1e-10;
};

struct LaplacianBundle {
  Vector degree;         // row sums of A
  Matrix laplacian;      // I - D^{-1/2} A D^{-1/2}
  Matrix scaled;         // 2 L / lambda_max - I
  double lambda_max = 2.0;
  std::vector<int> isolated_nodes;  // nodes whose D^{-1/2} entry was zeroed
};

struct SpectralBasis {
  Matrix eigenvectors;        // U, columns are Fourier modes
  Vector eigenvalues;         // Lambda, ascending
  Vector scaled_eigenvalues;  // 2 Lambda / lambda_max - 1
};

struct ChebBasis {
  std::vector<Matrix> terms;  // T_0(L~) ... T_{K-1}(L~)

  int order() const { return static_cast<int>(terms.size()); }
};

struct ElectrodeLayout {
  std::vector<std::string> names;
  std::vector<Eigen::Vector3d> coords;
  double radius = 1.0;

  int size() const { return static_cast<int>(names.size()); }
  /// Index of a channel label; case-insensitive, trailing '.' padding ignored. -1 when absent.
  int index_of(std::string_view label) const;
};

/// |Pearson(signals)| - I. One row per channel, columns are samples.
Graph pcc_adjacency(const Matrix& signals);

/// Great-circle distances between electrodes; normalize min-max scales the off-diagonal into [0, 1].
Graph geodesic_adjacency(const ElectrodeLayout& layout, bool normalize = true);

/// All-ones adjacency with zero diagonal.
Graph complete_graph(int n_nodes);

/// original ⊙ mask, diagonal forced to 0.
Graph masked_adjacency(const Graph& original, const Matrix& mask);

LaplacianBundle laplacian_bundle(const Graph& g, const LaplacianOptions& opts = {});

/// Dominant eigenvalue of a symmetric matrix by power iteration with Rayleigh quotient.
double power_iteration_lambda(const Matrix& symmetric, int iterations = 200, double tolerance = 1e-10);

/// [T_0, ..., T_{K-1}] of the scaled Laplacian.
ChebBasis chebyshev_basis(const Matrix& scaled_laplacian, int order);
ChebBasis chebyshev_basis(const LaplacianBundle& bundle, int order);

/// Scalar Chebyshev polynomial T_k(x) by the same three-term recurrence.
double chebyshev_scalar(int k, double x);

/// Eigendecomposition of the (symmetric) Laplacian with eigenvalues rescaled by lambda_max.
SpectralBasis spectral_basis(const Matrix& laplacian, double lambda_max);

/// sum_k theta_k T_k(L~) x via the recurrence.
Vector chebyshev_filter(const ChebBasis& basis, std::span<const double> theta, const Vector& x);

/// U (sum_k theta_k T_k(Lambda^)) U^T x via explicit eigendecomposition. Test oracle.
Vector spectral_conv_oracle(const LaplacianBundle& bundle, std::span<const double> theta,
                            const Vector& x);

ElectrodeLayout load_layout(const std::filesystem::path& csv_path);
/// The 64 retained 10-10 channels on the unit sphere, in PhysioNet EDF header order.
ElectrodeLayout default_layout();

}  // namespace eegglt::graph
