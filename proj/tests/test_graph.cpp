#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "eegglt/error.hpp"
#include "eegglt/graph.hpp"
#include "support.hpp"

using namespace eegglt;
using graph::Matrix;
using graph::Vector;
using testing_support::random_symmetric_adjacency;

namespace {

// Direct-definition Pearson: covariance and standard deviations by their sums.
Matrix brute_force_pcc(const Matrix& x) {
  const auto c = x.rows();
  const auto t = x.cols();
  Matrix out = Matrix::Zero(c, c);
  for (Eigen::Index i = 0; i < c; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) {
      if (i == j) continue;
      double mi = 0, mj = 0;
      for (Eigen::Index k = 0; k < t; ++k) {
        mi += x(i, k);
        mj += x(j, k);
      }
      mi /= t;
      mj /= t;
      double cov = 0, vi = 0, vj = 0;
      for (Eigen::Index k = 0; k < t; ++k) {
        cov += (x(i, k) - mi) * (x(j, k) - mj);
        vi += (x(i, k) - mi) * (x(i, k) - mi);
        vj += (x(j, k) - mj) * (x(j, k) - mj);
      }
      out(i, j) = std::abs(cov / std::sqrt(vi * vj));
    }
  }
  return out;
}

graph::ElectrodeLayout random_sphere_layout(int n, std::mt19937_64& gen) {
  std::normal_distribution<double> d;
  graph::ElectrodeLayout l;
  for (int i = 0; i < n; ++i) {
    Eigen::Vector3d p(d(gen), d(gen), d(gen));
    l.names.push_back("E" + std::to_string(i));
    l.coords.push_back(p.normalized());
  }
  return l;
}

}  // namespace

TEST(Pcc, IntegerFixtureMatchesBruteForce) {
  Matrix x(3, 4);
  x << 1, 2, 3, 5, 2, 1, 0, 4, 7, 3, 3, 1;
  const Matrix a = graph::pcc_adjacency(x).adjacency;
  const Matrix oracle = brute_force_pcc(x);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(a(i, j), oracle(i, j), 1e-12) << i << "," << j;
  }
  EXPECT_EQ(a.diagonal().cwiseAbs().maxCoeff(), 0.0);
}

TEST(Pcc, AffineRescalingInvariance) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> d;
  Matrix x(6, 50);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = d(gen);
  Matrix y = x;
  for (int c = 0; c < 6; ++c) y.row(c) = y.row(c) * (0.5 + c) + Eigen::RowVectorXd::Constant(50, 3.0 - c);
  EXPECT_LT((graph::pcc_adjacency(x).adjacency - graph::pcc_adjacency(y).adjacency).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Pcc, ConstantChannelIsRejected) {
  Matrix x = Matrix::Random(3, 10);
  x.row(1).setConstant(2.0);
  try {
    graph::pcc_adjacency(x);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroVarianceChannel);
  }
}

TEST(Geodesic, BuiltInLayoutIsSymmetricAndNormalized) {
  const auto layout = graph::default_layout();
  ASSERT_EQ(layout.size(), 64);
  const Matrix a = graph::geodesic_adjacency(layout).adjacency;
  EXPECT_LT((a - a.transpose()).cwiseAbs().maxCoeff(), 1e-15);
  double lo = 1e9, hi = -1e9;
  for (int i = 0; i < 64; ++i) {
    EXPECT_EQ(a(i, i), 0.0);
    for (int j = 0; j < 64; ++j) {
      if (i == j) continue;
      lo = std::min(lo, a(i, j));
      hi = std::max(hi, a(i, j));
    }
  }
  EXPECT_DOUBLE_EQ(lo, 0.0);
  EXPECT_DOUBLE_EQ(hi, 1.0);
}

TEST(Geodesic, AntipodalPairIsPi) {
  graph::ElectrodeLayout l;
  l.names = {"a", "b", "c"};
  l.coords = {{0, 0, 1}, {0, 0, -1}, {1, 0, 0}};
  const Matrix a = graph::geodesic_adjacency(l, false).adjacency;
  EXPECT_NEAR(a(0, 1), std::numbers::pi, 1e-12);
  EXPECT_NEAR(a(0, 2), std::numbers::pi / 2, 1e-12);
}

TEST(Geodesic, RotationInvariance) {
  std::mt19937_64 gen(11);
  const auto l = random_sphere_layout(12, gen);
  auto r = l;
  const Eigen::Matrix3d rot = (Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, 3).normalized())).toRotationMatrix();
  for (auto& p : r.coords) p = rot * p;
  EXPECT_LT((graph::geodesic_adjacency(l).adjacency - graph::geodesic_adjacency(r).adjacency).cwiseAbs().maxCoeff(),
            1e-9);
}

TEST(Geodesic, OffSphereCoordinateIsRejected) {
  graph::ElectrodeLayout l;
  l.names = {"a", "b"};
  l.coords = {{0, 0, 1}, {0, 0, 1.5}};
  try {
    graph::geodesic_adjacency(l);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OffSphereCoordinate);
  }
}

TEST(Layout, CsvRoundTripAndErrors) {
  testing_support::TempDir tmp("layout");
  const auto path = tmp.path() / "layout.csv";
  {
    std::ofstream out(path);
    out << "name,x,y,z\nCz,0,0,1\nFz,0,1,0\n";
  }
  const auto l = graph::load_layout(path);
  ASSERT_EQ(l.size(), 2);
  EXPECT_EQ(l.index_of("fz"), 1);
  EXPECT_EQ(l.index_of("Cz.."), 0);
  EXPECT_EQ(l.index_of("Oz"), -1);
  EXPECT_THROW(graph::load_layout(tmp.path() / "missing.csv"), Error);
}

TEST(Laplacian, CompleteK3Spectrum) {
  const auto b = graph::laplacian_bundle(graph::complete_graph(3));
  Eigen::SelfAdjointEigenSolver<Matrix> es(b.laplacian);
  EXPECT_NEAR(es.eigenvalues()(0), 0.0, 1e-9);
  EXPECT_NEAR(es.eigenvalues()(1), 1.5, 1e-9);
  EXPECT_NEAR(es.eigenvalues()(2), 1.5, 1e-9);
}

TEST(Laplacian, SpectrumBoundsOnRandomGraphs) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 3 + trial % 14;
    graph::Graph g{random_symmetric_adjacency(n, gen)};
    const auto b = graph::laplacian_bundle(g);
    Eigen::SelfAdjointEigenSolver<Matrix> es(b.laplacian);
    EXPECT_NEAR(es.eigenvalues()(0), 0.0, 1e-9);
    EXPECT_LE(es.eigenvalues()(n - 1), 2.0 + 1e-9);
    EXPECT_LT((b.scaled - (b.laplacian - Matrix::Identity(n, n))).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(Laplacian, IsolatedNodeZeroedOrRejected) {
  Matrix a = Matrix::Zero(3, 3);
  a(0, 1) = a(1, 0) = 1.0;
  const auto b = graph::laplacian_bundle(graph::Graph{a});
  ASSERT_EQ(b.isolated_nodes, std::vector<int>{2});
  EXPECT_EQ(b.laplacian(2, 0), 0.0);
  EXPECT_EQ(b.laplacian(2, 2), 1.0);
  graph::LaplacianOptions strict;
  strict.strict = true;
  try {
    graph::laplacian_bundle(graph::Graph{a}, strict);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IsolatedNode);
  }
}

TEST(Laplacian, PowerIterationApproachesLargestEigenvalue) {
  std::mt19937_64 gen(9);
  graph::Graph g{random_symmetric_adjacency(10, gen)};
  graph::LaplacianOptions opts;
  opts.lambda_max = graph::LambdaMaxMode::PowerIteration;
  opts.power_iterations = 500;
  opts.power_tolerance = 1e-14;
  const auto b = graph::laplacian_bundle(g, opts);
  Eigen::SelfAdjointEigenSolver<Matrix> es(b.laplacian);
  EXPECT_NEAR(b.lambda_max, es.eigenvalues().maxCoeff(), 1e-6);
  EXPECT_LT((b.scaled - (2.0 / b.lambda_max * b.laplacian - Matrix::Identity(10, 10))).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Chebyshev, TermsMatchScalarPolynomialsOnEigenvalues) {
  std::mt19937_64 gen(21);
  for (int n : {4, 8, 16}) {
    const auto b = graph::laplacian_bundle(graph::Graph{random_symmetric_adjacency(n, gen)});
    const auto basis = graph::chebyshev_basis(b, 6);
    Eigen::SelfAdjointEigenSolver<Matrix> es(b.scaled);
    for (int k = 0; k < 6; ++k) {
      const Matrix d = es.eigenvectors().transpose() * basis.terms[k] * es.eigenvectors();
      for (int l = 0; l < n; ++l) {
        const double lam = std::clamp(es.eigenvalues()(l), -1.0, 1.0);
        EXPECT_NEAR(d(l, l), std::cos(k * std::acos(lam)), 1e-8);
      }
    }
  }
}

TEST(Chebyshev, OrderOneIsIdentityAndInvalidOrderThrows) {
  const auto basis = graph::chebyshev_basis(Matrix::Identity(4, 4) * 0.3, 1);
  ASSERT_EQ(basis.order(), 1);
  EXPECT_EQ(basis.terms[0], Matrix::Identity(4, 4));
  EXPECT_THROW(graph::chebyshev_basis(Matrix::Identity(4, 4), 0), Error);
}

TEST(Chebyshev, ScalarRecurrence) {
  for (double x : {-1.0, -0.3, 0.0, 0.5, 1.0}) {
    for (int k = 0; k < 8; ++k) EXPECT_NEAR(graph::chebyshev_scalar(k, x), std::cos(k * std::acos(x)), 1e-12);
  }
}

TEST(Spectral, LibraryOracleAgreesWithRecurrence) {
  std::mt19937_64 gen(33);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 4 + trial % 12;
    const auto b = graph::laplacian_bundle(graph::Graph{random_symmetric_adjacency(n, gen)});
    const auto theta = testing_support::random_values(5, gen);
    const Vector x = Vector::Random(n);
    const Vector rec = graph::chebyshev_filter(graph::chebyshev_basis(b, 5), theta, x);
    EXPECT_LT((rec - graph::spectral_conv_oracle(b, theta, x)).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Spectral, BasisReconstructsLaplacian) {
  std::mt19937_64 gen(34);
  const auto b = graph::laplacian_bundle(graph::Graph{random_symmetric_adjacency(9, gen)});
  const auto s = graph::spectral_basis(b.laplacian, b.lambda_max);
  const Matrix rec = s.eigenvectors * s.eigenvalues.asDiagonal() * s.eigenvectors.transpose();
  EXPECT_LT((rec - b.laplacian).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT((s.scaled_eigenvalues.array() - (2.0 / b.lambda_max * s.eigenvalues.array() - 1.0)).abs().maxCoeff(), 1e-15);
}

TEST(Spectral, AsymmetricInputIsRejected) {
  Matrix a = Matrix::Ones(3, 3);
  a.diagonal().setZero();
  a(0, 1) = 3.0;
  const auto b = graph::laplacian_bundle(graph::Graph{a});
  const std::vector<double> theta{1.0, 0.5};
  try {
    graph::spectral_conv_oracle(b, theta, Vector::Ones(3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AsymmetricInput);
  }
}

TEST(Masked, HadamardProduct) {
  const auto g = graph::complete_graph(4);
  Matrix m = Matrix::Constant(4, 4, 0.5);
  const auto out = graph::masked_adjacency(g, m);
  EXPECT_EQ(out.adjacency(0, 1), 0.5);
  EXPECT_EQ(out.adjacency(2, 2), 0.0);
  EXPECT_EQ(out.nnz(), 12);
  EXPECT_THROW(graph::masked_adjacency(g, Matrix::Ones(3, 3)), Error);
}
