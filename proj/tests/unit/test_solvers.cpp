#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "wassbary/error.hpp"
#include "wassbary/solvers.hpp"

using namespace wassbary;

namespace {

Matrix costs(const Matrix& x, const Matrix& y) {
  Matrix c(x.rows(), y.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < y.rows(); ++j) c(i, j) = (x.row(i) - y.row(j)).squaredNorm();
  return c;
}

TEST(Hungarian, MatchesPermutationOracle) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    int n = 1 + trial % 7;
    Matrix x = oracle::random_points(rng, n, 2), y = oracle::random_points(rng, n, 2);
    auto match = solvers::hungarian(costs(x, y));
    double c = 0.0;
    for (int i = 0; i < n; ++i) c += (x.row(i) - y.row(match[static_cast<std::size_t>(i)])).squaredNorm();
    EXPECT_NEAR(c / n, oracle::assignment_cost(x, y), 1e-12);
  }
}

TEST(Hungarian, ResultIsPermutation) {
  std::mt19937_64 rng(12);
  Matrix c = oracle::random_points(rng, 40, 40);
  auto m = solvers::hungarian(c);
  std::vector<int> sorted = m;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 40; ++i) EXPECT_EQ(sorted[static_cast<std::size_t>(i)], i);
}

TEST(NetworkSimplex, MatchesLpOracleOnWeightedInstances) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    int n = 1 + trial % 5, m = 1 + (trial / 5) % 5;
    Matrix x = oracle::random_points(rng, n, 2), y = oracle::random_points(rng, m, 2);
    Vector a(n), b(m);
    for (int i = 0; i < n; ++i) a[i] = u(rng);
    for (int j = 0; j < m; ++j) b[j] = u(rng);
    a /= a.sum();
    b /= b.sum();
    auto sol = solvers::network_simplex(a, b, costs(x, y));
    EXPECT_NEAR(sol.cost, oracle::lp_transport_cost(x, a, y, b), 1e-10) << trial;
    Vector rows = Vector::Zero(n), cols = Vector::Zero(m);
    for (const auto& e : sol.plan) {
      EXPECT_GT(e.mass, 0.0);
      rows[static_cast<Eigen::Index>(e.source)] += e.mass;
      cols[static_cast<Eigen::Index>(e.target)] += e.mass;
    }
    EXPECT_LT((rows - a).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((cols - b).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(NetworkSimplex, AgreesWithHungarianOnUniformInstances) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 30; ++trial) {
    int n = 10 + trial;
    Matrix x = oracle::random_points(rng, n, 3), y = oracle::random_points(rng, n, 3);
    Matrix c = costs(x, y);
    auto match = solvers::hungarian(c);
    double h = 0.0;
    for (int i = 0; i < n; ++i) h += c(i, match[static_cast<std::size_t>(i)]);
    auto sol = solvers::network_simplex(Vector::Constant(n, 1.0 / n), Vector::Constant(n, 1.0 / n), c);
    EXPECT_NEAR(sol.cost, h / n, 1e-10);
  }
}

TEST(NetworkSimplex, DegenerateEqualCosts) {
  Matrix c = Matrix::Zero(4, 4);
  auto sol = solvers::network_simplex(Vector::Constant(4, 0.25), Vector::Constant(4, 0.25), c);
  EXPECT_EQ(sol.cost, 0.0);
}

TEST(LpOracle, SelfCheckAgainstPermutations) {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 50; ++trial) {
    int n = 1 + trial % 5;
    Matrix x = oracle::random_points(rng, n, 2), y = oracle::random_points(rng, n, 2);
    Vector w = Vector::Constant(n, 1.0 / n);
    EXPECT_NEAR(oracle::lp_transport_cost(x, w, y, w), oracle::assignment_cost(x, y), 1e-10);
  }
}

TEST(Simplex, TransportationMatchesOracle) {
  std::mt19937_64 rng(16);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    int m = 1 + trial % 5, n = 1 + (trial / 5) % 6;
    Matrix x = oracle::random_points(rng, m, 2), y = oracle::random_points(rng, n, 2);
    Vector wx(m), wy(n);
    for (int i = 0; i < m; ++i) wx[i] = u(rng);
    for (int j = 0; j < n; ++j) wy[j] = u(rng);
    wx /= wx.sum();
    wy /= wy.sum();
    // all m + n marginal rows, one of them redundant
    Matrix a = Matrix::Zero(m + n, m * n);
    Vector c(m * n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) {
        a(i, i * n + j) = 1.0;
        a(m + j, i * n + j) = 1.0;
        c[i * n + j] = (x.row(i) - y.row(j)).squaredNorm();
      }
    Vector b(m + n);
    b << wx, wy;
    auto sol = solvers::simplex(a, b, c);
    EXPECT_NEAR(sol.cost, oracle::lp_transport_cost(x, wx, y, wy), 1e-10) << trial;
    EXPECT_LT((a * sol.x - b).lpNorm<Eigen::Infinity>(), 1e-10);
    EXPECT_GE(sol.x.minCoeff(), 0.0);
  }
}

TEST(Simplex, InfeasibleRejected) {
  Matrix a{{1.0, 1.0}, {1.0, 1.0}};
  EXPECT_THROW(solvers::simplex(a, Vector{{1.0, 2.0}}, Vector{{1.0, 1.0}}), Error);
}

}  // namespace
